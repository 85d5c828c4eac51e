#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evflex/ev_addon.hpp"
#include "evflex/lp_core.hpp"
#include "evflex/time_structure.hpp"

namespace evflex {

struct Region {
  std::string id;
  std::vector<double> demand_mw;  // per flat representative hour
  double co2_price_eur_per_t = 0.0;
  std::optional<double> co2_cap_t;  // optional yearly emission cap
};

enum class TechKind { thermal, vre, nuclear, hydro_run };
TechKind parse_tech_kind(const std::string& s);
const char* tech_kind_name(TechKind k);

struct Technology {
  std::string id;
  TechKind kind = TechKind::thermal;
  double fuel_cost_eur_per_mwh = 0.0;  // per MWh of fuel
  double efficiency = 1.0;
  double emission_t_per_mwh_fuel = 0.0;
  double vom_eur_per_mwh = 0.0;
  double fom_eur_per_mw_yr = 0.0;
  double capex_eur_per_mw_yr = 0.0;  // annualized investment cost
  bool investable = false;

  bool uses_profile() const { return kind == TechKind::vre || kind == TechKind::hydro_run; }
  double marginal_cost(double co2_price) const {
    return fuel_cost_eur_per_mwh / efficiency + vom_eur_per_mwh +
           co2_price * emission_t_per_mwh_fuel / efficiency;
  }
  void validate() const;
};

struct BatteryParams {
  double energy_capex_eur_per_mwh_yr = 0.0;
  double power_capex_eur_per_mw_yr = 0.0;
  double round_trip_efficiency = 0.9;
  bool investable = true;
};

struct RegionBattery {
  double base_energy_mwh = 0.0;
  double base_power_mw = 0.0;
  double carried_energy_mwh = 0.0;
  double carried_power_mw = 0.0;
  double energy() const { return base_energy_mwh + carried_energy_mwh; }
  double power() const { return base_power_mw + carried_power_mw; }
};

struct TransmissionLink {
  std::string from, to;
  double base_ntc_mw = 0.0;     // symmetric, both directions
  double carried_ntc_mw = 0.0;  // endogenous expansion carried between years
  double expansion_capex_eur_per_mw_yr = 0.0;
  int expandable_from_year = 2040;
  double loss_share = 0.02;
  double ntc() const { return base_ntc_mw + carried_ntc_mw; }
};

struct Retirement {
  std::string region, tech;
  int year = 0;
  double mw = 0.0;
};

// Everything one model year needs: capacities split into the exogenous base
// and the capacity carried over from earlier investment rounds.
struct SystemInstance {
  int year = 2020;
  TimeStructure time;
  std::vector<Region> regions;
  std::vector<Technology> technologies;
  std::vector<std::vector<double>> base_existing_mw;  // [region][tech]
  std::vector<std::vector<double>> carried_mw;        // [region][tech]
  std::vector<std::vector<std::vector<double>>> vre_profile;  // [region][tech][t]
  BatteryParams battery;
  std::vector<RegionBattery> region_battery;  // [region]
  std::vector<TransmissionLink> links;
  std::vector<EvBlockInputs> fleets;  // per (region, vehicle class)

  int region_index(const std::string& id) const;
  int tech_index(const std::string& id) const;
  double existing_mw(int r, int g) const { return base_existing_mw[r][g] + carried_mw[r][g]; }
  void validate() const;
};

// The assembled LP plus the variable/row index tables needed to read the
// solution back out.
struct AssembledModel {
  lp::LinearProgram model;
  std::vector<std::vector<std::vector<int>>> gen;  // [r][g][t]
  std::vector<std::vector<int>> invest_mw;         // [r][g], -1 if not investable
  std::vector<std::vector<int>> balance_rows;      // [r][t]
  std::vector<std::vector<int>> bat_charge, bat_discharge, bat_soc;  // [r][t]
  std::vector<int> bat_invest_energy, bat_invest_power;              // [r]
  std::vector<std::vector<int>> flow_fwd, flow_bwd;                  // [link][t]
  std::vector<int> link_expand;                                      // [link]
  std::vector<EvAddonBlock> ev_blocks;
  bool has_battery(int r) const { return !bat_soc[r].empty(); }
};

AssembledModel assemble(const SystemInstance& sys, ChargingScheme scheme, bool trans_expansion);

struct YearSolution {
  int year = 0;
  ChargingScheme scheme = ChargingScheme::Passive;
  bool trans_expansion = false;
  double objective_eur = 0.0;
  // cost decomposition; sums to the objective
  double capex_eur = 0.0;
  double fixed_om_eur = 0.0;
  double variable_fuel_eur = 0.0;  // fuel + variable O&M + CO2 payments
  double transmission_capex_eur = 0.0;
  double ev_degradation_eur = 0.0;
  double battery_invest_eur = 0.0;  // contained in capex_eur

  std::vector<std::vector<double>> generation_mwh_yr;  // [r][g], weighted to the year
  std::vector<std::vector<double>> invested_mw;        // [r][g]
  std::vector<double> battery_invest_energy_mwh;       // [r]
  std::vector<double> battery_invest_power_mw;         // [r]
  std::vector<double> link_expansion_mw;               // [link]
  std::vector<double> emissions_t;                     // [r]
  std::vector<std::vector<double>> price_eur_mwh;      // [r][t] = dual / weight
  std::vector<std::vector<double>> raw_dual_eur;       // [r][t]
  std::vector<std::vector<double>> consumption_mw;     // [r][t] demand + EV charging
  std::vector<std::vector<double>> ev_charge_mw;       // [r][t]
  std::vector<std::vector<double>> ev_discharge_mw;    // [r][t]
  std::int64_t lp_iterations = 0;

  double total_consumption_weighted_mwh(const TimeStructure& time, int r) const;
};

struct SolveOptions {
  lp::Tolerances tolerances;
  std::string dump_lp_path;  // when set, the assembled model is written there
  bool verify = true;        // re-check feasibility, duals and the duality gap
};

// Assembles and solves one model year. Throws ModelError with the most
// violated balance rows when the instance is infeasible.
YearSolution solve_year(const SystemInstance& sys, ChargingScheme scheme, bool trans_expansion,
                        const SolveOptions& opts = {});

// Investment handover between consecutive model years: carried capacities
// grow by the solved investments, then scheduled retirements are applied.
SystemInstance carry_forward(const YearSolution& sol, const SystemInstance& solved,
                             SystemInstance next, const std::vector<Retirement>& retirements = {});

}  // namespace evflex
