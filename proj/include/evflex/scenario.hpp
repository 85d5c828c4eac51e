#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "evflex/fleet_profile.hpp"
#include "evflex/system_lp.hpp"
#include "evflex/trip_model.hpp"

namespace evflex {

// Parsed run configuration: trip synthesis, fleets, and the system catalogue
// with per-year tables. Loaded from one JSON file; all paths are resolved
// relative to that file.
struct FleetSpec {
  std::string region;
  VehicleKind kind = VehicleKind::BEV;
  std::map<int, double> stock_by_year;
};

struct RegionConfig {
  std::string id;
  std::string demand_csv;
  std::map<int, double> demand_scale;
  std::map<int, double> co2_price;
};

struct TechnologyConfig {
  Technology base;                                  // year-independent fields
  std::map<int, double> capex_by_year;              // overrides base.capex
  std::map<std::string, std::string> profile_csv;   // region -> path (vre/hydro)
  std::map<std::string, std::map<int, double>> existing_mw;  // region -> year -> MW
};

struct BatteryConfig {
  std::map<int, double> energy_capex, power_capex;
  double round_trip_efficiency = 0.9;
  bool investable = true;
  std::map<std::string, double> existing_energy_mwh, existing_power_mw;
};

struct LinkConfig {
  std::string from, to;
  double ntc_mw = 0.0;
  std::map<int, double> expansion_capex;
  int expandable_from_year = 2040;
  double loss_share = 0.02;
};

struct RunConfig {
  std::uint64_t seed = 1;
  std::vector<int> years;
  TimeStructure time;
  TripSynthesisSpec trip_synthesis;
  std::string trip_csv;  // when set, loaded instead of synthesizing
  double no_trip_probability = 0.15;
  int fleet_sample_size = 1000;
  std::vector<FleetSpec> fleets;
  // optional per-kind-and-year overrides applied on the bundled class data
  std::map<std::string, double> vehicle_class_overrides;  // "<field>" -> value
  std::vector<RegionConfig> regions;
  std::vector<TechnologyConfig> technologies;
  BatteryConfig battery;
  std::vector<LinkConfig> links;
  std::vector<Retirement> retirements;
  std::string base_dir;  // directory of the config file

  // full-year series loaded on demand and cached
  mutable std::map<std::string, std::vector<double>> csv_cache;
  const std::vector<double>& load_series(const std::string& relative_path) const;
};

RunConfig load_run_config(const std::string& path);

// The six canonical scenarios combine a scheme with the expansion flag.
struct ScenarioSpec {
  std::string name;  // defaults to "<scheme>_<noTransEx|TransEx>"
  ChargingScheme scheme = ChargingScheme::Passive;
  bool transmission_expansion = false;
  std::vector<int> years;     // empty: take from run config
  std::uint64_t seed = 0;     // 0: take from run config
  std::string config_path;

  std::string canonical_name() const;
  static ScenarioSpec from_json_file(const std::string& path);
};

// Profiles per (region, vehicle kind, model year); scheme-independent, so one
// set serves all six scenarios of a run.
struct FleetSet {
  std::map<std::string, FleetProfile> profiles;  // key: region|kind|year
  static std::string key(const std::string& region, VehicleKind kind, int year);
};

VehicleClass fixture_vehicle_class(const RunConfig& cfg, VehicleKind kind, int year);
FleetSet build_fleets(const RunConfig& cfg, std::uint64_t seed,
                      const std::string& cache_dir = "");

// Bundled national stock projections (thousand vehicles), keyed by country
// and model year. Configs may reference these instead of explicit counts.
struct StockTable {
  std::map<std::string, std::map<int, double>> bev, phev;
  double get(const std::string& country, VehicleKind kind, int year) const;
};
StockTable load_vehicle_stocks(const std::string& csv_path);

SystemInstance make_instance(const RunConfig& cfg, int year, const FleetSet& fleets);

struct PriceStats {
  double weighted_mean_eur_mwh = 0.0;
  double std_dev_eur_mwh = 0.0;
};
PriceStats compute_price_stats(const YearSolution& sol, const TimeStructure& time, int region);

struct ScenarioResult;
// Stored per-year stats of a solved (or reloaded) scenario result.
PriceStats price_stats(const ScenarioResult& result, const std::string& region, int year);

struct ScenarioYearMetrics {
  int year = 0;
  double objective_eur = 0.0;
  double capex_eur = 0.0;
  double fixed_om_eur = 0.0;
  double variable_fuel_eur = 0.0;
  double transmission_capex_eur = 0.0;
  double ev_degradation_eur = 0.0;
  double battery_invest_eur = 0.0;
  std::map<std::string, std::map<std::string, double>> generation_mwh;  // tech -> region
  std::map<std::string, double> emissions_t;                            // region
  std::map<std::string, double> battery_invest_energy_mwh;              // region
  std::map<std::string, double> battery_invest_power_mw;                // region
  std::map<std::string, double> link_expansion_mw;                      // "from-to"
  std::map<std::string, PriceStats> price_stats;                        // region
};

struct ScenarioResult {
  std::string name;
  ChargingScheme scheme = ChargingScheme::Passive;
  bool transmission_expansion = false;
  std::vector<int> years;
  std::vector<std::string> region_ids, tech_ids;
  std::vector<ScenarioYearMetrics> per_year;
  // in-memory only; empty when the result was read back from a summary file
  std::vector<YearSolution> solutions;
  TimeStructure time;

  double total_cost_eur() const;
  double total_battery_invest_eur() const;
  double accumulated_emissions_t(const std::string& region) const;
  const ScenarioYearMetrics& metrics_for(int year) const;
};

// Sequential solve over the years with investment carry-over.
ScenarioResult run_scenario(const RunConfig& cfg, const FleetSet& fleets, ChargingScheme scheme,
                            bool trans_expansion, const std::string& name = "",
                            const std::string& dump_lp_dir = "");
ScenarioResult run_scenario(const ScenarioSpec& spec);

// Per-metric differences, other minus base.
struct DeltaReport {
  std::string base_name, other_name;
  std::map<std::string, double> cost_category_eur;  // category -> delta
  double total_cost_eur = 0.0;
  double battery_invest_eur = 0.0;
  std::map<std::string, double> generation_mwh;  // tech -> delta (all regions)
  std::map<std::string, double> emissions_t;     // region -> delta
  std::map<std::string, double> price_std;       // region -> delta (final year)
};
DeltaReport compare(const ScenarioResult& base, const ScenarioResult& other);

// Scenario directory: per-year prices/dispatch/investments/emissions CSVs
// plus summary.json.
void write_scenario_outputs(const ScenarioResult& result, const std::string& out_dir);
ScenarioResult read_scenario_summary(const std::string& summary_json_path);

// Figure-style tables across scenarios plus delta files against the matching
// passive base case.
void write_report(const std::vector<ScenarioResult>& results, const std::string& out_dir);
void write_delta_csv(const DeltaReport& delta, const std::string& path);

}  // namespace evflex
