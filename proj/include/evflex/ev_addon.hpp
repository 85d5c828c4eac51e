#pragma once

#include <string>
#include <vector>

#include "evflex/fleet_profile.hpp"
#include "evflex/lp_core.hpp"
#include "evflex/time_structure.hpp"

namespace evflex {

enum class ChargingScheme { Passive, Smart, V2G };
const char* scheme_name(ChargingScheme s);
ChargingScheme parse_scheme(const std::string& s);

constexpr double kDtHours = 1.0;

// Fleet data for one (area, vehicle class, model year), sliced to the
// representative hours and paired with its degradation economics.
struct EvBlockInputs {
  std::string area;
  VehicleClass vehicle_class;
  double stock_count = 0.0;
  double fleet_capacity_mwh = 0.0;  // stock x usable pack size
  std::vector<double> inflexible_load_mw;
  std::vector<double> passive_load_mw;
  std::vector<double> passive_soc_mwh;
  std::vector<double> soc_injection_mwh;
  std::vector<double> trip_withdrawal_mwh;
  std::vector<double> soc_max_mwh;
  std::vector<double> soc_min_mwh;
  std::vector<double> available_count;
  std::vector<double> hour_weight;  // operational weight per flat hour
  TimeStructure time;

  int hours() const { return static_cast<int>(soc_max_mwh.size()); }
  double charger_cap_mw(int t) const {
    return vehicle_class.charger_power_kw * available_count[t] / 1000.0;
  }
};

EvBlockInputs slice_fleet_profile(const FleetProfile& profile, const TimeStructure& time);

// LP footprint of one fleet under one charging scheme. Passive blocks carry
// no variables; smart blocks add flexible charging and the fleet SOC; V2G
// blocks additionally add discharging.
struct EvAddonBlock {
  ChargingScheme scheme = ChargingScheme::Passive;
  std::string area;
  std::string class_id;
  std::vector<int> flex_charge;    // var per flat hour (MW), empty for passive
  std::vector<int> v2g_discharge;  // var per flat hour (MW), V2G only
  std::vector<int> vsoc;           // var per flat hour (MWh)
  std::vector<int> soc_rows;
  std::vector<int> charger_rows;
  std::vector<double> fixed_demand_mw;  // parameter charging entering the balance
  double objective_constant_eur = 0.0;  // degradation cost of the parameter part
  double replacement_cost_eur = 0.0;
};

// --- Degradation economics (per model year fleet) -------------------------

// Replacing the installed (oversized) pack of the whole fleet.
double replacement_cost(double fleet_capacity_mwh, const VehicleClass& cls);

// Cost of charging `charged_mwh` within one hour at fleet bound soc_max_mwh.
double cycle_degradation_cost(double charged_mwh, double replacement_eur,
                              const DegradationParams& deg, double soc_max_mwh);

// Calendar ageing for one hour at the given fleet SOC; the constant part is
// scaled by the plugged-in share of the fleet.
double calendar_degradation_cost(double soc_mwh, double replacement_eur,
                                 const DegradationParams& deg, double soc_max_mwh,
                                 double plugged_share = 1.0);

// linear coefficients used to attach the formulas to LP variables
double cycle_cost_per_mwh(double replacement_eur, const DegradationParams& deg,
                          double soc_max_mwh);
double calendar_cost_per_mwh(double replacement_eur, const DegradationParams& deg,
                             double soc_max_mwh);
double calendar_cost_constant(double replacement_eur, const DegradationParams& deg,
                              double plugged_share);

// --- Block builders --------------------------------------------------------

EvAddonBlock build_passive(lp::LinearProgram& model, const EvBlockInputs& in);
EvAddonBlock build_smart(lp::LinearProgram& model, const EvBlockInputs& in);
EvAddonBlock build_v2g(lp::LinearProgram& model, const EvBlockInputs& in);
EvAddonBlock build_block(lp::LinearProgram& model, const EvBlockInputs& in, ChargingScheme s);

// Checks whether the passive charging schedule is a feasible point of the
// smart-charging rows (flex = passive - inflexible, SOC following the passive
// trajectory, cyclic closure per period). When it passes, the optimal smart
// objective can only be at or below the passive one.
struct SmartFeasibilityReport {
  bool feasible = true;
  double max_violation = 0.0;
  std::string first_failure;
};
SmartFeasibilityReport passive_smart_feasibility(const EvBlockInputs& in, double tol = 1e-6);

}  // namespace evflex
