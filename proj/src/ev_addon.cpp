#include "evflex/ev_addon.hpp"

#include <cmath>

#include "evflex/errors.hpp"

namespace evflex {

const char* scheme_name(ChargingScheme s) {
  switch (s) {
    case ChargingScheme::Passive: return "PC";
    case ChargingScheme::Smart: return "SC";
    case ChargingScheme::V2G: return "V2G";
  }
  return "?";
}

ChargingScheme parse_scheme(const std::string& s) {
  if (s == "PC" || s == "passive") return ChargingScheme::Passive;
  if (s == "SC" || s == "smart") return ChargingScheme::Smart;
  if (s == "V2G" || s == "v2g") return ChargingScheme::V2G;
  throw ConfigError("unknown charging scheme '" + s + "' (PC, SC or V2G)");
}

EvBlockInputs slice_fleet_profile(const FleetProfile& profile, const TimeStructure& time) {
  time.validate();
  EvBlockInputs in;
  in.area = profile.area;
  in.vehicle_class = profile.vehicle_class;
  in.stock_count = profile.stock_count;
  in.fleet_capacity_mwh = profile.stock_count * profile.vehicle_class.battery_capacity_kwh / 1000.0;
  in.inflexible_load_mw = time.slice(profile.inflexible_load_mw);
  in.passive_load_mw = time.slice(profile.passive_load_mw);
  in.passive_soc_mwh = time.slice(profile.passive_soc_mwh);
  in.soc_injection_mwh = time.slice(profile.soc_injection_mwh);
  in.trip_withdrawal_mwh = time.slice(profile.trip_withdrawal_mwh);
  in.soc_max_mwh = time.slice(profile.soc_max_mwh);
  in.soc_min_mwh = time.slice(profile.soc_min_mwh);
  in.available_count = time.slice(profile.available_count);
  in.time = time;
  in.hour_weight.clear();
  in.hour_weight.reserve(time.total_hours());
  for (const auto& p : time.periods)
    for (int k = 0; k < p.hours; ++k) in.hour_weight.push_back(p.weight);
  return in;
}

double replacement_cost(double fleet_capacity_mwh, const VehicleClass& cls) {
  // per-kWh pack price, installed capacity includes the oversize margin
  double eur_per_mwh = cls.battery_cost_eur_per_kwh * 1000.0;
  return eur_per_mwh * cls.degradation.oversize_factor * fleet_capacity_mwh;
}

double cycle_cost_per_mwh(double replacement_eur, const DegradationParams& deg,
                          double soc_max_mwh) {
  if (soc_max_mwh <= 0.0) return 0.0;
  return deg.cyc_factor * (replacement_eur / deg.lifetime_fraction) /
         (deg.oversize_factor * soc_max_mwh);
}

double cycle_degradation_cost(double charged_mwh, double replacement_eur,
                              const DegradationParams& deg, double soc_max_mwh) {
  if (charged_mwh != 0.0 && soc_max_mwh <= 0.0)
    throw ModelError("cycle degradation: charging against zero fleet capacity");
  return cycle_cost_per_mwh(replacement_eur, deg, soc_max_mwh) * charged_mwh;
}

double calendar_cost_per_mwh(double replacement_eur, const DegradationParams& deg,
                             double soc_max_mwh) {
  if (soc_max_mwh <= 0.0) return 0.0;
  return deg.cal_flex * (replacement_eur / deg.lifetime_fraction) /
         (deg.oversize_factor * soc_max_mwh);
}

double calendar_cost_constant(double replacement_eur, const DegradationParams& deg,
                              double plugged_share) {
  return deg.cal_const * (replacement_eur / deg.lifetime_fraction) * plugged_share;
}

double calendar_degradation_cost(double soc_mwh, double replacement_eur,
                                 const DegradationParams& deg, double soc_max_mwh,
                                 double plugged_share) {
  if (soc_mwh != 0.0 && soc_max_mwh <= 0.0)
    throw ModelError("calendar degradation: stored energy against zero fleet capacity");
  if (plugged_share <= 0.0) return 0.0;
  return calendar_cost_constant(replacement_eur, deg, plugged_share) +
         calendar_cost_per_mwh(replacement_eur, deg, soc_max_mwh) * soc_mwh;
}

namespace {

void check_guards(const EvBlockInputs& in) {
  for (int t = 0; t < in.hours(); ++t) {
    if (in.soc_max_mwh[t] <= 0.0 &&
        (in.inflexible_load_mw[t] > 1e-9 || in.passive_load_mw[t] > 1e-9))
      throw ModelError("fleet " + in.area + "/" + in.vehicle_class.id() + " hour " +
                       std::to_string(t) + ": charging against zero fleet capacity");
    if (in.soc_min_mwh[t] > in.soc_max_mwh[t] + 1e-9)
      throw ModelError("fleet " + in.area + "/" + in.vehicle_class.id() + " hour " +
                       std::to_string(t) + ": SOC bounds inverted");
  }
}

double plugged_share(const EvBlockInputs& in, int t) {
  if (in.stock_count <= 0.0) return 0.0;
  return in.available_count[t] / in.stock_count;
}

}  // namespace

EvAddonBlock build_passive(lp::LinearProgram&, const EvBlockInputs& in) {
  check_guards(in);
  const DegradationParams& deg = in.vehicle_class.degradation;
  EvAddonBlock b;
  b.scheme = ChargingScheme::Passive;
  b.area = in.area;
  b.class_id = in.vehicle_class.id();
  b.replacement_cost_eur = replacement_cost(in.fleet_capacity_mwh, in.vehicle_class);
  b.fixed_demand_mw = in.passive_load_mw;
  for (int t = 0; t < in.hours(); ++t) {
    double w = in.hour_weight[t];
    b.objective_constant_eur +=
        w * cycle_degradation_cost(in.passive_load_mw[t] * kDtHours, b.replacement_cost_eur, deg,
                                   in.soc_max_mwh[t]);
    b.objective_constant_eur +=
        w * calendar_degradation_cost(in.passive_soc_mwh[t], b.replacement_cost_eur, deg,
                                      in.soc_max_mwh[t], plugged_share(in, t));
  }
  return b;
}

namespace {

EvAddonBlock build_flexible(lp::LinearProgram& model, const EvBlockInputs& in, bool with_v2g) {
  check_guards(in);
  const VehicleClass& cls = in.vehicle_class;
  const DegradationParams& deg = cls.degradation;
  const double eta = cls.charge_efficiency;
  const int T = in.hours();

  EvAddonBlock b;
  b.scheme = with_v2g ? ChargingScheme::V2G : ChargingScheme::Smart;
  b.area = in.area;
  b.class_id = cls.id();
  b.replacement_cost_eur = replacement_cost(in.fleet_capacity_mwh, cls);
  b.fixed_demand_mw = in.inflexible_load_mw;
  b.flex_charge.resize(T);
  b.vsoc.resize(T);
  if (with_v2g) b.v2g_discharge.resize(T);
  b.soc_rows.resize(T);
  b.charger_rows.resize(T);

  const std::string tag = in.area + "." + b.class_id;

  for (int t = 0; t < T; ++t) {
    double w = in.hour_weight[t];
    double cyc = cycle_cost_per_mwh(b.replacement_cost_eur, deg, in.soc_max_mwh[t]);
    double cal = calendar_cost_per_mwh(b.replacement_cost_eur, deg, in.soc_max_mwh[t]);
    b.flex_charge[t] = model.add_variable("evflex[" + tag + "][" + std::to_string(t) + "]", 0.0,
                                          lp::kInf, w * cyc * kDtHours);
    b.vsoc[t] = model.add_variable("evsoc[" + tag + "][" + std::to_string(t) + "]",
                                   in.soc_min_mwh[t], in.soc_max_mwh[t], w * cal);
    if (with_v2g)
      b.v2g_discharge[t] = model.add_variable("evv2g[" + tag + "][" + std::to_string(t) + "]",
                                              0.0, lp::kInf, 0.0);
    // the parameter parts of the degradation formulas
    b.objective_constant_eur +=
        w * cyc * in.inflexible_load_mw[t] * kDtHours +
        w * calendar_cost_constant(b.replacement_cost_eur, deg, plugged_share(in, t));
  }

  // storage balance with cyclic closure per representative period
  int flat = 0;
  for (std::size_t p = 0; p < in.time.periods.size(); ++p) {
    int hours = in.time.periods[p].hours;
    for (int k = 0; k < hours; ++k) {
      int t = flat + k;
      int prev = flat + (k + hours - 1) % hours;
      double rhs = in.soc_injection_mwh[t] + eta * in.inflexible_load_mw[t] * kDtHours -
                   in.trip_withdrawal_mwh[t];
      int row = model.add_row("ev_soc[" + tag + "][" + std::to_string(t) + "]", lp::RowSense::eq,
                              rhs);
      model.add_entry(row, b.vsoc[t], 1.0);
      model.add_entry(row, b.vsoc[prev], -1.0);
      model.add_entry(row, b.flex_charge[t], -eta * kDtHours);
      if (with_v2g) model.add_entry(row, b.v2g_discharge[t], kDtHours / eta);
      b.soc_rows[t] = row;
    }
    flat += hours;
  }

  // shared charger capacity
  for (int t = 0; t < T; ++t) {
    double cap = in.charger_cap_mw(t) - in.inflexible_load_mw[t];
    if (cap < -1e-9)
      throw ModelError("fleet " + tag + " hour " + std::to_string(t) +
                       ": inflexible load exceeds charger capacity");
    if (cap < 0.0) cap = 0.0;
    int row = model.add_row("ev_charger[" + tag + "][" + std::to_string(t) + "]",
                            lp::RowSense::le, cap);
    model.add_entry(row, b.flex_charge[t], 1.0);
    if (with_v2g) model.add_entry(row, b.v2g_discharge[t], 1.0);
    b.charger_rows[t] = row;
  }
  return b;
}

}  // namespace

EvAddonBlock build_smart(lp::LinearProgram& model, const EvBlockInputs& in) {
  return build_flexible(model, in, false);
}

EvAddonBlock build_v2g(lp::LinearProgram& model, const EvBlockInputs& in) {
  return build_flexible(model, in, true);
}

EvAddonBlock build_block(lp::LinearProgram& model, const EvBlockInputs& in, ChargingScheme s) {
  switch (s) {
    case ChargingScheme::Passive: return build_passive(model, in);
    case ChargingScheme::Smart: return build_smart(model, in);
    case ChargingScheme::V2G: return build_v2g(model, in);
  }
  throw ConfigError("unknown charging scheme");
}

SmartFeasibilityReport passive_smart_feasibility(const EvBlockInputs& in, double tol) {
  SmartFeasibilityReport rep;
  auto record = [&rep](double violation, const std::string& what) {
    if (violation > rep.max_violation) rep.max_violation = violation;
    if (violation > 0 && rep.feasible) {
      rep.feasible = false;
      rep.first_failure = what;
    }
  };
  const double eta = in.vehicle_class.charge_efficiency;
  int flat = 0;
  for (const auto& period : in.time.periods) {
    int hours = period.hours;
    // cyclic closure: start the trajectory at the period's final passive SOC
    double vsoc = in.passive_soc_mwh[flat + hours - 1];
    double start = vsoc;
    for (int k = 0; k < hours; ++k) {
      int t = flat + k;
      double flex = in.passive_load_mw[t] - in.inflexible_load_mw[t];
      record(std::max(0.0, -flex - tol), "flexible share negative at hour " + std::to_string(t));
      record(std::max(0.0, in.passive_load_mw[t] - in.charger_cap_mw(t) - tol),
             "charger capacity exceeded at hour " + std::to_string(t));
      vsoc += in.soc_injection_mwh[t] + eta * in.passive_load_mw[t] * kDtHours -
              in.trip_withdrawal_mwh[t];
      record(std::max(0.0, in.soc_min_mwh[t] - vsoc - tol),
             "SOC below bound at hour " + std::to_string(t));
      record(std::max(0.0, vsoc - in.soc_max_mwh[t] - tol),
             "SOC above bound at hour " + std::to_string(t));
    }
    record(std::fabs(vsoc - start) > tol ? std::fabs(vsoc - start) : 0.0,
           "cyclic closure fails for period " + period.name);
    flat += hours;
  }
  return rep;
}

}  // namespace evflex
