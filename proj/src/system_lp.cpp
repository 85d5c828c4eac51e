#include "evflex/system_lp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "evflex/errors.hpp"

namespace evflex {

TechKind parse_tech_kind(const std::string& s) {
  if (s == "thermal") return TechKind::thermal;
  if (s == "vre") return TechKind::vre;
  if (s == "nuclear") return TechKind::nuclear;
  if (s == "hydro-run" || s == "hydro_run") return TechKind::hydro_run;
  throw ConfigError("unknown technology kind '" + s + "'");
}

const char* tech_kind_name(TechKind k) {
  switch (k) {
    case TechKind::thermal: return "thermal";
    case TechKind::vre: return "vre";
    case TechKind::nuclear: return "nuclear";
    case TechKind::hydro_run: return "hydro-run";
  }
  return "?";
}

void Technology::validate() const {
  if (efficiency <= 0.0 || efficiency > 1.0)
    throw ConfigError("technology " + id + ": efficiency must be in (0,1]");
  if (fuel_cost_eur_per_mwh < 0 || emission_t_per_mwh_fuel < 0 || vom_eur_per_mwh < 0 ||
      fom_eur_per_mw_yr < 0 || capex_eur_per_mw_yr < 0)
    throw ConfigError("technology " + id + ": cost data must be non-negative");
}

int SystemInstance::region_index(const std::string& id) const {
  for (std::size_t r = 0; r < regions.size(); ++r)
    if (regions[r].id == id) return static_cast<int>(r);
  throw ConfigError("unknown region '" + id + "'");
}

int SystemInstance::tech_index(const std::string& id) const {
  for (std::size_t g = 0; g < technologies.size(); ++g)
    if (technologies[g].id == id) return static_cast<int>(g);
  throw ConfigError("unknown technology '" + id + "'");
}

void SystemInstance::validate() const {
  time.validate();
  const int T = time.total_hours();
  if (regions.empty()) throw ConfigError("system instance has no regions");
  for (const Region& r : regions) {
    if (static_cast<int>(r.demand_mw.size()) != T)
      throw ConfigError("region " + r.id + ": demand series length mismatch");
    for (double d : r.demand_mw)
      if (d < 0) throw ConfigError("region " + r.id + ": negative demand");
  }
  for (const Technology& g : technologies) g.validate();
  if (base_existing_mw.size() != regions.size() || carried_mw.size() != regions.size())
    throw ConfigError("capacity tables do not match the region set");
  for (std::size_t r = 0; r < regions.size(); ++r) {
    if (base_existing_mw[r].size() != technologies.size() ||
        carried_mw[r].size() != technologies.size())
      throw ConfigError("capacity tables do not match the technology set");
    for (std::size_t g = 0; g < technologies.size(); ++g) {
      if (base_existing_mw[r][g] < 0 || carried_mw[r][g] < 0)
        throw ConfigError("negative capacity for " + technologies[g].id + " in " + regions[r].id);
      bool present = technologies[g].investable || base_existing_mw[r][g] + carried_mw[r][g] > 0;
      if (technologies[g].uses_profile() && present) {
        if (vre_profile.size() != regions.size() ||
            vre_profile[r].size() != technologies.size() ||
            static_cast<int>(vre_profile[r][g].size()) != T)
          throw ConfigError("missing capacity-factor profile for " + technologies[g].id + " in " +
                            regions[r].id);
        for (double v : vre_profile[r][g])
          if (v < 0.0 || v > 1.0)
            throw ConfigError("capacity factor outside [0,1] for " + technologies[g].id);
      }
    }
  }
  if (region_battery.size() != regions.size())
    throw ConfigError("battery table does not match the region set");
  if (battery.round_trip_efficiency <= 0 || battery.round_trip_efficiency > 1)
    throw ConfigError("battery round-trip efficiency must be in (0,1]");
  for (const TransmissionLink& l : links) {
    region_index(l.from);
    region_index(l.to);
    if (l.ntc() < 0 || l.loss_share < 0 || l.loss_share >= 1)
      throw ConfigError("link " + l.from + "-" + l.to + ": bad NTC or loss");
  }
  for (const EvBlockInputs& f : fleets) {
    region_index(f.area);
    if (f.hours() != T)
      throw ConfigError("fleet " + f.area + "/" + f.vehicle_class.id() +
                        ": series length mismatch");
  }
}

namespace {

bool fleet_is_zero(const EvBlockInputs& f) {
  if (f.stock_count == 0.0) return true;
  for (const std::vector<double>* s :
       {&f.soc_max_mwh, &f.passive_load_mw, &f.inflexible_load_mw, &f.available_count})
    for (double v : *s)
      if (v != 0.0) return false;
  return true;
}

}  // namespace

AssembledModel assemble(const SystemInstance& sys, ChargingScheme scheme, bool trans_expansion) {
  sys.validate();
  const int R = static_cast<int>(sys.regions.size());
  const int G = static_cast<int>(sys.technologies.size());
  const int L = static_cast<int>(sys.links.size());
  const int T = sys.time.total_hours();

  std::vector<double> w(T);
  {
    int flat = 0;
    for (const auto& p : sys.time.periods)
      for (int k = 0; k < p.hours; ++k) w[flat++] = p.weight;
  }

  AssembledModel am;
  lp::LinearProgram& m = am.model;

  // balance rows first: supply - demand-side variables = exogenous demand
  am.balance_rows.assign(R, std::vector<int>(T, -1));
  for (int r = 0; r < R; ++r)
    for (int t = 0; t < T; ++t)
      am.balance_rows[r][t] = m.add_row(
          "bal[" + sys.regions[r].id + "][" + std::to_string(t) + "]", lp::RowSense::eq,
          sys.regions[r].demand_mw[t]);

  // generation and investment
  am.gen.assign(R, std::vector<std::vector<int>>(G, std::vector<int>(T, -1)));
  am.invest_mw.assign(R, std::vector<int>(G, -1));
  for (int r = 0; r < R; ++r) {
    const Region& region = sys.regions[r];
    for (int g = 0; g < G; ++g) {
      const Technology& tech = sys.technologies[g];
      double existing = sys.existing_mw(r, g);
      bool investable = tech.investable;
      if (!investable && existing <= 0.0) continue;  // technology absent here
      double mc = tech.marginal_cost(region.co2_price_eur_per_t);
      int inv = -1;
      if (investable) {
        inv = m.add_variable("inv[" + tech.id + "][" + region.id + "]", 0.0, lp::kInf,
                             tech.capex_eur_per_mw_yr + tech.fom_eur_per_mw_yr);
        am.invest_mw[r][g] = inv;
      }
      // existing capacity pays fixed O&M regardless of dispatch
      m.add_objective_offset(tech.fom_eur_per_mw_yr * existing);
      for (int t = 0; t < T; ++t) {
        double av = tech.uses_profile() ? sys.vre_profile[r][g][t] : 1.0;
        double cap = existing * av;
        int var;
        if (investable) {
          var = m.add_variable("g[" + tech.id + "][" + region.id + "][" + std::to_string(t) + "]",
                               0.0, lp::kInf, mc * w[t]);
          if (av > 0.0) {
            int row = m.add_row(
                "cap[" + tech.id + "][" + region.id + "][" + std::to_string(t) + "]",
                lp::RowSense::le, cap);
            m.add_entry(row, var, 1.0);
            m.add_entry(row, inv, -av);
          } else {
            m.variable(var).upper = 0.0;
          }
        } else {
          var = m.add_variable("g[" + tech.id + "][" + region.id + "][" + std::to_string(t) + "]",
                               0.0, cap, mc * w[t]);
        }
        am.gen[r][g][t] = var;
        m.add_entry(am.balance_rows[r][t], var, 1.0);
      }
    }
    // optional yearly emission cap
    if (region.co2_cap_t.has_value()) {
      int row = m.add_row("co2cap[" + region.id + "]", lp::RowSense::le, *region.co2_cap_t);
      for (int g = 0; g < G; ++g) {
        const Technology& tech = sys.technologies[g];
        double rate = tech.emission_t_per_mwh_fuel / tech.efficiency;
        if (rate <= 0.0) continue;
        for (int t = 0; t < T; ++t)
          if (am.gen[r][g][t] >= 0) m.add_entry(row, am.gen[r][g][t], rate * w[t]);
      }
    }
  }

  // stationary batteries
  am.bat_charge.assign(R, {});
  am.bat_discharge.assign(R, {});
  am.bat_soc.assign(R, {});
  am.bat_invest_energy.assign(R, -1);
  am.bat_invest_power.assign(R, -1);
  double leg_eff = std::sqrt(sys.battery.round_trip_efficiency);
  for (int r = 0; r < R; ++r) {
    const RegionBattery& rb = sys.region_battery[r];
    bool present = sys.battery.investable || rb.energy() > 0.0 || rb.power() > 0.0;
    if (!present) continue;
    const std::string& rid = sys.regions[r].id;
    int inv_e = -1, inv_p = -1;
    if (sys.battery.investable) {
      inv_e = m.add_variable("binv_e[" + rid + "]", 0.0, lp::kInf,
                             sys.battery.energy_capex_eur_per_mwh_yr);
      inv_p = m.add_variable("binv_p[" + rid + "]", 0.0, lp::kInf,
                             sys.battery.power_capex_eur_per_mw_yr);
      am.bat_invest_energy[r] = inv_e;
      am.bat_invest_power[r] = inv_p;
    }
    am.bat_charge[r].resize(T);
    am.bat_discharge[r].resize(T);
    am.bat_soc[r].resize(T);
    for (int t = 0; t < T; ++t) {
      am.bat_charge[r][t] =
          m.add_variable("bc[" + rid + "][" + std::to_string(t) + "]", 0.0, lp::kInf, 0.0);
      am.bat_discharge[r][t] =
          m.add_variable("bd[" + rid + "][" + std::to_string(t) + "]", 0.0, lp::kInf, 0.0);
      am.bat_soc[r][t] =
          m.add_variable("bs[" + rid + "][" + std::to_string(t) + "]", 0.0, lp::kInf, 0.0);
      m.add_entry(am.balance_rows[r][t], am.bat_discharge[r][t], 1.0);
      m.add_entry(am.balance_rows[r][t], am.bat_charge[r][t], -1.0);
      for (auto [var, cap, label] :
           {std::tuple{am.bat_charge[r][t], rb.power(), "bcap"},
            std::tuple{am.bat_discharge[r][t], rb.power(), "bdcap"},
            std::tuple{am.bat_soc[r][t], rb.energy(), "becap"}}) {
        if (sys.battery.investable) {
          int row = m.add_row(std::string(label) + "[" + rid + "][" + std::to_string(t) + "]",
                              lp::RowSense::le, cap);
          m.add_entry(row, var, 1.0);
          m.add_entry(row, (label[1] == 'e') ? inv_e : inv_p, -1.0);
        } else {
          m.variable(var).upper = cap;
        }
      }
    }
    // SOC balance, cyclic per period
    int flat = 0;
    for (const auto& p : sys.time.periods) {
      for (int k = 0; k < p.hours; ++k) {
        int t = flat + k;
        int prev = flat + (k + p.hours - 1) % p.hours;
        int row = m.add_row("bsoc[" + rid + "][" + std::to_string(t) + "]", lp::RowSense::eq, 0.0);
        m.add_entry(row, am.bat_soc[r][t], 1.0);
        m.add_entry(row, am.bat_soc[r][prev], -1.0);
        m.add_entry(row, am.bat_charge[r][t], -leg_eff);
        m.add_entry(row, am.bat_discharge[r][t], 1.0 / leg_eff);
      }
      flat += p.hours;
    }
  }

  // transmission links
  am.flow_fwd.assign(L, {});
  am.flow_bwd.assign(L, {});
  am.link_expand.assign(L, -1);
  for (int l = 0; l < L; ++l) {
    const TransmissionLink& link = sys.links[l];
    int a = sys.region_index(link.from);
    int b = sys.region_index(link.to);
    bool expandable = trans_expansion && sys.year >= link.expandable_from_year;
    int exp = -1;
    if (expandable) {
      exp = m.add_variable("lexp[" + link.from + "-" + link.to + "]", 0.0, lp::kInf,
                           link.expansion_capex_eur_per_mw_yr);
      am.link_expand[l] = exp;
    }
    am.flow_fwd[l].resize(T);
    am.flow_bwd[l].resize(T);
    for (int t = 0; t < T; ++t) {
      std::string suffix = "[" + link.from + "-" + link.to + "][" + std::to_string(t) + "]";
      double cap = link.ntc();
      int fab = m.add_variable("f" + suffix, 0.0, expandable ? lp::kInf : cap, 0.0);
      int fba = m.add_variable("r" + suffix, 0.0, expandable ? lp::kInf : cap, 0.0);
      am.flow_fwd[l][t] = fab;
      am.flow_bwd[l][t] = fba;
      if (expandable) {
        int rowf = m.add_row("lcapf" + suffix, lp::RowSense::le, cap);
        m.add_entry(rowf, fab, 1.0);
        m.add_entry(rowf, exp, -1.0);
        int rowb = m.add_row("lcapb" + suffix, lp::RowSense::le, cap);
        m.add_entry(rowb, fba, 1.0);
        m.add_entry(rowb, exp, -1.0);
      }
      m.add_entry(am.balance_rows[a][t], fab, -1.0);
      m.add_entry(am.balance_rows[b][t], fab, 1.0 - link.loss_share);
      m.add_entry(am.balance_rows[b][t], fba, -1.0);
      m.add_entry(am.balance_rows[a][t], fba, 1.0 - link.loss_share);
    }
  }

  // EV fleets; all-zero fleets are skipped so the three schemes assemble the
  // exact same model when no vehicles exist
  for (const EvBlockInputs& fleet : sys.fleets) {
    if (fleet_is_zero(fleet)) continue;
    int r = sys.region_index(fleet.area);
    EvAddonBlock block = build_block(m, fleet, scheme);
    m.add_objective_offset(block.objective_constant_eur);
    for (int t = 0; t < T; ++t) {
      // parameter charging adds to the demand side of the balance
      double fixed = block.fixed_demand_mw[t];
      if (fixed != 0.0) m.row_rhs_add(am.balance_rows[r][t], fixed);
      if (!block.flex_charge.empty()) m.add_entry(am.balance_rows[r][t], block.flex_charge[t], -1.0);
      if (!block.v2g_discharge.empty())
        m.add_entry(am.balance_rows[r][t], block.v2g_discharge[t], 1.0);
    }
    am.ev_blocks.push_back(std::move(block));
  }

  return am;
}

YearSolution solve_year(const SystemInstance& sys, ChargingScheme scheme, bool trans_expansion,
                        const SolveOptions& opts) {
  AssembledModel am = assemble(sys, scheme, trans_expansion);
  if (!opts.dump_lp_path.empty()) lp::write_lp_text_file(am.model, opts.dump_lp_path);
  lp::Solution sol = lp::solve(am.model, opts.tolerances);
  if (sol.status == lp::SolveStatus::infeasible) {
    std::ostringstream msg;
    msg << "model year " << sys.year << " (" << scheme_name(scheme)
        << (trans_expansion ? ", TransEx" : ", noTransEx") << ") is infeasible;";
    msg << " most violated rows:";
    int shown = 0;
    for (const auto& [row, viol] : sol.infeasible_rows) {
      if (++shown > 5) break;
      msg << " " << am.model.row(row).name << " (" << viol << ")";
    }
    throw ModelError(msg.str());
  }
  if (sol.status == lp::SolveStatus::unbounded)
    throw ModelError("model year " + std::to_string(sys.year) +
                     " is unbounded; a free supply or missing cost is likely");
  if (sol.status != lp::SolveStatus::optimal)
    throw ModelError("solver hit the iteration limit on year " + std::to_string(sys.year));
  if (opts.verify) {
    lp::CheckReport rep = lp::verify(am.model, sol, opts.tolerances);
    if (!rep.ok)
      throw ModelError("year " + std::to_string(sys.year) + " solution failed verification: " +
                       (rep.violations.empty() ? "unknown" : rep.violations.front()));
  }

  const int R = static_cast<int>(sys.regions.size());
  const int G = static_cast<int>(sys.technologies.size());
  const int L = static_cast<int>(sys.links.size());
  const int T = sys.time.total_hours();
  std::vector<double> w(T);
  {
    int flat = 0;
    for (const auto& p : sys.time.periods)
      for (int k = 0; k < p.hours; ++k) w[flat++] = p.weight;
  }

  YearSolution out;
  out.year = sys.year;
  out.scheme = scheme;
  out.trans_expansion = trans_expansion;
  out.objective_eur = sol.objective;
  out.lp_iterations = sol.iterations;

  out.generation_mwh_yr.assign(R, std::vector<double>(G, 0.0));
  out.invested_mw.assign(R, std::vector<double>(G, 0.0));
  out.battery_invest_energy_mwh.assign(R, 0.0);
  out.battery_invest_power_mw.assign(R, 0.0);
  out.link_expansion_mw.assign(L, 0.0);
  out.emissions_t.assign(R, 0.0);
  out.price_eur_mwh.assign(R, std::vector<double>(T, 0.0));
  out.raw_dual_eur.assign(R, std::vector<double>(T, 0.0));
  out.consumption_mw.assign(R, std::vector<double>(T, 0.0));
  out.ev_charge_mw.assign(R, std::vector<double>(T, 0.0));
  out.ev_discharge_mw.assign(R, std::vector<double>(T, 0.0));

  for (int r = 0; r < R; ++r) {
    const Region& region = sys.regions[r];
    for (int g = 0; g < G; ++g) {
      const Technology& tech = sys.technologies[g];
      if (am.invest_mw[r][g] >= 0) {
        double inv = sol.x[am.invest_mw[r][g]];
        out.invested_mw[r][g] = inv;
        out.capex_eur += tech.capex_eur_per_mw_yr * inv;
        out.fixed_om_eur += tech.fom_eur_per_mw_yr * inv;
      }
      out.fixed_om_eur += tech.fom_eur_per_mw_yr * sys.existing_mw(r, g);
      double mc = tech.marginal_cost(region.co2_price_eur_per_t);
      for (int t = 0; t < T; ++t) {
        int var = am.gen[r][g][t];
        if (var < 0) continue;
        double gen = sol.x[var];
        out.generation_mwh_yr[r][g] += gen * w[t];
        out.variable_fuel_eur += mc * w[t] * gen;
        out.emissions_t[r] += gen / tech.efficiency * tech.emission_t_per_mwh_fuel * w[t];
      }
    }
    if (am.bat_invest_energy[r] >= 0) {
      double ie = sol.x[am.bat_invest_energy[r]];
      double ip = sol.x[am.bat_invest_power[r]];
      out.battery_invest_energy_mwh[r] = ie;
      out.battery_invest_power_mw[r] = ip;
      double cost = sys.battery.energy_capex_eur_per_mwh_yr * ie +
                    sys.battery.power_capex_eur_per_mw_yr * ip;
      out.battery_invest_eur += cost;
      out.capex_eur += cost;
    }
    for (int t = 0; t < T; ++t) {
      double dual = sol.row_dual[am.balance_rows[r][t]];
      out.raw_dual_eur[r][t] = dual;
      out.price_eur_mwh[r][t] = dual / w[t];
      out.consumption_mw[r][t] = region.demand_mw[t];
    }
  }
  for (int l = 0; l < L; ++l) {
    if (am.link_expand[l] >= 0) {
      double exp = sol.x[am.link_expand[l]];
      out.link_expansion_mw[l] = exp;
      out.transmission_capex_eur += sys.links[l].expansion_capex_eur_per_mw_yr * exp;
    }
  }
  for (const EvAddonBlock& block : am.ev_blocks) {
    int r = sys.region_index(block.area);
    out.ev_degradation_eur += block.objective_constant_eur;
    for (int t = 0; t < T; ++t) {
      double charge = block.fixed_demand_mw[t];
      if (!block.flex_charge.empty()) {
        charge += sol.x[block.flex_charge[t]];
        out.ev_degradation_eur +=
            am.model.variable(block.flex_charge[t]).cost * sol.x[block.flex_charge[t]];
        out.ev_degradation_eur += am.model.variable(block.vsoc[t]).cost * sol.x[block.vsoc[t]];
      }
      out.ev_charge_mw[r][t] += charge;
      out.consumption_mw[r][t] += charge;
      if (!block.v2g_discharge.empty())
        out.ev_discharge_mw[r][t] += sol.x[block.v2g_discharge[t]];
    }
  }
  return out;
}

double YearSolution::total_consumption_weighted_mwh(const TimeStructure& time, int r) const {
  double s = 0.0;
  int flat = 0;
  for (const auto& p : time.periods)
    for (int k = 0; k < p.hours; ++k, ++flat) s += consumption_mw[r][flat] * p.weight;
  return s;
}

SystemInstance carry_forward(const YearSolution& sol, const SystemInstance& solved,
                             SystemInstance next, const std::vector<Retirement>& retirements) {
  if (next.year <= solved.year)
    throw ConfigError("carry_forward: years must be strictly increasing");
  for (std::size_t r = 0; r < solved.regions.size(); ++r) {
    int nr = next.region_index(solved.regions[r].id);
    for (std::size_t g = 0; g < solved.technologies.size(); ++g) {
      int ng = next.tech_index(solved.technologies[g].id);
      next.carried_mw[nr][ng] = solved.carried_mw[r][g] + sol.invested_mw[r][g];
    }
    next.region_battery[nr].carried_energy_mwh =
        solved.region_battery[r].carried_energy_mwh + sol.battery_invest_energy_mwh[r];
    next.region_battery[nr].carried_power_mw =
        solved.region_battery[r].carried_power_mw + sol.battery_invest_power_mw[r];
  }
  for (std::size_t l = 0; l < solved.links.size(); ++l) {
    for (TransmissionLink& nl : next.links) {
      if (nl.from == solved.links[l].from && nl.to == solved.links[l].to)
        nl.carried_ntc_mw = solved.links[l].carried_ntc_mw + sol.link_expansion_mw[l];
    }
  }
  for (const Retirement& ret : retirements) {
    if (ret.year != next.year) continue;
    int r = next.region_index(ret.region);
    int g = next.tech_index(ret.tech);
    next.carried_mw[r][g] = std::max(0.0, next.carried_mw[r][g] - ret.mw);
  }
  return next;
}

}  // namespace evflex
