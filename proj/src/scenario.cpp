#include "evflex/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "evflex/csv.hpp"
#include "evflex/errors.hpp"

namespace evflex {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("bad JSON in " + path + ": " + e.what());
  }
  return j;
}

// accepts either a plain number (applies to every year) or {"2020": v, ...}
std::map<int, double> year_table(const json& j, const std::string& what) {
  std::map<int, double> out;
  if (j.is_number()) {
    out[-1] = j.get<double>();
    return out;
  }
  if (!j.is_object()) throw ConfigError(what + ": expected a number or a year->value map");
  for (auto it = j.begin(); it != j.end(); ++it)
    out[std::stoi(it.key())] = it.value().get<double>();
  return out;
}

double year_value(const std::map<int, double>& table, int year, const std::string& what) {
  auto it = table.find(year);
  if (it != table.end()) return it->second;
  it = table.find(-1);
  if (it != table.end()) return it->second;
  throw ConfigError(what + ": no value for year " + std::to_string(year));
}

double year_value_or(const std::map<int, double>& table, int year, double fallback) {
  auto it = table.find(year);
  if (it != table.end()) return it->second;
  it = table.find(-1);
  if (it != table.end()) return it->second;
  return fallback;
}

WeekdayTripProfile parse_weekday_profile(const json& j, WeekdayTripProfile base) {
  if (j.contains("depart_mean_minute")) base.depart_mean = j["depart_mean_minute"].get<double>();
  if (j.contains("depart_std_minute")) base.depart_std = j["depart_std_minute"].get<double>();
  if (j.contains("depart_min_minute")) base.depart_min = j["depart_min_minute"].get<double>();
  if (j.contains("depart_max_minute")) base.depart_max = j["depart_max_minute"].get<double>();
  if (j.contains("duration_mean_minute")) base.duration_mean = j["duration_mean_minute"].get<double>();
  if (j.contains("duration_std_minute")) base.duration_std = j["duration_std_minute"].get<double>();
  if (j.contains("distance_logmean")) base.distance_logmean = j["distance_logmean"].get<double>();
  if (j.contains("distance_logstd")) base.distance_logstd = j["distance_logstd"].get<double>();
  if (j.contains("distance_min_km")) base.distance_min_km = j["distance_min_km"].get<double>();
  if (j.contains("distance_max_km")) base.distance_max_km = j["distance_max_km"].get<double>();
  return base;
}

}  // namespace

const std::vector<double>& RunConfig::load_series(const std::string& relative_path) const {
  auto it = csv_cache.find(relative_path);
  if (it != csv_cache.end()) return it->second;
  std::string path = (fs::path(base_dir) / relative_path).string();
  csv::Table t = csv::read_file(path);
  int col = t.column("value");
  if (col < 0) col = static_cast<int>(t.header.size()) - 1;  // last column
  std::vector<double> series;
  series.reserve(t.rows.size());
  for (const auto& row : t.rows) series.push_back(std::strtod(row[col].c_str(), nullptr));
  return csv_cache.emplace(relative_path, std::move(series)).first->second;
}

RunConfig load_run_config(const std::string& path) {
  json j = load_json_file(path);
  RunConfig cfg;
  cfg.base_dir = fs::path(path).parent_path().string();
  if (cfg.base_dir.empty()) cfg.base_dir = ".";
  cfg.seed = j.value("seed", 1ULL);
  if (!j.contains("years")) throw ConfigError("run config: missing 'years'");
  for (const auto& y : j["years"]) cfg.years.push_back(y.get<int>());
  if (!std::is_sorted(cfg.years.begin(), cfg.years.end()) ||
      std::adjacent_find(cfg.years.begin(), cfg.years.end()) != cfg.years.end())
    throw ConfigError("run config: years must be strictly increasing");

  if (!j.contains("time_structure")) throw ConfigError("run config: missing 'time_structure'");
  for (const auto& p : j["time_structure"]["periods"]) {
    RepresentativePeriod rp;
    rp.name = p.value("name", "period");
    rp.start_hour = p.at("start_hour").get<int>();
    rp.hours = p.at("hours").get<int>();
    rp.weight = p.at("weight").get<double>();
    cfg.time.periods.push_back(rp);
  }
  cfg.time.validate();

  cfg.trip_synthesis = TripSynthesisSpec::bundled_default();
  if (j.contains("trip_synthesis")) {
    const json& ts = j["trip_synthesis"];
    if (ts.contains("trips_per_weekday"))
      cfg.trip_synthesis.trips_per_weekday = ts["trips_per_weekday"].get<int>();
    if (ts.contains("arrival_cutoff_minute"))
      cfg.trip_synthesis.arrival_cutoff_minute = ts["arrival_cutoff_minute"].get<int>();
    if (ts.contains("stay_home_probability")) {
      const json& sh = ts["stay_home_probability"];
      if (sh.is_number())
        cfg.trip_synthesis.stay_home_probability.fill(sh.get<double>());
      else
        for (int d = 0; d < kNumWeekdays; ++d)
          if (sh.contains(weekday_name(static_cast<Weekday>(d))))
            cfg.trip_synthesis.stay_home_probability[d] =
                sh[weekday_name(static_cast<Weekday>(d))].get<double>();
    }
    if (ts.contains("weekday_profiles")) {
      for (int d = 0; d < kNumWeekdays; ++d) {
        const char* name = weekday_name(static_cast<Weekday>(d));
        if (ts["weekday_profiles"].contains(name))
          cfg.trip_synthesis.profiles[d] =
              parse_weekday_profile(ts["weekday_profiles"][name], cfg.trip_synthesis.profiles[d]);
      }
    }
  }
  cfg.trip_csv = j.value("trip_csv", std::string());
  cfg.no_trip_probability = j.value("no_trip_probability", 0.15);

  if (j.contains("fleet")) {
    const json& f = j["fleet"];
    cfg.fleet_sample_size = f.value("sample_size", 1000);
    if (f.contains("vehicle_class_overrides"))
      for (auto it = f["vehicle_class_overrides"].begin();
           it != f["vehicle_class_overrides"].end(); ++it)
        cfg.vehicle_class_overrides[it.key()] = it.value().get<double>();
    for (const auto& area : f.value("areas", json::array())) {
      std::string region = area.at("region").get<std::string>();
      for (const auto& c : area.at("classes")) {
        FleetSpec fs;
        fs.region = region;
        std::string kind = c.at("kind").get<std::string>();
        if (kind == "BEV") fs.kind = VehicleKind::BEV;
        else if (kind == "PHEV") fs.kind = VehicleKind::PHEV;
        else throw ConfigError("fleet class kind must be BEV or PHEV, got " + kind);
        for (auto it = c.at("stocks").begin(); it != c.at("stocks").end(); ++it)
          fs.stock_by_year[std::stoi(it.key())] = it.value().get<double>();
        cfg.fleets.push_back(std::move(fs));
      }
    }
  }

  if (!j.contains("system")) throw ConfigError("run config: missing 'system'");
  const json& sys = j["system"];
  for (const auto& r : sys.at("regions")) {
    RegionConfig rc;
    rc.id = r.at("id").get<std::string>();
    rc.demand_csv = r.at("demand_csv").get<std::string>();
    rc.demand_scale = r.contains("demand_scale") ? year_table(r["demand_scale"], "demand_scale")
                                                 : std::map<int, double>{{-1, 1.0}};
    rc.co2_price = r.contains("co2_price") ? year_table(r["co2_price"], "co2_price")
                                           : std::map<int, double>{{-1, 0.0}};
    cfg.regions.push_back(std::move(rc));
  }
  for (const auto& t : sys.at("technologies")) {
    TechnologyConfig tc;
    tc.base.id = t.at("id").get<std::string>();
    tc.base.kind = parse_tech_kind(t.at("kind").get<std::string>());
    tc.base.fuel_cost_eur_per_mwh = t.value("fuel_cost", 0.0);
    tc.base.efficiency = t.value("efficiency", 1.0);
    tc.base.emission_t_per_mwh_fuel = t.value("emission_factor", 0.0);
    tc.base.vom_eur_per_mwh = t.value("vom", 0.0);
    tc.base.fom_eur_per_mw_yr = t.value("fom", 0.0);
    tc.base.investable = t.value("investable", false);
    if (t.contains("capex")) tc.capex_by_year = year_table(t["capex"], tc.base.id + ".capex");
    if (t.contains("profile_csv"))
      for (auto it = t["profile_csv"].begin(); it != t["profile_csv"].end(); ++it)
        tc.profile_csv[it.key()] = it.value().get<std::string>();
    if (t.contains("existing"))
      for (auto it = t["existing"].begin(); it != t["existing"].end(); ++it)
        tc.existing_mw[it.key()] = year_table(it.value(), tc.base.id + ".existing");
    cfg.technologies.push_back(std::move(tc));
  }
  if (sys.contains("battery")) {
    const json& b = sys["battery"];
    cfg.battery.energy_capex = year_table(b.at("energy_capex"), "battery.energy_capex");
    cfg.battery.power_capex = year_table(b.at("power_capex"), "battery.power_capex");
    cfg.battery.round_trip_efficiency = b.value("round_trip_efficiency", 0.9);
    cfg.battery.investable = b.value("investable", true);
    if (b.contains("existing_energy"))
      for (auto it = b["existing_energy"].begin(); it != b["existing_energy"].end(); ++it)
        cfg.battery.existing_energy_mwh[it.key()] = it.value().get<double>();
    if (b.contains("existing_power"))
      for (auto it = b["existing_power"].begin(); it != b["existing_power"].end(); ++it)
        cfg.battery.existing_power_mw[it.key()] = it.value().get<double>();
  } else {
    cfg.battery.investable = false;
  }
  for (const auto& l : sys.value("links", json::array())) {
    LinkConfig lc;
    lc.from = l.at("from").get<std::string>();
    lc.to = l.at("to").get<std::string>();
    lc.ntc_mw = l.value("ntc", 0.0);
    if (l.contains("expansion_capex"))
      lc.expansion_capex = year_table(l["expansion_capex"], "link expansion_capex");
    lc.expandable_from_year = l.value("expandable_from_year", 2040);
    lc.loss_share = l.value("loss", 0.02);
    cfg.links.push_back(std::move(lc));
  }
  for (const auto& r : sys.value("retirements", json::array())) {
    Retirement ret;
    ret.region = r.at("region").get<std::string>();
    ret.tech = r.at("tech").get<std::string>();
    ret.year = r.at("year").get<int>();
    ret.mw = r.at("mw").get<double>();
    cfg.retirements.push_back(ret);
  }
  return cfg;
}

std::string ScenarioSpec::canonical_name() const {
  return std::string(scheme_name(scheme)) + "_" +
         (transmission_expansion ? "TransEx" : "noTransEx");
}

ScenarioSpec ScenarioSpec::from_json_file(const std::string& path) {
  json j = load_json_file(path);
  ScenarioSpec spec;
  spec.scheme = parse_scheme(j.at("scheme").get<std::string>());
  spec.transmission_expansion = j.at("transmission_expansion").get<bool>();
  spec.name = j.value("name", std::string());
  if (j.contains("years"))
    for (const auto& y : j["years"]) spec.years.push_back(y.get<int>());
  spec.seed = j.value("seed", 0ULL);
  std::string cfg = j.at("config").get<std::string>();
  fs::path p(cfg);
  spec.config_path = p.is_absolute() ? cfg : (fs::path(path).parent_path() / p).string();
  if (spec.name.empty()) spec.name = spec.canonical_name();
  return spec;
}

std::string FleetSet::key(const std::string& region, VehicleKind kind, int year) {
  return region + "|" + (kind == VehicleKind::BEV ? "BEV" : "PHEV") + "|" + std::to_string(year);
}

double StockTable::get(const std::string& country, VehicleKind kind, int year) const {
  const auto& table = kind == VehicleKind::BEV ? bev : phev;
  auto it = table.find(country);
  if (it == table.end()) throw ConfigError("stock table: unknown country " + country);
  auto yit = it->second.find(year);
  if (yit == it->second.end())
    throw ConfigError("stock table: no entry for " + country + " in " + std::to_string(year));
  return yit->second;
}

StockTable load_vehicle_stocks(const std::string& csv_path) {
  csv::Table t = csv::read_file(csv_path);
  int c_country = t.column("country");
  int c_year = t.column("year");
  int c_kind = t.column("kind");
  int c_count = t.column("thousand_vehicles");
  if (c_country < 0 || c_year < 0 || c_kind < 0 || c_count < 0)
    throw ConfigError("stock table " + csv_path + ": missing columns");
  StockTable table;
  for (const auto& row : t.rows) {
    int year = std::stoi(row[c_year]);
    double count = std::strtod(row[c_count].c_str(), nullptr);
    if (row[c_kind] == "BEV") table.bev[row[c_country]][year] = count;
    else if (row[c_kind] == "PHEV") table.phev[row[c_country]][year] = count;
    else throw ConfigError("stock table: kind must be BEV or PHEV");
  }
  return table;
}

VehicleClass fixture_vehicle_class(const RunConfig& cfg, VehicleKind kind, int year) {
  VehicleClass cls = VehicleClass::bundled_default(kind, year);
  for (const auto& [field, value] : cfg.vehicle_class_overrides) {
    if (field == "charge_efficiency") cls.charge_efficiency = value;
    else if (field == "battery_cost_eur_per_kwh") cls.battery_cost_eur_per_kwh = value;
    else if (field == "charger_power_kw") cls.charger_power_kw = value;
    else if (field == "consumption_kwh_per_km") cls.consumption_kwh_per_km = value;
    else if (field == "cyc_factor") cls.degradation.cyc_factor = value;
    else if (field == "cal_const") cls.degradation.cal_const = value;
    else if (field == "cal_flex") cls.degradation.cal_flex = value;
    else throw ConfigError("unknown vehicle class override '" + field + "'");
  }
  cls.validate();
  return cls;
}

FleetSet build_fleets(const RunConfig& cfg, std::uint64_t seed, const std::string& cache_dir) {
  TripLibrary lib;
  if (!cfg.trip_csv.empty()) {
    LoadOptions opts;
    opts.no_trip_probability = cfg.no_trip_probability;
    lib = load_trip_library((fs::path(cfg.base_dir) / cfg.trip_csv).string(), opts);
  } else {
    lib = synth_trip_library(seed, cfg.trip_synthesis);
  }

  FleetSet set;
  for (const FleetSpec& fleet : cfg.fleets) {
    int region_salt = 0;
    for (std::size_t i = 0; i < cfg.regions.size(); ++i)
      if (cfg.regions[i].id == fleet.region) region_salt = static_cast<int>(i) + 1;
    if (region_salt == 0) throw ConfigError("fleet references unknown region " + fleet.region);
    // one seed per (region, kind); the same simulated drivers age through the
    // model years, only the vehicle technology changes
    std::uint64_t base = derive_seed(derive_seed(seed, region_salt),
                                     fleet.kind == VehicleKind::BEV ? 1 : 2);
    for (int year : cfg.years) {
      double stock = year_value_or(fleet.stock_by_year, year, 0.0);
      VehicleClass cls = fixture_vehicle_class(cfg, fleet.kind, year);
      std::string key = FleetSet::key(fleet.region, fleet.kind, year);
      if (stock <= 0.0) {
        FleetProfile empty;
        empty.area = fleet.region;
        empty.vehicle_class = cls;
        empty.stock_count = 0.0;
        empty.sample_size = 0;
        for (auto* s : {&empty.available_count, &empty.inflexible_load_mw, &empty.passive_load_mw,
                        &empty.passive_soc_mwh, &empty.soc_injection_mwh,
                        &empty.trip_withdrawal_mwh, &empty.soc_max_mwh, &empty.soc_min_mwh})
          s->assign(kHoursPerYear, 0.0);
        set.profiles.emplace(key, std::move(empty));
        continue;
      }
      std::uint64_t cache_key = fleet_cache_key(lib, cls, base, stock, cfg.fleet_sample_size);
      std::string cache_path;
      if (!cache_dir.empty()) {
        cache_path = (fs::path(cache_dir) / (fleet.region + "_" + cls.id() + ".bin")).string();
        if (auto cached = read_fleet_cache(cache_path, cache_key)) {
          cached->area = fleet.region;
          cached->vehicle_class = cls;
          set.profiles.emplace(key, std::move(*cached));
          continue;
        }
      }
      FleetProfile p =
          build_fleet_profile(lib, cls, cfg.fleet_sample_size, base, stock, fleet.region);
      if (!cache_path.empty()) write_fleet_cache(cache_path, p, cache_key);
      set.profiles.emplace(key, std::move(p));
    }
  }
  return set;
}

SystemInstance make_instance(const RunConfig& cfg, int year, const FleetSet& fleets) {
  SystemInstance sys;
  sys.year = year;
  sys.time = cfg.time;
  const int G = static_cast<int>(cfg.technologies.size());
  const int R = static_cast<int>(cfg.regions.size());

  for (const RegionConfig& rc : cfg.regions) {
    Region r;
    r.id = rc.id;
    const std::vector<double>& demand_year = cfg.load_series(rc.demand_csv);
    double scale = year_value(rc.demand_scale, year, "demand_scale for " + rc.id);
    r.demand_mw = cfg.time.slice(demand_year);
    for (double& d : r.demand_mw) d *= scale;
    r.co2_price_eur_per_t = year_value(rc.co2_price, year, "co2_price for " + rc.id);
    sys.regions.push_back(std::move(r));
  }

  sys.base_existing_mw.assign(R, std::vector<double>(G, 0.0));
  sys.carried_mw.assign(R, std::vector<double>(G, 0.0));
  sys.vre_profile.assign(R, std::vector<std::vector<double>>(G));
  for (int g = 0; g < G; ++g) {
    const TechnologyConfig& tc = cfg.technologies[g];
    Technology tech = tc.base;
    if (!tc.capex_by_year.empty())
      tech.capex_eur_per_mw_yr = year_value(tc.capex_by_year, year, tech.id + ".capex");
    sys.technologies.push_back(tech);
    for (int r = 0; r < R; ++r) {
      const std::string& rid = cfg.regions[r].id;
      auto it = tc.existing_mw.find(rid);
      if (it != tc.existing_mw.end())
        sys.base_existing_mw[r][g] = year_value_or(it->second, year, 0.0);
      if (tech.uses_profile()) {
        auto pit = tc.profile_csv.find(rid);
        if (pit != tc.profile_csv.end())
          sys.vre_profile[r][g] = cfg.time.slice(cfg.load_series(pit->second));
        else if (sys.base_existing_mw[r][g] > 0.0 || tech.investable)
          throw ConfigError("technology " + tech.id + " needs a profile for region " + rid);
      }
    }
  }

  sys.battery.investable = cfg.battery.investable;
  sys.battery.round_trip_efficiency = cfg.battery.round_trip_efficiency;
  if (cfg.battery.investable) {
    sys.battery.energy_capex_eur_per_mwh_yr =
        year_value(cfg.battery.energy_capex, year, "battery.energy_capex");
    sys.battery.power_capex_eur_per_mw_yr =
        year_value(cfg.battery.power_capex, year, "battery.power_capex");
  }
  for (int r = 0; r < R; ++r) {
    RegionBattery rb;
    const std::string& rid = cfg.regions[r].id;
    auto ite = cfg.battery.existing_energy_mwh.find(rid);
    if (ite != cfg.battery.existing_energy_mwh.end()) rb.base_energy_mwh = ite->second;
    auto itp = cfg.battery.existing_power_mw.find(rid);
    if (itp != cfg.battery.existing_power_mw.end()) rb.base_power_mw = itp->second;
    sys.region_battery.push_back(rb);
  }

  for (const LinkConfig& lc : cfg.links) {
    TransmissionLink l;
    l.from = lc.from;
    l.to = lc.to;
    l.base_ntc_mw = lc.ntc_mw;
    l.expansion_capex_eur_per_mw_yr =
        lc.expansion_capex.empty()
            ? 0.0
            : year_value_or(lc.expansion_capex, year,
                            lc.expansion_capex.rbegin()->second);
    l.expandable_from_year = lc.expandable_from_year;
    l.loss_share = lc.loss_share;
    sys.links.push_back(l);
  }

  for (const FleetSpec& fleet : cfg.fleets) {
    auto it = fleets.profiles.find(FleetSet::key(fleet.region, fleet.kind, year));
    if (it == fleets.profiles.end())
      throw ConfigError("fleet profiles missing for " + fleet.region + " year " +
                        std::to_string(year) + "; rebuild the fleet set");
    sys.fleets.push_back(slice_fleet_profile(it->second, cfg.time));
  }
  return sys;
}

PriceStats compute_price_stats(const YearSolution& sol, const TimeStructure& time, int region) {
  PriceStats st;
  double wsum = 0.0, lwsum = 0.0, mean_p = 0.0;
  int flat = 0;
  for (const auto& p : time.periods) {
    for (int k = 0; k < p.hours; ++k, ++flat) {
      double price = sol.price_eur_mwh[region][flat];
      double load = sol.consumption_mw[region][flat];
      st.weighted_mean_eur_mwh += p.weight * load * price;
      lwsum += p.weight * load;
      mean_p += p.weight * price;
      wsum += p.weight;
    }
  }
  st.weighted_mean_eur_mwh = lwsum > 0 ? st.weighted_mean_eur_mwh / lwsum : 0.0;
  mean_p /= wsum;
  double var = 0.0;
  flat = 0;
  for (const auto& p : time.periods)
    for (int k = 0; k < p.hours; ++k, ++flat) {
      double d = sol.price_eur_mwh[region][flat] - mean_p;
      var += p.weight * d * d;
    }
  st.std_dev_eur_mwh = std::sqrt(var / wsum);
  return st;
}

PriceStats price_stats(const ScenarioResult& result, const std::string& region, int year) {
  const ScenarioYearMetrics& m = result.metrics_for(year);
  auto it = m.price_stats.find(region);
  if (it == m.price_stats.end())
    throw ConfigError("price_stats: no region '" + region + "' in scenario " + result.name);
  return it->second;
}

double ScenarioResult::total_cost_eur() const {
  double s = 0.0;
  for (const auto& y : per_year) s += y.objective_eur;
  return s;
}

double ScenarioResult::total_battery_invest_eur() const {
  double s = 0.0;
  for (const auto& y : per_year) s += y.battery_invest_eur;
  return s;
}

double ScenarioResult::accumulated_emissions_t(const std::string& region) const {
  double s = 0.0;
  for (const auto& y : per_year) {
    auto it = y.emissions_t.find(region);
    if (it != y.emissions_t.end()) s += it->second;
  }
  return s;
}

const ScenarioYearMetrics& ScenarioResult::metrics_for(int year) const {
  for (const auto& y : per_year)
    if (y.year == year) return y;
  throw ConfigError("no metrics for year " + std::to_string(year));
}

namespace {

ScenarioYearMetrics metrics_from_solution(const YearSolution& sol, const SystemInstance& sys) {
  ScenarioYearMetrics m;
  m.year = sol.year;
  m.objective_eur = sol.objective_eur;
  m.capex_eur = sol.capex_eur;
  m.fixed_om_eur = sol.fixed_om_eur;
  m.variable_fuel_eur = sol.variable_fuel_eur;
  m.transmission_capex_eur = sol.transmission_capex_eur;
  m.ev_degradation_eur = sol.ev_degradation_eur;
  m.battery_invest_eur = sol.battery_invest_eur;
  for (std::size_t g = 0; g < sys.technologies.size(); ++g)
    for (std::size_t r = 0; r < sys.regions.size(); ++r)
      m.generation_mwh[sys.technologies[g].id][sys.regions[r].id] =
          sol.generation_mwh_yr[r][g];
  for (std::size_t r = 0; r < sys.regions.size(); ++r) {
    const std::string& rid = sys.regions[r].id;
    m.emissions_t[rid] = sol.emissions_t[r];
    m.battery_invest_energy_mwh[rid] = sol.battery_invest_energy_mwh[r];
    m.battery_invest_power_mw[rid] = sol.battery_invest_power_mw[r];
    m.price_stats[rid] = compute_price_stats(sol, sys.time, static_cast<int>(r));
  }
  for (std::size_t l = 0; l < sys.links.size(); ++l)
    m.link_expansion_mw[sys.links[l].from + "-" + sys.links[l].to] = sol.link_expansion_mw[l];
  return m;
}

}  // namespace

ScenarioResult run_scenario(const RunConfig& cfg, const FleetSet& fleets, ChargingScheme scheme,
                            bool trans_expansion, const std::string& name,
                            const std::string& dump_lp_dir) {
  ScenarioResult result;
  result.scheme = scheme;
  result.transmission_expansion = trans_expansion;
  result.name = name.empty() ? std::string(scheme_name(scheme)) + "_" +
                                   (trans_expansion ? "TransEx" : "noTransEx")
                             : name;
  result.years = cfg.years;
  result.time = cfg.time;
  for (const RegionConfig& r : cfg.regions) result.region_ids.push_back(r.id);
  for (const TechnologyConfig& t : cfg.technologies) result.tech_ids.push_back(t.base.id);

  if (!dump_lp_dir.empty()) fs::create_directories(dump_lp_dir);

  bool first = true;
  YearSolution prev_sol;
  SystemInstance prev_sys;
  for (int year : cfg.years) {
    SystemInstance inst = make_instance(cfg, year, fleets);
    if (!first) inst = carry_forward(prev_sol, prev_sys, std::move(inst), cfg.retirements);
    SolveOptions opts;
    if (!dump_lp_dir.empty())
      opts.dump_lp_path =
          (fs::path(dump_lp_dir) / (result.name + "_" + std::to_string(year) + ".lp")).string();
    YearSolution sol = solve_year(inst, scheme, trans_expansion, opts);
    result.per_year.push_back(metrics_from_solution(sol, inst));
    result.solutions.push_back(sol);
    prev_sol = std::move(sol);
    prev_sys = std::move(inst);
    first = false;
  }
  return result;
}

ScenarioResult run_scenario(const ScenarioSpec& spec) {
  RunConfig cfg = load_run_config(spec.config_path);
  if (!spec.years.empty()) cfg.years = spec.years;
  if (spec.seed != 0) cfg.seed = spec.seed;
  FleetSet fleets = build_fleets(cfg, cfg.seed);
  return run_scenario(cfg, fleets, spec.scheme, spec.transmission_expansion, spec.name);
}

DeltaReport compare(const ScenarioResult& base, const ScenarioResult& other) {
  if (base.years != other.years || base.region_ids != other.region_ids)
    throw ConfigError("compare: scenario shapes differ (years or regions)");
  DeltaReport d;
  d.base_name = base.name;
  d.other_name = other.name;
  auto sum = [](const ScenarioResult& s, auto pick) {
    double v = 0.0;
    for (const auto& y : s.per_year) v += pick(y);
    return v;
  };
  d.total_cost_eur = other.total_cost_eur() - base.total_cost_eur();
  d.cost_category_eur["capex"] =
      sum(other, [](const auto& y) { return y.capex_eur; }) -
      sum(base, [](const auto& y) { return y.capex_eur; });
  d.cost_category_eur["fixed_om"] =
      sum(other, [](const auto& y) { return y.fixed_om_eur; }) -
      sum(base, [](const auto& y) { return y.fixed_om_eur; });
  d.cost_category_eur["variable_fuel"] =
      sum(other, [](const auto& y) { return y.variable_fuel_eur; }) -
      sum(base, [](const auto& y) { return y.variable_fuel_eur; });
  d.cost_category_eur["transmission"] =
      sum(other, [](const auto& y) { return y.transmission_capex_eur; }) -
      sum(base, [](const auto& y) { return y.transmission_capex_eur; });
  d.cost_category_eur["ev_degradation"] =
      sum(other, [](const auto& y) { return y.ev_degradation_eur; }) -
      sum(base, [](const auto& y) { return y.ev_degradation_eur; });
  d.battery_invest_eur = other.total_battery_invest_eur() - base.total_battery_invest_eur();
  for (const std::string& tech : base.tech_ids) {
    double b = 0.0, o = 0.0;
    for (const auto& y : base.per_year)
      if (y.generation_mwh.count(tech))
        for (const auto& [rid, v] : y.generation_mwh.at(tech)) b += v;
    for (const auto& y : other.per_year)
      if (y.generation_mwh.count(tech))
        for (const auto& [rid, v] : y.generation_mwh.at(tech)) o += v;
    d.generation_mwh[tech] = o - b;
  }
  for (const std::string& rid : base.region_ids) {
    d.emissions_t[rid] = other.accumulated_emissions_t(rid) - base.accumulated_emissions_t(rid);
    int final_year = base.years.back();
    d.price_std[rid] = other.metrics_for(final_year).price_stats.at(rid).std_dev_eur_mwh -
                       base.metrics_for(final_year).price_stats.at(rid).std_dev_eur_mwh;
  }
  return d;
}

namespace {

json metrics_to_json(const ScenarioYearMetrics& m) {
  json j;
  j["objective_eur"] = m.objective_eur;
  j["capex_eur"] = m.capex_eur;
  j["fixed_om_eur"] = m.fixed_om_eur;
  j["variable_fuel_eur"] = m.variable_fuel_eur;
  j["transmission_capex_eur"] = m.transmission_capex_eur;
  j["ev_degradation_eur"] = m.ev_degradation_eur;
  j["battery_invest_eur"] = m.battery_invest_eur;
  j["generation_mwh"] = m.generation_mwh;
  j["emissions_t"] = m.emissions_t;
  j["battery_invest_energy_mwh"] = m.battery_invest_energy_mwh;
  j["battery_invest_power_mw"] = m.battery_invest_power_mw;
  j["link_expansion_mw"] = m.link_expansion_mw;
  json ps;
  for (const auto& [rid, st] : m.price_stats)
    ps[rid] = {{"weighted_mean", st.weighted_mean_eur_mwh}, {"std_dev", st.std_dev_eur_mwh}};
  j["price_stats"] = ps;
  return j;
}

ScenarioYearMetrics metrics_from_json(int year, const json& j) {
  ScenarioYearMetrics m;
  m.year = year;
  m.objective_eur = j.at("objective_eur").get<double>();
  m.capex_eur = j.at("capex_eur").get<double>();
  m.fixed_om_eur = j.at("fixed_om_eur").get<double>();
  m.variable_fuel_eur = j.at("variable_fuel_eur").get<double>();
  m.transmission_capex_eur = j.at("transmission_capex_eur").get<double>();
  m.ev_degradation_eur = j.at("ev_degradation_eur").get<double>();
  m.battery_invest_eur = j.at("battery_invest_eur").get<double>();
  m.generation_mwh =
      j.at("generation_mwh").get<std::map<std::string, std::map<std::string, double>>>();
  m.emissions_t = j.at("emissions_t").get<std::map<std::string, double>>();
  m.battery_invest_energy_mwh =
      j.at("battery_invest_energy_mwh").get<std::map<std::string, double>>();
  m.battery_invest_power_mw = j.at("battery_invest_power_mw").get<std::map<std::string, double>>();
  m.link_expansion_mw = j.at("link_expansion_mw").get<std::map<std::string, double>>();
  for (auto it = j.at("price_stats").begin(); it != j.at("price_stats").end(); ++it) {
    PriceStats st;
    st.weighted_mean_eur_mwh = it.value().at("weighted_mean").get<double>();
    st.std_dev_eur_mwh = it.value().at("std_dev").get<double>();
    m.price_stats[it.key()] = st;
  }
  return m;
}

}  // namespace

void write_scenario_outputs(const ScenarioResult& result, const std::string& out_dir) {
  fs::create_directories(out_dir);
  json summary;
  summary["name"] = result.name;
  summary["scheme"] = scheme_name(result.scheme);
  summary["transmission_expansion"] = result.transmission_expansion;
  summary["years"] = result.years;
  summary["regions"] = result.region_ids;
  summary["technologies"] = result.tech_ids;
  json per_year;
  for (const auto& m : result.per_year) per_year[std::to_string(m.year)] = metrics_to_json(m);
  summary["per_year"] = per_year;
  json totals;
  totals["cost_eur"] = result.total_cost_eur();
  totals["battery_invest_eur"] = result.total_battery_invest_eur();
  json em;
  for (const std::string& rid : result.region_ids) em[rid] = result.accumulated_emissions_t(rid);
  totals["emissions_t"] = em;
  summary["totals"] = totals;
  {
    std::ofstream out(fs::path(out_dir) / "summary.json");
    if (!out) throw ConfigError("cannot write summary.json under " + out_dir);
    out << summary.dump(2) << "\n";
  }

  // hourly tables per year, when the solved series are in memory
  for (std::size_t i = 0; i < result.solutions.size(); ++i) {
    const YearSolution& sol = result.solutions[i];
    std::string ytag = std::to_string(sol.year);
    {
      csv::Writer w((fs::path(out_dir) / ("prices_" + ytag + ".csv")).string());
      std::vector<std::string> header = {"hour"};
      for (const std::string& rid : result.region_ids) header.push_back(rid);
      w.row(header);
      int T = static_cast<int>(sol.price_eur_mwh.empty() ? 0 : sol.price_eur_mwh[0].size());
      for (int t = 0; t < T; ++t) {
        std::vector<std::string> row = {std::to_string(t)};
        for (std::size_t r = 0; r < result.region_ids.size(); ++r)
          row.push_back(csv::format_double(sol.price_eur_mwh[r][t]));
        w.row(row);
      }
    }
    {
      csv::Writer w((fs::path(out_dir) / ("dispatch_" + ytag + ".csv")).string());
      w.row({"region", "technology", "generation_mwh"});
      for (std::size_t r = 0; r < result.region_ids.size(); ++r)
        for (std::size_t g = 0; g < result.tech_ids.size(); ++g)
          w.row({result.region_ids[r], result.tech_ids[g],
                 csv::format_double(sol.generation_mwh_yr[r][g])});
    }
    {
      csv::Writer w((fs::path(out_dir) / ("investments_" + ytag + ".csv")).string());
      w.row({"kind", "where", "value"});
      for (std::size_t r = 0; r < result.region_ids.size(); ++r)
        for (std::size_t g = 0; g < result.tech_ids.size(); ++g)
          if (sol.invested_mw[r][g] != 0.0)
            w.row({"generation_mw", result.region_ids[r] + ":" + result.tech_ids[g],
                   csv::format_double(sol.invested_mw[r][g])});
      for (std::size_t r = 0; r < result.region_ids.size(); ++r) {
        w.row({"battery_energy_mwh", result.region_ids[r],
               csv::format_double(sol.battery_invest_energy_mwh[r])});
        w.row({"battery_power_mw", result.region_ids[r],
               csv::format_double(sol.battery_invest_power_mw[r])});
      }
      const auto& m = result.per_year[i];
      for (const auto& [lid, mw] : m.link_expansion_mw)
        w.row({"link_expansion_mw", lid, csv::format_double(mw)});
    }
    {
      csv::Writer w((fs::path(out_dir) / ("emissions_" + ytag + ".csv")).string());
      w.row({"region", "emissions_t"});
      for (std::size_t r = 0; r < result.region_ids.size(); ++r)
        w.row({result.region_ids[r], csv::format_double(sol.emissions_t[r])});
    }
  }
}

ScenarioResult read_scenario_summary(const std::string& summary_json_path) {
  json j = load_json_file(summary_json_path);
  ScenarioResult r;
  r.name = j.at("name").get<std::string>();
  r.scheme = parse_scheme(j.at("scheme").get<std::string>());
  r.transmission_expansion = j.at("transmission_expansion").get<bool>();
  r.years = j.at("years").get<std::vector<int>>();
  r.region_ids = j.at("regions").get<std::vector<std::string>>();
  r.tech_ids = j.at("technologies").get<std::vector<std::string>>();
  for (int year : r.years)
    r.per_year.push_back(metrics_from_json(year, j.at("per_year").at(std::to_string(year))));
  return r;
}

void write_delta_csv(const DeltaReport& d, const std::string& path) {
  csv::Writer w(path);
  w.row({"metric", "key", "delta"});
  w.row({"total_cost_eur", "", csv::format_double(d.total_cost_eur)});
  for (const auto& [cat, v] : d.cost_category_eur)
    w.row({"cost_eur", cat, csv::format_double(v)});
  w.row({"battery_invest_eur", "", csv::format_double(d.battery_invest_eur)});
  for (const auto& [tech, v] : d.generation_mwh)
    w.row({"generation_mwh", tech, csv::format_double(v)});
  for (const auto& [rid, v] : d.emissions_t) w.row({"emissions_t", rid, csv::format_double(v)});
  for (const auto& [rid, v] : d.price_std)
    w.row({"price_std_final_year", rid, csv::format_double(v)});
}

void write_report(const std::vector<ScenarioResult>& results, const std::string& out_dir) {
  if (results.empty()) throw ConfigError("report: no scenario results");
  fs::create_directories(out_dir);

  {
    csv::Writer w((fs::path(out_dir) / "cost_breakdown.csv").string());
    w.row({"scenario", "year", "category", "eur"});
    for (const auto& res : results)
      for (const auto& m : res.per_year) {
        std::string y = std::to_string(m.year);
        w.row({res.name, y, "capex", csv::format_double(m.capex_eur)});
        w.row({res.name, y, "fixed_om", csv::format_double(m.fixed_om_eur)});
        w.row({res.name, y, "variable_fuel", csv::format_double(m.variable_fuel_eur)});
        w.row({res.name, y, "transmission", csv::format_double(m.transmission_capex_eur)});
        w.row({res.name, y, "ev_degradation", csv::format_double(m.ev_degradation_eur)});
        w.row({res.name, y, "total", csv::format_double(m.objective_eur)});
      }
  }
  {
    csv::Writer w((fs::path(out_dir) / "battery_investment.csv").string());
    w.row({"scenario", "region", "accumulated_eur", "accumulated_energy_mwh",
           "accumulated_power_mw"});
    for (const auto& res : results)
      for (const std::string& rid : res.region_ids) {
        double eur = 0.0, e = 0.0, p = 0.0;
        for (const auto& m : res.per_year) {
          e += m.battery_invest_energy_mwh.at(rid);
          p += m.battery_invest_power_mw.at(rid);
        }
        eur = 0.0;
        for (const auto& m : res.per_year) eur += m.battery_invest_eur;
        w.row({res.name, rid, csv::format_double(eur), csv::format_double(e),
               csv::format_double(p)});
      }
  }
  {
    csv::Writer w((fs::path(out_dir) / "generation_mix.csv").string());
    w.row({"scenario", "year", "technology", "twh"});
    for (const auto& res : results)
      for (const auto& m : res.per_year)
        for (const std::string& tech : res.tech_ids) {
          double mwh = 0.0;
          if (m.generation_mwh.count(tech))
            for (const auto& [rid, v] : m.generation_mwh.at(tech)) mwh += v;
          w.row({res.name, std::to_string(m.year), tech, csv::format_double(mwh / 1e6)});
        }
  }
  {
    csv::Writer w((fs::path(out_dir) / "price_stats.csv").string());
    w.row({"scenario", "year", "region", "weighted_mean_eur_mwh", "std_dev_eur_mwh"});
    for (const auto& res : results)
      for (const auto& m : res.per_year)
        for (const auto& [rid, st] : m.price_stats)
          w.row({res.name, std::to_string(m.year), rid,
                 csv::format_double(st.weighted_mean_eur_mwh),
                 csv::format_double(st.std_dev_eur_mwh)});
  }
  {
    csv::Writer w((fs::path(out_dir) / "co2.csv").string());
    w.row({"scenario", "region", "accumulated_t"});
    for (const auto& res : results)
      for (const std::string& rid : res.region_ids)
        w.row({res.name, rid, csv::format_double(res.accumulated_emissions_t(rid))});
  }
  // machine-readable roll-up
  {
    json j;
    for (const auto& res : results) {
      json s;
      s["total_cost_eur"] = res.total_cost_eur();
      s["battery_invest_eur"] = res.total_battery_invest_eur();
      json em;
      for (const std::string& rid : res.region_ids)
        em[rid] = res.accumulated_emissions_t(rid);
      s["emissions_t"] = em;
      j[res.name] = s;
    }
    std::ofstream out(fs::path(out_dir) / "report_summary.json");
    out << j.dump(2) << "\n";
  }
  // delta tables against the matching passive base case
  for (const auto& res : results) {
    if (res.scheme == ChargingScheme::Passive) continue;
    for (const auto& base : results) {
      if (base.scheme != ChargingScheme::Passive ||
          base.transmission_expansion != res.transmission_expansion)
        continue;
      DeltaReport d = compare(base, res);
      write_delta_csv(d, (fs::path(out_dir) / ("delta_" + res.name + "_vs_" + base.name + ".csv"))
                             .string());
    }
  }
}

}  // namespace evflex
