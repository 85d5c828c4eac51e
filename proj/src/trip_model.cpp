#include "evflex/trip_model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "evflex/csv.hpp"
#include "evflex/errors.hpp"

namespace evflex {

namespace {
const char* const kWeekdayNames[kNumWeekdays] = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}
}  // namespace

const char* weekday_name(Weekday d) { return kWeekdayNames[static_cast<int>(d)]; }

Weekday parse_weekday(const std::string& s) {
  for (int i = 0; i < kNumWeekdays; ++i)
    if (s == kWeekdayNames[i]) return static_cast<Weekday>(i);
  throw ConfigError("unknown weekday '" + s + "' (expected Mon..Sun)");
}

void TripLibrary::rebuild_index() {
  for (auto& v : by_weekday) v.clear();
  for (std::size_t i = 0; i < trips.size(); ++i)
    by_weekday[static_cast<int>(trips[i].weekday)].push_back(static_cast<int>(i));
}

std::uint64_t TripLibrary::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const TripRecord& t : trips) {
    int w = static_cast<int>(t.weekday);
    h = fnv1a(&w, sizeof w, h);
    h = fnv1a(&t.depart_minute, sizeof t.depart_minute, h);
    h = fnv1a(&t.arrive_minute, sizeof t.arrive_minute, h);
    h = fnv1a(&t.distance_km, sizeof t.distance_km, h);
  }
  for (double p : no_trip_probability) h = fnv1a(&p, sizeof p, h);
  return h;
}

void VehicleClass::validate() const {
  if (battery_capacity_kwh <= 0 || consumption_kwh_per_km <= 0 || charger_power_kw <= 0 ||
      emergency_distance_km <= 0 || battery_cost_eur_per_kwh <= 0)
    throw ConfigError("vehicle class " + id() + ": all technical parameters must be positive");
  if (charge_efficiency <= 0 || charge_efficiency > 1)
    throw ConfigError("vehicle class " + id() + ": charge efficiency must be in (0,1]");
  if (emergency_soc_kwh() >= battery_capacity_kwh)
    throw ConfigError("vehicle class " + id() +
                      ": emergency energy must be below battery capacity");
  if (degradation.oversize_factor <= 1.0)
    throw ConfigError("vehicle class " + id() + ": oversize factor must exceed 1");
  if (degradation.lifetime_fraction <= 0 || degradation.lifetime_fraction > 1)
    throw ConfigError("vehicle class " + id() + ": lifetime fraction must be in (0,1]");
  if (degradation.cyc_factor < 0 || degradation.cal_const < 0 || degradation.cal_flex < 0)
    throw ConfigError("vehicle class " + id() + ": degradation factors must be non-negative");
}

std::string VehicleClass::id() const {
  return std::string(kind == VehicleKind::BEV ? "BEV" : "PHEV") + "-" + std::to_string(year);
}

std::uint64_t VehicleClass::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  int k = static_cast<int>(kind);
  h = fnv1a(&k, sizeof k, h);
  h = fnv1a(&year, sizeof year, h);
  double fields[] = {battery_capacity_kwh, consumption_kwh_per_km, charger_power_kw,
                     emergency_distance_km, charge_efficiency, battery_cost_eur_per_kwh,
                     charger_cost_eur_per_kw, degradation.cyc_factor, degradation.cal_const,
                     degradation.cal_flex, degradation.oversize_factor,
                     degradation.lifetime_fraction};
  h = fnv1a(fields, sizeof fields, h);
  return h;
}

VehicleClass VehicleClass::bundled_default(VehicleKind kind, int year) {
  struct YearRow {
    int year;
    double eta, soc_bev, charger_kw, c_bat_kwh, c_ch_kw;
  };
  static const YearRow rows[] = {
      {2020, 0.18, 30.0, 10.0, 175.0, 220.0},
      {2030, 0.17, 30.0, 10.0, 140.0, 60.1},
      {2040, 0.16, 40.0, 15.0, 105.0, 59.7},
      {2050, 0.15, 50.0, 20.0, 70.0, 57.5},
  };
  const YearRow* row = nullptr;
  for (const YearRow& r : rows)
    if (r.year == year) row = &r;
  if (!row) throw ConfigError("no bundled vehicle data for model year " + std::to_string(year));

  VehicleClass c;
  c.kind = kind;
  c.year = year;
  c.consumption_kwh_per_km = row->eta;
  c.battery_capacity_kwh = kind == VehicleKind::BEV ? row->soc_bev : 10.0;
  c.charger_power_kw = row->charger_kw;
  c.emergency_distance_km = kind == VehicleKind::BEV ? 50.0 : 25.0;
  c.charge_efficiency = 0.85;
  c.battery_cost_eur_per_kwh = row->c_bat_kwh;
  c.charger_cost_eur_per_kw = row->c_ch_kw;
  c.validate();
  return c;
}

TripSynthesisSpec TripSynthesisSpec::bundled_default() {
  TripSynthesisSpec spec;
  for (int d = 0; d < kNumWeekdays; ++d) {
    // Distance tails and arrival synchronization are calibrated so that the
    // aggregate charger-capacity error of a 1000-vehicle passive fleet stays
    // inside the +/-4% band with over 80% of hours within +/-1%.
    WeekdayTripProfile p;
    if (d <= 4) {
      // workdays: morning departure, ~9 h away
      p.depart_mean = 450.0 + 6.0 * d;  // 07:30 drifting later through the week
      p.depart_std = 90.0;
      p.duration_mean = 540.0;
      p.duration_std = 150.0;
      p.distance_logmean = 3.55;
      p.distance_logstd = 0.40;
      p.distance_max_km = 90.0;
    } else {
      // weekend: later, shorter, more spread out
      p.depart_mean = 620.0;  // 10:20
      p.depart_std = 130.0;
      p.duration_mean = 330.0;
      p.duration_std = 150.0;
      p.distance_logmean = 3.3;
      p.distance_logstd = 0.45;
      p.distance_max_km = 90.0;
    }
    spec.profiles[d] = p;
    spec.stay_home_probability[d] = d <= 4 ? 0.15 : 0.35;
  }
  return spec;
}

void TripSynthesisSpec::validate() const {
  if (trips_per_weekday <= 0) throw ConfigError("trip synthesis: trips_per_weekday must be > 0");
  for (int d = 0; d < kNumWeekdays; ++d) {
    const WeekdayTripProfile& p = profiles[d];
    if (p.depart_min >= p.depart_max || p.depart_std < 0 || p.duration_std < 0 ||
        p.distance_logstd < 0 || p.distance_min_km > p.distance_max_km || p.duration_min <= 0)
      throw ConfigError(std::string("trip synthesis: degenerate distribution for ") +
                        kWeekdayNames[d]);
    if (p.depart_min + p.duration_min > 1439)
      throw ConfigError(std::string("trip synthesis: no feasible trip window on ") +
                        kWeekdayNames[d]);
    double sh = stay_home_probability[d];
    if (sh < 0 || sh > 1) throw ConfigError("trip synthesis: stay-home probability out of [0,1]");
  }
  if (arrival_cutoff_minute <= 0 || arrival_cutoff_minute > 1439)
    throw ConfigError("trip synthesis: arrival cutoff out of range");
}

TripLibrary synth_trip_library(std::uint64_t seed, const TripSynthesisSpec& spec) {
  spec.validate();
  TripLibrary lib;
  lib.no_trip_probability = spec.stay_home_probability;
  Rng rng(derive_seed(seed, 0x7261697073ULL));
  for (int d = 0; d < kNumWeekdays; ++d) {
    const WeekdayTripProfile& p = spec.profiles[d];
    for (int i = 0; i < spec.trips_per_weekday; ++i) {
      TripRecord t;
      t.weekday = static_cast<Weekday>(d);
      double dep = rng.next_normal(p.depart_mean, p.depart_std);
      dep = std::clamp(dep, p.depart_min, p.depart_max);
      double dur = rng.next_normal(p.duration_mean, p.duration_std);
      double max_dur = static_cast<double>(spec.arrival_cutoff_minute) - dep;
      dur = std::clamp(dur, p.duration_min, std::max(p.duration_min, max_dur));
      double dist = rng.next_lognormal(p.distance_logmean, p.distance_logstd);
      dist = std::clamp(dist, p.distance_min_km, p.distance_max_km);
      t.depart_minute = static_cast<int>(std::lround(dep));
      t.arrive_minute = std::min(1439, static_cast<int>(std::lround(dep + dur)));
      if (t.arrive_minute <= t.depart_minute) t.arrive_minute = t.depart_minute + 1;
      t.distance_km = dist;
      if (!t.valid())
        throw ConfigError("trip synthesis produced an invalid record; check the spec");
      lib.trips.push_back(t);
    }
  }
  lib.rebuild_index();
  return lib;
}

TripLibrary load_trip_library(const std::string& path, const LoadOptions& opts,
                              LoadStats* stats) {
  csv::Table table = csv::read_file(path);
  auto col = [&](const char* key) {
    auto it = opts.schema.find(key);
    if (it == opts.schema.end()) throw ConfigError(std::string("trip schema misses key ") + key);
    int c = table.column(it->second);
    if (c < 0) throw ConfigError("trip CSV misses column " + it->second + " in " + path);
    return c;
  };
  int c_day = col("weekday"), c_dep = col("depart"), c_arr = col("arrive"), c_dist = col("distance");

  TripLibrary lib;
  lib.no_trip_probability.fill(opts.no_trip_probability);
  std::size_t dropped = 0;
  for (const auto& row : table.rows) {
    std::size_t need = static_cast<std::size_t>(std::max({c_day, c_dep, c_arr, c_dist})) + 1;
    if (row.size() < need) {
      ++dropped;
      continue;
    }
    TripRecord t;
    try {
      t.weekday = parse_weekday(row[c_day]);
      t.depart_minute = std::stoi(row[c_dep]);
      t.arrive_minute = std::stoi(row[c_arr]);
      t.distance_km = std::stod(row[c_dist]);
    } catch (const std::exception&) {
      ++dropped;
      continue;
    }
    if (!t.valid()) {
      ++dropped;
      continue;
    }
    lib.trips.push_back(t);
  }
  if (stats) {
    stats->accepted = lib.trips.size();
    stats->dropped = dropped;
  }
  std::size_t total = lib.trips.size() + dropped;
  if (total == 0) throw ConfigError("trip CSV has no data rows: " + path);
  if (static_cast<double>(dropped) > opts.max_reject_ratio * static_cast<double>(total))
    throw ConfigError("trip CSV " + path + ": " + std::to_string(dropped) + " of " +
                      std::to_string(total) + " rows rejected, above the configured ratio");
  lib.rebuild_index();
  for (int d = 0; d < kNumWeekdays; ++d)
    if (lib.by_weekday[d].empty())
      throw ConfigError(std::string("trip CSV ") + path + ": no valid trips for " +
                        kWeekdayNames[d]);
  return lib;
}

void write_trip_library(const std::string& path, const TripLibrary& lib) {
  csv::Writer out(path);
  out.row({"weekday", "depart_minute", "arrive_minute", "distance_km"});
  for (const TripRecord& t : lib.trips)
    out.row({weekday_name(t.weekday), std::to_string(t.depart_minute),
             std::to_string(t.arrive_minute), csv::format_double(t.distance_km)});
}

std::optional<TripRecord> sample_trip(const TripLibrary& lib, Weekday day, Rng& rng) {
  int d = static_cast<int>(day);
  if (lib.by_weekday[d].empty()) throw ConfigError("sample_trip: empty weekday partition");
  if (rng.next_bernoulli(lib.no_trip_probability[d])) return std::nullopt;
  const auto& pool = lib.by_weekday[d];
  std::uint64_t k = rng.next_below(pool.size());
  return lib.trips[pool[k]];
}

}  // namespace evflex
