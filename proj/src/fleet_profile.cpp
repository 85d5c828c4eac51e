#include "evflex/fleet_profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "evflex/csv.hpp"
#include "evflex/errors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace evflex {

namespace {

struct DayTrip {
  int day;
  int depart_hour;   // absolute hour of year
  int arrive_hour;   // absolute hour of year (same day)
  double distance_km;
};

// One trip at most per day; a new trip needs at least one plugged hour after
// the previous return, otherwise it is dropped.
std::vector<DayTrip> draw_trips(const TripLibrary& lib, Rng& rng, int* dropped) {
  std::vector<DayTrip> trips;
  int last_return_hour = -2;
  for (int day = 0; day < kDaysPerYear; ++day) {
    Weekday w = static_cast<Weekday>(day % 7);
    std::optional<TripRecord> rec = sample_trip(lib, w, rng);
    if (!rec) continue;
    DayTrip t;
    t.day = day;
    t.depart_hour = day * 24 + rec->depart_minute / 60;
    t.arrive_hour = day * 24 + rec->arrive_minute / 60;
    t.distance_km = rec->distance_km;
    if (t.depart_hour < last_return_hour + 2) {
      ++*dropped;
      continue;
    }
    last_return_hour = t.arrive_hour;
    trips.push_back(t);
  }
  return trips;
}

}  // namespace

VehicleSchedule build_vehicle_schedule(const TripLibrary& lib, const VehicleClass& cls,
                                       std::uint64_t seed) {
  cls.validate();
  const int T = kHoursPerYear;
  VehicleSchedule s;
  s.availability.assign(T, 1.0);
  s.trip_withdrawal_kwh.assign(T, 0.0);
  s.soc_injection_kwh.assign(T, 0.0);
  s.inflexible_load_kw.assign(T, 0.0);
  s.passive_load_kw.assign(T, 0.0);
  s.passive_soc_kwh.assign(T, 0.0);
  s.soc_max_kwh.assign(T, 0.0);
  s.soc_min_kwh.assign(T, 0.0);

  Rng rng(seed);
  std::vector<DayTrip> trips = draw_trips(lib, rng, &s.dropped_trips);

  const double cap = cls.battery_capacity_kwh;
  const double soc_em = cls.emergency_soc_kwh();
  const double p_ch = cls.charger_power_kw;
  const double eta = cls.charge_efficiency;

  for (const DayTrip& t : trips)
    for (int h = t.depart_hour; h <= t.arrive_hour && h < T; ++h) s.availability[h] = 0.0;

  // earliest departure hour-of-day per weekday, over the whole year
  int earliest[kNumWeekdays];
  std::fill(std::begin(earliest), std::end(earliest), -1);
  for (const DayTrip& t : trips) {
    int w = t.day % 7;
    int hod = t.depart_hour - t.day * 24;
    if (earliest[w] < 0 || hod < earliest[w]) earliest[w] = hod;
  }

  // forced lower SOC bound while plugged in; relaxed along the emergency
  // top-up ramp so the bound never exceeds what the forced charge can reach
  std::vector<double> min_level(T, soc_em);

  double pc_soc = cap;  // passive data set starts the year fully charged
  for (std::size_t i = 0; i < trips.size(); ++i) {
    const DayTrip& t = trips[i];
    // the full battery leaves the virtual storage at departure
    s.trip_withdrawal_kwh[t.depart_hour] = cap;
    if (pc_soc < cap - 1e-9) ++s.incomplete_pc_charges;
    pc_soc = 0.0;  // out on the road

    double used = t.distance_km * cls.consumption_kwh_per_km;
    double residual = cap - used;
    if (residual < 0.0) {
      residual = 0.0;  // PHEV overflow distance is fueled; BEV clamp is flagged
      ++s.clamp_warnings;
    }

    int h_ret = t.arrive_hour + 1;
    if (h_ret >= T) break;  // returns after the modeled year ends
    int next_depart = i + 1 < trips.size() ? trips[i + 1].depart_hour : T;

    s.soc_injection_kwh[h_ret] = residual;

    // emergency top-up: bring the battery to soc_em as fast as the charger
    // allows, spilling into following plugged hours
    if (residual < soc_em) {
      double level = residual;
      for (int h = h_ret; h < next_depart && h < T && level < soc_em - 1e-12; ++h) {
        double gain = std::min(soc_em - level, eta * p_ch);
        s.inflexible_load_kw[h] = gain / eta;
        level += gain;
        min_level[h] = std::min(min_level[h], level);
      }
    }

    // passive charging: full deficit at charger power from the return hour on
    pc_soc = residual;
    for (int h = h_ret; h < next_depart && h < T; ++h) {
      double g = std::min(p_ch, cap - pc_soc);
      if (g <= 1e-12) {
        s.passive_soc_kwh[h] = pc_soc;
        continue;
      }
      s.passive_load_kw[h] = g;
      pc_soc += g;
      s.passive_soc_kwh[h] = pc_soc;
    }
  }

  // fill passive SOC for plugged hours not touched above (idle at full, and
  // the stretch before the first trip)
  {
    double carry = cap;
    for (int h = 0; h < T; ++h) {
      if (s.availability[h] == 0.0) {
        s.passive_soc_kwh[h] = 0.0;
        carry = 0.0;
        continue;
      }
      if (s.passive_soc_kwh[h] == 0.0 && s.passive_load_kw[h] == 0.0 &&
          s.soc_injection_kwh[h] == 0.0) {
        // untouched plugged hour: SOC persists
        s.passive_soc_kwh[h] = carry;
      }
      carry = s.passive_soc_kwh[h];
    }
  }

  for (int h = 0; h < T; ++h) {
    if (s.availability[h] > 0.0) {
      s.soc_max_kwh[h] = cap;
      s.soc_min_kwh[h] = std::min(min_level[h], soc_em);
    }
  }

  // the fleet must be full one hour before the weekday's earliest departure
  for (const DayTrip& t : trips) {
    int w = t.day % 7;
    int req = t.day * 24 + earliest[w] - 1;
    while (req >= 0 && s.availability[req] == 0.0) --req;
    if (req >= 0 && req < t.depart_hour) s.soc_min_kwh[req] = cap;
  }

  return s;
}

bool FleetProfile::all_zero() const {
  for (const std::vector<double>* s :
       {&available_count, &inflexible_load_mw, &passive_load_mw, &soc_injection_mwh,
        &trip_withdrawal_mwh, &soc_max_mwh, &soc_min_mwh})
    for (double v : *s)
      if (v != 0.0) return false;
  return true;
}

FleetProfile aggregate_fleet(const std::vector<VehicleSchedule>& schedules, double stock_count,
                             const std::string& area, const VehicleClass& cls) {
  if (schedules.empty()) throw ConfigError("aggregate_fleet: no schedules");
  const int T = static_cast<int>(schedules.front().availability.size());
  for (const VehicleSchedule& s : schedules)
    if (!s.same_calendar(schedules.front()))
      throw ConfigError("aggregate_fleet: mismatched calendars");

  FleetProfile p;
  p.area = area;
  p.vehicle_class = cls;
  p.stock_count = stock_count;
  p.sample_size = static_cast<int>(schedules.size());
  p.available_count.assign(T, 0.0);
  p.inflexible_load_mw.assign(T, 0.0);
  p.passive_load_mw.assign(T, 0.0);
  p.passive_soc_mwh.assign(T, 0.0);
  p.soc_injection_mwh.assign(T, 0.0);
  p.trip_withdrawal_mwh.assign(T, 0.0);
  p.soc_max_mwh.assign(T, 0.0);
  p.soc_min_mwh.assign(T, 0.0);

  // fixed summation order keeps aggregation bit-reproducible
  for (const VehicleSchedule& s : schedules) {
    p.clamp_warnings += s.clamp_warnings;
    for (int t = 0; t < T; ++t) {
      p.available_count[t] += s.availability[t];
      p.inflexible_load_mw[t] += s.inflexible_load_kw[t];
      p.passive_load_mw[t] += s.passive_load_kw[t];
      p.passive_soc_mwh[t] += s.passive_soc_kwh[t];
      p.soc_injection_mwh[t] += s.soc_injection_kwh[t];
      p.trip_withdrawal_mwh[t] += s.trip_withdrawal_kwh[t];
      p.soc_max_mwh[t] += s.soc_max_kwh[t];
      p.soc_min_mwh[t] += s.soc_min_kwh[t];
    }
  }
  double scale = stock_count / static_cast<double>(p.sample_size);
  double unit = scale / 1000.0;  // kW -> MW, kWh -> MWh
  for (int t = 0; t < T; ++t) {
    p.available_count[t] *= scale;
    p.inflexible_load_mw[t] *= unit;
    p.passive_load_mw[t] *= unit;
    p.passive_soc_mwh[t] *= unit;
    p.soc_injection_mwh[t] *= unit;
    p.trip_withdrawal_mwh[t] *= unit;
    p.soc_max_mwh[t] *= unit;
    p.soc_min_mwh[t] *= unit;
  }
  return p;
}

namespace {

FleetProfile build_profile_impl(const TripLibrary& lib, const VehicleClass& cls, int sample_size,
                                std::uint64_t base_seed, double stock_count,
                                const std::string& area, bool parallel) {
  if (sample_size <= 0) throw ConfigError("build_fleet_profile: sample_size must be positive");
  std::vector<VehicleSchedule> all(static_cast<std::size_t>(sample_size));
  if (parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int v = 0; v < sample_size; ++v)
      all[v] = build_vehicle_schedule(lib, cls, base_seed ^ static_cast<std::uint64_t>(v));
  } else {
    for (int v = 0; v < sample_size; ++v)
      all[v] = build_vehicle_schedule(lib, cls, base_seed ^ static_cast<std::uint64_t>(v));
  }
  return aggregate_fleet(all, stock_count, area, cls);
}

}  // namespace

FleetProfile build_fleet_profile(const TripLibrary& lib, const VehicleClass& cls, int sample_size,
                                 std::uint64_t base_seed, double stock_count,
                                 const std::string& area) {
  return build_profile_impl(lib, cls, sample_size, base_seed, stock_count, area, true);
}

FleetProfile build_fleet_profile_serial(const TripLibrary& lib, const VehicleClass& cls,
                                        int sample_size, std::uint64_t base_seed,
                                        double stock_count, const std::string& area) {
  return build_profile_impl(lib, cls, sample_size, base_seed, stock_count, area, false);
}

FleetProfile scale_to_stock(const FleetProfile& profile, double stock_count) {
  if (profile.stock_count <= 0.0)
    throw ConfigError("scale_to_stock: profile has no reference stock");
  FleetProfile p = profile;
  double f = stock_count / profile.stock_count;
  p.stock_count = stock_count;
  for (auto* series :
       {&p.available_count, &p.inflexible_load_mw, &p.passive_load_mw, &p.passive_soc_mwh,
        &p.soc_injection_mwh, &p.trip_withdrawal_mwh, &p.soc_max_mwh, &p.soc_min_mwh})
    for (double& v : *series) v *= f;
  return p;
}

std::map<int, FleetProfile> scale_to_stock(const FleetProfile& profile,
                                           const std::map<int, double>& stock_by_year,
                                           const std::vector<int>& years) {
  std::map<int, FleetProfile> out;
  for (int year : years) {
    auto it = stock_by_year.find(year);
    if (it == stock_by_year.end())
      throw ConfigError("scale_to_stock: stock table misses year " + std::to_string(year));
    out.emplace(year, scale_to_stock(profile, it->second));
  }
  return out;
}

double PassiveErrorHistogram::share_within(double band) const {
  if (error.empty()) return 1.0;
  std::size_t n = 0;
  for (double e : error)
    if (std::fabs(e) <= band) ++n;
  return static_cast<double>(n) / static_cast<double>(error.size());
}

void PassiveErrorHistogram::write_csv(const std::string& path) const {
  csv::Writer out(path);
  out.row({"hour", "relative_error"});
  for (std::size_t t = 0; t < error.size(); ++t)
    out.row({std::to_string(t), csv::format_double(error[t])});
}

PassiveErrorHistogram passive_feasibility_error(const FleetProfile& profile) {
  const int T = profile.hours();
  PassiveErrorHistogram h;
  h.error.assign(T, 0.0);
  // passive charging applied to the aggregate storage instead of per vehicle
  double soc = profile.soc_max_mwh.empty() ? 0.0 : profile.soc_max_mwh[0];
  for (int t = 0; t < T; ++t) {
    soc += profile.soc_injection_mwh[t];
    soc -= profile.trip_withdrawal_mwh[t];
    if (soc < 0.0) soc = 0.0;
    double cap_mw = profile.charger_cap_mw(t);
    double room = std::max(0.0, profile.soc_max_mwh[t] - soc);
    double charge_mw = std::min(cap_mw, room);
    soc += charge_mw;
    if (soc > profile.soc_max_mwh[t]) soc = profile.soc_max_mwh[t];
    if (cap_mw > 1e-12) {
      h.error[t] = (charge_mw - profile.passive_load_mw[t]) / cap_mw;
      h.max_abs_error = std::max(h.max_abs_error, std::fabs(h.error[t]));
    }
  }
  return h;
}

void write_fleet_csv(const std::string& path, const FleetProfile& profile) {
  csv::Writer out(path);
  out.row({"hour", "available_count", "inflexible_load_mw", "passive_load_mw", "passive_soc_mwh",
           "soc_injection_mwh", "trip_withdrawal_mwh", "soc_min_mwh", "soc_max_mwh"});
  for (int t = 0; t < profile.hours(); ++t)
    out.row({std::to_string(t), csv::format_double(profile.available_count[t]),
             csv::format_double(profile.inflexible_load_mw[t]),
             csv::format_double(profile.passive_load_mw[t]),
             csv::format_double(profile.passive_soc_mwh[t]),
             csv::format_double(profile.soc_injection_mwh[t]),
             csv::format_double(profile.trip_withdrawal_mwh[t]),
             csv::format_double(profile.soc_min_mwh[t]),
             csv::format_double(profile.soc_max_mwh[t])});
}

FleetProfile read_fleet_csv(const std::string& path) {
  csv::Table t = csv::read_file(path);
  const char* cols[] = {"available_count",   "inflexible_load_mw", "passive_load_mw",
                        "passive_soc_mwh",   "soc_injection_mwh",  "trip_withdrawal_mwh",
                        "soc_min_mwh",       "soc_max_mwh"};
  FleetProfile p;
  int idx[8];
  for (int i = 0; i < 8; ++i) {
    idx[i] = t.column(cols[i]);
    if (idx[i] < 0) throw ConfigError("fleet CSV misses column " + std::string(cols[i]));
  }
  int T = static_cast<int>(t.rows.size());
  std::vector<double>* series[] = {&p.available_count,   &p.inflexible_load_mw,
                                   &p.passive_load_mw,   &p.passive_soc_mwh,
                                   &p.soc_injection_mwh, &p.trip_withdrawal_mwh,
                                   &p.soc_min_mwh,       &p.soc_max_mwh};
  for (auto* s : series) s->assign(T, 0.0);
  for (int r = 0; r < T; ++r)
    for (int i = 0; i < 8; ++i) (*series[i])[r] = std::strtod(t.rows[r][idx[i]].c_str(), nullptr);
  return p;
}

std::uint64_t fleet_cache_key(const TripLibrary& lib, const VehicleClass& cls,
                              std::uint64_t base_seed, double stock_count, int sample_size) {
  std::uint64_t h = lib.content_hash();
  h ^= cls.content_hash() + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  h ^= base_seed + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  std::uint64_t stock_bits;
  std::memcpy(&stock_bits, &stock_count, sizeof stock_bits);
  h ^= stock_bits + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  h ^= static_cast<std::uint64_t>(sample_size) + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2);
  return h;
}

namespace {
constexpr char kCacheMagic[9] = "EVFLTPRF";
}

void write_fleet_cache(const std::string& path, const FleetProfile& profile, std::uint64_t key) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write fleet cache: " + path);
  out.write(kCacheMagic, 8);
  out.write(reinterpret_cast<const char*>(&key), sizeof key);
  std::int32_t T = profile.hours();
  std::int32_t sample = profile.sample_size;
  out.write(reinterpret_cast<const char*>(&T), sizeof T);
  out.write(reinterpret_cast<const char*>(&sample), sizeof sample);
  out.write(reinterpret_cast<const char*>(&profile.stock_count), sizeof profile.stock_count);
  const std::vector<double>* series[] = {&profile.available_count,   &profile.inflexible_load_mw,
                                         &profile.passive_load_mw,   &profile.passive_soc_mwh,
                                         &profile.soc_injection_mwh, &profile.trip_withdrawal_mwh,
                                         &profile.soc_min_mwh,       &profile.soc_max_mwh};
  for (const auto* s : series)
    out.write(reinterpret_cast<const char*>(s->data()),
              static_cast<std::streamsize>(s->size() * sizeof(double)));
}

std::optional<FleetProfile> read_fleet_cache(const std::string& path, std::uint64_t expected_key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[8];
  std::uint64_t key = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&key), sizeof key);
  if (!in || std::memcmp(magic, kCacheMagic, 8) != 0 || key != expected_key) return std::nullopt;
  std::int32_t T = 0, sample = 0;
  FleetProfile p;
  in.read(reinterpret_cast<char*>(&T), sizeof T);
  in.read(reinterpret_cast<char*>(&sample), sizeof sample);
  in.read(reinterpret_cast<char*>(&p.stock_count), sizeof p.stock_count);
  if (!in || T <= 0 || sample <= 0) return std::nullopt;
  p.sample_size = sample;
  std::vector<double>* series[] = {&p.available_count,   &p.inflexible_load_mw,
                                   &p.passive_load_mw,   &p.passive_soc_mwh,
                                   &p.soc_injection_mwh, &p.trip_withdrawal_mwh,
                                   &p.soc_min_mwh,       &p.soc_max_mwh};
  for (auto* s : series) {
    s->assign(T, 0.0);
    in.read(reinterpret_cast<char*>(s->data()), static_cast<std::streamsize>(T * sizeof(double)));
  }
  if (!in) return std::nullopt;
  return p;
}

}  // namespace evflex
