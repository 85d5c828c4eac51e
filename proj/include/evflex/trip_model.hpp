#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evflex/rng.hpp"

namespace evflex {

enum class Weekday : int { Mon = 0, Tue, Wed, Thu, Fri, Sat, Sun };
constexpr int kNumWeekdays = 7;

const char* weekday_name(Weekday d);
Weekday parse_weekday(const std::string& s);

// One home-to-home trip, minute resolution. Multi-day trips are excluded:
// arrive is on the same calendar day as depart.
struct TripRecord {
  Weekday weekday = Weekday::Mon;
  int depart_minute = 0;   // [0, 1439]
  int arrive_minute = 0;   // [0, 1439], strictly after depart
  double distance_km = 0.0;

  bool valid() const {
    return depart_minute >= 0 && arrive_minute <= 1439 && depart_minute < arrive_minute &&
           distance_km >= 0.0;
  }
  bool operator==(const TripRecord&) const = default;
};

// The trip pool: all records plus a per-weekday index, and the explicit
// probability that a vehicle stays home on a given weekday.
struct TripLibrary {
  std::vector<TripRecord> trips;
  std::array<std::vector<int>, kNumWeekdays> by_weekday;
  std::array<double, kNumWeekdays> no_trip_probability{};

  void rebuild_index();
  bool operator==(const TripLibrary& o) const {
    return trips == o.trips && no_trip_probability == o.no_trip_probability;
  }
  std::uint64_t content_hash() const;
};

struct DegradationParams {
  double cyc_factor = 0.00004;      // per cycled share of capacity
  double cal_const = 0.0000006;     // per plugged-in hour
  double cal_flex = 0.0000009;      // per plugged-in hour at full SOC
  double oversize_factor = 1.1;     // installed vs usable capacity
  double lifetime_fraction = 0.25;  // capacity loss defining end of life
};

enum class VehicleKind { BEV, PHEV };

struct VehicleClass {
  VehicleKind kind = VehicleKind::BEV;
  int year = 2020;
  double battery_capacity_kwh = 30.0;
  double consumption_kwh_per_km = 0.18;
  double charger_power_kw = 10.0;
  double emergency_distance_km = 50.0;
  double charge_efficiency = 0.85;           // charger in/out efficiency
  double battery_cost_eur_per_kwh = 175.0;
  double charger_cost_eur_per_kw = 220.0;
  DegradationParams degradation;

  double emergency_soc_kwh() const { return emergency_distance_km * consumption_kwh_per_km; }
  void validate() const;

  // Bundled per-decade defaults (vehicle efficiency, pack size, charger power
  // and battery cost all improve towards 2050).
  static VehicleClass bundled_default(VehicleKind kind, int year);

  std::string id() const;
  std::uint64_t content_hash() const;
};

// Per-weekday sampling distributions used by the synthetic generator.
// Departures and durations are clipped normals; distances are clipped
// lognormals. All times in minutes of day.
struct WeekdayTripProfile {
  double depart_mean = 465.0;   // 07:45
  double depart_std = 75.0;
  double depart_min = 300.0;    // 05:00
  double depart_max = 1200.0;   // 20:00
  double duration_mean = 540.0; // 9 h away from home
  double duration_std = 120.0;
  double duration_min = 30.0;
  double distance_logmean = 3.55;  // ~35 km median
  double distance_logstd = 0.55;
  double distance_min_km = 1.0;
  double distance_max_km = 150.0;
};

struct TripSynthesisSpec {
  std::array<WeekdayTripProfile, kNumWeekdays> profiles;
  std::array<double, kNumWeekdays> stay_home_probability;
  int trips_per_weekday = 400;
  // latest allowed arrival; keeps overnight charging finished well before the
  // early-morning hours used as representative-week boundaries
  int arrival_cutoff_minute = 1379;  // 22:59

  static TripSynthesisSpec bundled_default();
  void validate() const;
};

// --- Operations ---------------------------------------------------------

struct LoadOptions {
  std::map<std::string, std::string> schema = {
      {"weekday", "weekday"},
      {"depart", "depart_minute"},
      {"arrive", "arrive_minute"},
      {"distance", "distance_km"},
  };
  double no_trip_probability = 0.15;
  double max_reject_ratio = 0.05;
};

struct LoadStats {
  std::size_t accepted = 0;
  std::size_t dropped = 0;
};

TripLibrary load_trip_library(const std::string& path, const LoadOptions& opts = {},
                              LoadStats* stats = nullptr);
void write_trip_library(const std::string& path, const TripLibrary& lib);

TripLibrary synth_trip_library(std::uint64_t seed, const TripSynthesisSpec& spec);

// Uniform draw over the weekday's pool plus the stay-home mass.
// Returns nullopt for "no trip".
std::optional<TripRecord> sample_trip(const TripLibrary& lib, Weekday day, Rng& rng);

}  // namespace evflex
