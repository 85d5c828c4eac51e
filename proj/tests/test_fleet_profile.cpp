#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "evflex/errors.hpp"
#include "evflex/fleet_profile.hpp"

using namespace evflex;

namespace {

// library where every weekday has exactly one fixed trip
TripLibrary fixed_trip_library(int depart_minute, int arrive_minute, double distance_km,
                               double stay_home = 0.0) {
  TripLibrary lib;
  for (int d = 0; d < kNumWeekdays; ++d)
    lib.trips.push_back({static_cast<Weekday>(d), depart_minute, arrive_minute, distance_km});
  lib.rebuild_index();
  lib.no_trip_probability.fill(stay_home);
  return lib;
}

TripLibrary idle_library() { return fixed_trip_library(510, 1035, 40.0, 1.0); }

VehicleClass bev2020() { return VehicleClass::bundled_default(VehicleKind::BEV, 2020); }

}  // namespace

TEST_CASE("idle vehicle: available all year, zero loads, constant bounds") {
  VehicleSchedule s = build_vehicle_schedule(idle_library(), bev2020(), 1);
  for (int h = 0; h < kHoursPerYear; ++h) {
    CHECK(s.availability[h] == 1.0);
    CHECK(s.passive_load_kw[h] == 0.0);
    CHECK(s.inflexible_load_kw[h] == 0.0);
    CHECK(s.trip_withdrawal_kwh[h] == 0.0);
    CHECK(s.soc_min_kwh[h] == doctest::Approx(9.0));
    CHECK(s.soc_max_kwh[h] == doctest::Approx(30.0));
    CHECK(s.passive_soc_kwh[h] == doctest::Approx(30.0));
  }
}

TEST_CASE("hand-run trip: departure 08:30, arrival 17:15, 40 km") {
  // residual 30 - 7.2 = 22.8 >= 9, so no emergency top-up; passive charges
  // the 7.2 kWh deficit within the return hour
  TripLibrary lib = fixed_trip_library(510, 1035, 40.0);
  VehicleSchedule s = build_vehicle_schedule(lib, bev2020(), 1);
  const int day = 3;  // any mid-week day
  const int base = day * 24;
  for (int h = 8; h <= 17; ++h) CHECK(s.availability[base + h] == 0.0);
  CHECK(s.availability[base + 7] == 1.0);
  CHECK(s.availability[base + 18] == 1.0);
  CHECK(s.trip_withdrawal_kwh[base + 8] == doctest::Approx(30.0));
  CHECK(s.inflexible_load_kw[base + 18] == 0.0);
  CHECK(s.soc_injection_kwh[base + 18] == doctest::Approx(22.8));
  CHECK(s.passive_load_kw[base + 18] == doctest::Approx(7.2));
  CHECK(s.passive_load_kw[base + 19] == 0.0);
  CHECK(s.passive_soc_kwh[base + 18] == doctest::Approx(30.0));
  // blocked hours carry zero bounds; the hour before departure demands a
  // full battery (earliest weekday departure rule)
  CHECK(s.soc_max_kwh[base + 8] == 0.0);
  CHECK(s.soc_min_kwh[base + 7] == doctest::Approx(30.0));
  CHECK(s.soc_min_kwh[base + 18] == doctest::Approx(9.0));
}

TEST_CASE("hand-run trip: 130 km forces an emergency top-up") {
  // residual 30 - 23.4 = 6.6 < 9 -> inflexible load (9 - 6.6)/0.85 at the
  // return hour; injection is the residual itself
  TripLibrary lib = fixed_trip_library(510, 1035, 130.0);
  VehicleSchedule s = build_vehicle_schedule(lib, bev2020(), 1);
  const int base = 3 * 24;
  CHECK(s.soc_injection_kwh[base + 18] == doctest::Approx(6.6));
  CHECK(s.inflexible_load_kw[base + 18] == doctest::Approx((9.0 - 6.6) / 0.85));
  CHECK(s.inflexible_load_kw[base + 19] == 0.0);
  // the lower bound tracks the forced ramp: reaches soc_em within the hour
  CHECK(s.soc_min_kwh[base + 18] == doctest::Approx(9.0));
  CHECK(s.clamp_warnings == 0);
}

TEST_CASE("trip beyond battery range clamps the residual and warns") {
  TripLibrary lib = fixed_trip_library(510, 1035, 400.0);  // 72 kWh > 30 kWh pack
  VehicleSchedule s = build_vehicle_schedule(lib, bev2020(), 1);
  const int base = 3 * 24;
  CHECK(s.soc_injection_kwh[base + 18] == doctest::Approx(0.0));
  CHECK(s.clamp_warnings > 300);  // one per driven day
  // passive charging still refills the whole pack
  double sum = 0.0;
  for (int h = base + 18; h < base + 24; ++h) sum += s.passive_load_kw[h];
  CHECK(sum == doctest::Approx(30.0));
}

TEST_CASE("withdrawals sit on 1->0 availability edges, injections on 0->1") {
  TripLibrary lib = synth_trip_library(5, TripSynthesisSpec::bundled_default());
  VehicleSchedule s = build_vehicle_schedule(lib, bev2020(), 42);
  for (int h = 1; h < kHoursPerYear - 1; ++h) {
    if (s.trip_withdrawal_kwh[h] != 0.0) {
      CHECK(s.availability[h] == 0.0);
      CHECK(s.availability[h - 1] == 1.0);
    }
    if (s.soc_injection_kwh[h] != 0.0) {
      CHECK(s.availability[h] == 1.0);
      CHECK(s.availability[h - 1] == 0.0);
    }
    // emergency top-up only runs in a contiguous stretch from an arrival
    if (s.inflexible_load_kw[h] != 0.0) {
      CHECK(s.availability[h] == 1.0);
      bool at_return = s.soc_injection_kwh[h] != 0.0;
      bool continues = s.inflexible_load_kw[h - 1] != 0.0;
      CHECK((at_return || continues));
    }
  }
}

TEST_CASE("passive charging conserves trip energy over idle-to-idle windows") {
  TripLibrary lib = synth_trip_library(11, TripSynthesisSpec::bundled_default());
  VehicleClass cls = bev2020();
  VehicleSchedule s = build_vehicle_schedule(lib, cls, 7);
  REQUIRE(s.clamp_warnings == 0);
  // full-year energy balance: charged == driven, up to the year-end edge
  double charged = std::accumulate(s.passive_load_kw.begin(), s.passive_load_kw.end(), 0.0);
  double driven = 0.0;
  for (int h = 0; h < kHoursPerYear; ++h)
    driven += s.trip_withdrawal_kwh[h] - s.soc_injection_kwh[h];
  // withdrawals without a matching injection (year-end trips) excluded:
  // passive SOC ends the year full whenever the vehicle is home
  if (s.availability[kHoursPerYear - 1] == 1.0 &&
      s.passive_soc_kwh[kHoursPerYear - 1] == doctest::Approx(cls.battery_capacity_kwh)) {
    CHECK(charged == doctest::Approx(driven).epsilon(1e-9));
  }
}

TEST_CASE("passive SOC trajectory respects the hourly bounds") {
  TripLibrary lib = synth_trip_library(13, TripSynthesisSpec::bundled_default());
  VehicleSchedule s = build_vehicle_schedule(lib, bev2020(), 99);
  for (int h = 0; h < kHoursPerYear; ++h) {
    CHECK(s.passive_soc_kwh[h] <= s.soc_max_kwh[h] + 1e-9);
    // the minimum bound binds the *smart* trajectory; the passive one may sit
    // below it only while the emergency ramp is still running, never below
    // the ramp level itself
    if (s.passive_load_kw[h] == 0.0 && s.availability[h] == 1.0)
      CHECK(s.passive_soc_kwh[h] >= s.soc_min_kwh[h] - 1e-9);
  }
}

TEST_CASE("aggregation: one idle vehicle at stock 1000 gives constant 30 MWh") {
  VehicleSchedule s = build_vehicle_schedule(idle_library(), bev2020(), 1);
  FleetProfile p = aggregate_fleet({s}, 1000.0, "area", bev2020());
  for (int h = 0; h < kHoursPerYear; ++h) {
    CHECK(p.soc_max_mwh[h] == doctest::Approx(30.0));
    CHECK(p.available_count[h] == doctest::Approx(1000.0));
  }
}

TEST_CASE("aggregation is linear and homogeneous") {
  TripLibrary lib = synth_trip_library(17, TripSynthesisSpec::bundled_default());
  VehicleClass cls = bev2020();
  VehicleSchedule a = build_vehicle_schedule(lib, cls, 1);
  VehicleSchedule b = build_vehicle_schedule(idle_library(), cls, 2);
  FleetProfile pa = aggregate_fleet({a}, 1.0, "x", cls);
  FleetProfile pb = aggregate_fleet({b}, 1.0, "x", cls);
  FleetProfile pab = aggregate_fleet({a, b}, 2.0, "x", cls);
  for (int h = 0; h < kHoursPerYear; ++h) {
    CHECK(pab.passive_load_mw[h] ==
          doctest::Approx(pa.passive_load_mw[h] + pb.passive_load_mw[h]).epsilon(1e-12));
    CHECK(pab.soc_max_mwh[h] ==
          doctest::Approx(pa.soc_max_mwh[h] + pb.soc_max_mwh[h]).epsilon(1e-12));
  }
  // N copies equal N times one copy
  FleetProfile p4 = aggregate_fleet({a, a, a, a}, 4.0, "x", cls);
  for (int h = 0; h < kHoursPerYear; ++h)
    CHECK(p4.trip_withdrawal_mwh[h] == doctest::Approx(4.0 * pa.trip_withdrawal_mwh[h]));
}

TEST_CASE("scale_to_stock") {
  VehicleSchedule s = build_vehicle_schedule(idle_library(), bev2020(), 1);
  FleetProfile p = aggregate_fleet({s}, 1000.0, "dk", bev2020());
  SUBCASE("zero stock zeroes everything") {
    FleetProfile z = scale_to_stock(p, 0.0);
    CHECK(z.all_zero());
  }
  SUBCASE("doubling stock doubles every series") {
    FleetProfile d = scale_to_stock(p, 2000.0);
    for (int h = 0; h < kHoursPerYear; ++h) {
      CHECK(d.soc_max_mwh[h] == doctest::Approx(2.0 * p.soc_max_mwh[h]));
      CHECK(d.available_count[h] == doctest::Approx(2.0 * p.available_count[h]));
    }
  }
  SUBCASE("2050 class at the 698300-vehicle stock peaks at 34915 MWh") {
    VehicleClass cls50 = VehicleClass::bundled_default(VehicleKind::BEV, 2050);
    VehicleSchedule idle = build_vehicle_schedule(idle_library(), cls50, 3);
    FleetProfile base = aggregate_fleet({idle}, 1000.0, "dk", cls50);
    FleetProfile dk2050 = scale_to_stock(base, 698300.0);
    double peak = 0.0;
    for (double v : dk2050.soc_max_mwh) peak = std::max(peak, v);
    CHECK(peak == doctest::Approx(34915.0));
  }
  SUBCASE("year table produces one profile per year and rejects gaps") {
    std::map<int, double> stocks = {{2020, 500.0}, {2030, 2000.0}};
    auto by_year = scale_to_stock(p, stocks, {2020, 2030});
    CHECK(by_year.at(2030).stock_count == doctest::Approx(2000.0));
    CHECK(by_year.at(2030).soc_max_mwh[0] == doctest::Approx(2.0 * p.soc_max_mwh[0]));
    CHECK_THROWS_AS(scale_to_stock(p, stocks, {2020, 2040}), ConfigError);
  }
}

TEST_CASE("fixed seed reproduces the profile bit for bit") {
  TripLibrary lib = synth_trip_library(23, TripSynthesisSpec::bundled_default());
  VehicleClass cls = bev2020();
  FleetProfile a = build_fleet_profile(lib, cls, 50, 7, 500.0, "x");
  FleetProfile b = build_fleet_profile(lib, cls, 50, 7, 500.0, "x");
  CHECK(a.passive_load_mw == b.passive_load_mw);
  CHECK(a.soc_min_mwh == b.soc_min_mwh);
  CHECK(a.trip_withdrawal_mwh == b.trip_withdrawal_mwh);
}

TEST_CASE("parallel build matches the serial reference bit for bit") {
  TripLibrary lib = synth_trip_library(29, TripSynthesisSpec::bundled_default());
  VehicleClass cls = bev2020();
  FleetProfile par = build_fleet_profile(lib, cls, 64, 3, 640.0, "x");
  FleetProfile ser = build_fleet_profile_serial(lib, cls, 64, 3, 640.0, "x");
  CHECK(par.available_count == ser.available_count);
  CHECK(par.inflexible_load_mw == ser.inflexible_load_mw);
  CHECK(par.passive_load_mw == ser.passive_load_mw);
  CHECK(par.passive_soc_mwh == ser.passive_soc_mwh);
  CHECK(par.soc_injection_mwh == ser.soc_injection_mwh);
  CHECK(par.trip_withdrawal_mwh == ser.trip_withdrawal_mwh);
  CHECK(par.soc_max_mwh == ser.soc_max_mwh);
  CHECK(par.soc_min_mwh == ser.soc_min_mwh);
}

TEST_CASE("partition aggregation equals whole-set aggregation") {
  TripLibrary lib = synth_trip_library(31, TripSynthesisSpec::bundled_default());
  VehicleClass cls = bev2020();
  std::vector<VehicleSchedule> all;
  for (int v = 0; v < 10; ++v) all.push_back(build_vehicle_schedule(lib, cls, 100 + v));
  FleetProfile whole = aggregate_fleet(all, 10.0, "x", cls);
  std::vector<VehicleSchedule> first(all.begin(), all.begin() + 4);
  std::vector<VehicleSchedule> second(all.begin() + 4, all.end());
  FleetProfile pa = aggregate_fleet(first, 4.0, "x", cls);
  FleetProfile pb = aggregate_fleet(second, 6.0, "x", cls);
  for (int h = 0; h < kHoursPerYear; ++h)
    CHECK(whole.passive_load_mw[h] ==
          doctest::Approx(pa.passive_load_mw[h] + pb.passive_load_mw[h]).epsilon(1e-12));
}

TEST_CASE("aggregate passive error: degenerate fleets have zero error") {
  VehicleClass cls = bev2020();
  SUBCASE("idle fleet") {
    VehicleSchedule s = build_vehicle_schedule(idle_library(), cls, 1);
    FleetProfile p = aggregate_fleet({s, s, s}, 3.0, "x", cls);
    PassiveErrorHistogram h = passive_feasibility_error(p);
    CHECK(h.max_abs_error == 0.0);
  }
  SUBCASE("single vehicle: aggregation loses nothing") {
    TripLibrary lib = synth_trip_library(37, TripSynthesisSpec::bundled_default());
    VehicleSchedule s = build_vehicle_schedule(lib, cls, 5);
    FleetProfile p = aggregate_fleet({s}, 1.0, "x", cls);
    PassiveErrorHistogram h = passive_feasibility_error(p);
    CHECK(h.max_abs_error <= 1e-9);
  }
}

TEST_CASE("aggregate passive error: synthetic 1000-vehicle year stays in band") {
  TripLibrary lib = synth_trip_library(41, TripSynthesisSpec::bundled_default());
  VehicleClass cls = bev2020();
  FleetProfile p = build_fleet_profile(lib, cls, 1000, 12345, 1000.0, "x");
  PassiveErrorHistogram h = passive_feasibility_error(p);
  CHECK(h.max_abs_error <= 0.04);
  CHECK(h.share_within(0.01) >= 0.80);
}

TEST_CASE("fleet CSV and cache round-trip") {
  TripLibrary lib = synth_trip_library(43, TripSynthesisSpec::bundled_default());
  VehicleClass cls = bev2020();
  FleetProfile p = build_fleet_profile(lib, cls, 20, 9, 200.0, "x");

  write_fleet_csv("/tmp/evflex_fleet.csv", p);
  FleetProfile back = read_fleet_csv("/tmp/evflex_fleet.csv");
  REQUIRE(back.hours() == p.hours());
  for (int h = 0; h < p.hours(); ++h) {
    CHECK(back.passive_load_mw[h] == p.passive_load_mw[h]);
    CHECK(back.soc_max_mwh[h] == p.soc_max_mwh[h]);
  }

  std::uint64_t key = fleet_cache_key(lib, cls, 9, 200.0, 20);
  write_fleet_cache("/tmp/evflex_fleet.bin", p, key);
  auto cached = read_fleet_cache("/tmp/evflex_fleet.bin", key);
  REQUIRE(cached.has_value());
  CHECK(cached->passive_load_mw == p.passive_load_mw);
  CHECK(cached->soc_min_mwh == p.soc_min_mwh);
  CHECK(!read_fleet_cache("/tmp/evflex_fleet.bin", key + 1).has_value());
}

TEST_CASE("aggregate_fleet rejects empty input and mismatched calendars") {
  VehicleClass cls = bev2020();
  CHECK_THROWS_AS(aggregate_fleet({}, 1.0, "x", cls), ConfigError);
  VehicleSchedule a = build_vehicle_schedule(idle_library(), cls, 1);
  VehicleSchedule b = a;
  b.availability.resize(100);
  CHECK_THROWS_AS(aggregate_fleet({a, b}, 2.0, "x", cls), ConfigError);
}
