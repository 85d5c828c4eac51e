// Benchmark: serial reference vs OpenMP fleet construction. The two paths
// must agree bit for bit; this target reports the speedup.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "evflex/fleet_profile.hpp"

using namespace evflex;
using Clock = std::chrono::steady_clock;

int main(int argc, char** argv) {
  int vehicles = argc > 1 ? std::atoi(argv[1]) : 2000;
  TripLibrary lib = synth_trip_library(7, TripSynthesisSpec::bundled_default());
  VehicleClass cls = VehicleClass::bundled_default(VehicleKind::BEV, 2030);

#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("OpenMP not enabled; both paths run serially\n");
#endif
  std::printf("simulating %d vehicles over %d hours\n", vehicles, kHoursPerYear);

  // full-size warm-up so neither timed pass pays the initial page faults
  build_fleet_profile_serial(lib, cls, vehicles, 99, vehicles, "warmup");

  // interleaved rounds, best time of each path
  double ts = 1e30, tp = 1e30;
  FleetProfile serial, parallel;
  for (int round = 0; round < 3; ++round) {
    auto t0 = Clock::now();
    serial = build_fleet_profile_serial(lib, cls, vehicles, 99, vehicles, "bench");
    auto t1 = Clock::now();
    parallel = build_fleet_profile(lib, cls, vehicles, 99, vehicles, "bench");
    auto t2 = Clock::now();
    ts = std::min(ts, std::chrono::duration<double>(t1 - t0).count());
    tp = std::min(tp, std::chrono::duration<double>(t2 - t1).count());
  }
  std::printf("serial reference: %.3f s (%.1f vehicles/s)\n", ts, vehicles / ts);
  std::printf("parallel:         %.3f s (%.1f vehicles/s)\n", tp, vehicles / tp);
  std::printf("speedup:          %.2fx\n", ts / tp);

  bool identical = serial.passive_load_mw == parallel.passive_load_mw &&
                   serial.soc_min_mwh == parallel.soc_min_mwh &&
                   serial.soc_max_mwh == parallel.soc_max_mwh &&
                   serial.trip_withdrawal_mwh == parallel.trip_withdrawal_mwh &&
                   serial.soc_injection_mwh == parallel.soc_injection_mwh &&
                   serial.inflexible_load_mw == parallel.inflexible_load_mw &&
                   serial.available_count == parallel.available_count;
  std::printf("bit-identical:    %s\n", identical ? "yes" : "NO");
  return identical ? 0 : 1;
}
