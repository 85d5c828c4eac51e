#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "evflex/trip_model.hpp"

namespace evflex {

constexpr int kHoursPerYear = 8760;
constexpr int kDaysPerYear = 365;
// Day 0 of the simulated year is a Monday.

// One vehicle simulated over a full year. Loads are grid-side kW, energies
// battery-side kWh. Two data sets live side by side: the passive series (a
// vehicle that charges at full power on plug-in) and the flexible series
// (withdrawals, injections and the forced emergency top-up) consumed by the
// smart/V2G storage model.
struct VehicleSchedule {
  std::vector<double> availability;        // 0/1, blocked during trip hours
  std::vector<double> trip_withdrawal_kwh; // full battery leaves at departure
  std::vector<double> soc_injection_kwh;   // residual energy at first plugged hour
  std::vector<double> inflexible_load_kw;  // emergency top-up to SOC_em
  std::vector<double> passive_load_kw;
  std::vector<double> passive_soc_kwh;     // end-of-hour SOC under passive charging
  std::vector<double> soc_max_kwh;
  std::vector<double> soc_min_kwh;
  int clamp_warnings = 0;      // trips longer than the battery range
  int dropped_trips = 0;       // trips discarded because no plugged hour separated them
  int incomplete_pc_charges = 0;  // departures before passive charging finished

  bool same_calendar(const VehicleSchedule& o) const {
    return availability.size() == o.availability.size();
  }
};

// The aggregated virtual storage for one area and vehicle class: element-wise
// sums over the sampled vehicles, rescaled to the stock count, kW -> MW.
struct FleetProfile {
  std::string area;
  VehicleClass vehicle_class;
  double stock_count = 0.0;  // absolute number of vehicles represented
  int sample_size = 0;
  std::vector<double> available_count;     // vehicles plugged in
  std::vector<double> inflexible_load_mw;
  std::vector<double> passive_load_mw;
  std::vector<double> passive_soc_mwh;
  std::vector<double> soc_injection_mwh;
  std::vector<double> trip_withdrawal_mwh;
  std::vector<double> soc_max_mwh;
  std::vector<double> soc_min_mwh;
  int clamp_warnings = 0;

  int hours() const { return static_cast<int>(available_count.size()); }
  double charger_cap_mw(int t) const {
    return vehicle_class.charger_power_kw * available_count[t] / 1000.0;
  }
  bool all_zero() const;
};

VehicleSchedule build_vehicle_schedule(const TripLibrary& lib, const VehicleClass& cls,
                                       std::uint64_t seed);

FleetProfile aggregate_fleet(const std::vector<VehicleSchedule>& schedules, double stock_count,
                             const std::string& area, const VehicleClass& cls);

// Builds sample_size schedules (seed = base_seed ^ vehicle index) and
// aggregates them. The OpenMP path simulates vehicles in parallel and reduces
// in fixed vehicle order, so its result is bit-identical to the serial
// reference for any thread count.
FleetProfile build_fleet_profile(const TripLibrary& lib, const VehicleClass& cls, int sample_size,
                                 std::uint64_t base_seed, double stock_count,
                                 const std::string& area);
FleetProfile build_fleet_profile_serial(const TripLibrary& lib, const VehicleClass& cls,
                                        int sample_size, std::uint64_t base_seed,
                                        double stock_count, const std::string& area);

// Linear rescale to another vehicle count (stocks are per year).
FleetProfile scale_to_stock(const FleetProfile& profile, double stock_count);

// One rescaled profile per model year; every requested year must appear in
// the stock table.
std::map<int, FleetProfile> scale_to_stock(const FleetProfile& profile,
                                           const std::map<int, double>& stock_by_year,
                                           const std::vector<int>& years);

// Re-runs passive charging on the aggregate storage and compares the
// resulting load against the summed per-vehicle passive loads. A positive
// error means the aggregation overestimates usable charger capacity.
struct PassiveErrorHistogram {
  std::vector<double> error;  // per hour, relative to available charger capacity
  double max_abs_error = 0.0;
  double share_within(double band) const;
  void write_csv(const std::string& path) const;
};

PassiveErrorHistogram passive_feasibility_error(const FleetProfile& profile);

// CSV: one row per hour, fixed column set; metadata travels in the file name.
void write_fleet_csv(const std::string& path, const FleetProfile& profile);
FleetProfile read_fleet_csv(const std::string& path);

// Binary cache keyed by (library hash, class hash, seed, stock, sample size).
std::uint64_t fleet_cache_key(const TripLibrary& lib, const VehicleClass& cls,
                              std::uint64_t base_seed, double stock_count, int sample_size);
void write_fleet_cache(const std::string& path, const FleetProfile& profile, std::uint64_t key);
std::optional<FleetProfile> read_fleet_cache(const std::string& path, std::uint64_t expected_key);

}  // namespace evflex
