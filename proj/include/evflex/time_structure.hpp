#pragma once

#include <string>
#include <vector>

#include "evflex/errors.hpp"

namespace evflex {

// Representative slices of the 8760-hour year. Weights scale operational
// costs so the slices stand for the full year: sum(weight * hours) = 8760.
struct RepresentativePeriod {
  std::string name;
  int start_hour = 0;  // offset into the full-year series
  int hours = 168;
  double weight = 26.07142857142857;
};

struct TimeStructure {
  std::vector<RepresentativePeriod> periods;

  int total_hours() const {
    int n = 0;
    for (const auto& p : periods) n += p.hours;
    return n;
  }

  // flat index of the first hour of period p
  int period_offset(int p) const {
    int n = 0;
    for (int i = 0; i < p; ++i) n += periods[i].hours;
    return n;
  }

  double weight_of_flat_hour(int t) const {
    for (const auto& p : periods) {
      if (t < p.hours) return p.weight;
      t -= p.hours;
    }
    throw ConfigError("flat hour index out of range");
  }

  void validate(int year_hours = 8760) const {
    if (periods.empty()) throw ConfigError("time structure needs at least one period");
    double covered = 0.0;
    for (const auto& p : periods) {
      if (p.hours <= 0 || p.weight <= 0)
        throw ConfigError("period " + p.name + ": hours and weight must be positive");
      if (p.start_hour < 0 || p.start_hour + p.hours > year_hours)
        throw ConfigError("period " + p.name + " reaches outside the year");
      covered += p.weight * p.hours;
    }
    if (std::abs(covered - year_hours) > 1e-6 * year_hours)
      throw ConfigError("period weights cover " + std::to_string(covered) +
                        " hours, expected " + std::to_string(year_hours));
  }

  // concatenate the period windows of a full-year hourly series
  std::vector<double> slice(const std::vector<double>& year_series) const {
    std::vector<double> out;
    out.reserve(total_hours());
    for (const auto& p : periods) {
      if (p.start_hour + p.hours > static_cast<int>(year_series.size()))
        throw ConfigError("period " + p.name + " reaches outside the profile series");
      for (int k = 0; k < p.hours; ++k) out.push_back(year_series[p.start_hour + k]);
    }
    return out;
  }
};

}  // namespace evflex
