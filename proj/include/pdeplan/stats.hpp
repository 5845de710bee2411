// stats.hpp — summary statistics for the experiment harness: mean/sd,
// seeded percentile bootstrap over configuration-level values, Wilson score
// intervals over pair-level successes, and paired-lift bootstrap.
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace pdeplan {

struct Interval {
  double level = 0.95;
  double low = 0.0;
  double high = 0.0;
};

// Inverse standard-normal quantile (Acklam's rational approximation).
double normal_quantile(double p);

Interval wilson_interval(long long successes, long long trials, double level = 0.95);

struct PairedLift {
  double mean = 0.0;
  Interval ci;
};

struct StatsSummary {
  double mean = 0.0;
  double sd = 0.0;
  Interval bootstrap_ci;
  int resamples = 10000;
  std::optional<Interval> wilson;      // set when pair-level counts are known
  std::optional<PairedLift> paired;    // set for two-method comparisons
};

// Percentile bootstrap of the mean over configuration-level values.
StatsSummary bootstrap_summary(std::span<const double> values, double level = 0.95,
                               int resamples = 10000, std::uint64_t seed = 0);

// Same resampling applied to per-configuration paired differences.
PairedLift paired_lift_bootstrap(std::span<const double> lifts, double level = 0.95,
                                 int resamples = 10000, std::uint64_t seed = 0);

}  // namespace pdeplan
