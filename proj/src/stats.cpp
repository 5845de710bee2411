#include "pdeplan/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pdeplan/rng.hpp"

namespace pdeplan {

double normal_quantile(double p) {
  if (!(p > 0.0) || !(p < 1.0)) throw std::invalid_argument("normal_quantile: p in (0,1)");
  // Acklam's rational approximation, |relative error| < 1.15e-9.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

Interval wilson_interval(long long successes, long long trials, double level) {
  if (trials <= 0) throw std::invalid_argument("wilson_interval: empty sample");
  if (successes < 0 || successes > trials) {
    throw std::invalid_argument("wilson_interval: successes out of range");
  }
  const double z = normal_quantile(0.5 + level / 2.0);
  const double n = static_cast<double>(trials);
  const double phat = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double centre = phat + z2 / (2.0 * n);
  const double spread = z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n));
  Interval interval;
  interval.level = level;
  interval.low = (centre - spread) / denom;
  interval.high = (centre + spread) / denom;
  return interval;
}

namespace {

double mean_of(std::span<const double> values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

Interval percentile_bootstrap(std::span<const double> values, double level, int resamples,
                              std::uint64_t seed) {
  SeededRng rng(seed);
  std::vector<double> means(static_cast<std::size_t>(resamples));
  std::vector<double> draw(values.size());
  for (int rep = 0; rep < resamples; ++rep) {
    for (auto& slot : draw) {
      slot = values[static_cast<std::size_t>(rng.below(values.size()))];
    }
    means[static_cast<std::size_t>(rep)] = mean_of(draw);
  }
  std::sort(means.begin(), means.end());
  const double alpha = (1.0 - level) / 2.0;
  const auto pick = [&](double q) {
    const double pos = q * static_cast<double>(resamples - 1);
    const std::size_t i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    if (i + 1 >= means.size()) return means.back();
    return means[i] * (1.0 - frac) + means[i + 1] * frac;
  };
  Interval interval;
  interval.level = level;
  interval.low = pick(alpha);
  interval.high = pick(1.0 - alpha);
  return interval;
}

}  // namespace

StatsSummary bootstrap_summary(std::span<const double> values, double level, int resamples,
                               std::uint64_t seed) {
  if (values.empty()) throw std::invalid_argument("bootstrap_summary: empty input");
  StatsSummary summary;
  summary.resamples = resamples;
  summary.mean = mean_of(values);
  double ss = 0.0;
  for (double v : values) ss += (v - summary.mean) * (v - summary.mean);
  summary.sd = values.size() > 1
                   ? std::sqrt(ss / static_cast<double>(values.size() - 1))
                   : 0.0;
  summary.bootstrap_ci = percentile_bootstrap(values, level, resamples, seed);
  return summary;
}

PairedLift paired_lift_bootstrap(std::span<const double> lifts, double level, int resamples,
                                 std::uint64_t seed) {
  if (lifts.empty()) throw std::invalid_argument("paired_lift_bootstrap: empty input");
  PairedLift lift;
  lift.mean = mean_of(lifts);
  lift.ci = percentile_bootstrap(lifts, level, resamples, seed);
  return lift;
}

}  // namespace pdeplan
