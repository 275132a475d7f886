#pragma once

// Independent reference computations used by unit and acceptance tests. Nothing
// here calls into the code paths it is used to check.

#include "ndiff/param_vector.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace pgvlab::testing {

/// Central finite differences of a scalar function of a parameter vector.
inline ndiff::ParamVector central_differences(const ndiff::ParamVector& at,
                                              const std::function<double(const ndiff::ParamVector&)>& f,
                                              double h = 1e-5) {
  ndiff::ParamVector probe = at;
  ndiff::ParamVector out = at.zeros_like();
  for (std::size_t i = 0; i < at.size(); ++i) {
    const double x = at[i];
    probe[i] = x + h;
    const double fp = f(probe);
    probe[i] = x - h;
    const double fm = f(probe);
    probe[i] = x;
    out[i] = (fp - fm) / (2.0 * h);
  }
  return out;
}

/// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor)
inline double max_relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-7) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double denom = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / denom);
  }
  return worst;
}

struct RunningMoments {
  double n = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void push(double x) {
    n += 1.0;
    const double d = x - mean;
    mean += d / n;
    m2 += d * (x - mean);
  }
  double variance() const { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }
  double standard_error() const { return std::sqrt(variance() / n); }
};

}  // namespace pgvlab::testing
