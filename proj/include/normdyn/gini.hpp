#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace normdyn {

// Half the relative mean absolute difference:
//   G = (1/2) * [(1/n^2) sum_i sum_j |f_i - f_j|] / [(1/n) sum_k f_k]
// Negative entries are accepted and the formula is applied as is, so the
// value can leave [0, 1) when some fitness is negative.
inline double gini(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("gini: empty input");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const auto n = static_cast<double>(sorted.size());
  double sum = 0.0;
  double weighted = 0.0;  // sum_i (2i - n + 1) f_(i) = (1/2) sum_i sum_j |f_i - f_j|
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    sum += sorted[i];
    weighted += (2.0 * static_cast<double>(i) - n + 1.0) * sorted[i];
  }
  const double mean = sum / n;
  if (mean == 0.0) throw std::domain_error("gini: mean is zero, ratio undefined");
  const double mean_abs_diff = 2.0 * weighted / (n * n);
  return 0.5 * mean_abs_diff / mean;
}

inline bool has_negative(std::span<const double> values) {
  return std::any_of(values.begin(), values.end(), [](double v) { return v < 0.0; });
}

}  // namespace normdyn
