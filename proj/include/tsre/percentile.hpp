#pragma once

#include "tsre/core.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace tsre {

/// Rank k = ceil(p/100 * n), clamped to [1, n].
inline std::size_t nearest_rank_index(double p, std::size_t n) {
  // p * n is formed first so integral percentiles of integral counts stay exact.
  const double raw = std::ceil(p * static_cast<double>(n) / 100.0);
  const auto k = static_cast<std::size_t>(std::max(1.0, raw));
  return std::min(k, n);
}

/// k-th smallest value with k = ceil(p/100 * n). Takes its input by value
/// because it partially reorders it.
template <typename Scalar>
Scalar nearest_rank_percentile(std::vector<Scalar> values, double p) {
  if (!(p > 0.0 && p <= 100.0)) {
    throw Error(ErrorCode::PercentileOutOfRange, "percentile must lie in (0, 100]");
  }
  if (values.empty()) throw Error(ErrorCode::EmptyInput, "percentile of empty set");
  const std::size_t k = nearest_rank_index(p, values.size());
  auto nth = values.begin() + static_cast<std::ptrdiff_t>(k - 1);
  std::nth_element(values.begin(), nth, values.end());
  return *nth;
}

template <typename Derived>
typename Derived::Scalar nearest_rank_percentile(const Eigen::DenseBase<Derived>& values,
                                                 double p) {
  using Scalar = typename Derived::Scalar;
  std::vector<Scalar> flat;
  flat.reserve(static_cast<std::size_t>(values.size()));
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    for (Eigen::Index i = 0; i < values.rows(); ++i) flat.push_back(values(i, j));
  }
  return nearest_rank_percentile(std::move(flat), p);
}

}  // namespace tsre
