#pragma once

#include "tsre/core.hpp"

#include <algorithm>

namespace tsre {

/// Clips column k of `z` to [lower[k], upper[k]]. Values on a bound map to
/// the bound; values inside pass through untouched.
template <typename Derived, typename VecL, typename VecU>
typename Derived::PlainObject clip_columns(const Eigen::MatrixBase<Derived>& z,
                                           const Eigen::MatrixBase<VecL>& lower,
                                           const Eigen::MatrixBase<VecU>& upper) {
  typename Derived::PlainObject out(z.rows(), z.cols());
  for (Eigen::Index k = 0; k < z.cols(); ++k) {
    const auto lo = lower[k];
    const auto hi = upper[k];
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const auto v = z(i, k);
      out(i, k) = v >= hi ? hi : (v <= lo ? lo : v);
    }
  }
  return out;
}

struct ReactThreshold {
  double c = 0.0;
};

struct LapsBounds {
  Vector lower;
  Vector upper;
  Vector lambda_upper;  // lambda_i^1 after clamping
  Vector lambda_lower;  // lambda_i^2 after clamping
};

/// Nearest-rank percentile over every training activation.
ReactThreshold react_fit(const FeatureMatrix& train, double percentile);

/// min(z, c); no lower clip.
FeatureMatrix react_apply(const FeatureMatrix& z, const ReactThreshold& t);

/// Shared with tsre_fit so that the two reduce to identical bits.
void symmetric_bounds(const Vector& mu, const Vector& sigma, const Vector& lambda,
                      Vector& lower, Vector& upper);

FeatureMatrix bats_apply(const FeatureMatrix& z, const Vector& mu, const Vector& sigma,
                         double lambda);

LapsBounds laps_fit(const Vector& mu, const Vector& sigma, double mu_bar, double sigma_bar,
                    double lambda, double m, double n);

FeatureMatrix laps_apply(const FeatureMatrix& z, const LapsBounds& b);

/// Channel-aware scaling factors and the skew-translated clip interval:
///   lambda_k = max(0, lambda + omega * D_k * (mu_bar - mu_k + sigma_bar - sigma_k) + A_k)
///   [mu_k - lambda_k sigma_k - skew_k, mu_k + lambda_k sigma_k - skew_k]
/// Each term is dropped when its HyperParams flag is off.
TypicalSet tsre_fit(const ChannelProfile& profile, const HyperParams& params);

FeatureMatrix tsre_apply(const FeatureMatrix& z, const TypicalSet& ts);

}  // namespace tsre
