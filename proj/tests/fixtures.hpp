#pragma once

// Random but valid inputs shared by the unit and acceptance suites.

#include "oracles.hpp"
#include "tsre/channel_stats.hpp"
#include "tsre/dataio.hpp"
#include "tsre/rectifiers.hpp"

#include <cmath>
#include <cstring>
#include <limits>

namespace fixture {

/// Profile fitted from a random labelled matrix, so every field is consistent.
inline tsre::ChannelProfile fitted_profile(oracle::Gen& g, int n, int m, int c) {
  tsre::Matrix x = g.matrix(n, m);
  tsre::IndexVector labels(n);
  for (int i = 0; i < n; ++i) labels[i] = i % c;
  return tsre::fit_profile(tsre::FeatureMatrix(x), tsre::LabelVector(labels, c),
                           tsre::HyperParams{})
      .profile;
}

/// Profile with independent random fields inside the valid ranges.
inline tsre::ChannelProfile random_profile(oracle::Gen& g, int m) {
  tsre::ChannelProfile p;
  p.mu = g.vector(m, -3.0, 3.0);
  p.sigma = g.vector(m, 0.0, 2.0);
  if (g.coin()) p.sigma[g.integer(0, m - 1)] = 0.0;
  p.mu_bar = p.mu.mean();
  p.sigma_bar = p.sigma.mean();
  p.similarity = g.vector(m, -1.0, 1.0);
  p.variance = g.vector(m, 0.0, 4.0);
  p.discriminability = 0.5 * p.similarity - 0.5 * p.variance;
  p.activity = g.vector(m, 0.0, 2.0);
  p.skew = g.vector(m, -1.5, 1.5);
  return p;
}

/// Matrix whose entries are exactly representable as float32, with a mix of
/// magnitudes, signed zeros and subnormals.
inline tsre::Matrix f32_matrix(oracle::Gen& g, Eigen::Index rows, Eigen::Index cols) {
  tsre::Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double v = g.normal() * std::pow(10.0, g.integer(-6, 6));
      switch (g.integer(0, 20)) {
        case 0: v = -0.0; break;
        case 1: v = std::numeric_limits<float>::denorm_min() * g.integer(1, 100); break;
        case 2: v = std::numeric_limits<float>::max(); break;
        default: break;
      }
      m(i, j) = static_cast<double>(static_cast<float>(v));
    }
  }
  return m;
}

/// Model whose fields go through the same fitting path as the CLI.
inline tsre::FittedModel random_model(oracle::Gen& g, int m) {
  tsre::FittedModel model;
  model.params.lambda_base = g.real(0.0, 3.0);
  model.params.omega = g.real(0.0, 40.0);
  model.params.a_balance = g.real(0.0, 1.0);
  model.params.percentile_p = g.real(0.1, 100.0);
  model.params.enable_activity = g.coin();
  model.params.enable_skew = g.coin();
  model.params.enable_discriminability = g.coin();
  model.params.laps_m = g.real(0.0, 1.0);
  model.params.laps_n = g.real(0.0, 1.0);
  model.params.react_percentile = g.real(1.0, 100.0);
  model.params.activity_scale = g.real(0.0, 2.0);
  model.params.similarity = g.coin() ? tsre::SimilarityMode::Sign : tsre::SimilarityMode::AbsDiff;
  model.params.skew_source =
      g.coin() ? tsre::SkewSource::Prototypes : tsre::SkewSource::TrainFeatures;
  model.profile = random_profile(g, m);
  model.typical = tsre::tsre_fit(model.profile, model.params);
  model.laps = tsre::laps_fit(model.profile.mu, model.profile.sigma, model.profile.mu_bar,
                              model.profile.sigma_bar, model.params.lambda_base,
                              model.params.laps_m, model.params.laps_n);
  model.react.c = g.normal();
  model.n_classes = g.integer(2, 50);
  return model;
}

/// Byte comparison, so -0.0 and 0.0 differ.
template <typename A, typename B>
bool same_bits(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const typename A::PlainObject pa = a;
  const typename B::PlainObject pb = b;
  return std::memcmp(pa.data(), pb.data(), sizeof(typename A::Scalar) * static_cast<std::size_t>(pa.size())) == 0;
}

inline bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

inline bool same_model(const tsre::FittedModel& a, const tsre::FittedModel& b) {
  const auto& p = a.params;
  const auto& q = b.params;
  const bool params =
      same_bits(p.lambda_base, q.lambda_base) && same_bits(p.omega, q.omega) &&
      same_bits(p.a_balance, q.a_balance) && same_bits(p.percentile_p, q.percentile_p) &&
      p.enable_activity == q.enable_activity && p.enable_skew == q.enable_skew &&
      p.enable_discriminability == q.enable_discriminability && same_bits(p.laps_m, q.laps_m) &&
      same_bits(p.laps_n, q.laps_n) && same_bits(p.react_percentile, q.react_percentile) &&
      same_bits(p.activity_scale, q.activity_scale) && p.similarity == q.similarity &&
      p.skew_source == q.skew_source;
  const auto& x = a.profile;
  const auto& y = b.profile;
  const bool profile = same_bits(x.mu, y.mu) && same_bits(x.sigma, y.sigma) &&
                       same_bits(x.mu_bar, y.mu_bar) && same_bits(x.sigma_bar, y.sigma_bar) &&
                       same_bits(x.similarity, y.similarity) &&
                       same_bits(x.variance, y.variance) &&
                       same_bits(x.discriminability, y.discriminability) &&
                       same_bits(x.activity, y.activity) && same_bits(x.skew, y.skew);
  const bool rest = same_bits(a.typical.lower, b.typical.lower) &&
                    same_bits(a.typical.upper, b.typical.upper) &&
                    same_bits(a.typical.lambda_k, b.typical.lambda_k) &&
                    same_bits(a.laps.lower, b.laps.lower) && same_bits(a.laps.upper, b.laps.upper) &&
                    same_bits(a.laps.lambda_upper, b.laps.lambda_upper) &&
                    same_bits(a.laps.lambda_lower, b.laps.lambda_lower) &&
                    same_bits(a.react.c, b.react.c) && a.n_classes == b.n_classes;
  return params && profile && rest;
}

}  // namespace fixture
