#pragma once

#include "tsre/core.hpp"

#include <cmath>

namespace tsre {

// ---- column kernels ----
//
// All reductions walk each column top to bottom in a single fixed order so
// results are bit-reproducible regardless of how callers split channels.

template <typename Scalar>
struct ColumnMoments {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> mean;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> stddev;  // population (divide by n)
};

template <typename Derived>
ColumnMoments<typename Derived::Scalar> column_moments(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.rows();
  const Eigen::Index m = x.cols();
  ColumnMoments<Scalar> out{Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(m),
                            Eigen::Matrix<Scalar, Eigen::Dynamic, 1>(m)};
  for (Eigen::Index k = 0; k < m; ++k) {
    const Scalar first = x(0, k);
    bool constant = true;
    Scalar sum = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      sum += x(i, k);
      constant = constant && x(i, k) == first;
    }
    if (constant) {
      out.mean[k] = first;
      out.stddev[k] = 0;
      continue;
    }
    const Scalar mean = sum / static_cast<Scalar>(n);
    Scalar sq = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar d = x(i, k) - mean;
      sq += d * d;
    }
    out.mean[k] = mean;
    out.stddev[k] = std::sqrt(sq / static_cast<Scalar>(n));
  }
  return out;
}

/// Per-column third standardized moment about the supplied centre and scale.
/// Columns with zero scale get 0.
template <typename Derived, typename VecA, typename VecB>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> column_skewness(
    const Eigen::MatrixBase<Derived>& x, const Eigen::MatrixBase<VecA>& center,
    const Eigen::MatrixBase<VecB>& scale) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = x.rows();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(x.cols());
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    if (scale[k] == Scalar(0)) {
      out[k] = 0;
      continue;
    }
    Scalar acc = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const Scalar t = (x(i, k) - center[k]) / scale[k];
      acc += t * t * t;
    }
    out[k] = acc / static_cast<Scalar>(n);
  }
  return out;
}

// ---- fitted statistics ----

struct ChannelMoments {
  Vector mu;
  Vector sigma;
  double mu_bar = 0.0;
  double sigma_bar = 0.0;
};

ChannelMoments channel_moments(const FeatureMatrix& features);

/// Row c is the mean of all rows labelled c. Throws EmptyClass(c).
Prototypes compute_prototypes(const FeatureMatrix& features, const LabelVector& labels,
                              Eigen::Index n_classes);

/// Mean pairwise similarity of the class prototypes, per channel, over ordered
/// pairs (i, j), i != j. Sign mode: delta(a, b) = sign(a) * sign(b).
Vector inter_class_similarity(const Prototypes& prototypes,
                              SimilarityMode mode = SimilarityMode::Sign);

/// Population variance of the prototype entries on each channel.
Vector inter_class_variance(const Prototypes& prototypes);

/// a * similarity - (1 - a) * variance; lower is more discriminative.
Vector discriminability(const Vector& similarity, const Vector& variance, double a);

/// Mean |h| over classes, before percentile gating.
Vector raw_activity(const Prototypes& prototypes);

/// Raw activity with channels below the nearest-rank p-th percentile zeroed.
Vector activity(const Prototypes& prototypes, double p);

/// Skewness of the prototype entries around the given per-channel centre/scale.
Vector channel_skewness(const Prototypes& prototypes, const Vector& mu, const Vector& sigma);

/// Same moment computed over every training row instead of the prototypes.
Vector channel_skewness(const FeatureMatrix& features, const Vector& mu, const Vector& sigma);

struct FittedProfile {
  ChannelProfile profile;
  Prototypes prototypes;
};

/// Fits every ChannelProfile field in one pass. Disabled factors are stored
/// as zero vectors.
FittedProfile fit_profile(const FeatureMatrix& features, const LabelVector& labels,
                          const HyperParams& params);

}  // namespace tsre
