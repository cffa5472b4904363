#include "tsre/channel_stats.hpp"

#include "tsre/percentile.hpp"

#include <vector>

namespace tsre {

namespace {

double mean_of(const Vector& v) {
  double sum = 0.0;
  for (Eigen::Index k = 0; k < v.size(); ++k) sum += v[k];
  return sum / static_cast<double>(v.size());
}

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_two_classes(const Prototypes& prototypes) {
  if (prototypes.n_classes() < 2) {
    throw Error(ErrorCode::TooFewClasses, "inter-class similarity needs at least 2 classes");
  }
}

}  // namespace

ChannelMoments channel_moments(const FeatureMatrix& features) {
  auto cm = column_moments(features.data());
  ChannelMoments out;
  out.mu = std::move(cm.mean);
  out.sigma = std::move(cm.stddev);
  out.mu_bar = mean_of(out.mu);
  out.sigma_bar = mean_of(out.sigma);
  return out;
}

Prototypes compute_prototypes(const FeatureMatrix& features, const LabelVector& labels,
                              Eigen::Index n_classes) {
  if (labels.size() != features.n_samples()) {
    throw Error(ErrorCode::DimensionMismatch, "labels and features disagree on sample count");
  }
  const Matrix& x = features.data();
  Matrix sums = Matrix::Zero(n_classes, x.cols());
  std::vector<std::int64_t> counts(static_cast<std::size_t>(n_classes), 0);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const auto c = labels[i];
    if (c < 0 || c >= n_classes) {
      throw Error(ErrorCode::LabelOutOfRange, "label at index " + std::to_string(i));
    }
    sums.row(c) += x.row(i);
    ++counts[static_cast<std::size_t>(c)];
  }
  for (Eigen::Index c = 0; c < n_classes; ++c) {
    const auto count = counts[static_cast<std::size_t>(c)];
    if (count == 0) {
      throw Error(ErrorCode::EmptyClass, "class " + std::to_string(c) + " has no samples");
    }
    sums.row(c) /= static_cast<double>(count);
  }
  return Prototypes(std::move(sums), std::move(counts));
}

Vector inter_class_similarity(const Prototypes& prototypes, SimilarityMode mode) {
  require_two_classes(prototypes);
  const Matrix& h = prototypes.matrix();
  const Eigen::Index c = h.rows();
  const double pairs = static_cast<double>(c) * static_cast<double>(c - 1);
  Vector out(h.cols());
  for (Eigen::Index k = 0; k < h.cols(); ++k) {
    if (mode == SimilarityMode::Sign) {
      // sum_{i != j} s_i s_j = (sum s)^2 - sum s^2, exact in integers.
      double sum = 0.0;
      double sum_sq = 0.0;
      for (Eigen::Index i = 0; i < c; ++i) {
        const double s = sign_of(h(i, k));
        sum += s;
        sum_sq += s * s;
      }
      out[k] = (sum * sum - sum_sq) / pairs;
    } else {
      constexpr double eps = 1e-12;
      double acc = 0.0;
      for (Eigen::Index i = 0; i < c; ++i) {
        for (Eigen::Index j = i + 1; j < c; ++j) {
          const double a = h(i, k);
          const double b = h(j, k);
          acc += 1.0 - std::abs(a - b) / (std::abs(a) + std::abs(b) + eps);
        }
      }
      out[k] = 2.0 * acc / pairs;
    }
  }
  return out;
}

Vector inter_class_variance(const Prototypes& prototypes) {
  const Matrix& h = prototypes.matrix();
  const double c = static_cast<double>(h.rows());
  Vector out(h.cols());
  for (Eigen::Index k = 0; k < h.cols(); ++k) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < h.rows(); ++i) sum += h(i, k);
    const double mean = sum / c;
    double sq = 0.0;
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
      const double d = h(i, k) - mean;
      sq += d * d;
    }
    out[k] = sq / c;
  }
  return out;
}

Vector discriminability(const Vector& similarity, const Vector& variance, double a) {
  if (!(a >= 0.0 && a <= 1.0)) {
    throw Error(ErrorCode::BalanceOutOfRange, "a must lie in [0, 1]");
  }
  if (similarity.size() != variance.size()) {
    throw Error(ErrorCode::DimensionMismatch, "similarity and variance lengths differ");
  }
  return (a * similarity.array() - (1.0 - a) * variance.array()).matrix();
}

Vector raw_activity(const Prototypes& prototypes) {
  const Matrix& h = prototypes.matrix();
  Vector out(h.cols());
  for (Eigen::Index k = 0; k < h.cols(); ++k) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < h.rows(); ++i) sum += std::abs(h(i, k));
    out[k] = sum / static_cast<double>(h.rows());
  }
  return out;
}

Vector activity(const Prototypes& prototypes, double p) {
  if (!(p > 0.0 && p <= 100.0)) {
    throw Error(ErrorCode::PercentileOutOfRange, "p must lie in (0, 100]");
  }
  Vector raw = raw_activity(prototypes);
  const double tau = nearest_rank_percentile(raw, p);
  for (Eigen::Index k = 0; k < raw.size(); ++k) {
    if (!(raw[k] >= tau)) raw[k] = 0.0;
  }
  return raw;
}

Vector channel_skewness(const Prototypes& prototypes, const Vector& mu, const Vector& sigma) {
  if (mu.size() != prototypes.n_channels() || sigma.size() != prototypes.n_channels()) {
    throw Error(ErrorCode::DimensionMismatch, "mu/sigma length must equal channel count");
  }
  return column_skewness(prototypes.matrix(), mu, sigma);
}

Vector channel_skewness(const FeatureMatrix& features, const Vector& mu, const Vector& sigma) {
  if (mu.size() != features.n_channels() || sigma.size() != features.n_channels()) {
    throw Error(ErrorCode::DimensionMismatch, "mu/sigma length must equal channel count");
  }
  return column_skewness(features.data(), mu, sigma);
}

FittedProfile fit_profile(const FeatureMatrix& features, const LabelVector& labels,
                          const HyperParams& params) {
  params.check();
  validate_bundle(features, labels, std::nullopt);
  const Eigen::Index m = features.n_channels();

  ChannelMoments moments = channel_moments(features);
  Prototypes prototypes = compute_prototypes(features, labels, labels.n_classes());
  require_two_classes(prototypes);

  ChannelProfile profile;
  profile.mu = moments.mu;
  profile.sigma = moments.sigma;
  profile.mu_bar = moments.mu_bar;
  profile.sigma_bar = moments.sigma_bar;
  profile.similarity = inter_class_similarity(prototypes, params.similarity);
  profile.variance = inter_class_variance(prototypes);
  profile.discriminability = params.enable_discriminability
                                 ? discriminability(profile.similarity, profile.variance,
                                                    params.a_balance)
                                 : Vector::Zero(m);
  profile.activity =
      params.enable_activity ? activity(prototypes, params.percentile_p) : Vector::Zero(m);

  if (!params.enable_skew) {
    profile.skew = Vector::Zero(m);
  } else if (params.skew_source == SkewSource::Prototypes) {
    const auto proto_moments = column_moments(prototypes.matrix());
    profile.skew = channel_skewness(prototypes, proto_moments.mean, proto_moments.stddev);
  } else {
    profile.skew = channel_skewness(features, moments.mu, moments.sigma);
  }

  profile.check();
  return FittedProfile{std::move(profile), std::move(prototypes)};
}

}  // namespace tsre
