#include "tsre/rectifiers.hpp"

#include "tsre/percentile.hpp"

namespace tsre {

namespace {

void require_channels(const FeatureMatrix& z, Eigen::Index m, const char* what) {
  if (z.n_channels() != m) {
    throw Error(ErrorCode::DimensionMismatch,
                std::string(what) + " has " + std::to_string(m) + " channels, features have " +
                    std::to_string(z.n_channels()));
  }
}

double clamp_at_zero(double v) { return v > 0.0 ? v : 0.0; }

}  // namespace

ReactThreshold react_fit(const FeatureMatrix& train, double percentile) {
  return ReactThreshold{nearest_rank_percentile(train.data(), percentile)};
}

FeatureMatrix react_apply(const FeatureMatrix& z, const ReactThreshold& t) {
  const Matrix& x = z.data();
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index k = 0; k < x.cols(); ++k) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) out(i, k) = x(i, k) >= t.c ? t.c : x(i, k);
  }
  return FeatureMatrix(std::move(out));
}

void symmetric_bounds(const Vector& mu, const Vector& sigma, const Vector& lambda,
                      Vector& lower, Vector& upper) {
  const Eigen::Index m = mu.size();
  lower.resize(m);
  upper.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double half = lambda[k] * sigma[k];
    lower[k] = mu[k] - half;
    upper[k] = mu[k] + half;
  }
}

FeatureMatrix bats_apply(const FeatureMatrix& z, const Vector& mu, const Vector& sigma,
                         double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::NegativeLambda, "lambda must be >= 0");
  if (mu.size() != sigma.size()) {
    throw Error(ErrorCode::DimensionMismatch, "mu and sigma lengths differ");
  }
  require_channels(z, mu.size(), "BATS statistics");
  Vector lower;
  Vector upper;
  symmetric_bounds(mu, sigma, Vector::Constant(mu.size(), lambda), lower, upper);
  return FeatureMatrix(clip_columns(z.data(), lower, upper));
}

LapsBounds laps_fit(const Vector& mu, const Vector& sigma, double mu_bar, double sigma_bar,
                    double lambda, double m, double n) {
  if (mu.size() != sigma.size()) {
    throw Error(ErrorCode::DimensionMismatch, "mu and sigma lengths differ");
  }
  const Eigen::Index channels = mu.size();
  LapsBounds b;
  b.lower.resize(channels);
  b.upper.resize(channels);
  b.lambda_upper.resize(channels);
  b.lambda_lower.resize(channels);
  for (Eigen::Index i = 0; i < channels; ++i) {
    const double mean_dev = m * (mu_bar - mu[i]);
    const double std_dev = n * (sigma_bar - sigma[i]);
    b.lambda_upper[i] = clamp_at_zero(lambda + mean_dev + std_dev);
    b.lambda_lower[i] = clamp_at_zero(lambda - mean_dev + std_dev);
    b.upper[i] = mu[i] + b.lambda_upper[i] * sigma[i];
    b.lower[i] = mu[i] - b.lambda_lower[i] * sigma[i];
  }
  return b;
}

FeatureMatrix laps_apply(const FeatureMatrix& z, const LapsBounds& b) {
  require_channels(z, b.lower.size(), "LAPS bounds");
  return FeatureMatrix(clip_columns(z.data(), b.lower, b.upper));
}

TypicalSet tsre_fit(const ChannelProfile& profile, const HyperParams& params) {
  params.check();
  const Eigen::Index m = profile.n_channels();
  if (profile.sigma.size() != m || profile.discriminability.size() != m ||
      profile.activity.size() != m || profile.skew.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, "profile vectors disagree on channel count");
  }
  TypicalSet ts;
  ts.lambda_k.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    double lambda = params.lambda_base;
    if (params.enable_discriminability) {
      const double deviation =
          profile.mu_bar - profile.mu[k] + profile.sigma_bar - profile.sigma[k];
      lambda += params.omega * profile.discriminability[k] * deviation;
    }
    if (params.enable_activity) lambda += params.activity_scale * profile.activity[k];
    ts.lambda_k[k] = clamp_at_zero(lambda);
  }
  symmetric_bounds(profile.mu, profile.sigma, ts.lambda_k, ts.lower, ts.upper);
  if (params.enable_skew) {
    ts.lower -= profile.skew;
    ts.upper -= profile.skew;
  }
  ts.check();
  return ts;
}

FeatureMatrix tsre_apply(const FeatureMatrix& z, const TypicalSet& ts) {
  require_channels(z, ts.n_channels(), "typical set");
  return FeatureMatrix(clip_columns(z.data(), ts.lower, ts.upper));
}

}  // namespace tsre
