#include "tsre/core.hpp"

#include <cmath>
#include <sstream>

namespace tsre {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::TooFewClasses: return "TooFewClasses";
    case ErrorCode::BalanceOutOfRange: return "BalanceOutOfRange";
    case ErrorCode::PercentileOutOfRange: return "PercentileOutOfRange";
    case ErrorCode::NegativeLambda: return "NegativeLambda";
    case ErrorCode::NonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::EmptyScores: return "EmptyScores";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::ChannelOutOfRange: return "ChannelOutOfRange";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ParseFailure: return "ParseFailure";
    case ErrorCode::IoFailure: return "IoFailure";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void require_finite(const Matrix& m, const std::string& what) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!std::isfinite(m(i, j))) {
        std::ostringstream os;
        os << what << " has non-finite value at (" << i << ", " << j << ")";
        throw Error(ErrorCode::NonFiniteValue, os.str());
      }
    }
  }
}

void require_finite(const Vector& v, const std::string& what) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!std::isfinite(v[i])) {
      throw Error(ErrorCode::NonFiniteValue,
                  what + " has non-finite value at index " + std::to_string(i));
    }
  }
}

FeatureMatrix::FeatureMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw Error(ErrorCode::EmptyInput, "feature matrix must have at least one row and one column");
  }
  require_finite(data_, "features");
}

LabelVector::LabelVector(IndexVector labels, Eigen::Index n_classes)
    : labels_(std::move(labels)), n_classes_(n_classes) {
  if (n_classes_ < 1) {
    throw Error(ErrorCode::InvalidConfig, "n_classes must be at least 1");
  }
  for (Eigen::Index i = 0; i < labels_.size(); ++i) {
    if (labels_[i] < 0 || labels_[i] >= n_classes_) {
      std::ostringstream os;
      os << "label " << labels_[i] << " at index " << i << " outside [0, " << n_classes_ << ")";
      throw Error(ErrorCode::LabelOutOfRange, os.str());
    }
  }
}

ClassifierHead::ClassifierHead(Matrix weights, Vector bias)
    : weights_(std::move(weights)), bias_(std::move(bias)) {
  if (weights_.rows() < 1 || weights_.cols() < 1) {
    throw Error(ErrorCode::EmptyInput, "classifier head must be at least 1x1");
  }
  if (bias_.size() != weights_.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "bias length " + std::to_string(bias_.size()) + " != weight rows " +
                    std::to_string(weights_.rows()));
  }
  require_finite(weights_, "head weights");
  require_finite(bias_, "head bias");
}

Prototypes::Prototypes(Matrix matrix, std::vector<std::int64_t> class_counts)
    : matrix_(std::move(matrix)), class_counts_(std::move(class_counts)) {
  if (static_cast<Eigen::Index>(class_counts_.size()) != matrix_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "class_counts length must equal prototype rows");
  }
  for (std::size_t c = 0; c < class_counts_.size(); ++c) {
    if (class_counts_[c] < 1) {
      throw Error(ErrorCode::EmptyClass, "class " + std::to_string(c) + " has no samples");
    }
  }
  require_finite(matrix_, "prototypes");
}

namespace {

void require_length(const Vector& v, Eigen::Index m, const char* name) {
  if (v.size() != m) {
    throw Error(ErrorCode::DimensionMismatch, std::string(name) + " has length " +
                                                  std::to_string(v.size()) + ", expected " +
                                                  std::to_string(m));
  }
}

void require_nonnegative(const Vector& v, const char* name) {
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (!(v[k] >= 0.0)) {
      throw Error(ErrorCode::InvariantViolation,
                  std::string(name) + "[" + std::to_string(k) + "] is negative");
    }
  }
}

}  // namespace

void ChannelProfile::check() const {
  const Eigen::Index m = mu.size();
  if (m < 1) throw Error(ErrorCode::InvariantViolation, "profile has no channels");
  require_length(sigma, m, "sigma");
  require_length(similarity, m, "similarity");
  require_length(variance, m, "variance");
  require_length(discriminability, m, "discriminability");
  require_length(activity, m, "activity");
  require_length(skew, m, "skew");
  require_finite(mu, "mu");
  require_finite(sigma, "sigma");
  require_finite(similarity, "similarity");
  require_finite(variance, "variance");
  require_finite(discriminability, "discriminability");
  require_finite(activity, "activity");
  require_finite(skew, "skew");
  if (!std::isfinite(mu_bar) || !std::isfinite(sigma_bar)) {
    throw Error(ErrorCode::NonFiniteValue, "mu_bar/sigma_bar must be finite");
  }
  require_nonnegative(sigma, "sigma");
  require_nonnegative(variance, "variance");
  require_nonnegative(activity, "activity");
  for (Eigen::Index k = 0; k < m; ++k) {
    if (similarity[k] < -1.0 || similarity[k] > 1.0) {
      throw Error(ErrorCode::InvariantViolation,
                  "similarity[" + std::to_string(k) + "] outside [-1, 1]");
    }
  }
}

void TypicalSet::check() const {
  const Eigen::Index m = lower.size();
  if (m < 1) throw Error(ErrorCode::InvariantViolation, "typical set has no channels");
  require_length(upper, m, "upper");
  require_length(lambda_k, m, "lambda_k");
  require_finite(lower, "lower");
  require_finite(upper, "upper");
  require_finite(lambda_k, "lambda_k");
  require_nonnegative(lambda_k, "lambda_k");
  for (Eigen::Index k = 0; k < m; ++k) {
    if (lower[k] > upper[k]) {
      throw Error(ErrorCode::InvariantViolation,
                  "lower > upper at channel " + std::to_string(k));
    }
  }
}

const char* to_string(SimilarityMode mode) {
  return mode == SimilarityMode::Sign ? "sign" : "abs-diff";
}

const char* to_string(SkewSource source) {
  return source == SkewSource::Prototypes ? "prototypes" : "train-features";
}

SimilarityMode similarity_mode_from_string(const std::string& name) {
  if (name == "sign") return SimilarityMode::Sign;
  if (name == "abs-diff") return SimilarityMode::AbsDiff;
  throw Error(ErrorCode::InvalidConfig, "unknown similarity mode '" + name + "'");
}

SkewSource skew_source_from_string(const std::string& name) {
  if (name == "prototypes") return SkewSource::Prototypes;
  if (name == "train-features") return SkewSource::TrainFeatures;
  throw Error(ErrorCode::InvalidConfig, "unknown skew source '" + name + "'");
}

void HyperParams::check() const {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(lambda_base) || lambda_base < 0.0) {
    throw Error(ErrorCode::NegativeLambda, "lambda must be finite and >= 0");
  }
  if (!finite(a_balance) || a_balance < 0.0 || a_balance > 1.0) {
    throw Error(ErrorCode::BalanceOutOfRange, "a must lie in [0, 1]");
  }
  if (!finite(percentile_p) || percentile_p <= 0.0 || percentile_p > 100.0) {
    throw Error(ErrorCode::PercentileOutOfRange, "p must lie in (0, 100]");
  }
  if (!finite(react_percentile) || react_percentile <= 0.0 || react_percentile > 100.0) {
    throw Error(ErrorCode::PercentileOutOfRange, "react percentile must lie in (0, 100]");
  }
  if (!finite(omega) || !finite(laps_m) || !finite(laps_n) || !finite(activity_scale)) {
    throw Error(ErrorCode::InvalidConfig, "omega, laps m/n and activity scale must be finite");
  }
}

ScoreSet::ScoreSet(Vector scores, std::string method_tag)
    : scores_(std::move(scores)), method_tag_(std::move(method_tag)) {
  require_finite(scores_, "scores");
}

void validate_bundle(const FeatureMatrix& features, const LabelVector& labels,
                     const std::optional<ClassifierHead>& head) {
  if (labels.size() != features.n_samples()) {
    throw Error(ErrorCode::DimensionMismatch,
                "label count " + std::to_string(labels.size()) + " != n_samples " +
                    std::to_string(features.n_samples()));
  }
  if (head) {
    if (head->n_channels() != features.n_channels()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "head has " + std::to_string(head->n_channels()) + " columns, features have " +
                      std::to_string(features.n_channels()) + " channels");
    }
    if (head->n_classes() != labels.n_classes()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "head has " + std::to_string(head->n_classes()) + " classes, labels declare " +
                      std::to_string(labels.n_classes()));
    }
  }
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= labels.n_classes()) {
      throw Error(ErrorCode::LabelOutOfRange, "label at index " + std::to_string(i));
    }
  }
  require_finite(features.data(), "features");
  if (head) {
    require_finite(head->weights(), "head weights");
    require_finite(head->bias(), "head bias");
  }
}

}  // namespace tsre
