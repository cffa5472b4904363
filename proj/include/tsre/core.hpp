#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsre {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using IndexVector = Eigen::Matrix<std::int32_t, Eigen::Dynamic, 1>;

enum class ErrorCode {
  DimensionMismatch,
  LabelOutOfRange,
  NonFiniteValue,
  EmptyInput,
  EmptyClass,
  TooFewClasses,
  BalanceOutOfRange,
  PercentileOutOfRange,
  NegativeLambda,
  NonPositiveTemperature,
  EmptyScores,
  InvalidConfig,
  InvariantViolation,
  ChannelOutOfRange,
  UnsupportedVersion,
  ShapeMismatch,
  ParseFailure,
  IoFailure,
};

const char* to_string(ErrorCode code);

/// Every failure in the library is reported through this type. The code is
/// stable; the message carries the offending index, path or line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  /// True for failures caused by the filesystem rather than by the data.
  bool is_io() const noexcept { return code_ == ErrorCode::IoFailure; }

 private:
  ErrorCode code_;
};

/// N x M activations, one row per sample, one column per channel.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(Matrix data);

  const Matrix& data() const noexcept { return data_; }
  Eigen::Index n_samples() const noexcept { return data_.rows(); }
  Eigen::Index n_channels() const noexcept { return data_.cols(); }

 private:
  Matrix data_;
};

/// Zero-based class indices paired with the number of classes they range over.
class LabelVector {
 public:
  LabelVector(IndexVector labels, Eigen::Index n_classes);

  const IndexVector& labels() const noexcept { return labels_; }
  Eigen::Index size() const noexcept { return labels_.size(); }
  Eigen::Index n_classes() const noexcept { return n_classes_; }
  std::int32_t operator[](Eigen::Index i) const { return labels_[i]; }

 private:
  IndexVector labels_;
  Eigen::Index n_classes_;
};

/// Affine map from features to logits: logits = weights * z + bias.
class ClassifierHead {
 public:
  ClassifierHead(Matrix weights, Vector bias);

  const Matrix& weights() const noexcept { return weights_; }
  const Vector& bias() const noexcept { return bias_; }
  Eigen::Index n_classes() const noexcept { return weights_.rows(); }
  Eigen::Index n_channels() const noexcept { return weights_.cols(); }

 private:
  Matrix weights_;
  Vector bias_;
};

/// Per-class mean feature vectors, one row per class.
class Prototypes {
 public:
  Prototypes(Matrix matrix, std::vector<std::int64_t> class_counts);

  const Matrix& matrix() const noexcept { return matrix_; }
  const std::vector<std::int64_t>& class_counts() const noexcept { return class_counts_; }
  Eigen::Index n_classes() const noexcept { return matrix_.rows(); }
  Eigen::Index n_channels() const noexcept { return matrix_.cols(); }

 private:
  Matrix matrix_;
  std::vector<std::int64_t> class_counts_;
};

/// Fitted per-channel statistics. Plain aggregate; check() enforces the
/// invariants and is called by every producer and reader.
struct ChannelProfile {
  Vector mu;
  Vector sigma;
  double mu_bar = 0.0;
  double sigma_bar = 0.0;
  Vector similarity;
  Vector variance;
  Vector discriminability;
  Vector activity;
  Vector skew;

  Eigen::Index n_channels() const noexcept { return mu.size(); }
  void check() const;
};

/// Per-channel clip interval [lower, upper] and the scaling factor behind it.
struct TypicalSet {
  Vector lower;
  Vector upper;
  Vector lambda_k;

  Eigen::Index n_channels() const noexcept { return lower.size(); }
  void check() const;
};

enum class SimilarityMode { Sign, AbsDiff };
enum class SkewSource { Prototypes, TrainFeatures };

const char* to_string(SimilarityMode mode);
const char* to_string(SkewSource source);
SimilarityMode similarity_mode_from_string(const std::string& name);
SkewSource skew_source_from_string(const std::string& name);

struct HyperParams {
  double lambda_base = 1.0;
  double omega = 21.0;
  double a_balance = 0.5;
  double percentile_p = 5.0;
  bool enable_activity = true;
  bool enable_skew = true;
  bool enable_discriminability = true;
  double laps_m = 0.5;
  double laps_n = 0.5;
  double react_percentile = 90.0;
  double activity_scale = 1.0;
  SimilarityMode similarity = SimilarityMode::Sign;
  SkewSource skew_source = SkewSource::Prototypes;

  void check() const;
};

/// One score per sample; higher means more in-distribution.
class ScoreSet {
 public:
  ScoreSet() = default;
  ScoreSet(Vector scores, std::string method_tag);

  const Vector& scores() const noexcept { return scores_; }
  const std::string& method_tag() const noexcept { return method_tag_; }
  Eigen::Index size() const noexcept { return scores_.size(); }
  bool empty() const noexcept { return scores_.size() == 0; }

 private:
  Vector scores_;
  std::string method_tag_;
};

struct EvalReport {
  double gamma = 0.0;
  double tpr_achieved = 0.0;
  double fpr95 = 0.0;
  double auroc = 0.0;
  std::int64_t n_id = 0;
  std::int64_t n_ood = 0;
};

/// Checks dimensions, label range and finiteness of a bundle; throws on the
/// first violation found.
void validate_bundle(const FeatureMatrix& features, const LabelVector& labels,
                     const std::optional<ClassifierHead>& head);

/// Throws NonFiniteValue naming the first (row, col) that is NaN or Inf.
void require_finite(const Matrix& m, const std::string& what);
void require_finite(const Vector& v, const std::string& what);

}  // namespace tsre
