#pragma once

#include "tsre/core.hpp"
#include "tsre/rectifiers.hpp"

#include <cmath>
#include <string>
#include <variant>

namespace tsre {

/// Row-wise log(sum(exp(x))) with max-shift stabilization.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> log_sum_exp_rows(
    const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Scalar top = logits(i, 0);
    for (Eigen::Index c = 1; c < logits.cols(); ++c) top = std::max(top, logits(i, c));
    Scalar sum = 0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) sum += std::exp(logits(i, c) - top);
    out[i] = top + std::log(sum);
  }
  return out;
}

/// Row-wise max softmax(x / T). The largest term is exp(0) = 1, so the
/// maximum probability is 1 / sum(exp(x/T - max)).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> max_softmax_rows(
    const Eigen::MatrixBase<Derived>& logits, typename Derived::Scalar temperature) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(logits.rows());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    Scalar top = logits(i, 0) / temperature;
    for (Eigen::Index c = 1; c < logits.cols(); ++c) top = std::max(top, logits(i, c) / temperature);
    Scalar sum = 0;
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      sum += std::exp(logits(i, c) / temperature - top);
    }
    out[i] = Scalar(1) / sum;
  }
  return out;
}

/// logits = z * W^T + b, one row per sample.
Matrix apply_head(const FeatureMatrix& z, const ClassifierHead& head);

ScoreSet energy_score(const Matrix& logits);
ScoreSet msp_score(const Matrix& logits);
ScoreSet temp_msp_score(const Matrix& logits, double temperature);

// ---- pipeline ----

struct NoRectifier {};
struct BatsState {
  Vector mu;
  Vector sigma;
  double lambda = 1.0;
};

using Rectifier = std::variant<NoRectifier, ReactThreshold, BatsState, LapsBounds, TypicalSet>;

FeatureMatrix rectify(const FeatureMatrix& z, const Rectifier& rectifier);
std::string rectifier_name(const Rectifier& rectifier);

enum class ScoreKind { Energy, Msp, TempMsp };

struct ScoreFunction {
  ScoreKind kind = ScoreKind::Energy;
  double temperature = 1.0;
};

ScoreKind score_kind_from_string(const std::string& name);
const char* to_string(ScoreKind kind);

ScoreSet score_logits(const Matrix& logits, const ScoreFunction& score);

/// score(apply_head(rectify(z))); the tag is "<rectifier>+<score>".
ScoreSet score_pipeline(const FeatureMatrix& z, const ClassifierHead& head,
                        const Rectifier& rectifier, const ScoreFunction& score);

}  // namespace tsre
