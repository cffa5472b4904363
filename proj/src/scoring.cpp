#include "tsre/scoring.hpp"

#include "tsre/parallel.hpp"

namespace tsre {

namespace {

// Fixed row-block height keeps GEMM blocking, and hence output bits,
// independent of the worker count.
constexpr Eigen::Index kRowBlock = 256;

void require_classes(const Matrix& logits, Eigen::Index min_classes, ErrorCode code) {
  if (logits.cols() < min_classes) {
    throw Error(code, "logits need at least " + std::to_string(min_classes) + " classes");
  }
}

}  // namespace

Matrix apply_head(const FeatureMatrix& z, const ClassifierHead& head) {
  if (z.n_channels() != head.n_channels()) {
    throw Error(ErrorCode::DimensionMismatch,
                "head expects " + std::to_string(head.n_channels()) + " channels, features have " +
                    std::to_string(z.n_channels()));
  }
  const Matrix& x = z.data();
  const Eigen::Index n = x.rows();
  Matrix logits(n, head.n_classes());
  const auto n_blocks = static_cast<std::size_t>((n + kRowBlock - 1) / kRowBlock);
  parallel_for_blocks(n_blocks, [&](std::size_t b) {
    const Eigen::Index start = static_cast<Eigen::Index>(b) * kRowBlock;
    const Eigen::Index rows = std::min(kRowBlock, n - start);
    logits.middleRows(start, rows).noalias() =
        x.middleRows(start, rows) * head.weights().transpose();
    logits.middleRows(start, rows).rowwise() += head.bias().transpose();
  });
  return logits;
}

ScoreSet energy_score(const Matrix& logits) {
  require_classes(logits, 1, ErrorCode::TooFewClasses);
  return ScoreSet(log_sum_exp_rows(logits), "energy");
}

ScoreSet msp_score(const Matrix& logits) {
  require_classes(logits, 2, ErrorCode::TooFewClasses);
  return ScoreSet(max_softmax_rows(logits, 1.0), "msp");
}

ScoreSet temp_msp_score(const Matrix& logits, double temperature) {
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw Error(ErrorCode::NonPositiveTemperature, "temperature must be finite and > 0");
  }
  require_classes(logits, 2, ErrorCode::TooFewClasses);
  return ScoreSet(max_softmax_rows(logits, temperature), "temp-msp");
}

FeatureMatrix rectify(const FeatureMatrix& z, const Rectifier& rectifier) {
  struct Visitor {
    const FeatureMatrix& z;
    FeatureMatrix operator()(const NoRectifier&) const { return z; }
    FeatureMatrix operator()(const ReactThreshold& t) const { return react_apply(z, t); }
    FeatureMatrix operator()(const BatsState& s) const {
      return bats_apply(z, s.mu, s.sigma, s.lambda);
    }
    FeatureMatrix operator()(const LapsBounds& b) const { return laps_apply(z, b); }
    FeatureMatrix operator()(const TypicalSet& ts) const { return tsre_apply(z, ts); }
  };
  return std::visit(Visitor{z}, rectifier);
}

std::string rectifier_name(const Rectifier& rectifier) {
  static constexpr const char* names[] = {"none", "react", "bats", "laps", "tsre"};
  return names[rectifier.index()];
}

ScoreKind score_kind_from_string(const std::string& name) {
  if (name == "energy") return ScoreKind::Energy;
  if (name == "msp") return ScoreKind::Msp;
  if (name == "temp-msp") return ScoreKind::TempMsp;
  throw Error(ErrorCode::InvalidConfig, "unknown score '" + name + "'");
}

const char* to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::Energy: return "energy";
    case ScoreKind::Msp: return "msp";
    case ScoreKind::TempMsp: return "temp-msp";
  }
  return "unknown";
}

ScoreSet score_logits(const Matrix& logits, const ScoreFunction& score) {
  switch (score.kind) {
    case ScoreKind::Energy: return energy_score(logits);
    case ScoreKind::Msp: return msp_score(logits);
    case ScoreKind::TempMsp: return temp_msp_score(logits, score.temperature);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown score kind");
}

ScoreSet score_pipeline(const FeatureMatrix& z, const ClassifierHead& head,
                        const Rectifier& rectifier, const ScoreFunction& score) {
  const ScoreSet raw = score_logits(apply_head(rectify(z, rectifier), head), score);
  return ScoreSet(raw.scores(), rectifier_name(rectifier) + "+" + to_string(score.kind));
}

}  // namespace tsre
