#pragma once

#include "tsre/core.hpp"

namespace tsre {

enum class Decision { ID, OOD };

/// k-th smallest ID score with k = floor((1 - target) * n) + 1: the largest
/// gamma that still accepts at least `target` of the ID scores.
double threshold_at_tpr(const ScoreSet& id_scores, double target_tpr);

/// Fraction of `scores` that are >= gamma.
double fraction_at_or_above(const ScoreSet& scores, double gamma);

double fpr_at_tpr(const ScoreSet& id_scores, const ScoreSet& ood_scores, double target_tpr);

/// Mann-Whitney form with ties credited 0.5, computed by sorting the OOD
/// scores once and binary-searching each ID score; O((n + m) log m).
double auroc(const ScoreSet& id_scores, const ScoreSet& ood_scores);

/// ID iff score >= gamma.
inline Decision decide(double score, double gamma) {
  return score >= gamma ? Decision::ID : Decision::OOD;
}

EvalReport evaluate(const ScoreSet& id_scores, const ScoreSet& ood_scores,
                    double target_tpr = 0.95);

}  // namespace tsre
