#include "tsre/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace tsre {

namespace {

void require_nonempty(const ScoreSet& s, const char* what) {
  if (s.empty()) throw Error(ErrorCode::EmptyScores, std::string(what) + " score set is empty");
}

std::vector<double> sorted_copy(const ScoreSet& s) {
  std::vector<double> v(s.scores().data(), s.scores().data() + s.size());
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

double threshold_at_tpr(const ScoreSet& id_scores, double target_tpr) {
  require_nonempty(id_scores, "ID");
  if (!(target_tpr > 0.0 && target_tpr <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "target TPR must lie in (0, 1]");
  }
  const auto n = static_cast<std::size_t>(id_scores.size());
  const double dn = static_cast<double>(n);
  auto rejected = static_cast<std::size_t>(std::floor((1.0 - target_tpr) * dn));
  // Rounding in (1 - t) * n must never reject more than the target allows.
  while (rejected > 0 && static_cast<double>(n - rejected) < target_tpr * dn) --rejected;
  rejected = std::min(rejected, n - 1);
  std::vector<double> v(id_scores.scores().data(), id_scores.scores().data() + n);
  auto nth = v.begin() + static_cast<std::ptrdiff_t>(rejected);
  std::nth_element(v.begin(), nth, v.end());
  return *nth;
}

double fraction_at_or_above(const ScoreSet& scores, double gamma) {
  require_nonempty(scores, "input");
  std::int64_t count = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) count += scores.scores()[i] >= gamma ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(scores.size());
}

double fpr_at_tpr(const ScoreSet& id_scores, const ScoreSet& ood_scores, double target_tpr) {
  require_nonempty(ood_scores, "OOD");
  return fraction_at_or_above(ood_scores, threshold_at_tpr(id_scores, target_tpr));
}

double auroc(const ScoreSet& id_scores, const ScoreSet& ood_scores) {
  require_nonempty(id_scores, "ID");
  require_nonempty(ood_scores, "OOD");
  const std::vector<double> ood = sorted_copy(ood_scores);
  // 2 * (wins) + ties, kept integral so the final division is the only rounding.
  std::int64_t twice_credit = 0;
  for (Eigen::Index i = 0; i < id_scores.size(); ++i) {
    const double s = id_scores.scores()[i];
    const auto lo = std::lower_bound(ood.begin(), ood.end(), s);
    const auto hi = std::upper_bound(lo, ood.end(), s);
    twice_credit += 2 * (lo - ood.begin()) + (hi - lo);
  }
  const double pairs = static_cast<double>(id_scores.size()) * static_cast<double>(ood.size());
  return static_cast<double>(twice_credit) / (2.0 * pairs);
}

EvalReport evaluate(const ScoreSet& id_scores, const ScoreSet& ood_scores, double target_tpr) {
  require_nonempty(id_scores, "ID");
  require_nonempty(ood_scores, "OOD");
  EvalReport r;
  r.gamma = threshold_at_tpr(id_scores, target_tpr);
  r.tpr_achieved = fraction_at_or_above(id_scores, r.gamma);
  r.fpr95 = fraction_at_or_above(ood_scores, r.gamma);
  r.auroc = auroc(id_scores, ood_scores);
  r.n_id = id_scores.size();
  r.n_ood = ood_scores.size();
  return r;
}

}  // namespace tsre
