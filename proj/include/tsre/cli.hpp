#pragma once

#include "tsre/dataio.hpp"
#include "tsre/scoring.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace tsre::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitIo = 3;

/// Fits channel statistics, the typical set, LAPS bounds and the ReAct
/// threshold from one training bundle.
FittedModel fit_model(const Bundle& train, const HyperParams& params);

/// Method names: none, react, bats, laps, tsre, and the ablations
/// tsre-no-activity, tsre-no-skew, tsre-no-discriminability. Ablations refit
/// the typical set from the stored profile with one factor dropped.
Rectifier make_rectifier(const FittedModel& model, const std::string& method);

const std::vector<std::string>& known_methods();

struct NamedBundle {
  std::string name;
  Bundle bundle;
};

struct CompareRow {
  std::string method;
  std::string score;
  std::string ood_set;  // "Avg" for per-method averages
  double fpr95 = 0.0;
  double auroc = 0.0;
};

/// One row per (method, score, ood set) followed, for every (method, score),
/// by an "Avg" row. ID scores come from `id_eval`, whose head is used.
std::vector<CompareRow> compare_methods(const FittedModel& model, const Bundle& id_eval,
                                        const std::vector<NamedBundle>& ood_sets,
                                        const std::vector<std::string>& methods,
                                        const std::vector<ScoreFunction>& scores,
                                        double target_tpr = 0.95);

std::string compare_csv(const std::vector<CompareRow>& rows);

/// Entry point shared by the executable and the tests. `args[0]` is the
/// program name. Returns 0, 2 (usage or validation) or 3 (I/O).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tsre::cli
