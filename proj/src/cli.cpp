#include "tsre/cli.hpp"

#include "tsre/channel_stats.hpp"
#include "tsre/metrics.hpp"
#include "tsre/percentile.hpp"
#include "tsre/synth.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

namespace tsre::cli {

namespace {

const std::vector<std::string> kMethods = {
    "none", "react", "bats", "laps", "tsre",
    "tsre-no-activity", "tsre-no-skew", "tsre-no-discriminability"};

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for '" + path.string() + "'");
}

std::vector<std::string> split_list(const std::vector<std::string>& items) {
  std::vector<std::string> out;
  for (const auto& item : items) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (!tok.empty()) out.push_back(tok);
    }
  }
  return out;
}

std::vector<std::string> dedupe(const std::vector<std::string>& items, const char* what,
                                std::ostream& err) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (seen.insert(item).second) {
      out.push_back(item);
    } else {
      err << "warning: duplicate " << what << " '" << item << "' ignored\n";
    }
  }
  return out;
}

const ClassifierHead& require_head(const Bundle& b, const std::string& where) {
  if (!b.head) throw Error(ErrorCode::InvalidConfig, where + " has no classifier head");
  return *b.head;
}

std::string bundle_name(const fs::path& dir) {
  fs::path p = dir;
  if (p.filename().empty()) p = p.parent_path();
  return p.filename().string();
}

// Hyperparameter flags shared by fit, compare and sweep.
struct HyperFlags {
  HyperParams params;
  bool no_activity = false;
  bool no_skew = false;
  bool no_discriminability = false;
  std::string similarity = "sign";
  std::string skew_source = "prototypes";

  void attach(CLI::App* app) {
    app->add_option("--lambda", params.lambda_base, "base scaling factor")->capture_default_str();
    app->add_option("--omega", params.omega, "discriminability weight")->capture_default_str();
    app->add_option("--a", params.a_balance, "similarity/variance balance")->capture_default_str();
    app->add_option("--p", params.percentile_p, "activity percentile")->capture_default_str();
    app->add_option("--laps-m", params.laps_m, "LAPS mean-deviation weight")->capture_default_str();
    app->add_option("--laps-n", params.laps_n, "LAPS std-deviation weight")->capture_default_str();
    app->add_option("--react-percentile", params.react_percentile, "ReAct clip percentile")
        ->capture_default_str();
    app->add_option("--activity-scale", params.activity_scale, "multiplier on the activity term")
        ->capture_default_str();
    app->add_flag("--no-activity", no_activity, "drop the activity term");
    app->add_flag("--no-skew", no_skew, "drop the skewness shift");
    app->add_flag("--no-discriminability", no_discriminability, "drop the discriminability term");
    app->add_option("--similarity", similarity, "inter-class similarity")
        ->check(CLI::IsMember({"sign", "abs-diff"}))
        ->capture_default_str();
    app->add_option("--skew-source", skew_source, "skewness sample")
        ->check(CLI::IsMember({"prototypes", "train-features"}))
        ->capture_default_str();
  }

  HyperParams resolve() const {
    HyperParams p = params;
    p.enable_activity = !no_activity;
    p.enable_skew = !no_skew;
    p.enable_discriminability = !no_discriminability;
    p.similarity = similarity_mode_from_string(similarity);
    p.skew_source = skew_source_from_string(skew_source);
    p.check();
    return p;
  }
};

struct ScoreFlags {
  std::vector<std::string> names{"energy"};
  double temperature = 1000.0;

  std::vector<ScoreFunction> resolve(std::ostream& err) const {
    std::vector<ScoreFunction> out;
    for (const auto& name : dedupe(split_list(names), "score", err)) {
      out.push_back(ScoreFunction{score_kind_from_string(name), temperature});
    }
    if (out.empty()) throw Error(ErrorCode::InvalidConfig, "no score functions given");
    return out;
  }
};

std::vector<NamedBundle> load_ood(const std::vector<std::string>& dirs) {
  std::vector<NamedBundle> out;
  for (const auto& d : dirs) out.push_back(NamedBundle{bundle_name(d), read_bundle(d)});
  if (out.empty()) throw Error(ErrorCode::InvalidConfig, "no OOD bundles given");
  return out;
}

// ---- commands ----

struct FitArgs {
  std::string bundle;
  std::string out;
  std::string lambda_csv;
  HyperFlags hyper;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const Bundle train = read_bundle(a.bundle);
  const FittedModel model = fit_model(train, a.hyper.resolve());
  write_profile(a.out, model);

  const Vector& lk = model.typical.lambda_k;
  out << "channels " << model.profile.n_channels() << "\n"
      << "classes " << model.n_classes << "\n"
      << "lambda_k min " << format_double(lk.minCoeff()) << " median "
      << format_double(nearest_rank_percentile(lk, 50.0)) << " max "
      << format_double(lk.maxCoeff()) << "\n";
  if (!a.lambda_csv.empty()) {
    std::string csv = "channel,lambda_k,lower,upper\n";
    for (Eigen::Index k = 0; k < lk.size(); ++k) {
      csv += std::to_string(k) + "," + format_double(lk[k]) + "," +
             format_double(model.typical.lower[k]) + "," + format_double(model.typical.upper[k]) +
             "\n";
    }
    write_text_file(a.lambda_csv, csv);
  }
  return kExitOk;
}

struct ScoreArgs {
  std::string bundle;
  std::string profile;
  std::string method = "tsre";
  std::string score = "energy";
  double temperature = 1000.0;
  std::string out;
};

int cmd_score(const ScoreArgs& a) {
  const Bundle b = read_bundle(a.bundle);
  const FittedModel model = read_profile(a.profile);
  if (model.profile.n_channels() != b.features.n_channels()) {
    throw Error(ErrorCode::DimensionMismatch,
                "profile has " + std::to_string(model.profile.n_channels()) +
                    " channels, bundle has " + std::to_string(b.features.n_channels()));
  }
  const ScoreFunction sf{score_kind_from_string(a.score), a.temperature};
  const ScoreSet scores = score_pipeline(b.features, require_head(b, a.bundle),
                                         make_rectifier(model, a.method), sf);
  write_scores(a.out, scores);
  return kExitOk;
}

struct EvalArgs {
  std::string id;
  std::string ood;
  double tpr = 0.95;
  std::string out;
  std::string csv;
  std::string method = "unknown";
  std::string ood_set;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
  const ScoreSet id = read_scores(a.id);
  const ScoreSet ood = read_scores(a.ood);
  const EvalReport report = evaluate(id, ood, a.tpr);
  const std::string ood_name = a.ood_set.empty() ? fs::path(a.ood).stem().string() : a.ood_set;
  write_report(a.out, report, a.method, ood_name);
  const std::string csv =
      report_csv_header() + "\n" + report_csv_row(a.method, ood_name, report) + "\n";
  if (!a.csv.empty()) write_text_file(a.csv, csv);
  out << csv;
  return kExitOk;
}

struct CompareArgs {
  std::string bundle;
  std::string id_bundle;
  std::string profile;
  std::vector<std::string> ood_bundles;
  std::vector<std::string> methods{"none", "tsre"};
  ScoreFlags scores;
  double tpr = 0.95;
  std::string out;
  HyperFlags hyper;
};

int cmd_compare(const CompareArgs& a, std::ostream& out, std::ostream& err) {
  const Bundle train = read_bundle(a.bundle);
  const Bundle id_eval = a.id_bundle.empty() ? train : read_bundle(a.id_bundle);
  const auto oods = load_ood(a.ood_bundles);
  const FittedModel model =
      a.profile.empty() ? fit_model(train, a.hyper.resolve()) : read_profile(a.profile);
  const auto methods = dedupe(split_list(a.methods), "method", err);
  const auto rows =
      compare_methods(model, id_eval, oods, methods, a.scores.resolve(err), a.tpr);
  const std::string csv = compare_csv(rows);
  write_text_file(a.out, csv);
  out << csv;
  return kExitOk;
}

struct SweepArgs {
  std::string bundle;
  std::string id_bundle;
  std::vector<std::string> ood_bundles;
  std::string param;
  std::vector<double> values;
  std::string method = "tsre";
  ScoreFlags scores;
  double tpr = 0.95;
  std::string out;
  HyperFlags hyper;
};

int cmd_sweep(const SweepArgs& a, std::ostream& out, std::ostream& err) {
  const Bundle train = read_bundle(a.bundle);
  const Bundle id_eval = a.id_bundle.empty() ? train : read_bundle(a.id_bundle);
  const auto oods = load_ood(a.ood_bundles);
  const auto scores = a.scores.resolve(err);
  const HyperParams base = a.hyper.resolve();

  std::string csv = "param,value,method,score,fpr95,auroc\n";
  for (const double v : a.values) {
    HyperParams p = base;
    if (a.param == "omega") p.omega = v;
    else if (a.param == "p") p.percentile_p = v;
    else if (a.param == "lambda") p.lambda_base = v;
    else if (a.param == "a") p.a_balance = v;
    p.check();
    const FittedModel model = fit_model(train, p);
    for (const auto& row : compare_methods(model, id_eval, oods, {a.method}, scores, a.tpr)) {
      if (row.ood_set != "Avg") continue;
      csv += a.param + "," + format_double(v) + "," + row.method + "," + row.score + "," +
             format_double(row.fpr95) + "," + format_double(row.auroc) + "\n";
    }
  }
  write_text_file(a.out, csv);
  out << csv;
  return kExitOk;
}

struct HistArgs {
  std::string bundle;
  std::int64_t channel = 0;
  std::int64_t bins = 50;
  std::string out;
};

int cmd_hist(const HistArgs& a, std::ostream& out) {
  const Bundle b = read_bundle(a.bundle);
  if (a.channel < 0 || a.channel >= b.features.n_channels()) {
    throw Error(ErrorCode::ChannelOutOfRange,
                "channel " + std::to_string(a.channel) + " outside [0, " +
                    std::to_string(b.features.n_channels()) + ")");
  }
  if (a.bins < 1) throw Error(ErrorCode::InvalidConfig, "--bins must be >= 1");
  const Vector x = b.features.data().col(a.channel);
  const auto moments = column_moments(Matrix(x));
  const double mean = moments.mean[0];
  const double sd = moments.stddev[0];

  double lo = x.minCoeff();
  double hi = x.maxCoeff();
  if (lo == hi) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / static_cast<double>(a.bins);
  std::vector<std::int64_t> counts(static_cast<std::size_t>(a.bins), 0);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    auto bin = static_cast<std::int64_t>(std::floor((x[i] - lo) / width));
    bin = std::clamp<std::int64_t>(bin, 0, a.bins - 1);
    ++counts[static_cast<std::size_t>(bin)];
  }

  const double n = static_cast<double>(x.size());
  std::string csv = "bin_left,bin_right,count,gaussian_density,gaussian_expected_count\n";
  for (std::int64_t j = 0; j < a.bins; ++j) {
    const double left = lo + width * static_cast<double>(j);
    const double right = j + 1 == a.bins ? hi : lo + width * static_cast<double>(j + 1);
    const double centre = 0.5 * (left + right);
    double density = 0.0;
    if (sd > 0.0) {
      const double t = (centre - mean) / sd;
      density = std::exp(-0.5 * t * t) / (sd * std::sqrt(2.0 * std::numbers::pi));
    }
    csv += format_double(left) + "," + format_double(right) + "," +
           std::to_string(counts[static_cast<std::size_t>(j)]) + "," + format_double(density) +
           "," + format_double(density * width * n) + "\n";
  }
  write_text_file(a.out, csv);
  out << "channel " << a.channel << " mean " << format_double(mean) << " std "
      << format_double(sd) << "\n";
  return kExitOk;
}

struct SynthArgs {
  std::string out;
  SynthConfig config;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
  const SynthBenchmark bench = generate(a.config);
  write_benchmark(a.out, a.config, bench);
  out << "wrote " << (fs::path(a.out) / "train").string() << ", id_test, ood\n";
  return kExitOk;
}

}  // namespace

// ---- library helpers ----

FittedModel fit_model(const Bundle& train, const HyperParams& params) {
  params.check();
  FittedModel model;
  model.params = params;
  model.profile = fit_profile(train.features, train.labels, params).profile;
  model.typical = tsre_fit(model.profile, params);
  model.laps = laps_fit(model.profile.mu, model.profile.sigma, model.profile.mu_bar,
                        model.profile.sigma_bar, params.lambda_base, params.laps_m,
                        params.laps_n);
  model.react = react_fit(train.features, params.react_percentile);
  model.n_classes = train.labels.n_classes();
  return model;
}

const std::vector<std::string>& known_methods() { return kMethods; }

Rectifier make_rectifier(const FittedModel& model, const std::string& method) {
  if (method == "none") return NoRectifier{};
  if (method == "react") return model.react;
  if (method == "bats") {
    return BatsState{model.profile.mu, model.profile.sigma, model.params.lambda_base};
  }
  if (method == "laps") return model.laps;
  if (method == "tsre") return model.typical;
  HyperParams p = model.params;
  if (method == "tsre-no-activity") {
    p.enable_activity = false;
  } else if (method == "tsre-no-skew") {
    p.enable_skew = false;
  } else if (method == "tsre-no-discriminability") {
    p.enable_discriminability = false;
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown method '" + method + "'");
  }
  return tsre_fit(model.profile, p);
}

std::vector<CompareRow> compare_methods(const FittedModel& model, const Bundle& id_eval,
                                        const std::vector<NamedBundle>& ood_sets,
                                        const std::vector<std::string>& methods,
                                        const std::vector<ScoreFunction>& scores,
                                        double target_tpr) {
  const ClassifierHead& head = require_head(id_eval, "ID evaluation bundle");
  std::vector<CompareRow> rows;
  for (const auto& method : methods) {
    const Rectifier rect = make_rectifier(model, method);
    for (const auto& sf : scores) {
      const ScoreSet id = score_pipeline(id_eval.features, head, rect, sf);
      double fpr_sum = 0.0;
      double auroc_sum = 0.0;
      for (const auto& ood : ood_sets) {
        const ScoreSet o = score_pipeline(ood.bundle.features, head, rect, sf);
        const EvalReport r = evaluate(id, o, target_tpr);
        rows.push_back(CompareRow{method, to_string(sf.kind), ood.name, r.fpr95, r.auroc});
        fpr_sum += r.fpr95;
        auroc_sum += r.auroc;
      }
      const double n = static_cast<double>(ood_sets.size());
      rows.push_back(CompareRow{method, to_string(sf.kind), "Avg", fpr_sum / n, auroc_sum / n});
    }
  }
  return rows;
}

std::string compare_csv(const std::vector<CompareRow>& rows) {
  std::string csv = "method,score,ood_set,fpr95,auroc\n";
  for (const auto& r : rows) {
    csv += r.method + "," + r.score + "," + r.ood_set + "," + format_double(r.fpr95) + "," +
           format_double(r.auroc) + "\n";
  }
  return csv;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Typical-set rectification benchmark harness for OOD detection", "tsre"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit channel statistics and typical sets");
  fit_cmd->add_option("--bundle", fit.bundle, "training bundle directory")->required();
  fit_cmd->add_option("--out", fit.out, "profile file to write")->required();
  fit_cmd->add_option("--lambda-csv", fit.lambda_csv, "per-channel lambda_k diagnostic CSV");
  fit.hyper.attach(fit_cmd);

  ScoreArgs score;
  auto* score_cmd = app.add_subcommand("score", "score a bundle through a rectifier");
  score_cmd->add_option("--bundle", score.bundle, "bundle directory")->required();
  score_cmd->add_option("--profile", score.profile, "fitted profile")->required();
  score_cmd->add_option("--method", score.method, "rectifier")
      ->check(CLI::IsMember(kMethods))
      ->capture_default_str();
  score_cmd->add_option("--score", score.score, "score function")
      ->check(CLI::IsMember({"energy", "msp", "temp-msp"}))
      ->capture_default_str();
  score_cmd->add_option("--temperature", score.temperature, "temp-msp temperature")
      ->capture_default_str();
  score_cmd->add_option("--out", score.out, "score file to write")->required();

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "FPR95 / AUROC from two score files");
  eval_cmd->add_option("--id", eval.id, "ID score file")->required();
  eval_cmd->add_option("--ood", eval.ood, "OOD score file")->required();
  eval_cmd->add_option("--tpr", eval.tpr, "target ID acceptance rate")->capture_default_str();
  eval_cmd->add_option("--out", eval.out, "report file to write")->required();
  eval_cmd->add_option("--csv", eval.csv, "also write the CSV row here");
  eval_cmd->add_option("--method", eval.method, "method label for the CSV row");
  eval_cmd->add_option("--ood-set", eval.ood_set, "OOD set label (default: file stem)");

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "method x score x OOD-set table");
  cmp_cmd->add_option("--bundle", cmp.bundle, "training bundle")->required();
  cmp_cmd->add_option("--id-bundle", cmp.id_bundle, "ID evaluation bundle (default: --bundle)");
  cmp_cmd->add_option("--profile", cmp.profile, "use this profile instead of fitting");
  cmp_cmd->add_option("--ood-bundles", cmp.ood_bundles, "OOD bundles")->required();
  cmp_cmd->add_option("--methods", cmp.methods, "comma-separated methods")->capture_default_str();
  cmp_cmd->add_option("--scores", cmp.scores.names, "comma-separated scores")
      ->capture_default_str();
  cmp_cmd->add_option("--temperature", cmp.scores.temperature, "temp-msp temperature")
      ->capture_default_str();
  cmp_cmd->add_option("--tpr", cmp.tpr, "target ID acceptance rate")->capture_default_str();
  cmp_cmd->add_option("--out", cmp.out, "CSV to write")->required();
  cmp.hyper.attach(cmp_cmd);

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "sensitivity of FPR95 / AUROC to one parameter");
  sweep_cmd->add_option("--bundle", sweep.bundle, "training bundle")->required();
  sweep_cmd->add_option("--id-bundle", sweep.id_bundle, "ID evaluation bundle");
  sweep_cmd->add_option("--ood-bundles", sweep.ood_bundles, "OOD bundles")->required();
  sweep_cmd->add_option("--param", sweep.param, "parameter to vary")
      ->check(CLI::IsMember({"omega", "p", "lambda", "a"}))
      ->required();
  sweep_cmd->add_option("--values", sweep.values, "values to try")->required()->delimiter(',');
  sweep_cmd->add_option("--method", sweep.method, "rectifier")
      ->check(CLI::IsMember(kMethods))
      ->capture_default_str();
  sweep_cmd->add_option("--scores", sweep.scores.names, "comma-separated scores")
      ->capture_default_str();
  sweep_cmd->add_option("--temperature", sweep.scores.temperature, "temp-msp temperature");
  sweep_cmd->add_option("--tpr", sweep.tpr, "target ID acceptance rate")->capture_default_str();
  sweep_cmd->add_option("--out", sweep.out, "CSV to write")->required();
  sweep.hyper.attach(sweep_cmd);

  HistArgs hist;
  auto* hist_cmd = app.add_subcommand("hist", "activation histogram of one channel");
  hist_cmd->add_option("--bundle", hist.bundle, "bundle directory")->required();
  hist_cmd->add_option("--channel", hist.channel, "channel index")->required();
  hist_cmd->add_option("--bins", hist.bins, "number of bins")->capture_default_str();
  hist_cmd->add_option("--out", hist.out, "CSV to write")->required();

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "generate the seeded synthetic benchmark");
  SynthConfig& sc = synth.config;
  synth_cmd->add_option("--out", synth.out, "output directory")->required();
  synth_cmd->add_option("--seed", sc.seed, "generator seed")->capture_default_str();
  synth_cmd->add_option("--classes", sc.n_classes, "number of classes")->capture_default_str();
  synth_cmd->add_option("--channels", sc.n_channels, "feature channels")->capture_default_str();
  synth_cmd->add_option("--n-train", sc.n_id_train, "ID training samples")->capture_default_str();
  synth_cmd->add_option("--n-test", sc.n_id_test, "ID test samples")->capture_default_str();
  synth_cmd->add_option("--n-ood", sc.n_ood, "OOD samples")->capture_default_str();
  synth_cmd->add_option("--shape-low", sc.shape_low, "lowest gamma shape")->capture_default_str();
  synth_cmd->add_option("--shape-high", sc.shape_high, "highest gamma shape")
      ->capture_default_str();
  synth_cmd->add_option("--separation", sc.class_separation, "class mean scale")
      ->capture_default_str();
  synth_cmd->add_option("--ood-shift", sc.ood_shift, "OOD mean offset")->capture_default_str();
  synth_cmd->add_option("--noise", sc.noise_scale, "noise standard deviation")
      ->capture_default_str();

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit, out);
    if (score_cmd->parsed()) return cmd_score(score);
    if (eval_cmd->parsed()) return cmd_eval(eval, out);
    if (cmp_cmd->parsed()) return cmd_compare(cmp, out, err);
    if (sweep_cmd->parsed()) return cmd_sweep(sweep, out, err);
    if (hist_cmd->parsed()) return cmd_hist(hist, out);
    if (synth_cmd->parsed()) return cmd_synth(synth, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.is_io() ? kExitIo : kExitUsage;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitUsage;
}

}  // namespace tsre::cli
