#pragma once

#include "tsre/core.hpp"
#include "tsre/rectifiers.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>

namespace tsre {

namespace fs = std::filesystem;

// Bundle directory layout:
//
//   manifest.txt      `key = value` lines, keys sorted
//   features.f32      n_samples x n_channels, little-endian float32, row-major
//   labels.i32        n_samples, little-endian int32
//   head_weights.f32  n_classes x n_channels, row-major (optional)
//   head_bias.f32     n_classes (optional)

inline constexpr int kFormatVersion = 1;

struct BundleManifest {
  int format_version = kFormatVersion;
  std::int64_t n_samples = 0;
  std::int64_t n_channels = 0;
  std::int64_t n_classes = 0;
  std::string features = "features.f32";
  std::string labels = "labels.i32";
  std::optional<std::string> head_weights;
  std::optional<std::string> head_bias;
  std::string dtype_features = "f32le";
  std::string dtype_labels = "i32le";

  std::map<std::string, std::string> to_keys() const;
};

struct Bundle {
  FeatureMatrix features;
  LabelVector labels;
  std::optional<ClassifierHead> head;
};

struct ReadOptions {
  std::uint64_t max_tensor_bytes = std::uint64_t{2} << 30;
};

/// Features and head are narrowed to float32 on write; everything read back
/// is widened to double.
BundleManifest write_bundle(const fs::path& dir, const FeatureMatrix& features,
                            const LabelVector& labels,
                            const std::optional<ClassifierHead>& head = std::nullopt);

BundleManifest read_manifest(const fs::path& dir, const ReadOptions& options = {});

/// Reads and validates a bundle.
Bundle read_bundle(const fs::path& dir, const ReadOptions& options = {});

// ---- fitted profiles ----

/// Everything cmd_score needs to run any rectifier on a compatible bundle.
struct FittedModel {
  HyperParams params;
  ChannelProfile profile;
  TypicalSet typical;
  LapsBounds laps;
  ReactThreshold react;
  std::int64_t n_classes = 0;
};

void write_profile(const fs::path& path, const FittedModel& model);
FittedModel read_profile(const fs::path& path);

// ---- score sets and reports ----

void write_scores(const fs::path& path, const ScoreSet& scores);
ScoreSet read_scores(const fs::path& path, const std::string& method_tag = "");

/// Flat `key = value` record.
void write_report(const fs::path& path, const EvalReport& report, const std::string& method,
                  const std::string& ood_set);

std::string report_csv_header();
std::string report_csv_row(const std::string& method, const std::string& ood_set,
                           const EvalReport& report);

/// Shortest text that parses back to the same double.
std::string format_double(double v);

/// Whole-string parse; returns nullopt on any trailing garbage.
std::optional<double> parse_double(std::string_view text);

}  // namespace tsre
