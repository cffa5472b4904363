#pragma once

#include "tsre/core.hpp"
#include "tsre/dataio.hpp"

#include <array>
#include <cstdint>
#include <filesystem>

namespace tsre {

/// xoshiro256** 1.0 (Blackman & Vigna), state seeded from a single 64-bit
/// value through splitmix64, exactly as in the reference implementation.
class Xoshiro256StarStar {
 public:
  explicit Xoshiro256StarStar(std::uint64_t seed);

  std::uint64_t next();

  /// (next() >> 11) * 2^-53, in [0, 1).
  double uniform();

  /// Standard normal via the Marsaglia polar method; the spare variate is
  /// cached and returned by the following call.
  double normal();

  /// Gamma(shape, 1) via Marsaglia-Tsang. Shapes below 1 use the boost
  /// Gamma(shape + 1) * U^(1/shape).
  double gamma(double shape);

 private:
  std::array<std::uint64_t, 4> s_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct SynthConfig {
  std::uint64_t seed = 7;
  std::int64_t n_classes = 20;
  std::int64_t n_channels = 64;
  std::int64_t n_id_train = 5000;
  std::int64_t n_id_test = 2000;
  std::int64_t n_ood = 2000;
  double shape_low = 0.5;
  double shape_high = 4.0;
  double class_separation = 1.0;
  double ood_shift = -0.2;
  double noise_scale = 1.0;

  void check() const;
};

struct SynthBenchmark {
  Bundle train;
  Bundle id_test;
  Bundle ood;
  ClassifierHead head;
  /// Per-channel gamma shape actually drawn.
  Vector shapes;
  /// n_classes x n_channels ID class means.
  Matrix class_means;
  /// n_classes x n_channels means of the OOD pseudo-classes.
  Matrix ood_means;
};

/// Draw order: shapes, ID class means, OOD means, train rows, ID-test rows,
/// OOD rows. Sample i belongs to class i mod n_classes. Each value is
///   mean + noise_scale * (Gamma(shape_k) - shape_k) / sqrt(shape_k).
SynthBenchmark generate(const SynthConfig& config);

/// Closed-form population moments of one generated split, for balanced
/// class allocation.
struct ReferenceStats {
  Vector mean;
  Vector stddev;
  Vector skewness;
  /// Fourth central moment; gives CLT bounds for the sample std.
  Vector fourth_moment;
  /// Noise-only moments (single-class view): skew 2/sqrt(shape).
  Vector noise_skewness;
};

ReferenceStats reference_stats(const SynthConfig& config);

/// Same, for an explicit mean matrix (used for the OOD split).
ReferenceStats reference_stats(const SynthConfig& config, const Vector& shapes,
                               const Matrix& class_means);

/// Writes train/, id_test/, ood/ bundles and synth_config.txt under `dir`.
void write_benchmark(const std::filesystem::path& dir, const SynthConfig& config,
                     const SynthBenchmark& bench);

void write_synth_config(const std::filesystem::path& path, const SynthConfig& config);

}  // namespace tsre
