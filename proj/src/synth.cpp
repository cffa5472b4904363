#include "tsre/synth.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace tsre {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

struct DrawnParameters {
  Vector shapes;
  Matrix class_means;
  Matrix ood_means;
};

DrawnParameters draw_parameters(const SynthConfig& c, Xoshiro256StarStar& rng) {
  DrawnParameters p;
  p.shapes.resize(c.n_channels);
  for (Eigen::Index k = 0; k < p.shapes.size(); ++k) {
    p.shapes[k] = c.shape_low + (c.shape_high - c.shape_low) * rng.uniform();
  }
  p.class_means.resize(c.n_classes, c.n_channels);
  for (Eigen::Index i = 0; i < c.n_classes; ++i) {
    for (Eigen::Index k = 0; k < c.n_channels; ++k) {
      p.class_means(i, k) = c.class_separation * std::abs(rng.normal());
    }
  }
  p.ood_means.resize(c.n_classes, c.n_channels);
  for (Eigen::Index i = 0; i < c.n_classes; ++i) {
    for (Eigen::Index k = 0; k < c.n_channels; ++k) {
      p.ood_means(i, k) = c.class_separation * std::abs(rng.normal()) + c.ood_shift;
    }
  }
  return p;
}

Bundle draw_split(const SynthConfig& c, Xoshiro256StarStar& rng, const Vector& shapes,
                  const Matrix& means, std::int64_t n) {
  Matrix x(n, c.n_channels);
  IndexVector labels(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto cls = static_cast<Eigen::Index>(i % c.n_classes);
    labels[i] = static_cast<std::int32_t>(cls);
    for (Eigen::Index k = 0; k < c.n_channels; ++k) {
      const double a = shapes[k];
      x(i, k) = means(cls, k) + c.noise_scale * (rng.gamma(a) - a) / std::sqrt(a);
    }
  }
  return Bundle{FeatureMatrix(std::move(x)), LabelVector(std::move(labels), c.n_classes),
                std::nullopt};
}

}  // namespace

Xoshiro256StarStar::Xoshiro256StarStar(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

std::uint64_t Xoshiro256StarStar::next() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256StarStar::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double Xoshiro256StarStar::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u = 0.0;
  double v = 0.0;
  double s = 0.0;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

double Xoshiro256StarStar::gamma(double shape) {
  if (shape < 1.0) {
    const double g = gamma(shape + 1.0);
    return g * std::pow(uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = uniform();
    if (u < 1.0 - 0.0331 * (x * x) * (x * x)) return d * v;
    if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
  }
}

void SynthConfig::check() const {
  if (n_classes < 1 || n_channels < 1 || n_id_train < 1 || n_id_test < 1 || n_ood < 1) {
    throw Error(ErrorCode::InvalidConfig, "synth counts must all be >= 1");
  }
  if (!(shape_low > 0.0) || !(shape_low <= shape_high) || !std::isfinite(shape_high)) {
    throw Error(ErrorCode::InvalidConfig, "gamma shapes need 0 < low <= high");
  }
  if (!std::isfinite(class_separation) || !std::isfinite(ood_shift) ||
      !std::isfinite(noise_scale) || noise_scale < 0.0) {
    throw Error(ErrorCode::InvalidConfig, "separation/shift must be finite, noise >= 0");
  }
}

SynthBenchmark generate(const SynthConfig& config) {
  config.check();
  Xoshiro256StarStar rng(config.seed);
  DrawnParameters p = draw_parameters(config, rng);
  Bundle train = draw_split(config, rng, p.shapes, p.class_means, config.n_id_train);
  Bundle id_test = draw_split(config, rng, p.shapes, p.class_means, config.n_id_test);
  Bundle ood = draw_split(config, rng, p.shapes, p.ood_means, config.n_ood);
  ClassifierHead head(p.class_means, Vector::Zero(config.n_classes));
  train.head = head;
  id_test.head = head;
  ood.head = head;
  return SynthBenchmark{std::move(train),     std::move(id_test),    std::move(ood),
                        std::move(head),      std::move(p.shapes),   std::move(p.class_means),
                        std::move(p.ood_means)};
}

ReferenceStats reference_stats(const SynthConfig& config, const Vector& shapes,
                               const Matrix& class_means) {
  const double s = config.noise_scale;
  const double s2 = s * s;
  const Eigen::Index m = shapes.size();
  const double c = static_cast<double>(class_means.rows());
  ReferenceStats r;
  r.mean.resize(m);
  r.stddev.resize(m);
  r.skewness.resize(m);
  r.fourth_moment.resize(m);
  r.noise_skewness.resize(m);
  for (Eigen::Index k = 0; k < m; ++k) {
    const double a = shapes[k];
    const double noise_skew = 2.0 / std::sqrt(a);
    const double noise_kurt = 3.0 + 6.0 / a;
    const double mean = class_means.col(k).sum() / c;
    double d2 = 0.0, d3 = 0.0, d4 = 0.0;
    for (Eigen::Index i = 0; i < class_means.rows(); ++i) {
      const double d = class_means(i, k) - mean;
      d2 += d * d;
      d3 += d * d * d;
      d4 += d * d * d * d;
    }
    d2 /= c;
    d3 /= c;
    d4 /= c;
    const double mu2 = d2 + s2;
    const double mu3 = d3 + s2 * s * noise_skew;
    r.mean[k] = mean;
    r.stddev[k] = std::sqrt(mu2);
    r.skewness[k] = mu2 > 0.0 ? mu3 / std::pow(mu2, 1.5) : 0.0;
    r.fourth_moment[k] = d4 + 6.0 * d2 * s2 + s2 * s2 * noise_kurt;
    r.noise_skewness[k] = noise_skew;
  }
  return r;
}

ReferenceStats reference_stats(const SynthConfig& config) {
  config.check();
  Xoshiro256StarStar rng(config.seed);
  const DrawnParameters p = draw_parameters(config, rng);
  return reference_stats(config, p.shapes, p.class_means);
}

void write_synth_config(const std::filesystem::path& path, const SynthConfig& c) {
  std::ostringstream os;
  os << "class_separation = " << format_double(c.class_separation) << "\n"
     << "generator = xoshiro256** (splitmix64 seeding)\n"
     << "n_channels = " << c.n_channels << "\n"
     << "n_classes = " << c.n_classes << "\n"
     << "n_id_test = " << c.n_id_test << "\n"
     << "n_id_train = " << c.n_id_train << "\n"
     << "n_ood = " << c.n_ood << "\n"
     << "noise_scale = " << format_double(c.noise_scale) << "\n"
     << "ood_shift = " << format_double(c.ood_shift) << "\n"
     << "seed = " << c.seed << "\n"
     << "shape_high = " << format_double(c.shape_high) << "\n"
     << "shape_low = " << format_double(c.shape_low) << "\n";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for writing");
  out << os.str();
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for '" + path.string() + "'");
}

void write_benchmark(const std::filesystem::path& dir, const SynthConfig& config,
                     const SynthBenchmark& bench) {
  write_bundle(dir / "train", bench.train.features, bench.train.labels, bench.head);
  write_bundle(dir / "id_test", bench.id_test.features, bench.id_test.labels, bench.head);
  write_bundle(dir / "ood", bench.ood.features, bench.ood.labels, bench.head);
  write_synth_config(dir / "synth_config.txt", config);
}

}  // namespace tsre
