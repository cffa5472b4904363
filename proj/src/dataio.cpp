#include "tsre/dataio.hpp"

#include <bit>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace tsre {

namespace {

// ---- little-endian tensor files ----

void put_u32(std::vector<char>& buf, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) buf.push_back(static_cast<char>((v >> (8 * b)) & 0xFFu));
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[b])) << (8 * b);
  }
  return v;
}

void write_file(const fs::path& path, const std::vector<char>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "write failed for '" + path.string() + "'");
}

void write_text(const fs::path& path, const std::string& text) {
  write_file(path, std::vector<char>(text.begin(), text.end()));
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw Error(ErrorCode::IoFailure, "read failed for '" + path.string() + "'");
  return os.str();
}

/// Reads exactly `expected` bytes; a file of any other length is a shape error.
std::vector<char> read_exact(const fs::path& path, std::uint64_t expected) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(ErrorCode::IoFailure, "missing file '" + path.string() + "'");
  }
  const auto size = fs::file_size(path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot stat '" + path.string() + "'");
  if (size != expected) {
    throw Error(ErrorCode::ShapeMismatch, "'" + path.string() + "' has " +
                                              std::to_string(size) + " bytes, manifest implies " +
                                              std::to_string(expected));
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
  std::vector<char> bytes(static_cast<std::size_t>(expected));
  in.read(bytes.data(), static_cast<std::streamsize>(expected));
  if (!in) throw Error(ErrorCode::IoFailure, "short read on '" + path.string() + "'");
  return bytes;
}

std::vector<char> encode_f32_rowmajor(const Matrix& m) {
  std::vector<char> buf;
  buf.reserve(static_cast<std::size_t>(m.size()) * 4);
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      put_u32(buf, std::bit_cast<std::uint32_t>(static_cast<float>(m(i, j))));
    }
  }
  return buf;
}

Matrix decode_f32_rowmajor(const std::vector<char>& bytes, Eigen::Index rows, Eigen::Index cols) {
  Matrix m(rows, cols);
  const char* p = bytes.data();
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j, p += 4) {
      m(i, j) = static_cast<double>(std::bit_cast<float>(get_u32(p)));
    }
  }
  return m;
}

std::uint64_t checked_bytes(std::int64_t a, std::int64_t b, std::uint64_t cap,
                            const std::string& what) {
  if (a < 0 || b < 0) throw Error(ErrorCode::ShapeMismatch, what + " has a negative dimension");
  const auto ua = static_cast<std::uint64_t>(a);
  const auto ub = static_cast<std::uint64_t>(b);
  if (ub != 0 && ua > cap / 4 / ub) {
    throw Error(ErrorCode::ShapeMismatch, what + " declares more than " + std::to_string(cap) +
                                              " bytes");
  }
  return ua * ub * 4;
}

// ---- key = value text ----

struct KeyValueLine {
  std::string value;
  int line = 0;
};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::map<std::string, KeyValueLine> parse_key_values(const std::string& text,
                                                     const std::string& origin) {
  std::map<std::string, KeyValueLine> out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::ParseFailure,
                  origin + ":" + std::to_string(number) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(stripped).substr(0, eq));
    std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty()) {
      throw Error(ErrorCode::ParseFailure, origin + ":" + std::to_string(number) + ": empty key");
    }
    if (out.count(key)) {
      throw Error(ErrorCode::ParseFailure,
                  origin + ":" + std::to_string(number) + ": duplicate key '" + key + "'");
    }
    out.emplace(std::move(key), KeyValueLine{std::move(value), number});
  }
  return out;
}

std::string join_keys(const std::map<std::string, std::string>& keys) {
  std::string text;
  for (const auto& [k, v] : keys) text += k + " = " + v + "\n";
  return text;
}

class KeyReader {
 public:
  KeyReader(std::map<std::string, KeyValueLine> kv, std::string origin)
      : kv_(std::move(kv)), origin_(std::move(origin)) {}

  bool has(const std::string& key) const { return kv_.count(key) != 0; }

  const KeyValueLine& raw(const std::string& key) const {
    const auto it = kv_.find(key);
    if (it == kv_.end()) {
      throw Error(ErrorCode::ParseFailure, origin_ + ": missing key '" + key + "'");
    }
    return it->second;
  }

  std::string str(const std::string& key) const { return raw(key).value; }

  double real(const std::string& key) const {
    const auto& entry = raw(key);
    const auto v = parse_double(entry.value);
    if (!v) fail(entry, "'" + key + "' is not a number");
    return *v;
  }

  std::int64_t integer(const std::string& key) const {
    const auto& entry = raw(key);
    std::int64_t v = 0;
    const auto* begin = entry.value.data();
    const auto* end = begin + entry.value.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc() || res.ptr != end) fail(entry, "'" + key + "' is not an integer");
    return v;
  }

  bool flag(const std::string& key) const {
    const auto& entry = raw(key);
    if (entry.value == "true") return true;
    if (entry.value == "false") return false;
    fail(entry, "'" + key + "' must be true or false");
  }

  Vector vec(const std::string& key, Eigen::Index expected) const {
    const auto& entry = raw(key);
    std::vector<double> values;
    std::istringstream in(entry.value);
    std::string token;
    while (in >> token) {
      const auto v = parse_double(token);
      if (!v) fail(entry, "'" + key + "' has non-numeric entry '" + token + "'");
      values.push_back(*v);
    }
    if (static_cast<Eigen::Index>(values.size()) != expected) {
      fail(entry, "'" + key + "' has " + std::to_string(values.size()) + " entries, expected " +
                      std::to_string(expected));
    }
    return Eigen::Map<const Vector>(values.data(), expected);
  }

  [[noreturn]] void fail(const KeyValueLine& entry, const std::string& what) const {
    throw Error(ErrorCode::ParseFailure, origin_ + ":" + std::to_string(entry.line) + ": " + what);
  }

 private:
  std::map<std::string, KeyValueLine> kv_;
  std::string origin_;
};

std::string format_vector(const Vector& v) {
  std::string out;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (k) out += ' ';
    out += format_double(v[k]);
  }
  return out;
}

const char* bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::optional<double> parse_double(std::string_view text) {
  if (text.empty()) return std::nullopt;
  // from_chars rejects a leading '+', which is fine for this format.
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) return std::nullopt;
  return v;
}

std::map<std::string, std::string> BundleManifest::to_keys() const {
  std::map<std::string, std::string> keys{
      {"format_version", std::to_string(format_version)},
      {"n_samples", std::to_string(n_samples)},
      {"n_channels", std::to_string(n_channels)},
      {"n_classes", std::to_string(n_classes)},
      {"features", features},
      {"labels", labels},
      {"dtype_features", dtype_features},
      {"dtype_labels", dtype_labels},
  };
  if (head_weights) keys["head_weights"] = *head_weights;
  if (head_bias) keys["head_bias"] = *head_bias;
  return keys;
}

BundleManifest write_bundle(const fs::path& dir, const FeatureMatrix& features,
                            const LabelVector& labels, const std::optional<ClassifierHead>& head) {
  validate_bundle(features, labels, head);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create '" + dir.string() + "'");

  BundleManifest manifest;
  manifest.n_samples = features.n_samples();
  manifest.n_channels = features.n_channels();
  manifest.n_classes = labels.n_classes();

  write_file(dir / manifest.features, encode_f32_rowmajor(features.data()));

  std::vector<char> label_bytes;
  label_bytes.reserve(static_cast<std::size_t>(labels.size()) * 4);
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    put_u32(label_bytes, static_cast<std::uint32_t>(labels[i]));
  }
  write_file(dir / manifest.labels, label_bytes);

  if (head) {
    manifest.head_weights = "head_weights.f32";
    manifest.head_bias = "head_bias.f32";
    write_file(dir / *manifest.head_weights, encode_f32_rowmajor(head->weights()));
    write_file(dir / *manifest.head_bias, encode_f32_rowmajor(Matrix(head->bias())));
  }
  write_text(dir / "manifest.txt", join_keys(manifest.to_keys()));
  return manifest;
}

BundleManifest read_manifest(const fs::path& dir, const ReadOptions& options) {
  const fs::path path = dir / "manifest.txt";
  KeyReader r(parse_key_values(read_text(path), path.string()), path.string());
  BundleManifest m;
  m.format_version = static_cast<int>(r.integer("format_version"));
  if (m.format_version != kFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion,
                path.string() + ": format_version " + std::to_string(m.format_version));
  }
  m.n_samples = r.integer("n_samples");
  m.n_channels = r.integer("n_channels");
  m.n_classes = r.integer("n_classes");
  m.features = r.str("features");
  m.labels = r.str("labels");
  m.dtype_features = r.str("dtype_features");
  m.dtype_labels = r.str("dtype_labels");
  if (m.dtype_features != "f32le" || m.dtype_labels != "i32le") {
    throw Error(ErrorCode::UnsupportedVersion, path.string() + ": unsupported dtype");
  }
  if (r.has("head_weights") != r.has("head_bias")) {
    throw Error(ErrorCode::ParseFailure,
                path.string() + ": head_weights and head_bias must appear together");
  }
  if (r.has("head_weights")) {
    m.head_weights = r.str("head_weights");
    m.head_bias = r.str("head_bias");
  }
  if (m.n_samples < 1 || m.n_channels < 1 || m.n_classes < 1) {
    throw Error(ErrorCode::ShapeMismatch, path.string() + ": dimensions must be >= 1");
  }
  checked_bytes(m.n_samples, m.n_channels, options.max_tensor_bytes, "features");
  checked_bytes(m.n_classes, m.n_channels, options.max_tensor_bytes, "head weights");
  return m;
}

Bundle read_bundle(const fs::path& dir, const ReadOptions& options) {
  const BundleManifest m = read_manifest(dir, options);
  const auto cap = options.max_tensor_bytes;

  const auto feature_bytes =
      read_exact(dir / m.features, checked_bytes(m.n_samples, m.n_channels, cap, "features"));
  FeatureMatrix features(decode_f32_rowmajor(feature_bytes, m.n_samples, m.n_channels));

  const auto label_bytes = read_exact(dir / m.labels, checked_bytes(m.n_samples, 1, cap, "labels"));
  IndexVector labels(m.n_samples);
  for (Eigen::Index i = 0; i < labels.size(); ++i) {
    labels[i] = static_cast<std::int32_t>(get_u32(label_bytes.data() + 4 * i));
  }

  std::optional<ClassifierHead> head;
  if (m.head_weights) {
    const auto w = read_exact(dir / *m.head_weights,
                              checked_bytes(m.n_classes, m.n_channels, cap, "head weights"));
    const auto b = read_exact(dir / *m.head_bias, checked_bytes(m.n_classes, 1, cap, "head bias"));
    head.emplace(decode_f32_rowmajor(w, m.n_classes, m.n_channels),
                 Vector(decode_f32_rowmajor(b, m.n_classes, 1).col(0)));
  }
  Bundle bundle{std::move(features), LabelVector(std::move(labels), m.n_classes), std::move(head)};
  validate_bundle(bundle.features, bundle.labels, bundle.head);
  return bundle;
}

void write_profile(const fs::path& path, const FittedModel& model) {
  model.params.check();
  model.profile.check();
  model.typical.check();
  const Eigen::Index m = model.profile.n_channels();
  if (model.typical.n_channels() != m || model.laps.lower.size() != m) {
    throw Error(ErrorCode::InvariantViolation, "profile parts disagree on channel count");
  }
  const HyperParams& p = model.params;
  std::map<std::string, std::string> keys{
      {"format_version", std::to_string(kFormatVersion)},
      {"n_channels", std::to_string(m)},
      {"n_classes", std::to_string(model.n_classes)},
      {"param.lambda", format_double(p.lambda_base)},
      {"param.omega", format_double(p.omega)},
      {"param.a", format_double(p.a_balance)},
      {"param.p", format_double(p.percentile_p)},
      {"param.enable_activity", bool_text(p.enable_activity)},
      {"param.enable_skew", bool_text(p.enable_skew)},
      {"param.enable_discriminability", bool_text(p.enable_discriminability)},
      {"param.laps_m", format_double(p.laps_m)},
      {"param.laps_n", format_double(p.laps_n)},
      {"param.react_percentile", format_double(p.react_percentile)},
      {"param.activity_scale", format_double(p.activity_scale)},
      {"param.similarity", to_string(p.similarity)},
      {"param.skew_source", to_string(p.skew_source)},
      {"profile.mu", format_vector(model.profile.mu)},
      {"profile.sigma", format_vector(model.profile.sigma)},
      {"profile.mu_bar", format_double(model.profile.mu_bar)},
      {"profile.sigma_bar", format_double(model.profile.sigma_bar)},
      {"profile.similarity", format_vector(model.profile.similarity)},
      {"profile.variance", format_vector(model.profile.variance)},
      {"profile.discriminability", format_vector(model.profile.discriminability)},
      {"profile.activity", format_vector(model.profile.activity)},
      {"profile.skew", format_vector(model.profile.skew)},
      {"typical.lower", format_vector(model.typical.lower)},
      {"typical.upper", format_vector(model.typical.upper)},
      {"typical.lambda", format_vector(model.typical.lambda_k)},
      {"laps.lower", format_vector(model.laps.lower)},
      {"laps.upper", format_vector(model.laps.upper)},
      {"laps.lambda_upper", format_vector(model.laps.lambda_upper)},
      {"laps.lambda_lower", format_vector(model.laps.lambda_lower)},
      {"react.c", format_double(model.react.c)},
  };
  write_text(path, "# tsre fitted profile\n" + join_keys(keys));
}

FittedModel read_profile(const fs::path& path) {
  KeyReader r(parse_key_values(read_text(path), path.string()), path.string());
  if (r.integer("format_version") != kFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion, path.string() + ": unsupported profile version");
  }
  const Eigen::Index m = r.integer("n_channels");
  if (m < 1) r.fail(r.raw("n_channels"), "n_channels must be >= 1");

  FittedModel model;
  model.n_classes = r.integer("n_classes");
  HyperParams& p = model.params;
  p.lambda_base = r.real("param.lambda");
  p.omega = r.real("param.omega");
  p.a_balance = r.real("param.a");
  p.percentile_p = r.real("param.p");
  p.enable_activity = r.flag("param.enable_activity");
  p.enable_skew = r.flag("param.enable_skew");
  p.enable_discriminability = r.flag("param.enable_discriminability");
  p.laps_m = r.real("param.laps_m");
  p.laps_n = r.real("param.laps_n");
  p.react_percentile = r.real("param.react_percentile");
  p.activity_scale = r.real("param.activity_scale");
  try {
    p.similarity = similarity_mode_from_string(r.str("param.similarity"));
    p.skew_source = skew_source_from_string(r.str("param.skew_source"));
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseFailure, path.string() + ": " + e.what());
  }

  ChannelProfile& prof = model.profile;
  prof.mu = r.vec("profile.mu", m);
  prof.sigma = r.vec("profile.sigma", m);
  prof.mu_bar = r.real("profile.mu_bar");
  prof.sigma_bar = r.real("profile.sigma_bar");
  prof.similarity = r.vec("profile.similarity", m);
  prof.variance = r.vec("profile.variance", m);
  prof.discriminability = r.vec("profile.discriminability", m);
  prof.activity = r.vec("profile.activity", m);
  prof.skew = r.vec("profile.skew", m);

  model.typical.lower = r.vec("typical.lower", m);
  model.typical.upper = r.vec("typical.upper", m);
  model.typical.lambda_k = r.vec("typical.lambda", m);
  model.laps.lower = r.vec("laps.lower", m);
  model.laps.upper = r.vec("laps.upper", m);
  model.laps.lambda_upper = r.vec("laps.lambda_upper", m);
  model.laps.lambda_lower = r.vec("laps.lambda_lower", m);
  model.react.c = r.real("react.c");

  p.check();
  prof.check();
  model.typical.check();
  for (Eigen::Index k = 0; k < m; ++k) {
    if (model.laps.lower[k] > model.laps.upper[k]) {
      throw Error(ErrorCode::InvariantViolation,
                  path.string() + ": laps lower > upper at channel " + std::to_string(k));
    }
  }
  return model;
}

void write_scores(const fs::path& path, const ScoreSet& scores) {
  std::string text;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    text += format_double(scores.scores()[i]);
    text += '\n';
  }
  write_text(path, text);
}

ScoreSet read_scores(const fs::path& path, const std::string& method_tag) {
  const std::string text = read_text(path);
  std::vector<double> values;
  std::size_t pos = 0;
  int line = 0;
  while (pos < text.size()) {
    ++line;
    auto end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view token(text.data() + pos, end - pos);
    if (!token.empty() && token.back() == '\r') token.remove_suffix(1);
    const auto v = parse_double(token);
    if (!v) {
      throw Error(ErrorCode::ParseFailure,
                  path.string() + ":" + std::to_string(line) + ": not a number");
    }
    values.push_back(*v);
    pos = end + 1;
  }
  return ScoreSet(Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size())),
                  method_tag);
}

void write_report(const fs::path& path, const EvalReport& report, const std::string& method,
                  const std::string& ood_set) {
  const std::map<std::string, std::string> keys{
      {"method", method},
      {"ood_set", ood_set},
      {"gamma", format_double(report.gamma)},
      {"tpr_achieved", format_double(report.tpr_achieved)},
      {"fpr95", format_double(report.fpr95)},
      {"auroc", format_double(report.auroc)},
      {"n_id", std::to_string(report.n_id)},
      {"n_ood", std::to_string(report.n_ood)},
  };
  write_text(path, join_keys(keys));
}

std::string report_csv_header() { return "method,ood_set,fpr95,auroc"; }

std::string report_csv_row(const std::string& method, const std::string& ood_set,
                           const EvalReport& report) {
  return method + "," + ood_set + "," + format_double(report.fpr95) + "," +
         format_double(report.auroc);
}

}  // namespace tsre
