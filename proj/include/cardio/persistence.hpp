#pragma once

// Model artifact envelope (format version 1).
//
//   CARDIO-LEARN-MODEL\n
//   format_version=1\n
//   [metadata]\n      key=value lines
//   [preprocess]\n    key=value lines
//   [payload]\n       key=value lines, model specific
//   checksum=<8 lowercase hex digits>\n
//
// The checksum is the CRC-32 of every byte before the "checksum=" line.
// Numbers are shortest round-trip decimals; lists are comma separated.
// See docs/artifact-format.md for the per-kind payload keys.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cardio/classifier.hpp"
#include "cardio/dataset.hpp"
#include "cardio/error.hpp"
#include "cardio/text.hpp"

namespace cardio {

inline constexpr std::string_view kArtifactMagic = "CARDIO-LEARN-MODEL";
inline constexpr int kArtifactFormatVersion = 1;

namespace detail {

class ArtifactWriter {
 public:
  void line(std::string_view s) {
    out_ += s;
    out_ += '\n';
  }
  void kv(std::string_view k, std::string_view v) {
    if (v.find('\n') != std::string_view::npos) throw ConfigError("artifact value for '" + std::string(k) + "' spans lines");
    out_ += k;
    out_ += '=';
    out_ += v;
    out_ += '\n';
  }
  void kv(std::string_view k, double v) { kv(k, format_double(v)); }
  void kv_int(std::string_view k, long long v) { kv(k, std::to_string(v)); }
  void kv(std::string_view k, const std::vector<double>& v) { kv(k, join_doubles(v)); }
  void kv(std::string_view k, const std::vector<std::size_t>& v) {
    kv(k, join(v, ",", [](std::size_t x) { return std::to_string(x); }));
  }
  void kv(std::string_view k, const std::vector<int>& v) {
    kv(k, join(v, ",", [](int x) { return std::to_string(x); }));
  }
  std::string finish() {
    out_ += "checksum=" + hex32(crc32(out_)) + "\n";
    return std::move(out_);
  }

 private:
  std::string out_;
};

class Section {
 public:
  explicit Section(std::string name) : name_(std::move(name)) {}

  void add(std::string k, std::string v) { entries_.emplace_back(std::move(k), std::move(v)); }

  const std::string& get(std::string_view key) const {
    const std::string* found = nullptr;
    for (const auto& [k, v] : entries_) {
      if (k != key) continue;
      if (found) throw ArtifactFormatError("[" + name_ + "] repeats key '" + std::string(key) + "'");
      found = &v;
    }
    if (!found) throw ArtifactFormatError("[" + name_ + "] lacks key '" + std::string(key) + "'");
    return *found;
  }
  bool has(std::string_view key) const {
    for (const auto& e : entries_) {
      if (e.first == key) return true;
    }
    return false;
  }
  std::vector<std::string> all(std::string_view key) const {
    std::vector<std::string> out;
    for (const auto& [k, v] : entries_) {
      if (k == key) out.push_back(v);
    }
    return out;
  }
  const KeyValues& entries() const { return entries_; }

  double num(std::string_view key) const { return as_num(get(key), key); }
  long long integer(std::string_view key) const { return as_int(get(key), key); }
  std::size_t count(std::string_view key) const {
    const auto v = integer(key);
    if (v < 0) throw ArtifactFormatError("[" + name_ + "] " + std::string(key) + " is negative");
    return static_cast<std::size_t>(v);
  }
  bool flag(std::string_view key) const {
    const auto& v = get(key);
    if (v == "true") return true;
    if (v == "false") return false;
    throw ArtifactFormatError("[" + name_ + "] " + std::string(key) + ": expected true or false");
  }
  std::vector<double> nums(std::string_view key) const { return as_nums(get(key), key); }
  std::vector<std::size_t> indices(std::string_view key) const {
    std::vector<std::size_t> out;
    const auto& v = get(key);
    if (v.empty()) return out;
    for (const auto& tok : split(v, ',')) {
      const auto x = as_int(tok, key);
      if (x < 0) throw ArtifactFormatError("[" + name_ + "] " + std::string(key) + ": negative index");
      out.push_back(static_cast<std::size_t>(x));
    }
    return out;
  }
  std::vector<int> ints(std::string_view key) const {
    std::vector<int> out;
    const auto& v = get(key);
    if (v.empty()) return out;
    for (const auto& tok : split(v, ',')) out.push_back(static_cast<int>(as_int(tok, key)));
    return out;
  }

  double as_num(std::string_view text, std::string_view key) const {
    auto d = try_parse_double(text);
    if (!d) throw ArtifactFormatError("[" + name_ + "] " + std::string(key) + ": bad number '" + std::string(text) + "'");
    return *d;
  }
  long long as_int(std::string_view text, std::string_view key) const {
    try {
      return parse_int(text, key);
    } catch (const ParseError& e) {
      throw ArtifactFormatError("[" + name_ + "] " + e.what());
    }
  }
  std::vector<double> as_nums(std::string_view text, std::string_view key) const {
    try {
      return parse_doubles(text, key);
    } catch (const ParseError& e) {
      throw ArtifactFormatError("[" + name_ + "] " + e.what());
    }
  }

 private:
  std::string name_;
  KeyValues entries_;
};

inline Matrix read_rows(const Section& s, std::string_view key, std::size_t rows, std::size_t cols) {
  const auto lines = s.all(key);
  if (lines.size() != rows) {
    throw ArtifactFormatError("payload: expected " + std::to_string(rows) + " '" + std::string(key) + "' lines, found " +
                              std::to_string(lines.size()));
  }
  Matrix m(0, cols);
  for (const auto& line : lines) {
    const auto v = s.as_nums(line, key);
    if (v.size() != cols) throw ArtifactFormatError("payload: '" + std::string(key) + "' row has wrong width");
    m.append_row(v);
  }
  return m;
}

inline void write_rows(ArtifactWriter& w, std::string_view key, const Matrix& m) {
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    w.kv(key, std::vector<double>(row.begin(), row.end()));
  }
}

inline void require_binary(const std::vector<int>& labels, std::string_view what) {
  for (int v : labels) {
    if (v != 0 && v != 1) throw ArtifactFormatError(std::string(what) + ": labels must be 0 or 1");
  }
}

}  // namespace detail

/// Deterministic text encoding of a trained model.
inline std::string encode_artifact(const TrainedModel& m) {
  detail::ArtifactWriter w;
  w.line(kArtifactMagic);
  w.kv_int("format_version", kArtifactFormatVersion);

  w.line("[metadata]");
  w.kv("kind", to_string(m.kind));
  w.kv("seed", std::to_string(m.meta.seed));
  w.kv("timestamp", m.meta.timestamp);
  w.kv("data.source", m.meta.provenance.source);
  w.kv_int("data.rows", static_cast<long long>(m.meta.provenance.rows));
  w.kv("data.crc32", m.meta.provenance.content_crc);
  w.kv("schema", m.meta.schema_fingerprint);
  w.kv("split.train_fraction", m.meta.split.train_fraction);
  w.kv("split.seed", std::to_string(m.meta.split.seed));
  w.kv("split.stratify", m.meta.split.stratify ? "true" : "false");
  for (const auto& [k, v] : m.meta.hyperparams) w.kv("hp." + k, v);
  for (const auto& note : m.meta.notes) w.kv("note", note);

  w.line("[preprocess]");
  w.kv("layout", join(m.preprocess.encoding.output_layout, "|", [](const std::string& s) { return s; }));
  w.kv("standardize", m.preprocess.scaling ? "true" : "false");
  if (m.preprocess.scaling) {
    const auto& s = *m.preprocess.scaling;
    w.kv_int("scale.width", static_cast<long long>(s.width));
    w.kv("scale.columns", s.applies_to);
    w.kv("scale.means", s.means);
    w.kv("scale.stds", s.stds);
  }

  w.line("[payload]");
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, LogRegModel>) {
          w.kv("weights", p.weights);
          w.kv("bias", p.bias);
        } else if constexpr (std::is_same_v<T, KnnModel>) {
          w.kv_int("k", p.hp.k);
          w.kv("metric", to_string(p.hp.metric));
          w.kv("weighting", to_string(p.hp.weighting));
          w.kv_int("rows", static_cast<long long>(p.stored.rows()));
          w.kv_int("cols", static_cast<long long>(p.stored.cols()));
          w.kv("labels", p.labels);
          detail::write_rows(w, "x", p.stored);
        } else if constexpr (std::is_same_v<T, SvmModel>) {
          w.kv("kernel", to_string(p.kernel.kind));
          w.kv("gamma", p.kernel.gamma);
          w.kv("C", p.C);
          w.kv("bias", p.bias);
          w.kv("converged", p.converged ? "true" : "false");
          w.kv_int("rows", static_cast<long long>(p.support_vectors.rows()));
          w.kv_int("cols", static_cast<long long>(p.support_vectors.cols()));
          w.kv("alphas", p.alphas);
          w.kv("labels", p.signed_labels);
          detail::write_rows(w, "sv", p.support_vectors);
        } else {
          w.kv("widths", p.widths);
          w.kv("params", p.params);
        }
      },
      m.params);
  return w.finish();
}

/// Inverse of encode_artifact. Checks, in order: magic, completeness,
/// checksum, format version; only then is any field interpreted.
inline TrainedModel decode_artifact(std::string_view bytes) {
  if (bytes.size() < kArtifactMagic.size() + 1) {
    if (kArtifactMagic.substr(0, bytes.size()) == bytes) throw TruncatedArtifactError("model artifact is truncated");
    throw NotAModelError("not a model artifact (missing magic string)");
  }
  if (bytes.substr(0, kArtifactMagic.size()) != kArtifactMagic || bytes[kArtifactMagic.size()] != '\n') {
    throw NotAModelError("not a model artifact (missing magic string)");
  }
  if (bytes.back() != '\n') throw TruncatedArtifactError("model artifact is truncated (no final newline)");
  const auto body_end = bytes.rfind('\n', bytes.size() - 2);
  const auto last = bytes.substr(body_end + 1, bytes.size() - body_end - 2);
  constexpr std::string_view kChecksumKey = "checksum=";
  if (last.substr(0, kChecksumKey.size()) != kChecksumKey) {
    throw TruncatedArtifactError("model artifact is truncated (checksum line missing)");
  }
  const auto body = bytes.substr(0, body_end + 1);
  const auto stored = last.substr(kChecksumKey.size());
  const auto actual = hex32(crc32(body));
  if (stored != actual) {
    throw ChecksumError("model artifact checksum mismatch (stored " + std::string(stored) + ", computed " + actual + ")");
  }

  std::vector<std::string> lines = split(body.substr(0, body.size() - 1), '\n');
  constexpr std::string_view kVersionKey = "format_version=";
  if (lines.size() < 2 || lines[1].substr(0, kVersionKey.size()) != kVersionKey) {
    throw ArtifactFormatError("model artifact lacks format_version");
  }
  long long version = 0;
  try {
    version = parse_int(std::string_view(lines[1]).substr(kVersionKey.size()), "format_version");
  } catch (const ParseError& e) {
    throw ArtifactFormatError(e.what());
  }
  if (version != kArtifactFormatVersion) {
    throw VersionError("model artifact has format version " + std::to_string(version) + "; this build reads version " +
                       std::to_string(kArtifactFormatVersion));
  }

  std::map<std::string, detail::Section> sections;
  detail::Section* current = nullptr;
  std::vector<std::string> order;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto& line = lines[i];
    if (line.size() >= 2 && line.front() == '[' && line.back() == ']') {
      const auto name = line.substr(1, line.size() - 2);
      if (sections.count(name)) throw ArtifactFormatError("model artifact repeats section [" + name + "]");
      current = &sections.emplace(name, detail::Section(name)).first->second;
      order.push_back(name);
      continue;
    }
    if (!current) throw ArtifactFormatError("model artifact has data before the first section");
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ArtifactFormatError("model artifact line " + std::to_string(i + 1) + " lacks '='");
    current->add(line.substr(0, eq), line.substr(eq + 1));
  }
  if (order != std::vector<std::string>{"metadata", "preprocess", "payload"}) {
    throw ArtifactFormatError("model artifact sections must be [metadata], [preprocess], [payload]");
  }
  const auto& meta = sections.at("metadata");
  const auto& pre = sections.at("preprocess");
  const auto& pay = sections.at("payload");

  TrainedModel m;
  try {
    m.kind = parse_kind(meta.get("kind"));
  } catch (const ConfigError& e) {
    throw ArtifactFormatError(e.what());
  }
  m.meta.seed = static_cast<std::uint64_t>(meta.integer("seed"));
  m.meta.timestamp = meta.get("timestamp");
  m.meta.provenance.source = meta.get("data.source");
  m.meta.provenance.rows = meta.count("data.rows");
  m.meta.provenance.content_crc = meta.get("data.crc32");
  m.meta.schema_fingerprint = meta.get("schema");
  if (m.meta.schema_fingerprint != FeatureSchema::heart().fingerprint()) {
    throw SchemaError("model artifact was trained on a different feature schema (fingerprint " +
                      m.meta.schema_fingerprint + ", expected " + FeatureSchema::heart().fingerprint() + ")");
  }
  m.meta.split.train_fraction = meta.num("split.train_fraction");
  m.meta.split.seed = static_cast<std::uint64_t>(meta.integer("split.seed"));
  m.meta.split.stratify = meta.flag("split.stratify");
  for (const auto& [k, v] : meta.entries()) {
    if (k.rfind("hp.", 0) == 0) m.meta.hyperparams.emplace_back(k.substr(3), v);
  }
  m.meta.notes = meta.all("note");

  m.preprocess.encoding = EncodingSpec::from_schema();
  const auto layout = split(pre.get("layout"), '|');
  if (layout != m.preprocess.encoding.output_layout) {
    throw ArtifactFormatError("model artifact encoding layout differs from the schema encoding");
  }
  const auto width = m.preprocess.encoding.width();
  if (pre.flag("standardize")) {
    StandardizationParams s;
    s.width = pre.count("scale.width");
    s.applies_to = pre.indices("scale.columns");
    s.means = pre.nums("scale.means");
    s.stds = pre.nums("scale.stds");
    if (s.width != width || s.means.size() != s.applies_to.size() || s.stds.size() != s.applies_to.size()) {
      throw ArtifactFormatError("model artifact standardization block is inconsistent");
    }
    for (std::size_t k = 0; k < s.applies_to.size(); ++k) {
      if (s.applies_to[k] >= width || !(s.stds[k] > 0.0)) {
        throw ArtifactFormatError("model artifact standardization block is inconsistent");
      }
    }
    m.preprocess.scaling = std::move(s);
  }

  switch (m.kind) {
    case ModelKind::logreg: {
      LogRegModel p;
      p.weights = pay.nums("weights");
      p.bias = pay.num("bias");
      if (p.weights.size() != width) throw ArtifactFormatError("logreg payload: weight count != encoded width");
      m.params = std::move(p);
      break;
    }
    case ModelKind::knn: {
      KnnModel p;
      Hyperparams hp = KnnHyperparams{};
      try {
        set_hyperparam(hp, "k", pay.get("k"));
        set_hyperparam(hp, "metric", pay.get("metric"));
        set_hyperparam(hp, "weighting", pay.get("weighting"));
      } catch (const ConfigError& e) {
        throw ArtifactFormatError(std::string("knn payload: ") + e.what());
      }
      p.hp = std::get<KnnHyperparams>(hp);
      const auto rows = pay.count("rows");
      const auto cols = pay.count("cols");
      if (cols != width) throw ArtifactFormatError("knn payload: column count != encoded width");
      p.labels = pay.ints("labels");
      if (p.labels.size() != rows) throw ArtifactFormatError("knn payload: label count != rows");
      detail::require_binary(p.labels, "knn payload");
      if (p.hp.k < 1 || static_cast<std::size_t>(p.hp.k) > rows) throw ArtifactFormatError("knn payload: k out of range");
      p.stored = detail::read_rows(pay, "x", rows, cols);
      m.params = std::move(p);
      break;
    }
    case ModelKind::svm: {
      SvmModel p;
      Hyperparams hp = SvmHyperparams{};
      try {
        set_hyperparam(hp, "kernel", pay.get("kernel"));
      } catch (const ConfigError& e) {
        throw ArtifactFormatError(std::string("svm payload: ") + e.what());
      }
      p.kernel.kind = std::get<SvmHyperparams>(hp).kernel.kind;
      p.kernel.gamma = pay.num("gamma");
      p.C = pay.num("C");
      p.bias = pay.num("bias");
      p.converged = pay.flag("converged");
      const auto rows = pay.count("rows");
      const auto cols = pay.count("cols");
      if (cols != width) throw ArtifactFormatError("svm payload: column count != encoded width");
      p.alphas = pay.nums("alphas");
      p.signed_labels = pay.ints("labels");
      if (p.alphas.size() != rows || p.signed_labels.size() != rows) {
        throw ArtifactFormatError("svm payload: alpha/label count != rows");
      }
      for (int v : p.signed_labels) {
        if (v != 1 && v != -1) throw ArtifactFormatError("svm payload: labels must be +1 or -1");
      }
      p.support_vectors = detail::read_rows(pay, "sv", rows, cols);
      m.params = std::move(p);
      break;
    }
    case ModelKind::mlp: {
      MlpNetwork p;
      p.widths = pay.indices("widths");
      if (p.widths.size() < 2 || p.widths.front() != width || p.widths.back() != 1) {
        throw ArtifactFormatError("mlp payload: widths must run from the encoded width to 1");
      }
      for (auto w : p.widths) {
        if (w == 0) throw ArtifactFormatError("mlp payload: zero layer width");
      }
      p.params = pay.nums("params");
      if (p.params.size() != MlpNetwork::param_count(p.widths)) {
        throw ArtifactFormatError("mlp payload: parameter count does not match widths");
      }
      m.params = std::move(p);
      break;
    }
  }
  return m;
}

inline void save_model(const TrainedModel& m, const std::string& path) { write_file(path, encode_artifact(m)); }

inline TrainedModel load_model(const std::string& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const ParseError&) {
    throw ArtifactFormatError("cannot open model artifact: " + path);
  }
  return decode_artifact(bytes);
}

}  // namespace cardio
