#pragma once

// Experiment configuration documents (YAML). Every value read is recorded
// with its resolved default, so output headers describe the run completely.
// Unknown keys and type errors are reported with line:column positions.

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <fmt/format.h>

#include "qplab/cocycle.hpp"
#include "qplab/errors.hpp"
#include "qplab/linalg.hpp"
#include "qplab/models.hpp"
#include "qplab/reduction.hpp"
#include "qplab/torus.hpp"
#include "qplab/trig.hpp"

namespace qplab {

class ConfigError : public InputError {
 public:
  ConfigError(const std::string& what, int line, int column)
      : InputError(line > 0 ? fmt::format("config:{}:{}: {}", line, column, what) : "config: " + what),
        line_(line), column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_, column_;
};

// Resolved key/value pairs in reading order, e.g. ("numeric.n", "1000").
using ResolvedLog = std::vector<std::pair<std::string, std::string>>;

namespace detail {

inline std::string format_real(double v) { return fmt::format("{:.17g}", v); }

inline std::string flow(const YAML::Node& n) {
  YAML::Emitter e;
  e.SetMapFormat(YAML::Flow);
  e.SetSeqFormat(YAML::Flow);
  e << n;
  return e.c_str();
}

[[noreturn]] inline void fail_at(const YAML::Node& n, const std::string& what) {
  const YAML::Mark m = n.Mark();
  if (m.is_null()) throw ConfigError(what, 0, 0);
  throw ConfigError(what, m.line + 1, m.column + 1);
}

template <class T>
T convert(const YAML::Node& n, const std::string& path, const char* kind) {
  if (!n.IsScalar()) fail_at(n, path + ": expected " + kind);
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail_at(n, path + ": expected " + kind + ", got '" + n.Scalar() + "'");
  }
}

}  // namespace detail

// One mapping of the document. Reads mark keys as used; finish() rejects the rest.
class Section {
 public:
  Section(YAML::Node node, std::string path, std::shared_ptr<ResolvedLog> log)
      : node_(std::move(node)), path_(std::move(path)), log_(std::move(log)) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) detail::fail_at(node_, where() + "expected a mapping");
  }

  const std::string& path() const noexcept { return path_; }
  const YAML::Node& node() const noexcept { return node_; }
  bool has(const std::string& key) const { return node_ && node_.IsMap() && node_[key]; }

  double real(const std::string& key, std::optional<double> def = std::nullopt) {
    const YAML::Node n = fetch(key, def.has_value());
    const double v = present(n) ? detail::convert<double>(n, full(key), "a real number") : *def;
    if (!std::isfinite(v)) detail::fail_at(n, full(key) + ": must be finite");
    record(key, detail::format_real(v));
    return v;
  }

  std::uint64_t count(const std::string& key, std::optional<std::uint64_t> def = std::nullopt) {
    const YAML::Node n = fetch(key, def.has_value());
    std::uint64_t v = 0;
    if (present(n)) {
      const auto s = detail::convert<std::int64_t>(n, full(key), "a non-negative integer");
      if (s < 0) detail::fail_at(n, full(key) + ": must be non-negative");
      v = static_cast<std::uint64_t>(s);
    } else {
      v = *def;
    }
    record(key, std::to_string(v));
    return v;
  }

  bool flag(const std::string& key, bool def) {
    const YAML::Node n = fetch(key, true);
    const bool v = present(n) ? detail::convert<bool>(n, full(key), "true or false") : def;
    record(key, v ? "true" : "false");
    return v;
  }

  std::string text(const std::string& key, std::optional<std::string> def = std::nullopt,
                   const std::vector<std::string>& allowed = {}) {
    const YAML::Node n = fetch(key, def.has_value());
    const std::string v = present(n) ? detail::convert<std::string>(n, full(key), "a string") : *def;
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      if (present(n)) detail::fail_at(n, full(key) + ": '" + v + "' is not one of " + list);
      throw ConfigError(full(key) + ": '" + v + "' is not one of " + list, 0, 0);
    }
    record(key, v);
    return v;
  }

  // A scalar or a list of reals.
  std::vector<double> reals(const std::string& key, std::optional<std::vector<double>> def = std::nullopt) {
    const YAML::Node n = fetch(key, def.has_value());
    std::vector<double> v;
    if (!present(n)) {
      v = *def;
    } else if (n.IsSequence()) {
      for (const auto& e : n) v.push_back(detail::convert<double>(e, full(key), "a real number"));
    } else {
      v.push_back(detail::convert<double>(n, full(key), "a real number"));
    }
    if (present(n) && v.empty()) detail::fail_at(n, full(key) + ": list must not be empty");
    for (double x : v)
      if (!std::isfinite(x)) throw ConfigError(full(key) + ": values must be finite", 0, 0);
    record(key, list_text(v));
    return v;
  }

  std::vector<std::uint64_t> counts(const std::string& key,
                                    std::optional<std::vector<std::uint64_t>> def = std::nullopt) {
    const YAML::Node n = fetch(key, def.has_value());
    std::vector<std::uint64_t> v;
    auto one = [&](const YAML::Node& e) {
      const auto s = detail::convert<std::int64_t>(e, full(key), "a non-negative integer");
      if (s < 0) detail::fail_at(e, full(key) + ": must be non-negative");
      v.push_back(static_cast<std::uint64_t>(s));
    };
    if (!present(n)) v = *def;
    else if (n.IsSequence())
      for (const auto& e : n) one(e);
    else
      one(n);
    if (present(n) && v.empty()) detail::fail_at(n, full(key) + ": list must not be empty");
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + std::to_string(v[i]);
    record(key, s + "]");
    return v;
  }

  // Marks key as read and records a description of its default.
  void note(const std::string& key, std::string value) {
    used_.insert(key);
    record(key, std::move(value));
  }

  // Raw subtree, recorded verbatim in flow style.
  YAML::Node raw(const std::string& key, bool required = true) {
    const YAML::Node n = fetch(key, !required);
    if (present(n)) record(key, detail::flow(n));
    return n;
  }

  Section child(const std::string& key, bool required = true) {
    const YAML::Node n = fetch(key, !required);
    return Section(n, full(key), log_);
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string k = kv.first.as<std::string>();
      if (!used_.count(k)) detail::fail_at(kv.first, "unknown key '" + full(k) + "'");
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    if (has(key)) detail::fail_at(node_[key], full(key) + ": " + what);
    if (node_) detail::fail_at(node_, full(key) + ": " + what);
    throw ConfigError(full(key) + ": " + what, 0, 0);
  }

 private:
  // fetch() returns a Null node for absent optional keys.
  static bool present(const YAML::Node& n) { return n.IsDefined() && !n.IsNull(); }

  std::string full(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "" : path_ + ": "; }

  YAML::Node fetch(const std::string& key, bool optional) {
    used_.insert(key);
    if (has(key)) {
      YAML::Node n = node_[key];
      if (!n.IsNull()) return n;
    }
    if (!optional) {
      if (node_) detail::fail_at(node_, "missing required key '" + full(key) + "'");
      throw ConfigError("missing required key '" + full(key) + "'", 0, 0);
    }
    return YAML::Node();
  }

  void record(const std::string& key, std::string value) {
    if (log_) log_->emplace_back(full(key), std::move(value));
  }

  static std::string list_text(const std::vector<double>& v) {
    std::string s = "[";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + detail::format_real(v[i]);
    return s + "]";
  }

  YAML::Node node_;
  std::string path_;
  std::shared_ptr<ResolvedLog> log_;
  std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// Value parsers

namespace detail {

inline std::vector<int> parse_mode(const YAML::Node& n, std::size_t d, const std::string& path) {
  std::vector<int> k;
  if (n.IsSequence())
    for (const auto& e : n) k.push_back(convert<int>(e, path, "an integer"));
  else
    k.push_back(convert<int>(n, path, "an integer"));
  if (k.size() != d) fail_at(n, path + ": mode has " + std::to_string(k.size()) + " entries, torus has " + std::to_string(d));
  return k;
}

inline void check_term_keys(const YAML::Node& t, const std::string& path) {
  if (!t.IsMap()) fail_at(t, path + ": each term must be a mapping with k, cos, sin");
  for (const auto& kv : t) {
    const auto key = kv.first.as<std::string>();
    if (key != "k" && key != "cos" && key != "sin") fail_at(kv.first, "unknown key '" + path + "." + key + "'");
  }
  if (!t["k"]) fail_at(t, path + ": term needs a mode k");
}

}  // namespace detail

inline Matrix parse_matrix(const YAML::Node& n, const std::string& path) {
  if (!n.IsSequence() || n.size() == 0) detail::fail_at(n, path + ": expected a non-empty list of rows");
  std::vector<std::vector<double>> rows;
  for (const auto& r : n) {
    if (!r.IsSequence()) detail::fail_at(r, path + ": each row must be a list");
    std::vector<double> row;
    for (const auto& e : r) row.push_back(detail::convert<double>(e, path, "a real number"));
    if (!rows.empty() && row.size() != rows.front().size()) detail::fail_at(r, path + ": ragged rows");
    if (row.empty()) detail::fail_at(r, path + ": empty row");
    rows.push_back(std::move(row));
  }
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = rows[i][j];
  if (!all_finite(m)) detail::fail_at(n, path + ": entries must be finite");
  return m;
}

// List of {k, cos, sin} with real coefficients.
inline TrigPoly parse_trig_poly(const YAML::Node& n, std::size_t d, const std::string& path) {
  if (n.IsScalar()) return TrigPoly::constant(detail::convert<double>(n, path, "a real number"), d);
  if (!n.IsSequence()) detail::fail_at(n, path + ": expected a list of terms {k, cos, sin}");
  std::vector<TrigTerm> terms;
  for (const auto& t : n) {
    detail::check_term_keys(t, path);
    TrigTerm term;
    term.k = detail::parse_mode(t["k"], d, path + ".k");
    if (t["cos"]) term.cos_coef = detail::convert<double>(t["cos"], path + ".cos", "a real number");
    if (t["sin"]) term.sin_coef = detail::convert<double>(t["sin"], path + ".sin", "a real number");
    terms.push_back(std::move(term));
  }
  try {
    return TrigPoly(d, std::move(terms));
  } catch (const InputError& e) {
    detail::fail_at(n, path + ": " + e.what());
  }
}

// A constant matrix (list of rows) or a list of {k, cos: matrix, sin: matrix}.
inline MatrixTrigPoly parse_matrix_trig_poly(const YAML::Node& n, std::size_t d, const std::string& path,
                                             std::optional<std::size_t> size = std::nullopt) {
  if (!n.IsSequence() || n.size() == 0) detail::fail_at(n, path + ": expected a matrix or a list of terms");
  MatrixTrigPoly out;
  if (n[0].IsSequence()) {
    out = MatrixTrigPoly::constant(parse_matrix(n, path), d);
  } else {
    std::vector<MatrixTrigTerm> terms;
    std::size_t rows = 0, cols = 0;
    for (const auto& t : n) {
      detail::check_term_keys(t, path);
      MatrixTrigTerm term;
      term.k = detail::parse_mode(t["k"], d, path + ".k");
      if (t["cos"]) term.cos_coef = parse_matrix(t["cos"], path + ".cos");
      if (t["sin"]) term.sin_coef = parse_matrix(t["sin"], path + ".sin");
      const Matrix& shape = term.cos_coef.empty() ? term.sin_coef : term.cos_coef;
      if (shape.empty()) detail::fail_at(t, path + ": term needs cos or sin");
      if (rows == 0) {
        rows = shape.rows();
        cols = shape.cols();
      }
      terms.push_back(std::move(term));
    }
    try {
      out = MatrixTrigPoly(rows, cols, d, std::move(terms));
    } catch (const InputError& e) {
      detail::fail_at(n, path + ": " + e.what());
    }
  }
  if (size && (out.rows() != *size || out.cols() != *size))
    detail::fail_at(n, path + ": expected a " + std::to_string(*size) + " x " + std::to_string(*size) + " matrix");
  return out;
}

// "golden", a real number, or a list of reals.
inline Frequency parse_frequency(Section& root) {
  if (!root.has("frequency")) {
    root.text("frequency", std::string("golden"));
    return Frequency::golden();
  }
  const YAML::Node n = root.raw("frequency");
  if (n.IsScalar() && n.Scalar() == "golden") return Frequency::golden();
  std::vector<double> w;
  if (n.IsSequence())
    for (const auto& e : n) w.push_back(detail::convert<double>(e, "frequency", "a real number"));
  else
    w.push_back(detail::convert<double>(n, "frequency", "a real number or 'golden'"));
  try {
    return Frequency(w);
  } catch (const InputError& e) {
    detail::fail_at(n, std::string("frequency: ") + e.what());
  }
}

// ---------------------------------------------------------------------------
// Models

struct Model {
  std::string type;
  CocycleSpec spec;                               // the cocycle at the configured energy
  std::optional<SchrodingerParams> schrodinger;
  std::optional<JacobiParams> jacobi;
  double energy = 0.0;
  JacobiForm form = JacobiForm::raw;
};

inline const std::vector<std::string>& model_types() {
  static const std::vector<std::string> t{"constant", "trig", "schrodinger", "jacobi", "block-s", "rank-deficient"};
  return t;
}

inline Model parse_model(Section& s, const Frequency& omega, std::uint64_t seed);

namespace detail {

inline CocycleSpec guarded(Section& s, const std::string& key, const std::function<CocycleSpec()>& build) {
  try {
    return build();
  } catch (const ConfigError&) {
    throw;
  } catch (const InputError& e) {
    s.fail(key, e.what());
  }
}

}  // namespace detail

inline Model parse_model(Section& s, const Frequency& omega, std::uint64_t seed) {
  Model m;
  const std::size_t d = omega.dim();
  m.type = s.text("type", std::nullopt, model_types());
  if (m.type == "constant") {
    const Matrix a = parse_matrix(s.raw("matrix"), s.path() + ".matrix");
    m.spec = detail::guarded(s, "matrix", [&] { return CocycleSpec::constant(a, omega, "constant"); });
  } else if (m.type == "trig") {
    auto poly = parse_matrix_trig_poly(s.raw("terms"), d, s.path() + ".terms");
    m.spec = detail::guarded(s, "terms", [&] { return CocycleSpec::from_trig(poly, omega, "trig"); });
  } else if (m.type == "schrodinger") {
    SchrodingerParams p;
    if (s.has("potential")) {
      p.f = parse_trig_poly(s.raw("potential"), d, s.path() + ".potential");
    } else {
      p.f = TrigPoly::cosine(1.0, 0.0, d);
      s.note("potential", "[{k: e1, cos: 1}]");
    }
    p.lambda = s.real("lambda", 1.0);
    p.energy = s.real("energy", 0.0);
    const bool allow = s.flag("allow_constant", false);
    m.energy = p.energy;
    m.schrodinger = p;
    m.spec = detail::guarded(s, "potential", [&] { return schrodinger_cocycle(p, omega, allow); });
  } else if (m.type == "jacobi") {
    JacobiParams p;
    p.l = s.count("l", 1);
    const std::string base = s.path();
    auto block = [&](const std::string& key, Matrix def, const char* def_text) {
      if (s.has(key)) return parse_matrix_trig_poly(s.raw(key), d, base + "." + key, p.l);
      s.note(key, def_text);
      return MatrixTrigPoly::constant(def, d);
    };
    p.w = block("w", Matrix::identity(p.l), "identity");
    p.r = block("r", Matrix(p.l, p.l), "zero");
    p.f = block("f", Matrix(p.l, p.l), "zero");
    p.lambda = s.real("lambda", 1.0);
    m.energy = s.real("energy", 0.0);
    m.form = s.text("form", std::string("raw"), {"raw", "regularized"}) == "raw" ? JacobiForm::raw
                                                                                  : JacobiForm::regularized;
    m.jacobi = p;
    m.spec = detail::guarded(s, "w", [&] { return jacobi_cocycle(p, m.energy, omega, m.form); });
  } else if (m.type == "block-s") {
    const double delta = s.real("delta");
    Section top = s.child("top");
    const Model inner = parse_model(top, omega, seed);
    top.finish();
    const std::string base = s.path();
    const auto nb = parse_matrix_trig_poly(s.raw("n"), d, base + ".n");
    const auto pb = parse_matrix_trig_poly(s.raw("p"), d, base + ".p");
    const auto qb = parse_matrix_trig_poly(s.raw("q"), d, base + ".q");
    m.spec = detail::guarded(s, "q", [&] { return block_cocycle_S(delta, inner.spec, nb, pb, qb); });
  } else {  // rank-deficient
    const std::size_t dim = s.count("m", 3);
    const std::size_t k = s.count("k", 1);
    const std::uint64_t model_seed = s.count("seed", seed);
    const int degree = static_cast<int>(s.count("degree", 1));
    m.spec = detail::guarded(s, "k", [&] { return random_rank_deficient_cocycle(model_seed, dim, k, omega, degree); });
  }
  return m;
}

// ---------------------------------------------------------------------------
// Documents

struct ExperimentConfig {
  YAML::Node root;
  std::string source = "<inline>";
};

inline ExperimentConfig load_config_text(const std::string& text, std::string source = "<inline>") {
  ExperimentConfig c;
  c.source = std::move(source);
  try {
    c.root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
  if (c.root.IsNull()) c.root = YAML::Node(YAML::NodeType::Map);
  if (!c.root.IsMap()) detail::fail_at(c.root, "the document must be a mapping");
  return c;
}

inline ExperimentConfig load_config_file(const std::string& path) {
  try {
    ExperimentConfig c = load_config_text("", path);
    c.root = YAML::LoadFile(path);
    if (c.root.IsNull()) c.root = YAML::Node(YAML::NodeType::Map);
    if (!c.root.IsMap()) detail::fail_at(c.root, "the document must be a mapping");
    return c;
  } catch (const YAML::BadFile&) {
    throw InputError("cannot read config file '" + path + "'");
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1, e.mark.column + 1);
  }
}

}  // namespace qplab
