#pragma once

// Experiment runner: one function per subcommand turns a validated config into
// a table; run() adds the self-describing header, writes CSV and maps errors
// to exit codes (0 success, 1 validation, 2 numerical degeneracy).

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "qplab/acceptance.hpp"
#include "qplab/avalanche.hpp"
#include "qplab/cocycle.hpp"
#include "qplab/config.hpp"
#include "qplab/empirics.hpp"
#include "qplab/errors.hpp"
#include "qplab/models.hpp"
#include "qplab/parallel.hpp"
#include "qplab/reduction.hpp"
#include "qplab/rng.hpp"
#include "qplab/torus.hpp"
#include "qplab/version.hpp"

namespace qplab {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 1;
inline constexpr int kExitDegenerate = 2;

struct Table {
  Table() = default;
  explicit Table(std::vector<std::string> cols) : columns(std::move(cols)) {}

  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> notes;  // emitted as '# note: ...' header lines
  bool failed = false;             // a check reported failure; maps to exit 1

  void add(std::vector<std::string> row) {
    if (row.size() != columns.size()) throw std::logic_error("Table::add: row width mismatch");
    rows.push_back(std::move(row));
  }
};

namespace cell {

inline std::string of(double v) { return fmt::format("{:.17g}", v); }
inline std::string of(std::uint64_t v) { return std::to_string(v); }
inline std::string of(std::int64_t v) { return std::to_string(v); }
inline std::string of(int v) { return std::to_string(v); }
inline std::string of(bool v) { return v ? "true" : "false"; }
inline std::string of(const std::string& v) { return v; }
inline std::string of(const char* v) { return v; }

// Lists use ';' so a cell never contains the column separator.
template <class T>
std::string list(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + of(v[i]);
  return s;
}

}  // namespace cell

template <class... T>
std::vector<std::string> row_of(const T&... v) {
  return {cell::of(v)...};
}

// ---------------------------------------------------------------------------
// Per-run context: the resolved-config log and lazily parsed shared blocks.

class RunContext {
 public:
  explicit RunContext(const ExperimentConfig& cfg)
      : log_(std::make_shared<ResolvedLog>()), root_(cfg.root, "", log_),
        numeric_(root_.child("numeric", false)) {}

  Section& root() { return root_; }
  Section& numeric() { return numeric_; }
  const std::shared_ptr<ResolvedLog>& log() const { return log_; }

  const Frequency& omega() {
    if (!omega_) omega_ = parse_frequency(root_);
    return *omega_;
  }

  std::uint64_t seed() {
    if (!seed_) seed_ = numeric_.count("seed");
    return *seed_;
  }

  Model& model() {
    if (!model_) {
      const Frequency& w = omega();
      Section s = root_.child("model");
      // A rank-deficient model without its own seed draws from numeric.seed.
      const bool needs_seed = s.has("type") && s.node()["type"].IsScalar() &&
                              s.node()["type"].Scalar() == "rank-deficient" && !s.has("seed");
      model_ = parse_model(s, w, needs_seed ? seed() : 0);
      s.finish();
    }
    return *model_;
  }

  const JacobiParams& jacobi() {
    Model& m = model();
    if (!m.jacobi) root_.fail("model", "this command needs a model of type 'jacobi'");
    return *m.jacobi;
  }

  const SchrodingerParams& schrodinger() {
    Model& m = model();
    if (!m.schrodinger) root_.fail("model", "this command needs a model of type 'schrodinger'");
    return *m.schrodinger;
  }

  std::size_t grid(std::size_t d_default_for) {
    QuadratureSettings q;
    return numeric_.count("grid", q.grid_for(d_default_for));
  }

  void finish() {
    numeric_.finish();
    root_.finish();
  }

 private:
  std::shared_ptr<ResolvedLog> log_;
  Section root_;
  Section numeric_;
  std::optional<Frequency> omega_;
  std::optional<std::uint64_t> seed_;
  std::optional<Model> model_;
};

// ---------------------------------------------------------------------------
// Subcommands

namespace commands {

inline Table finite_scale_rows(RunContext& ctx, const std::vector<std::uint64_t>& ns) {
  const CocycleSpec& spec = ctx.model().spec;
  QuadratureSettings q;
  q.grid = ctx.grid(spec.frequency().dim());
  if (ctx.numeric().has("truncation")) q.truncation = ctx.numeric().real("truncation");
  Table t{{"n", "estimate", "error_estimate", "samples", "excluded"}};
  for (std::uint64_t n : ns) {
    const auto e = finite_scale_top_le(spec, n, q);
    t.add(row_of(e.n, e.estimate, e.error_estimate, std::uint64_t{e.samples}, std::uint64_t{e.excluded}));
    if (e.degenerate) t.notes.push_back(fmt::format("n={}: more than half of the samples are -inf", n));
  }
  return t;
}

inline Table le(RunContext& ctx) { return finite_scale_rows(ctx, {ctx.numeric().count("n", 1000)}); }

inline Table un_profile(RunContext& ctx) {
  return finite_scale_rows(ctx, ctx.numeric().counts("ns", std::vector<std::uint64_t>{10, 20, 50, 100, 200, 500, 1000}));
}

inline Table spectrum(RunContext& ctx) {
  const CocycleSpec& spec = ctx.model().spec;
  const std::uint64_t n = ctx.numeric().count("n", 1000);
  const std::size_t phases = ctx.numeric().count("phases", 16);
  const bool wedge = ctx.numeric().flag("wedge", true);
  const auto s = lyapunov_spectrum(spec, n, phases, wedge);
  Table t{{"k", "exponent"}};
  for (std::size_t k = 0; k < s.exponents.size(); ++k) t.add(row_of(std::uint64_t{k + 1}, s.exponents[k]));
  if (s.wedge_top)
    t.notes.push_back(fmt::format("wedge L1 = {}; |wedge L1 - (L1 + L2)| = {}", cell::of(*s.wedge_top),
                                  cell::of(s.wedge_residual.value_or(0.0))));
  return t;
}

inline Table reduce(RunContext& ctx) {
  ReductionOptions opt;
  opt.seed = ctx.seed();
  const CocycleSpec& spec = ctx.model().spec;
  auto& num = ctx.numeric();
  opt.reference_phases = num.count("reference_phases", opt.reference_phases);
  opt.selection_grid = num.count("selection_grid", opt.selection_grid);
  opt.rank_phases = num.count("rank_phases", opt.rank_phases);
  opt.rank_tolerance = num.real("rank_tolerance", opt.rank_tolerance);
  const auto ns = num.counts("ns", std::vector<std::uint64_t>{spec.dim(), 10, 30});
  const std::size_t phases = num.count("phases", 100);
  LeDecompositionOptions lo;
  const std::uint64_t le_n = num.count("le_n", 256);
  lo.grid = num.count("grid", 512);
  lo.a = num.real("a", lo.a);
  lo.c0 = num.real("c0", lo.c0);

  const ReducedCocycle red = build_reduction(spec, opt);
  Table t{{"quantity", "index", "value"}};
  const auto& prof = red.profile();
  for (std::size_t i = 0; i < prof.ranks.size(); ++i) t.add(row_of("rank", std::uint64_t{i + 1}, std::uint64_t{prof.ranks[i]}));
  t.add(row_of("stabilized_rank", std::uint64_t{prof.stabilization_index}, std::uint64_t{prof.stabilized_rank}));
  for (std::size_t i = 0; i < red.row_indices().size(); ++i)
    t.add(row_of("row_index", std::uint64_t{i}, std::uint64_t{red.row_indices()[i]}));
  for (std::uint64_t n : ns) {
    const auto rep = verify_semiconjugation(red, n, phases, opt.seed);
    t.add(row_of("residual_rv_vatilde", n, rep.max_residual.rv_vatilde));
    t.add(row_of("residual_bn", n, rep.max_residual.bn));
    t.add(row_of("residual_an", n, rep.max_residual.an));
    t.add(row_of("resampled_phases", n, std::uint64_t{rep.rejected}));
  }
  const auto d = le_decomposition(red, le_n, lo);
  t.add(row_of("l1_a", le_n, d.l1_a));
  t.add(row_of("l1_r", le_n, d.l1_r));
  t.add(row_of("l1_h", le_n, d.l1_h));
  t.add(row_of("l1_a_minus_l1_r_plus_l1_h", le_n, d.l1_a - (d.l1_r - d.l1_h)));
  t.add(row_of("remainder_l2", le_n, d.remainder_l2));
  t.add(row_of("remainder_fraction_above", le_n, d.fraction_above));
  return t;
}

inline Table ap_check(RunContext& ctx) {
  auto& num = ctx.numeric();
  const std::string source = num.text("source", std::string("random"), {"random", "cocycle"});
  const double c = num.real("c", kDefaultApConstant);
  std::vector<MatrixChain> chains;
  if (source == "random") {
    RandomStream rng = RandomStream(ctx.seed()).derive("ap-check");
    const std::size_t m = num.count("m", 2), n = num.count("n", 100), count = num.count("chains", 10);
    const double gap = num.real("gap", 1e6);
    for (std::size_t i = 0; i < count; ++i) chains.push_back(random_gapped_chain(rng, m, n, gap));
  } else {
    const CocycleSpec& spec = ctx.model().spec;
    const std::vector<double> x =
        num.reals("phase", std::vector<double>(spec.frequency().dim(), 0.0));
    if (x.size() != spec.frequency().dim()) num.fail("phase", "dimension must match the frequency");
    const std::uint64_t n0 = num.count("n0", 50);
    const std::size_t blocks = num.count("blocks", 20);
    chains.push_back(schrodinger_chain(spec, TorusPoint(x), n0, blocks));
  }
  Table t{{"chain", "n", "kappa", "epsilon", "hypotheses_met", "exact_log_norm", "ap_estimate", "residual", "bound"}};
  for (std::size_t i = 0; i < chains.size(); ++i) {
    const ApReport r = ap_apply(chains[i], c);
    t.add(row_of(std::uint64_t{i}, std::uint64_t{r.n}, r.kappa, r.epsilon, r.hypotheses_met, r.exact_log_norm,
                 r.ap_estimate, r.residual, r.bound));
  }
  return t;
}

inline SampleSettings sample_settings(RunContext& ctx) {
  SampleSettings s;
  auto& num = ctx.numeric();
  s.samples = num.count("samples", s.samples);
  s.mode = num.text("mode", std::string("grid"), {"grid", "random"}) == "grid" ? SampleMode::grid : SampleMode::random;
  if (s.mode == SampleMode::random) s.seed = ctx.seed();
  return s;
}

inline Table ldt(RunContext& ctx) {
  const CocycleSpec& spec = ctx.model().spec;
  auto& num = ctx.numeric();
  const auto ns = num.counts("ns", std::vector<std::uint64_t>{100, 200, 400, 800, 1600});
  const double exponent = num.real("exponent", 0.2);
  const SampleSettings s = sample_settings(ctx);
  const auto prof = deviation_profile(spec, ns, exponent, s);
  Table t{{"n", "epsilon", "measure", "std_error", "samples", "mean_u"}};
  for (const auto& r : prof) t.add(row_of(r.n, r.epsilon, r.measure, r.std_error, std::uint64_t{r.samples}, r.mean_u));
  t.notes.push_back(fmt::format("inversions beyond 2 standard errors: {}; raw inversions: {}", count_inversions(prof),
                                count_raw_inversions(prof)));
  const auto fit = fit_decay_exponent(prof);
  t.notes.push_back(fit.valid ? fmt::format("empirical fit log(-log measure) = {} + {} log n over {} points",
                                            cell::of(fit.intercept), cell::of(fit.exponent), fit.points)
                              : fmt::format("empirical fit not available: {} rows with 0 < measure < 1", fit.points));
  return t;
}

inline Table dip(RunContext& ctx) {
  const CocycleSpec& spec = ctx.model().spec;
  auto& num = ctx.numeric();
  const auto ns = num.counts("ns", std::vector<std::uint64_t>{100, 200, 400, 800});
  const auto ts = num.reals("t", std::vector<double>{1.0, 2.0, 5.0});
  const SampleSettings s = sample_settings(ctx);
  Table t{{"n", "t", "measure"}};
  for (std::uint64_t n : ns)
    for (double th : ts) t.add(row_of(n, th, dip_measure(spec, n, th, s)));
  return t;
}

inline Table birkhoff(RunContext& ctx) {
  const CocycleSpec& spec = ctx.model().spec;
  auto& num = ctx.numeric();
  const std::size_t d = spec.frequency().dim();
  const std::uint64_t n0 = num.count("n0", 20);
  const auto terms = num.counts("terms", std::vector<std::uint64_t>{10, 100, 1000});
  const std::vector<double> x = num.reals("phase", std::vector<double>(d, 0.0));
  if (x.size() != d) num.fail("phase", "dimension must match the frequency");
  QuadratureSettings q;
  q.grid = ctx.grid(d);
  const double mean = finite_scale_top_le(spec, n0, q).estimate;
  Table t{{"n0", "terms", "average", "mean", "deviation", "excluded"}};
  for (std::uint64_t nt : terms) {
    const auto r = birkhoff_average(spec, n0, nt, TorusPoint(x), mean, q);
    t.add(row_of(n0, nt, r.average, r.mean, r.deviation, std::uint64_t{r.excluded}));
  }
  return t;
}

inline Table dc_check(RunContext& ctx) {
  const Frequency& w = ctx.omega();
  auto& num = ctx.numeric();
  const double t_req = num.real("t", 0.3);
  const auto k_max = static_cast<std::int64_t>(num.count("k_max", static_cast<std::uint64_t>(default_k_max(w.dim()))));
  const auto r = diophantine_check(w, t_req, k_max);
  Table t{{"passed", "resonance", "t", "k_max", "t_star", "k_at_t_star", "first_violation"}};
  t.add(row_of(r.passed, r.resonance, r.t, r.k_max, r.t_star, cell::list(r.k_at_t_star),
               r.first_violation ? cell::list(*r.first_violation) : std::string()));
  if (!r.passed) t.notes.push_back("the frequency is not certified at the requested t");
  return t;
}

inline Table schrodinger(RunContext& ctx) {
  const SchrodingerParams& p = ctx.schrodinger();
  auto& num = ctx.numeric();
  const auto lambdas = num.reals("lambdas", std::vector<double>{p.lambda});
  const auto energies = num.reals("energies", std::vector<double>{p.energy});
  SoretsSpencerOptions o;
  o.n = num.count("n", o.n);
  o.grid = num.count("grid", o.grid);
  o.rhs_grid = num.count("rhs_grid", o.rhs_grid);
  const auto rep = verify_sorets_spencer(p.f, ctx.omega(), lambdas, energies, o);
  Table t{{"lambda", "energy", "regime", "l1", "rhs", "residual", "margin"}};
  for (const auto& r : rep.rows) t.add(row_of(r.lambda, r.energy, std::string(1, r.regime), r.l1, r.rhs, r.residual, r.margin));
  t.notes.push_back(fmt::format("max residual = {}; fitted C = {}", cell::of(rep.max_residual), cell::of(rep.fitted_c)));
  return t;
}

inline Table jacobi_le(RunContext& ctx) {
  const JacobiParams& p = ctx.jacobi();
  auto& num = ctx.numeric();
  const auto energies = num.reals("energies", std::vector<double>{ctx.model().energy});
  const std::uint64_t n = num.count("n", 4000);
  const std::size_t phases = num.count("phases", 16);
  const double c_w = weight_correction(p);
  Table t{{"energy", "k", "exponent"}};
  for (double e : energies) {
    const auto ex = jacobi_exponents(p, e, ctx.omega(), n, phases, c_w);
    for (std::size_t k = 0; k < ex.size(); ++k) t.add(row_of(e, std::uint64_t{k + 1}, ex[k]));
  }
  t.notes.push_back(fmt::format("C(W) = {}", cell::of(c_w)));
  return t;
}

inline Table ids_cmd(RunContext& ctx) {
  const JacobiParams& p = ctx.jacobi();
  auto& num = ctx.numeric();
  const std::uint64_t seed = ctx.seed();
  const auto energies = num.reals("energies", std::vector<double>{-1.0, 0.0, 1.0});
  const std::size_t n = num.count("n", 1000);
  const std::size_t phases = num.count("phases", 8);
  const auto samples = spectral_samples(p, ctx.omega(), n, phases, seed);
  Table t{{"energy", "ids"}};
  for (double e : energies) t.add(row_of(e, ids_from_samples(samples, e)));
  return t;
}

inline Table thouless(RunContext& ctx) {
  const JacobiParams& p = ctx.jacobi();
  auto& num = ctx.numeric();
  ThoulessOptions o;
  o.seed = ctx.seed();
  const auto energies = num.reals("energies", std::vector<double>{ctx.model().energy});
  o.n = num.count("n", o.n);
  o.phases = num.count("phases", o.phases);
  o.le_n = num.count("le_n", o.le_n);
  o.le_phases = num.count("le_phases", o.le_phases);
  Table t{{"energy", "energy_used", "lhs", "log_potential", "c_w", "rhs", "residual", "indeterminate"}};
  for (double e : energies) {
    const auto r = thouless_check(p, ctx.omega(), e, o);
    t.add(row_of(r.energy, r.energy_used, r.lhs, r.log_potential, r.c_w, r.rhs, r.residual, r.indeterminate));
  }
  return t;
}

inline Table positivity(RunContext& ctx) {
  const JacobiParams& p = ctx.jacobi();
  auto& num = ctx.numeric();
  const auto lambdas = num.reals("lambdas", std::vector<double>{p.lambda});
  const auto energies = num.reals("energies", std::vector<double>{ctx.model().energy});
  PositivityOptions o;
  o.n = num.count("n", o.n);
  o.phases = num.count("phases", o.phases);
  const auto rep = verify_positivity_simplicity(p, ctx.omega(), lambdas, energies, o);
  Table t{{"lambda", "energy", "margin", "min_gap", "exponents", "gaps"}};
  for (const auto& r : rep.rows)
    t.add(row_of(r.lambda, r.energy, r.margin, r.min_gap, cell::list(r.exponents), cell::list(r.gaps)));
  t.notes.push_back(fmt::format("min margin = {}; min gap = {}", cell::of(rep.min_margin), cell::of(rep.min_gap)));
  for (const auto& v : rep.violations) t.notes.push_back("hypothesis violated: " + v);
  return t;
}

inline Table accept(RunContext& ctx) {
  const auto ids = ctx.numeric().counts("criteria", std::vector<std::uint64_t>{});
  std::vector<int> sel(ids.begin(), ids.end());
  for (std::uint64_t id : ids)
    if (id < 1 || id > acceptance_criteria().size()) ctx.numeric().fail("criteria", "criterion ids run from 1 to 12");
  ctx.finish();
  const auto results = run_acceptance(sel, [](const CriterionResult& r) {
    std::cerr << fmt::format("{} {:>2} {} ({:.1f}s)\n", r.passed ? "PASS" : "FAIL", r.id, r.name, r.seconds);
  });
  Table t{{"id", "name", "result", "seconds", "detail"}};
  std::size_t failed = 0;
  for (const auto& r : results) {
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    t.add(row_of(r.id, r.name, std::string(r.passed ? "PASS" : "FAIL"), fmt::format("{:.1f}", r.seconds), detail));
    failed += !r.passed;
  }
  t.notes.push_back(fmt::format("{} of {} criteria passed", results.size() - failed, results.size()));
  t.failed = failed > 0;
  return t;
}

}  // namespace commands

using CommandFn = std::function<Table(RunContext&)>;

inline const std::map<std::string, CommandFn>& command_table() {
  static const std::map<std::string, CommandFn> t{
      {"le", commands::le},
      {"spectrum", commands::spectrum},
      {"un-profile", commands::un_profile},
      {"reduce", commands::reduce},
      {"ap-check", commands::ap_check},
      {"ldt", commands::ldt},
      {"dip", commands::dip},
      {"birkhoff", commands::birkhoff},
      {"dc-check", commands::dc_check},
      {"schrodinger", commands::schrodinger},
      {"jacobi-le", commands::jacobi_le},
      {"ids", commands::ids_cmd},
      {"thouless", commands::thouless},
      {"positivity", commands::positivity},
      {"accept", commands::accept},
  };
  return t;
}

// ---------------------------------------------------------------------------
// Output

struct RunHeader {
  std::string command;
  std::string source;
  ResolvedLog resolved;
  double wall_clock_seconds = 0.0;
};

inline std::string render_csv(const RunHeader& h, const Table& t) {
  std::string out = fmt::format("# qplab {}\n# command: {}\n# source: {}\n", kVersion, h.command, h.source);
  for (const auto& [k, v] : h.resolved) out += fmt::format("# config: {} = {}\n", k, v);
  out += fmt::format("# wall_clock_seconds: {:.3f}\n", h.wall_clock_seconds);
  for (const auto& n : t.notes) out += "# note: " + n + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += "\n";
  for (const auto& r : t.rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
    out += "\n";
  }
  return out;
}

// Sets a dotted key ("numeric.n") in the document; the value is parsed as YAML.
inline void apply_override(YAML::Node& root, const std::string& dotted, const std::string& value) {
  if (dotted.empty()) throw InputError("override: empty key");
  std::vector<std::string> parts;
  std::stringstream ss(dotted);
  for (std::string p; std::getline(ss, p, '.');) {
    if (p.empty()) throw InputError("override: malformed key '" + dotted + "'");
    parts.push_back(p);
  }
  YAML::Node parsed;
  try {
    parsed = YAML::Load(value);
  } catch (const YAML::Exception& e) {
    throw InputError("override " + dotted + ": " + e.msg);
  }
  // yaml-cpp nodes are handles; walk by reassignment through a stack of copies.
  std::vector<YAML::Node> chain{root};
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    YAML::Node next = chain.back()[parts[i]];
    if (!next.IsDefined() || next.IsNull()) {
      chain.back()[parts[i]] = YAML::Node(YAML::NodeType::Map);
      next = chain.back()[parts[i]];
    }
    if (!next.IsMap()) throw InputError("override: '" + parts[i] + "' in '" + dotted + "' is not a section");
    chain.push_back(next);
  }
  chain.back()[parts.back()] = parsed;
}

struct RunRequest {
  std::string command;
  ExperimentConfig config;
  std::optional<std::string> output;  // overrides the document's 'output' key
};

// Runs one subcommand; CSV goes to the configured path or to out, diagnostics to err.
inline int run(const RunRequest& req, std::ostream& out, std::ostream& err) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& table = command_table();
  const auto it = table.find(req.command);
  if (it == table.end()) {
    err << "qplab: unknown subcommand '" << req.command << "'\n";
    return kExitInvalid;
  }
  try {
    RunContext ctx(req.config);
    std::optional<std::string> path = req.output;
    if (ctx.root().has("output")) {
      const std::string p = ctx.root().text("output");
      if (!path) path = p;
    }
    Table t = it->second(ctx);
    ctx.finish();
    RunHeader h{req.command, req.config.source, *ctx.log(),
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()};
    const std::string csv = render_csv(h, t);
    if (path && !path->empty() && *path != "-") {
      std::ofstream f(*path, std::ios::binary);
      if (!f || !(f << csv) || !f.flush()) {
        err << "qplab: cannot write output file '" << *path << "'\n";
        return kExitInvalid;
      }
    } else {
      out << csv;
    }
    return t.failed ? kExitInvalid : kExitOk;
  } catch (const InputError& e) {
    err << "qplab: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const NilpotentError& e) {
    err << "qplab: numerical degeneracy: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const DegenerateError& e) {
    err << "qplab: numerical degeneracy: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const SingularInputError& e) {
    err << "qplab: numerical degeneracy: " << e.what() << "\n";
    return kExitDegenerate;
  } catch (const Error& e) {
    err << "qplab: " << e.what() << "\n";
    return kExitInvalid;
  }
}

}  // namespace qplab
