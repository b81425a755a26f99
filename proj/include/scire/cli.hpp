#pragma once

// Command-line front end: `trajectory | sample | convergence | compare`.
//
// Settings come from a flat `section.key = value` file (--config) and are overridden by flags.
// Exit codes: 0 ok, 1 runtime failure, 2 usage error.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <cstdlib>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "scire/errors.hpp"
#include "scire/format.hpp"
#include "scire/models.hpp"
#include "scire/oracle.hpp"
#include "scire/random.hpp"
#include "scire/rde.hpp"
#include "scire/schedule.hpp"
#include "scire/solver.hpp"
#include "scire/trajectory.hpp"

namespace scire::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// Errors in the user's input; reported with exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------------------------
// Settings

inline const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "schedule.kind",     "schedule.beta0",   "schedule.beta1", "schedule.s",       "schedule.t_max",
      "model.family",      "model.coeffs",     "model.lambda",   "model.dim",        "solver.method",
      "solver.phi1",       "solver.r1",        "solver.r2",      "solver.nfe",       "trajectory.kind",
      "trajectory.steps",  "trajectory.k",     "trajectory.t_end", "trajectory.t_start", "study.methods",
      "study.phi1",        "study.steps",      "reference.substeps", "output.path",  "run.seed",
  };
  return keys;
}

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

}  // namespace detail

/// Flat key/value store that remembers where each value came from (a flag or a config line),
/// so error messages can name what the user actually typed.
class Settings {
 public:
  void set(const std::string& key, std::string value, std::string source) {
    if (!known_keys().count(key)) throw UsageError("unknown setting '" + key + "'");
    values_[key] = std::move(value);
    sources_[key] = std::move(source);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string source(const std::string& key) const {
    auto it = sources_.find(key);
    return it == sources_.end() ? key : it->second;
  }

  std::string str(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
  }

  double real(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_real(key, values_.at(key));
  }

  long long integer(const std::string& key, long long fallback) const {
    if (!has(key)) return fallback;
    return parse_integer(key, values_.at(key));
  }

  std::uint64_t seed(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    const std::string& v = values_.at(key);
    try {
      std::size_t used = 0;
      const auto x = std::stoull(v, &used, 10);
      if (used == v.size() && v.find('-') == std::string::npos) return x;
    } catch (const std::exception&) {
    }
    throw UsageError(source(key) + ": expected an unsigned 64-bit integer, got '" + v + "'");
  }

  std::vector<double> reals(const std::string& key, const std::string& fallback) const {
    std::vector<double> out;
    for (const auto& item : detail::split_list(str(key, fallback))) out.push_back(parse_real(key, item));
    return out;
  }

  std::vector<int> integers(const std::string& key, const std::string& fallback) const {
    std::vector<int> out;
    for (const auto& item : detail::split_list(str(key, fallback)))
      out.push_back(static_cast<int>(parse_integer(key, item)));
    return out;
  }

  std::vector<std::string> words(const std::string& key, const std::string& fallback) const {
    return detail::split_list(str(key, fallback));
  }

  /// Reads `section.key = value` lines; `#` starts a comment.
  void load_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
      line = detail::trim(line);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw UsageError(origin + ":" + std::to_string(line_no) + ": expected 'section.key = value'");
      const std::string key = detail::trim(line.substr(0, eq));
      if (!known_keys().count(key))
        throw UsageError(origin + ":" + std::to_string(line_no) + ": unknown setting '" + key + "'");
      set(key, detail::trim(line.substr(eq + 1)), key);
    }
  }

  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("--config: cannot read '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    load_text(buf.str(), path);
  }

 private:
  double parse_real(const std::string& key, const std::string& v) const {
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (v.empty() || end != v.c_str() + v.size() || !std::isfinite(x))
      throw UsageError(source(key) + ": expected a number, got '" + v + "'");
    return x;
  }

  long long parse_integer(const std::string& key, const std::string& v) const {
    try {
      std::size_t used = 0;
      const long long x = std::stoll(v, &used, 10);
      if (used == v.size()) return x;
    } catch (const std::exception&) {
    }
    throw UsageError(source(key) + ": expected an integer, got '" + v + "'");
  }

  std::map<std::string, std::string> values_;
  std::map<std::string, std::string> sources_;
};

// ---------------------------------------------------------------------------------------------
// RunConfig

inline constexpr const char* kDefaultCoeffs = "0.5,6.5e-3,-4.3e-5,1.4e-7";
inline constexpr const char* kDefaultStudySteps = "8,16,32,64,128";
inline constexpr double kExactFloor = 1e-12;

struct ModelSpec {
  std::string family = "taupoly";
  std::vector<double> coeffs;
  double lambda = -0.5;
  std::size_t dim = 4;

  SyntheticFamily build() const {
    if (family == "constant") {
      if (coeffs.size() != 1) throw ValidationError("model.coeffs", "constant family takes exactly one value");
      return ConstantEps{Vector(dim, coeffs.front())};
    }
    if (family == "taupoly") {
      TauPolyEps p;
      for (double c : coeffs) p.coeffs.emplace_back(dim, c);
      return p;
    }
    if (family == "linear") return LinearStateEps{lambda};
    throw ValidationError("model.family", "expected constant, taupoly or linear, got '" + family + "'");
  }
};

struct RunConfig {
  NoiseSchedule schedule;
  ModelSpec model;
  SolverConfig solver;
  std::string output;
  std::uint64_t seed = 0;
};

namespace detail {

/// Runs `fn`, turning a module ValidationError into a UsageError that names the flag or config
/// key the offending value came from.
template <typename Fn>
auto with_sources(const Settings& s, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const ValidationError& e) {
    std::string msg = e.what();
    const std::string prefix = e.field() + ": ";
    if (msg.rfind(prefix, 0) == 0) msg.erase(0, prefix.size());
    throw UsageError(s.source(e.field()) + ": " + msg);
  }
}

}  // namespace detail

inline NoiseSchedule make_schedule(const Settings& s) {
  return detail::with_sources(s, [&] {
    const std::string kind = s.str("schedule.kind", "linear");
    if (kind == "linear")
      return NoiseSchedule::linear(s.real("schedule.beta0", NoiseSchedule::kDefaultBeta0),
                                   s.real("schedule.beta1", NoiseSchedule::kDefaultBeta1),
                                   s.real("schedule.t_max", NoiseSchedule::kDefaultLinearT));
    if (kind == "cosine")
      return NoiseSchedule::cosine(s.real("schedule.s", NoiseSchedule::kDefaultCosineS),
                                   s.real("schedule.t_max", NoiseSchedule::kDefaultCosineT));
    throw UsageError(s.source("schedule.kind") + ": expected linear or cosine, got '" + kind + "'");
  });
}

inline TrajectorySpec make_trajectory_spec(const Settings& s, const NoiseSchedule& schedule) {
  TrajectorySpec spec;
  const std::string kind = s.str("trajectory.kind", "uniform");
  const auto parsed = parse_trajectory_kind(kind);
  if (!parsed)
    throw UsageError(s.source("trajectory.kind") +
                     ": expected uniform, quadratic, lognsr, nsr or sigmoid, got '" + kind + "'");
  spec.kind = *parsed;
  spec.n_steps = static_cast<int>(s.integer("trajectory.steps", 10));
  spec.t_start = s.real("trajectory.t_start", schedule.t_max());
  spec.t_end = s.real("trajectory.t_end", 1e-3);
  spec.k_param =
      s.real("trajectory.k", spec.kind == TrajectoryKind::SigmoidType ? kDefaultSigmoidTypeK : kDefaultNsrTypeK);
  detail::with_sources(s, [&] { spec.validate(schedule); });
  return spec;
}

inline Phi1Mode parse_phi1(const Settings& s, const std::string& key, const std::string& value) {
  const auto mode = Phi1Mode::parse(value);
  if (!mode) throw UsageError(s.source(key) + ": expected m<order>=3.., limit or fde, got '" + value + "'");
  return *mode;
}

inline Method parse_method_setting(const Settings& s, const std::string& key, const std::string& value) {
  const auto m = parse_method(value);
  if (!m) throw UsageError(s.source(key) + ": expected ddim, scire2, scire3 or agile, got '" + value + "'");
  return *m;
}

inline int evals_per_step(Method m) {
  switch (m) {
    case Method::Ddim: return 1;
    case Method::Scire2: return 2;
    case Method::Scire3: return 3;
    case Method::Agile: return 0;
  }
  return 0;
}

/// Validates every section before anything runs.
inline RunConfig make_run_config(const Settings& s) {
  RunConfig rc{make_schedule(s), {}, {}, s.str("output.path", ""), s.seed("run.seed", 0)};

  rc.model.family = s.str("model.family", "taupoly");
  rc.model.coeffs = s.reals("model.coeffs", rc.model.family == "constant" ? "1" : kDefaultCoeffs);
  rc.model.lambda = s.real("model.lambda", -0.5);
  const long long dim = s.integer("model.dim", 4);
  if (dim < 1) throw UsageError(s.source("model.dim") + ": must be >= 1");
  rc.model.dim = static_cast<std::size_t>(dim);
  detail::with_sources(s, [&] { validate_family(rc.model.build()); });

  auto& sc = rc.solver;
  sc.method = parse_method_setting(s, "solver.method", s.str("solver.method", "scire2"));
  sc.phi1 = parse_phi1(s, "solver.phi1", s.str("solver.phi1", "m3"));
  if (s.has("solver.r1")) sc.r1 = s.real("solver.r1", 0.0);
  if (s.has("solver.r2")) sc.r2 = s.real("solver.r2", 0.0);

  Settings traj_settings = s;
  if (sc.method == Method::Agile) {
    if (!s.has("solver.nfe")) throw UsageError("agile needs an NFE budget (--nfe or solver.nfe)");
    sc.nfe_budget = static_cast<int>(s.integer("solver.nfe", 0));
    // The plan decides the segment count; placeholder so the trajectory settings validate.
    traj_settings.set("trajectory.steps", "1", "derived");
  } else if (s.has("solver.nfe") && !s.has("trajectory.steps")) {
    const long long nfe = s.integer("solver.nfe", 0);
    const int per = evals_per_step(sc.method);
    if (nfe < per || nfe % per != 0)
      throw UsageError(s.source("solver.nfe") + ": " + to_string(sc.method) + " needs a multiple of " +
                       std::to_string(per) + " evaluations");
    traj_settings.set("trajectory.steps", std::to_string(nfe / per), s.source("solver.nfe"));
  }
  sc.trajectory = make_trajectory_spec(traj_settings, rc.schedule);
  detail::with_sources(s, [&] { sc.validate(); });
  return rc;
}

// ---------------------------------------------------------------------------------------------
// CSV emitters

inline void write_trajectory_csv(std::ostream& out, const TimeTrajectory& traj) {
  out << "i,t,nsr,trans\n";
  const std::size_t n = traj.n_steps();
  for (std::size_t j = 0; j <= n; ++j) {
    out << (n - j) << ',' << fmt_full(traj.times[j]) << ',' << fmt_full(traj.nsr_values[j]) << ',';
    if (!traj.trans.empty()) out << fmt_full(traj.trans[j]);
    out << '\n';
  }
}

inline void write_trace_csv(std::ostream& out, const SampleResult& result) {
  out << "i,kind,t_from,t_to,h,s1,s2,state_norm,step_norm\n";
  for (const auto& r : result.trace) {
    out << r.index << ',' << r.kind << ',' << fmt_full(r.t_from) << ',' << fmt_full(r.t_to) << ',' << fmt_full(r.h)
        << ',';
    if (!r.intermediate_times.empty()) out << fmt_full(r.intermediate_times[0]);
    out << ',';
    if (r.intermediate_times.size() > 1) out << fmt_full(r.intermediate_times[1]);
    out << ',' << fmt_full(r.state_norm) << ',' << fmt_full(r.step_norm) << '\n';
  }
}

namespace detail {

/// Writes to `path` when non-empty, otherwise to `fallback`.
template <typename Emit>
void emit_to(const std::string& path, std::ostream& fallback, Emit&& emit) {
  if (path.empty()) {
    emit(fallback);
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  emit(f);
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

}  // namespace detail

// ---------------------------------------------------------------------------------------------
// Studies (convergence / compare)

struct StudyCell {
  Method method = Method::Ddim;
  std::optional<Phi1Mode> phi1;  // empty for ddim
  int n = 0;                     // steps, or NFE budget for agile
  int nfe = 0;
  double error = 0.0;
};

/// Cap on concurrent study cells; SCIRE_THREADS overrides the hardware count.
inline unsigned study_threads() {
  if (const char* env = std::getenv("SCIRE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs every cell against `reference`. Cells are independent (each gets its own model), results
/// land at their own index, so output order does not depend on scheduling.
inline void run_cells(const RunConfig& rc, VectorView x_init, VectorView reference, std::vector<StudyCell>& cells,
                      unsigned threads) {
  const SyntheticFamily family = rc.model.build();
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < cells.size(); i = next++) {
      try {
        StudyCell& c = cells[i];
        SolverConfig sc = rc.solver;
        sc.method = c.method;
        sc.r1.reset();
        sc.r2.reset();
        sc.phi1 = c.phi1.value_or(Phi1Mode::fde());
        if (c.method == Method::Agile) sc.nfe_budget = c.n;
        else sc.trajectory.n_steps = c.n;
        SyntheticModel model(family, rc.schedule);
        const SampleResult r = sample(sc, model, rc.schedule, x_init);
        c.nfe = r.nfe;
        c.error = vec::relative_max_error(r.x_final, reference);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const unsigned n_threads = std::min<unsigned>(threads, static_cast<unsigned>(cells.size()));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);
}

struct Study {
  RunConfig rc;
  Vector x_init;
  Vector reference;
  std::vector<Method> methods;
  std::vector<int> steps;
};

inline Study prepare_study(const Settings& s, const std::string& default_methods) {
  Settings base = s;
  // The study drives method and step count itself.
  base.set("solver.method", "ddim", "derived");
  Study st{make_run_config(base), {}, {}, {}, {}};
  for (const auto& m : s.words("study.methods", default_methods))
    st.methods.push_back(parse_method_setting(s, "study.methods", m));
  if (st.methods.empty()) throw UsageError(s.source("study.methods") + ": empty method list");
  st.steps = s.integers("study.steps", kDefaultStudySteps);
  if (st.steps.empty()) throw UsageError(s.source("study.steps") + ": empty step list");
  std::sort(st.steps.begin(), st.steps.end());
  if (std::adjacent_find(st.steps.begin(), st.steps.end()) != st.steps.end())
    throw UsageError(s.source("study.steps") + ": duplicate step counts");
  for (int n : st.steps) {
    if (n < 1) throw UsageError(s.source("study.steps") + ": step counts must be >= 1");
    for (Method m : st.methods)
      if (m == Method::Agile && n < 3) throw UsageError(s.source("study.steps") + ": agile needs NFE budgets >= 3");
  }

  GaussianSource rng(st.rc.seed);
  st.x_init = rng.vector(st.rc.model.dim);
  ReferenceConfig ref_cfg;
  ref_cfg.substeps = static_cast<int>(s.integer("reference.substeps", ref_cfg.substeps));
  ref_cfg.richardson_check = true;
  detail::with_sources(s, [&] {
    try {
      ref_cfg.validate();
    } catch (const ValidationError& e) {
      throw ValidationError("reference.substeps", e.what());
    }
  });
  SyntheticModel ref_model(st.rc.model.build(), st.rc.schedule);
  const auto& spec = st.rc.solver.trajectory;
  st.reference = reference_solve(ref_model, st.rc.schedule, st.x_init, spec.t_start, spec.t_end, ref_cfg);
  return st;
}

// ---------------------------------------------------------------------------------------------
// Commands

inline int cmd_trajectory(const Settings& s, std::ostream& out, std::ostream&) {
  const NoiseSchedule schedule = make_schedule(s);
  const TrajectorySpec spec = make_trajectory_spec(s, schedule);
  const TimeTrajectory traj = build_trajectory(schedule, spec);
  detail::emit_to(s.str("output.path", ""), out, [&](std::ostream& o) { write_trajectory_csv(o, traj); });
  return kExitOk;
}

inline int cmd_sample(const Settings& s, std::ostream& out, std::ostream&) {
  const RunConfig rc = make_run_config(s);
  SyntheticModel model(rc.model.build(), rc.schedule);
  GaussianSource rng(rc.seed);
  const Vector x_init = rng.vector(rc.model.dim);
  const SampleResult result = sample(rc.solver, model, rc.schedule, x_init);
  if (!rc.output.empty()) detail::emit_to(rc.output, out, [&](std::ostream& o) { write_trace_csv(o, result); });
  out << "method=" << to_string(rc.solver.method) << " phi1=" << rc.solver.phi1.name()
      << " steps=" << result.trace.size() << " nfe=" << result.nfe << " final_norm=" << fmt_full(vec::norm2(result.x_final))
      << '\n';
  return kExitOk;
}

inline int cmd_convergence(const Settings& s, std::ostream& out, std::ostream& err) {
  const Study st = prepare_study(s, "ddim,scire2,scire3");
  std::vector<Phi1Mode> modes;
  for (const auto& m : s.words("study.phi1", "m3,fde")) modes.push_back(parse_phi1(s, "study.phi1", m));
  if (modes.empty()) throw UsageError(s.source("study.phi1") + ": empty phi1 list");

  // Sorted by (method, phi1, N): methods and modes in the order given, N ascending.
  std::vector<StudyCell> cells;
  for (Method m : st.methods) {
    if (m == Method::Ddim) {
      for (int n : st.steps) cells.push_back({m, std::nullopt, n, 0, 0.0});
      continue;
    }
    for (const auto& mode : modes)
      for (int n : st.steps) cells.push_back({m, mode, n, 0, 0.0});
  }
  run_cells(st.rc, st.x_init, st.reference, cells, study_threads());

  std::ostringstream csv;
  std::ostringstream summary;
  csv << "method,phi1,N,nfe,error,slope_so_far\n";
  std::vector<int> ns;
  std::vector<double> errs;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const auto& c = cells[i];
    const std::string phi_name = c.phi1 ? c.phi1->name() : "none";
    ns.push_back(c.n);
    errs.push_back(c.error);
    std::string slope;
    if (ns.size() >= 2) {
      const auto est = empirical_order(ns, errs, kExactFloor);
      slope = est.exact ? "exact" : fmt_full(est.slope);
    }
    csv << to_string(c.method) << ',' << phi_name << ',' << c.n << ',' << c.nfe << ',' << fmt_full(c.error) << ','
        << slope << '\n';
    const bool group_ends =
        i + 1 == cells.size() || cells[i + 1].method != c.method || cells[i + 1].phi1 != c.phi1;
    if (group_ends) {
      summary << "method=" << to_string(c.method) << " phi1=" << phi_name
              << " slope=" << (slope.empty() ? "n/a" : slope) << '\n';
      ns.clear();
      errs.clear();
    }
  }
  const std::string path = s.str("output.path", "");
  detail::emit_to(path, out, [&](std::ostream& o) { o << csv.str(); });
  (path.empty() ? err : out) << summary.str();
  return kExitOk;
}

inline int cmd_compare(const Settings& s, std::ostream& out, std::ostream&) {
  const Study st = prepare_study(s, "scire2,scire3");
  const Phi1Mode rde = parse_phi1(s, "solver.phi1", s.str("solver.phi1", "m3"));
  if (rde == Phi1Mode::fde()) throw UsageError(s.source("solver.phi1") + ": the rde rows need m<order> or limit");

  std::vector<StudyCell> cells;
  for (Method m : st.methods)
    for (int n : st.steps) {
      cells.push_back({m, rde, n, 0, 0.0});
      cells.push_back({m, Phi1Mode::fde(), n, 0, 0.0});
    }
  run_cells(st.rc, st.x_init, st.reference, cells, study_threads());

  detail::emit_to(s.str("output.path", ""), out, [&](std::ostream& o) {
    o << "mode,method,N,error\n";
    for (const auto& c : cells)
      o << (*c.phi1 == Phi1Mode::fde() ? "fde" : "rde") << ',' << to_string(c.method) << ',' << c.n << ','
        << fmt_full(c.error) << '\n';
  });
  return kExitOk;
}

// ---------------------------------------------------------------------------------------------
// Entry point

namespace detail {

struct Binding {
  CLI::Option* option = nullptr;
  std::string key;
  std::string flag;
  std::unique_ptr<std::string> value = std::make_unique<std::string>();
};

}  // namespace detail

/// Parses `args` (without the program name) and runs the selected subcommand.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Diffusion ODE samplers with recursive derivative estimation", "scire"};
  app.require_subcommand(1);

  std::vector<detail::Binding> bindings;
  std::string config_path;
  auto bind = [&](CLI::App* sub, const std::string& flag, const std::string& key, const std::string& help) {
    detail::Binding b;
    b.key = key;
    b.flag = flag;
    b.option = sub->add_option(flag, *b.value, help + " [" + key + "]");
    bindings.push_back(std::move(b));
  };
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "flat 'section.key = value' settings file");
    bind(sub, "--schedule", "schedule.kind", "noise schedule: linear or cosine");
    bind(sub, "--beta0", "schedule.beta0", "linear schedule beta_0");
    bind(sub, "--beta1", "schedule.beta1", "linear schedule beta_1");
    bind(sub, "--s", "schedule.s", "cosine schedule offset");
    bind(sub, "--t-max", "schedule.t_max", "schedule horizon T");
    bind(sub, "--t-start", "trajectory.t_start", "first trajectory time (default T)");
    bind(sub, "--t-end", "trajectory.t_end", "end time epsilon");
    bind(sub, "--k", "trajectory.k", "nsr/sigmoid trajectory parameter");
    bind(sub, "--out", "output.path", "output CSV path");
  };
  auto model_flags = [&](CLI::App* sub) {
    bind(sub, "--model", "model.family", "synthetic model: constant, taupoly or linear");
    bind(sub, "--coeffs", "model.coeffs", "comma-separated coefficients");
    bind(sub, "--lambda", "model.lambda", "linear-state model factor");
    bind(sub, "--dim", "model.dim", "state dimension");
    bind(sub, "--seed", "run.seed", "seed for the Gaussian initial state");
    bind(sub, "--trajectory", "trajectory.kind", "uniform, quadratic, lognsr, nsr or sigmoid");
  };

  CLI::App* traj = app.add_subcommand("trajectory", "emit a sampling time grid as CSV");
  common(traj);
  bind(traj, "--kind", "trajectory.kind", "uniform, quadratic, lognsr, nsr or sigmoid");
  bind(traj, "--steps", "trajectory.steps", "number of steps N");

  CLI::App* samp = app.add_subcommand("sample", "run one sampler from a Gaussian initial state");
  common(samp);
  model_flags(samp);
  bind(samp, "--method", "solver.method", "ddim, scire2, scire3 or agile");
  bind(samp, "--steps", "trajectory.steps", "number of steps N");
  bind(samp, "--nfe", "solver.nfe", "evaluation budget");
  bind(samp, "--phi1", "solver.phi1", "m3 (or m<order>), limit or fde");
  bind(samp, "--r1", "solver.r1", "first intermediate fraction");
  bind(samp, "--r2", "solver.r2", "second intermediate fraction");

  CLI::App* conv = app.add_subcommand("convergence", "error vs step count against the reference solution");
  common(conv);
  model_flags(conv);
  bind(conv, "--methods", "study.methods", "comma-separated methods");
  bind(conv, "--phi1", "study.phi1", "comma-separated phi1 modes");
  bind(conv, "--steps", "study.steps", "comma-separated step counts");
  bind(conv, "--substeps", "reference.substeps", "reference RK4 step count");

  CLI::App* comp = app.add_subcommand("compare", "rde vs fde error curves");
  common(comp);
  model_flags(comp);
  bind(comp, "--methods", "study.methods", "comma-separated methods");
  bind(comp, "--phi1", "solver.phi1", "phi1 mode for the rde rows");
  bind(comp, "--steps", "study.steps", "comma-separated step counts");
  bind(comp, "--substeps", "reference.substeps", "reference RK4 step count");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  CLI::App* chosen = app.get_subcommands().front();
  try {
    Settings settings;
    if (!config_path.empty()) settings.load_file(config_path);
    for (const auto& b : bindings)
      if (b.option->count() > 0) settings.set(b.key, *b.value, b.flag);

    if (chosen == traj) return cmd_trajectory(settings, out, err);
    if (chosen == samp) return cmd_sample(settings, out, err);
    if (chosen == conv) return cmd_convergence(settings, out, err);
    return cmd_compare(settings, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

inline int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace scire::cli
