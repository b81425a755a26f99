// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "scire/cli.hpp"
#include "scire/scire.hpp"

namespace {

using namespace scire;

struct Outcome {
  bool ok = true;
  std::string detail;

  void check(bool cond, const std::string& what) {
    if (!cond) {
      if (ok) detail = what;
      ok = false;
    }
  }
};

struct Criterion {
  int id;
  const char* name;
  double time_limit_s;
  std::function<Outcome()> body;
};

// 1. VP identity, NSR monotonicity and round trips on 1000-point grids.
Outcome schedule_checks() {
  Outcome o;
  double worst_identity = 0.0, worst_round = 0.0;
  for (const auto& s : {NoiseSchedule::linear(0.1, 20.0), NoiseSchedule::cosine(0.008, 0.9946)}) {
    double prev = -1.0;
    for (int i = 0; i < 1000; ++i) {
      const double t = 1e-3 + (s.t_max() - 1e-3) * i / 999.0;
      const double a = s.alpha(t), g = s.sigma(t);
      worst_identity = std::max(worst_identity, std::abs(a * a + g * g - 1.0));
      const double tau = s.nsr(t);
      o.check(tau > prev, s.describe() + ": NSR not increasing");
      prev = tau;
      worst_round = std::max(worst_round, std::abs(s.rnsr(tau) - t));
      const double tau_grid = s.nsr_max() * i / 999.0;
      worst_round =
          std::max(worst_round, std::abs(s.nsr(s.rnsr(tau_grid)) - tau_grid) / std::max(tau_grid, 1.0));
    }
  }
  o.check(worst_identity <= 1e-12, "VP identity off by " + fmt_g(worst_identity));
  o.check(worst_round < 1e-9, "round trip off by " + fmt_g(worst_round));
  if (o.ok) o.detail = "identity " + fmt_g(worst_identity) + ", round trip " + fmt_g(worst_round);
  return o;
}

// 2. Signed-NSR first-order step vs the classic x0-prediction form.
Outcome ddim_identity() {
  Outcome o;
  const auto s = NoiseSchedule::linear();
  GaussianSource rng(2024);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Vector x = rng.vector(8);
    const Vector eps = rng.vector(8);
    double t_from = 1e-3 + (1.0 - 1e-3) * rng.uniform();
    double t_to = 1e-3 + (1.0 - 1e-3) * rng.uniform();
    if (t_to > t_from) std::swap(t_from, t_to);
    if (t_to == t_from) continue;
    FunctionModel m([&](VectorView, double) { return eps; });
    const Vector got = ddim_step(x, t_from, t_to, m, s).x;
    const double af = s.alpha(t_from), sf = s.sigma(t_from), at = s.alpha(t_to), st = s.sigma(t_to);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double classic = at * (x[i] - sf * eps[i]) / af + st * eps[i];
      worst = std::max(worst, std::abs(got[i] - classic) / std::max(std::abs(classic), 1.0));
    }
  }
  o.check(worst <= 1e-12, "relative deviation " + fmt_g(worst));
  if (o.ok) o.detail = "max relative deviation " + fmt_g(worst);
  return o;
}

SolverConfig uniform_config(Method method, int n, Phi1Mode mode) {
  SolverConfig c;
  c.method = method;
  c.phi1 = mode;
  c.trajectory.kind = TrajectoryKind::Uniform;
  c.trajectory.n_steps = n;
  c.trajectory.t_start = 1.0;
  c.trajectory.t_end = 1e-3;
  return c;
}

// Exact x(t_end) for a state-independent eps that is a polynomial in tau.
double poly_solution(const NoiseSchedule& s, double x, const std::vector<double>& c, double t0, double t1) {
  double integral = 0.0;
  const double a = s.nsr(t0), b = s.nsr(t1);
  for (std::size_t j = 0; j < c.size(); ++j)
    integral += c[j] * (std::pow(b, j + 1.0) - std::pow(a, j + 1.0)) / (j + 1.0);
  return s.alpha(t1) * (x / s.alpha(t0) + integral);
}

// 3. Constant eps exact everywhere; FDE two-stage exact on linear tau, FDE three-stage on quadratic tau.
Outcome exactness() {
  Outcome o;
  const auto s = NoiseSchedule::linear();
  const double x0 = 0.8;
  double worst = 0.0;
  auto run = [&](const SolverConfig& cfg, const std::vector<double>& coeffs, const std::string& label) {
    std::vector<Vector> cv;
    for (double c : coeffs) cv.push_back({c});
    SyntheticModel m(TauPolyEps{cv}, s);
    const double want = poly_solution(s, x0, coeffs, 1.0, 1e-3);
    const double err = std::abs(sample(cfg, m, s, Vector{x0}).x_final[0] - want) / std::max(std::abs(want), 1.0);
    worst = std::max(worst, err);
    o.check(err <= 1e-10, label + " error " + fmt_g(err));
  };
  for (int n : {2, 5, 10, 50}) {
    for (auto mode : {Phi1Mode::finite(3), Phi1Mode::limit(), Phi1Mode::fde()}) {
      for (auto method : {Method::Ddim, Method::Scire2, Method::Scire3}) {
        run(uniform_config(method, n, mode), {0.7},
            std::string("constant ") + to_string(method) + " " + mode.name() + " N=" + std::to_string(n));
      }
      auto agile = uniform_config(Method::Agile, 1, mode);
      agile.nfe_budget = std::max(3, n);
      run(agile, {0.7}, "constant agile " + mode.name() + " NFE=" + std::to_string(agile.nfe_budget));
    }
    run(uniform_config(Method::Scire2, n, Phi1Mode::fde()), {0.3, -0.02},
        "linear-tau scire2 fde N=" + std::to_string(n));
    run(uniform_config(Method::Scire3, n, Phi1Mode::fde()), {0.3, -0.02, 1e-4},
        "quadratic-tau scire3 fde N=" + std::to_string(n));
  }
  if (o.ok) o.detail = "max relative error " + fmt_g(worst);
  return o;
}

// 4. Empirical orders on a degree-3 tau polynomial.
Outcome order_suite() {
  Outcome o;
  const auto s = NoiseSchedule::linear(0.1, 20.0);
  const double m = s.nsr_max();
  SyntheticModel model(TauPolyEps{{{0.5, -0.3}, {1.0 / m, -0.5 / m}, {-1.0 / (m * m), 0.8 / (m * m)},
                                   {0.5 / (m * m * m), 0.6 / (m * m * m)}}},
                       s);
  const Vector x0{0.7, -1.2};
  ReferenceConfig rc;
  rc.richardson_check = true;
  const Vector ref = reference_solve(model, s, x0, 1.0, 1e-3, rc);
  const std::vector<int> ns{8, 16, 32, 64, 128};

  struct Target {
    Method method;
    Phi1Mode mode;
    double min_slope;
  };
  const std::vector<Target> targets = {
      {Method::Ddim, Phi1Mode::fde(), 0.8},          {Method::Scire2, Phi1Mode::fde(), 1.8},
      {Method::Scire3, Phi1Mode::fde(), 2.6},        {Method::Scire2, Phi1Mode::finite(3), 0.9},
      {Method::Scire3, Phi1Mode::finite(3), 1.9},
  };
  std::ostringstream summary;
  for (const auto& tg : targets) {
    std::vector<double> errs;
    for (int n : ns)
      errs.push_back(vec::relative_max_error(sample(uniform_config(tg.method, n, tg.mode), model, s, x0).x_final, ref));
    const auto est = empirical_order(ns, errs);
    const std::string label = std::string(to_string(tg.method)) + (tg.method == Method::Ddim ? "" : "/" + tg.mode.name());
    summary << (summary.tellp() > 0 ? ", " : "") << label << " " << fmt_g(est.slope);
    o.check(!est.exact && est.slope >= tg.min_slope,
            label + " slope " + fmt_g(est.slope) + " < " + fmt_g(tg.min_slope));
  }
  o.detail = (o.ok ? "" : o.detail + "; ") + "slopes: " + summary.str();
  return o;
}

// 5. NFE accounting.
Outcome nfe_accounting() {
  Outcome o;
  const auto s = NoiseSchedule::linear();
  SyntheticModel model(LinearStateEps{-0.5}, s);
  const Vector x0{0.3, -0.4, 1.1};
  for (int n = 6; n <= 100; ++n) {
    auto agile = uniform_config(Method::Agile, 1, Phi1Mode::finite(3));
    agile.nfe_budget = n;
    o.check(agile_plan(n).total_nfe == n, "agile plan total for " + std::to_string(n));
    model.reset_count();
    const auto r = sample(agile, model, s, x0);
    o.check(r.nfe == n && model.eval_count() == static_cast<std::size_t>(n),
            "agile NFE " + std::to_string(n) + ": counted " + std::to_string(model.eval_count()));
    for (auto [method, per] : {std::pair{Method::Scire2, 2}, std::pair{Method::Scire3, 3}}) {
      model.reset_count();
      const auto rr = sample(uniform_config(method, n, Phi1Mode::finite(3)), model, s, x0);
      o.check(rr.nfe == per * n && model.eval_count() == static_cast<std::size_t>(per * n),
              std::string(to_string(method)) + " N=" + std::to_string(n) + ": counted " +
                  std::to_string(model.eval_count()));
    }
  }
  if (o.ok) o.detail = "N = 6..100";
  return o;
}

// 6. Transformed coordinates equally spaced.
Outcome trajectory_uniformity() {
  Outcome o;
  const auto s = NoiseSchedule::linear();
  double worst = 0.0;
  for (int n : {10, 100}) {
    for (double k : {2.0, 3.1, 7.0}) {
      TrajectorySpec spec{TrajectoryKind::NsrType, n, 1.0, 1e-3, k};
      const auto traj = build_trajectory(s, spec);
      const double offset = k * s.nsr(1e-3);
      std::vector<double> tr;
      for (double t : traj.times) tr.push_back(-std::log(s.nsr(t) + offset));
      const double d = (tr.back() - tr.front()) / n;
      for (int i = 1; i <= n; ++i) worst = std::max(worst, std::abs(tr[i] - tr[i - 1] - d));
    }
    TrajectorySpec spec{TrajectoryKind::LogNSR, n, 1.0, 1e-3, 0.0};
    const auto traj = build_trajectory(s, spec);
    std::vector<double> lg;
    for (double t : traj.times) lg.push_back(std::log(s.nsr(t)));
    const double d = (lg.back() - lg.front()) / n;
    for (int i = 1; i <= n; ++i) worst = std::max(worst, std::abs(lg[i] - lg[i - 1] - d));
  }
  o.check(worst <= 1e-9, "spacing deviation " + fmt_g(worst));
  if (o.ok) o.detail = "max spacing deviation " + fmt_g(worst);
  return o;
}

// 7. phi table.
Outcome phi_table() {
  Outcome o;
  const auto m3 = Phi1Mode::finite(3);
  o.check(std::abs(phi(1, m3) - 2.0 / 3.0) < 1e-15, "phi_1(3) = " + fmt_full(phi(1, m3)));
  o.check(std::abs(phi(2, m3) - 1.0 / 3.0) < 1e-15, "phi_2(3) = " + fmt_full(phi(2, m3)));
  o.check(std::abs(phi(3, m3) - 1.0 / 6.0) < 1e-15, "phi_3(3) = " + fmt_full(phi(3, m3)));
  const double lim = phi(1, Phi1Mode::limit());
  o.check(std::abs(lim - (std::numbers::e - 1.0) / std::numbers::e) <= 1e-12, "limit = " + fmt_full(lim));
  if (o.ok) o.detail = "phi_1 limit " + fmt_full(lim);
  return o;
}

// 8. compare CSV schema and determinism.
Outcome compare_csv() {
  Outcome o;
  const std::vector<std::string> args{"compare", "--methods", "scire2,scire3", "--steps", "8,16,32",
                                      "--seed", "11", "--substeps", "20000"};
  std::string outputs[2];
  for (auto& text : outputs) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    o.check(code == 0, "compare exited " + std::to_string(code) + ": " + err.str());
    text = out.str();
  }
  o.check(outputs[0] == outputs[1], "two runs with the same seed differ");

  std::istringstream in(outputs[0]);
  std::string line;
  std::getline(in, line);
  o.check(line == "mode,method,N,error", "header '" + line + "'");
  std::set<std::string> seen;
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (cells.size() != 4) {
      o.check(false, "row '" + line + "' has " + std::to_string(cells.size()) + " fields");
      continue;
    }
    o.check(cells[0] == "rde" || cells[0] == "fde", "mode '" + cells[0] + "'");
    o.check(cells[1] == "scire2" || cells[1] == "scire3", "method '" + cells[1] + "'");
    o.check(cells[2] == "8" || cells[2] == "16" || cells[2] == "32", "N '" + cells[2] + "'");
    char* end = nullptr;
    const double e = std::strtod(cells[3].c_str(), &end);
    o.check(*end == '\0' && std::isfinite(e) && e >= 0.0, "error '" + cells[3] + "'");
    o.check(seen.insert(cells[0] + "," + cells[1] + "," + cells[2]).second, "duplicate row '" + line + "'");
  }
  o.check(rows == 2 * 2 * 3, "expected 12 rows, got " + std::to_string(rows));
  if (o.ok) o.detail = std::to_string(rows) + " rows, identical across runs";
  return o;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "schedule closed forms", 1.0, schedule_checks},
      {2, "first-order step identity", 1.0, ddim_identity},
      {3, "exactness suite", 5.0, exactness},
      {4, "order suite", 30.0, order_suite},
      {5, "NFE accounting", 10.0, nfe_accounting},
      {6, "trajectory transform uniformity", 1.0, trajectory_uniformity},
      {7, "phi coefficient table", 1.0, phi_table},
      {8, "rde/fde comparison CSV", 10.0, compare_csv},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= c.time_limit_s) {
      o.detail += (o.detail.empty() ? "" : "; ") + std::string("runtime over ") + fmt_g(c.time_limit_s) + " s";
      o.ok = false;
    }
    std::printf("%s criterion %d: %s (%.3f s) %s\n", o.ok ? "PASS" : "FAIL", c.id, c.name, secs, o.detail.c_str());
    failures += o.ok ? 0 : 1;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
