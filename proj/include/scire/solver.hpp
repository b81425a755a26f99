#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "scire/errors.hpp"
#include "scire/format.hpp"
#include "scire/models.hpp"
#include "scire/rde.hpp"
#include "scire/schedule.hpp"
#include "scire/trajectory.hpp"
#include "scire/vector.hpp"

namespace scire {

enum class Method { Ddim, Scire2, Scire3, Agile };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::Ddim: return "ddim";
    case Method::Scire2: return "scire2";
    case Method::Scire3: return "scire3";
    case Method::Agile: return "agile";
  }
  return "?";
}

inline std::optional<Method> parse_method(const std::string& s) {
  if (s == "ddim") return Method::Ddim;
  if (s == "scire2") return Method::Scire2;
  if (s == "scire3") return Method::Scire3;
  if (s == "agile") return Method::Agile;
  return std::nullopt;
}

inline constexpr double kScire2DefaultR1 = 1.0 / 2.0;
inline constexpr double kScire3DefaultR1 = 1.0 / 3.0;
inline constexpr double kScire3DefaultR2 = 2.0 / 3.0;

struct SolverConfig {
  Method method = Method::Scire2;
  Phi1Mode phi1 = Phi1Mode::finite(3);
  std::optional<double> r1;  // defaults: 1/2 for Scire2, 1/3 for Scire3
  std::optional<double> r2;  // default 2/3, Scire3 only
  TrajectorySpec trajectory;
  int nfe_budget = 0;  // Agile only; replaces trajectory.n_steps

  double effective_r1() const {
    return r1.value_or(method == Method::Scire2 ? kScire2DefaultR1 : kScire3DefaultR1);
  }
  double effective_r2() const { return r2.value_or(kScire3DefaultR2); }

  void validate() const {
    if (method == Method::Agile && (r1 || r2))
      throw ValidationError("solver.r1", "agile uses the default fractions; r1/r2 cannot be set");
    const double a = effective_r1();
    if (!(a > 0.0 && a < 1.0)) throw ValidationError("solver.r1", "must lie in (0, 1)");
    if (method == Method::Scire3) {
      const double b = effective_r2();
      if (!(b > a && b < 1.0)) throw ValidationError("solver.r2", "must satisfy r1 < r2 < 1");
    }
    if (method == Method::Agile && nfe_budget < 3)
      throw ValidationError("solver.nfe", "agile needs an NFE budget >= 3, got " + std::to_string(nfe_budget));
  }
};

// ---------------------------------------------------------------------------------------------
// Single steps. Every step works with the signed NSR gap h = NSR(t_to) - NSR(t_from), which is
// negative while sampling towards t = 0.

struct StepOutput {
  Vector x;
  double h = 0.0;
  std::vector<double> intermediate_times;
};

namespace detail {

inline Vector checked_eval(const EpsModel& model, VectorView x, double t) {
  Vector e = model(x, t);
  if (e.size() != x.size())
    throw std::invalid_argument("model returned dimension " + std::to_string(e.size()) + ", state has " +
                                std::to_string(x.size()));
  return e;
}

/// DDIM-form move from (x, t_from) to t_to with a frozen noise prediction:
///   (alpha_to / alpha_from) x + alpha_to * h * eps
inline Vector first_order_move(VectorView x, double alpha_from, double alpha_to, double h, VectorView eps) {
  return vec::axpby(alpha_to / alpha_from, x, alpha_to * h, eps);
}

inline double intermediate_time(const NoiseSchedule& schedule, double tau_from, double h, double r) {
  const double tau = tau_from + r * h;
  if (!(tau >= 0.0 && tau <= schedule.nsr_max() * (1.0 + 1e-12)))
    throw DomainError("intermediate NSR " + fmt_g(tau) + " outside [0, NSR(T)]");
  return schedule.rnsr(tau);
}

}  // namespace detail

inline StepOutput ddim_step(VectorView x, double t_from, double t_to, const EpsModel& model,
                            const NoiseSchedule& schedule) {
  const double h = schedule.nsr(t_to) - schedule.nsr(t_from);
  const Vector eps = detail::checked_eval(model, x, t_from);
  return {detail::first_order_move(x, schedule.alpha(t_from), schedule.alpha(t_to), h, eps), h, {}};
}

inline StepOutput scire2_step(VectorView x, double t_from, double t_to, const EpsModel& model,
                              const NoiseSchedule& schedule, double r1, const Phi1Mode& phi1) {
  const double tau_from = schedule.nsr(t_from);
  const double h = schedule.nsr(t_to) - tau_from;
  const double s = detail::intermediate_time(schedule, tau_from, h, r1);
  const double a_from = schedule.alpha(t_from);
  const double a_to = schedule.alpha(t_to);

  const Vector eps0 = detail::checked_eval(model, x, t_from);
  const Vector x_s = detail::first_order_move(x, a_from, schedule.alpha(s), r1 * h, eps0);
  const Vector eps_s = detail::checked_eval(model, x_s, s);

  // alpha_to * h / (2 phi_1 r1) * (eps_s - eps0) == alpha_to * h^2 / 2 * D
  const Vector d1 = rde_diff(eps_s, eps0, r1 * h, phi1, tau_from);
  Vector out = detail::first_order_move(x, a_from, a_to, h, eps0);
  vec::add_scaled(out, a_to * 0.5 * h * h, d1);
  return {std::move(out), h, {s}};
}

inline StepOutput scire3_step(VectorView x, double t_from, double t_to, const EpsModel& model,
                              const NoiseSchedule& schedule, double r1, double r2, const Phi1Mode& phi1) {
  const double tau_from = schedule.nsr(t_from);
  const double h = schedule.nsr(t_to) - tau_from;
  const double s1 = detail::intermediate_time(schedule, tau_from, h, r1);
  const double s2 = detail::intermediate_time(schedule, tau_from, h, r2);
  const double a_from = schedule.alpha(t_from);
  const double a_s2 = schedule.alpha(s2);
  const double a_to = schedule.alpha(t_to);

  const Vector eps0 = detail::checked_eval(model, x, t_from);
  const Vector x_s1 = detail::first_order_move(x, a_from, schedule.alpha(s1), r1 * h, eps0);
  const Vector eps_s1 = detail::checked_eval(model, x_s1, s1);

  // alpha_s2 * h / phi_1 * (eps_s1 - eps0) == alpha_s2 * r1 h^2 * D1
  Vector x_s2 = detail::first_order_move(x, a_from, a_s2, r2 * h, eps0);
  vec::add_scaled(x_s2, a_s2 * r1 * h * h, rde_diff(eps_s1, eps0, r1 * h, phi1, tau_from));
  const Vector eps_s2 = detail::checked_eval(model, x_s2, s2);

  // alpha_to * h / (2 phi_1 r2) * (eps_s2 - eps0) == alpha_to * h^2 / 2 * D2
  Vector out = detail::first_order_move(x, a_from, a_to, h, eps0);
  vec::add_scaled(out, a_to * 0.5 * h * h, rde_diff(eps_s2, eps0, r2 * h, phi1, tau_from));
  return {std::move(out), h, {s1, s2}};
}

// ---------------------------------------------------------------------------------------------
// Agile plan: spend an exact NFE budget with 3-, 2- and 1-evaluation steps.

enum class PlanStep { Step3, Step2, Step1 };

inline int nfe_of(PlanStep s) {
  switch (s) {
    case PlanStep::Step3: return 3;
    case PlanStep::Step2: return 2;
    case PlanStep::Step1: return 1;
  }
  return 0;
}

struct AgilePlan {
  std::vector<PlanStep> steps;
  int total_nfe = 0;
};

/// M = floor(N / 3) + 1 segments; the remainder R = N mod 3 decides the tail:
///   R = 0: (M - 2) x Step3, Step2, Step1
///   R = 1: (M - 1) x Step3, Step1
///   R = 2: (M - 1) x Step3, Step2
inline AgilePlan agile_plan(int nfe_budget) {
  if (nfe_budget < 3) throw ValidationError("solver.nfe", "agile needs an NFE budget >= 3");
  const int m = nfe_budget / 3 + 1;
  const int r = nfe_budget % 3;
  AgilePlan plan;
  const int n3 = (r == 0) ? m - 2 : m - 1;
  plan.steps.assign(n3, PlanStep::Step3);
  if (r == 0 || r == 2) plan.steps.push_back(PlanStep::Step2);
  if (r == 0 || r == 1) plan.steps.push_back(PlanStep::Step1);
  for (auto s : plan.steps) plan.total_nfe += nfe_of(s);
  return plan;
}

// ---------------------------------------------------------------------------------------------
// Sampling loop.

struct StepRecord {
  std::size_t index = 0;  // trajectory index i of t_from (N .. 1)
  const char* kind = "";
  double t_from = 0.0;
  double t_to = 0.0;
  double h = 0.0;
  std::vector<double> intermediate_times;
  double state_norm = 0.0;  // |x_{t_to}|_2
  double step_norm = 0.0;   // |x_{t_to} - x_{t_from}|_2
};

struct SampleResult {
  Vector x_final;
  int nfe = 0;
  std::vector<StepRecord> trace;
};

/// Number of model evaluations `sample` performs for this configuration.
inline int expected_nfe(const SolverConfig& config) {
  switch (config.method) {
    case Method::Ddim: return config.trajectory.n_steps;
    case Method::Scire2: return 2 * config.trajectory.n_steps;
    case Method::Scire3: return 3 * config.trajectory.n_steps;
    case Method::Agile: return agile_plan(config.nfe_budget).total_nfe;
  }
  return 0;
}

/// Walks the configured trajectory from t_start to t_end. Evaluations are never reused across
/// steps, so the returned NFE is exactly `expected_nfe(config)`.
inline SampleResult sample(const SolverConfig& config, const EpsModel& model, const NoiseSchedule& schedule,
                           VectorView x_init) {
  config.validate();
  std::vector<PlanStep> plan;
  TrajectorySpec spec = config.trajectory;
  switch (config.method) {
    case Method::Ddim: plan.assign(spec.n_steps, PlanStep::Step1); break;
    case Method::Scire2: plan.assign(spec.n_steps, PlanStep::Step2); break;
    case Method::Scire3: plan.assign(spec.n_steps, PlanStep::Step3); break;
    case Method::Agile:
      plan = agile_plan(config.nfe_budget).steps;
      spec.n_steps = static_cast<int>(plan.size());
      break;
  }
  const TimeTrajectory traj = build_trajectory(schedule, spec);

  // Agile always runs its 2- and 3-evaluation steps with the default fractions.
  const bool agile = config.method == Method::Agile;
  const double r1_2 = agile ? kScire2DefaultR1 : config.effective_r1();
  const double r1_3 = agile ? kScire3DefaultR1 : config.effective_r1();
  const double r2_3 = agile ? kScire3DefaultR2 : config.effective_r2();

  SampleResult result;
  result.x_final.assign(x_init.begin(), x_init.end());
  result.trace.reserve(plan.size());
  const std::size_t n = plan.size();

  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t index = n - j;
    const double t_from = traj.times[j];
    const double t_to = traj.times[j + 1];
    StepOutput step;
    const char* kind = "";
    try {
      switch (plan[j]) {
        case PlanStep::Step1:
          step = ddim_step(result.x_final, t_from, t_to, model, schedule);
          kind = "ddim";
          break;
        case PlanStep::Step2:
          step = scire2_step(result.x_final, t_from, t_to, model, schedule, r1_2, config.phi1);
          kind = "scire2";
          break;
        case PlanStep::Step3:
          step = scire3_step(result.x_final, t_from, t_to, model, schedule, r1_3, r2_3, config.phi1);
          kind = "scire3";
          break;
      }
      if (!vec::all_finite(step.x)) throw std::runtime_error("non-finite state");
    } catch (const StepError&) {
      throw;
    } catch (const std::exception& e) {
      throw StepError(index, e.what());
    }
    StepRecord rec;
    rec.index = index;
    rec.kind = kind;
    rec.t_from = t_from;
    rec.t_to = t_to;
    rec.h = step.h;
    rec.intermediate_times = std::move(step.intermediate_times);
    rec.state_norm = vec::norm2(step.x);
    rec.step_norm = vec::norm2(vec::sub(step.x, result.x_final));
    result.trace.push_back(std::move(rec));
    result.x_final = std::move(step.x);
    result.nfe += nfe_of(plan[j]);
  }
  return result;
}

}  // namespace scire
