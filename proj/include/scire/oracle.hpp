#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include "scire/errors.hpp"
#include "scire/format.hpp"
#include "scire/models.hpp"
#include "scire/schedule.hpp"
#include "scire/vector.hpp"

namespace scire {

struct ReferenceConfig {
  int substeps = 100000;
  bool richardson_check = false;
  double richardson_tol = 1e-10;

  void validate() const {
    if (substeps < 1000) throw ValidationError("substeps", "must be >= 1000");
  }
};

namespace detail {

/// Classical RK4 on y = x / alpha in tau-space: y'(tau) = eps(alpha(t) y, t), t = rNSR(tau).
/// alpha(t) is taken as 1 / sqrt(1 + tau^2), which holds for every VP schedule.
inline Vector rk4_tau(const EpsModel& model, const NoiseSchedule& schedule, VectorView x_init, double tau_start,
                      double tau_end, int steps) {
  auto rhs = [&](double tau, const Vector& y) {
    const double alpha = 1.0 / std::sqrt(1.0 + tau * tau);
    return model(vec::scaled(alpha, y), schedule.rnsr(tau));
  };
  Vector y = vec::scaled(std::sqrt(1.0 + tau_start * tau_start), x_init);
  const double h = (tau_end - tau_start) / steps;
  for (int i = 0; i < steps; ++i) {
    // Anchor each node to tau_start to avoid drift from repeated addition.
    const double tau = tau_start + i * h;
    const double tau_next = (i + 1 == steps) ? tau_end : tau_start + (i + 1) * h;
    const double tau_mid = 0.5 * (tau + tau_next);
    const Vector k1 = rhs(tau, y);
    const Vector k2 = rhs(tau_mid, vec::axpby(1.0, y, 0.5 * h, k1));
    const Vector k3 = rhs(tau_mid, vec::axpby(1.0, y, 0.5 * h, k2));
    const Vector k4 = rhs(tau_next, vec::axpby(1.0, y, h, k3));
    for (std::size_t d = 0; d < y.size(); ++d) y[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
  }
  return vec::scaled(1.0 / std::sqrt(1.0 + tau_end * tau_end), y);
}

}  // namespace detail

/// Dense fixed-step solution of the diffusion ODE from t_start to t_end, used as ground truth
/// for solver error measurements. With `richardson_check` the solve is repeated at twice the
/// step count and must agree to `richardson_tol` (relative max-norm).
inline Vector reference_solve(const EpsModel& model, const NoiseSchedule& schedule, VectorView x_init,
                              double t_start, double t_end, const ReferenceConfig& cfg = {}) {
  cfg.validate();
  const double tau_start = schedule.nsr(t_start);
  const double tau_end = schedule.nsr(t_end);
  Vector x = detail::rk4_tau(model, schedule, x_init, tau_start, tau_end, cfg.substeps);
  if (cfg.richardson_check) {
    const Vector fine = detail::rk4_tau(model, schedule, x_init, tau_start, tau_end, 2 * cfg.substeps);
    const double diff = vec::relative_max_error(x, fine);
    if (!(diff <= cfg.richardson_tol))
      throw NotConvergedError("reference not converged: doubling substeps moved the result by " +
                              fmt_g(diff));
    x = fine;
  }
  return x;
}

/// Least-squares slope of log(error) against log(1/N).
struct OrderEstimate {
  bool exact = false;  // some error at or below the exactness floor
  double slope = 0.0;
};

inline OrderEstimate empirical_order(std::span<const int> step_counts, std::span<const double> errors,
                                     double exact_floor = 0.0) {
  if (step_counts.size() != errors.size()) throw std::invalid_argument("empirical_order: length mismatch");
  if (step_counts.size() < 2) throw std::invalid_argument("empirical_order: need at least two points");
  for (std::size_t i = 1; i < step_counts.size(); ++i)
    if (!(step_counts[i] > step_counts[i - 1]))
      throw std::invalid_argument("empirical_order: step counts must be strictly increasing");
  for (double e : errors) {
    if (std::isnan(e)) throw std::invalid_argument("empirical_order: NaN error");
    if (e <= exact_floor) return {true, 0.0};
  }
  const double n = static_cast<double>(errors.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < errors.size(); ++i) {
    const double x = -std::log(static_cast<double>(step_counts[i]));
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return {false, (n * sxy - sx * sy) / (n * sxx - sx * sx)};
}

}  // namespace scire
