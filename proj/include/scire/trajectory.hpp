#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "scire/errors.hpp"
#include "scire/format.hpp"
#include "scire/schedule.hpp"

namespace scire {

enum class TrajectoryKind { Uniform, Quadratic, LogNSR, NsrType, SigmoidType };

inline constexpr double kDefaultNsrTypeK = 3.1;
inline constexpr double kDefaultSigmoidTypeK = 0.65;

struct TrajectorySpec {
  TrajectoryKind kind = TrajectoryKind::Uniform;
  int n_steps = 10;
  double t_start = 1.0;
  double t_end = 1e-3;
  double k_param = kDefaultNsrTypeK;

  void validate(const NoiseSchedule& schedule) const {
    if (n_steps < 1) throw ValidationError("trajectory.steps", "must be >= 1, got " + std::to_string(n_steps));
    if (!(t_end > 0.0)) throw ValidationError("trajectory.t_end", "must be > 0");
    if (!(t_start <= schedule.t_max()))
      throw ValidationError("trajectory.t_start", "must be <= schedule T=" + fmt_g(schedule.t_max()));
    if (!(t_end < t_start)) throw ValidationError("trajectory.t_end", "must be < t_start");
    if (!std::isfinite(k_param)) throw ValidationError("trajectory.k", "must be finite");
    if (kind == TrajectoryKind::SigmoidType && std::abs(k_param - 0.5) <= 1e-6)
      throw ValidationError("trajectory.k", "k=" + fmt_g(k_param) + " degenerate (sigmoid scale vanishes)");
    if (kind == TrajectoryKind::NsrType && !(k_param >= 0.0))
      throw ValidationError("trajectory.k", "must be >= 0 for nsr-type trajectories");
  }
};

/// Sampling grid in descending time order: times[0] = t_start (= t_N), times.back() = t_end (= t_0).
struct TimeTrajectory {
  std::vector<double> times;
  std::vector<double> nsr_values;
  // Transformed coordinate the grid is uniform in (NsrType / SigmoidType / LogNSR); empty otherwise.
  std::vector<double> trans;

  std::size_t n_steps() const { return times.empty() ? 0 : times.size() - 1; }
};

inline const char* to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::Uniform: return "uniform";
    case TrajectoryKind::Quadratic: return "quadratic";
    case TrajectoryKind::LogNSR: return "lognsr";
    case TrajectoryKind::NsrType: return "nsr";
    case TrajectoryKind::SigmoidType: return "sigmoid";
  }
  return "?";
}

inline std::optional<TrajectoryKind> parse_trajectory_kind(const std::string& name) {
  if (name == "uniform") return TrajectoryKind::Uniform;
  if (name == "quadratic") return TrajectoryKind::Quadratic;
  if (name == "lognsr") return TrajectoryKind::LogNSR;
  if (name == "nsr") return TrajectoryKind::NsrType;
  if (name == "sigmoid") return TrajectoryKind::SigmoidType;
  return std::nullopt;
}

namespace detail {

inline double lerp_index(double from, double to, int i, int n) {
  return from + static_cast<double>(i) * (to - from) / static_cast<double>(n);
}

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace detail

/// Builds the time grid. Position i = 0 is t_start and i = N is t_end; the first and last
/// entries are set to the requested endpoints exactly.
inline TimeTrajectory build_trajectory(const NoiseSchedule& schedule, const TrajectorySpec& spec) {
  spec.validate(schedule);
  const int n = spec.n_steps;
  TimeTrajectory out;
  out.times.resize(n + 1);

  switch (spec.kind) {
    case TrajectoryKind::Uniform:
      for (int i = 0; i <= n; ++i) out.times[i] = detail::lerp_index(spec.t_start, spec.t_end, i, n);
      break;

    case TrajectoryKind::Quadratic: {
      const double a = std::sqrt(spec.t_start);
      const double b = std::sqrt(spec.t_end);
      for (int i = 0; i <= n; ++i) {
        const double r = detail::lerp_index(a, b, i, n);
        out.times[i] = r * r;
      }
      break;
    }

    case TrajectoryKind::LogNSR: {
      // Uniform in lambda = log(alpha / sigma) = -log NSR.
      const double lam_start = -std::log(schedule.nsr(spec.t_start));
      const double lam_end = -std::log(schedule.nsr(spec.t_end));
      out.trans.resize(n + 1);
      for (int i = 0; i <= n; ++i) {
        out.trans[i] = detail::lerp_index(lam_start, lam_end, i, n);
        out.times[i] = schedule.rnsr(std::exp(-out.trans[i]));
      }
      break;
    }

    case TrajectoryKind::NsrType: {
      const double k = spec.k_param;
      const double offset = k * schedule.nsr(spec.t_end);
      const double trans_start = -std::log(schedule.nsr(spec.t_start) + offset);
      const double trans_end = -std::log(schedule.nsr(spec.t_end) + offset);
      out.trans.resize(n + 1);
      for (int i = 0; i <= n; ++i) {
        out.trans[i] = detail::lerp_index(trans_start, trans_end, i, n);
        out.times[i] = schedule.rnsr(std::max(std::exp(-out.trans[i]) - offset, 0.0));
      }
      break;
    }

    case TrajectoryKind::SigmoidType: {
      const double k = spec.k_param;
      const double trans_start = -std::log(schedule.nsr(spec.t_start));
      const double trans_end = -std::log(schedule.nsr(spec.t_end));
      const double central = k * trans_start + (1.0 - k) * trans_end;
      const double shift_start = trans_start - central;
      const double shift_end = trans_end - central;
      const double scale = shift_start + shift_end;
      const double sigm_start = detail::sigmoid(shift_start / scale);
      const double sigm_end = detail::sigmoid(shift_end / scale);
      out.trans.resize(n + 1);
      for (int i = 0; i <= n; ++i) {
        const double sigm = detail::lerp_index(sigm_start, sigm_end, i, n);
        out.trans[i] = scale * detail::logit(sigm) + central;
        out.times[i] = schedule.rnsr(std::exp(-out.trans[i]));
      }
      break;
    }
  }

  out.times.front() = spec.t_start;
  out.times.back() = spec.t_end;
  out.nsr_values.resize(n + 1);
  for (int i = 0; i <= n; ++i) out.nsr_values[i] = schedule.nsr(out.times[i]);
  return out;
}

struct TrajectoryDiagnostic {
  std::string message;
  std::optional<std::size_t> index;
};

/// Checks ordering and endpoint invariants; an empty result means the trajectory is usable.
inline std::vector<TrajectoryDiagnostic> validate_trajectory(const NoiseSchedule& schedule,
                                                             const TimeTrajectory& traj,
                                                             std::optional<double> t_start = std::nullopt,
                                                             std::optional<double> t_end = std::nullopt) {
  std::vector<TrajectoryDiagnostic> out;
  const auto& ts = traj.times;
  if (ts.size() < 2) {
    out.push_back({"trajectory needs at least 2 points", std::nullopt});
    return out;
  }
  if (traj.nsr_values.size() != ts.size())
    out.push_back({"nsr_values length differs from times length", std::nullopt});

  bool any_increase = false;
  for (std::size_t i = 1; i < ts.size(); ++i) {
    if (ts[i] == ts[i - 1]) out.push_back({"non-strict ordering at index " + std::to_string(i), i});
    else if (ts[i] > ts[i - 1]) any_increase = true;
  }
  if (any_increase) {
    // A fully reversed list gets one summary line instead of one line per index.
    out.push_back({"times not decreasing", std::nullopt});
  }
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i] > 0.0 && ts[i] <= schedule.t_max()))
      out.push_back({"time outside (0, T] at index " + std::to_string(i), i});
  }
  if (traj.nsr_values.size() == ts.size()) {
    for (std::size_t i = 1; i < ts.size(); ++i) {
      if (!(traj.nsr_values[i] < traj.nsr_values[i - 1]))
        out.push_back({"nsr_values not strictly decreasing at index " + std::to_string(i), i});
    }
  }
  if (t_start && std::abs(ts.front() - *t_start) > 1e-9) out.push_back({"first time differs from t_start", 0});
  if (t_end && std::abs(ts.back() - *t_end) > 1e-9) out.push_back({"last time differs from t_end", ts.size() - 1});
  return out;
}

}  // namespace scire
