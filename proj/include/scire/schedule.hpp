#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "scire/errors.hpp"
#include "scire/format.hpp"

namespace scire {

enum class ScheduleKind { LinearVP, CosineVP };

struct DriftDiffusion {
  double f;     // d log(alpha) / dt
  double g_sq;  // d sigma^2 / dt - 2 f sigma^2
};

/// Variance-preserving noise schedule, alpha(t)^2 + sigma(t)^2 = 1.
///
/// The solvers integrate in the noise-to-signal ratio tau = NSR(t) = sigma(t) / alpha(t),
/// which is strictly increasing on (0, T]; `rnsr` is its closed-form inverse. Instances are
/// immutable value types, so every member function is safe to call concurrently.
class NoiseSchedule {
 public:
  static constexpr double kDefaultBeta0 = 0.1;
  static constexpr double kDefaultBeta1 = 20.0;
  static constexpr double kDefaultCosineS = 0.008;
  static constexpr double kDefaultLinearT = 1.0;
  static constexpr double kDefaultCosineT = 0.9946;

  static NoiseSchedule linear(double beta0 = kDefaultBeta0, double beta1 = kDefaultBeta1,
                              double t_max = kDefaultLinearT) {
    if (!(beta0 >= 0.0) || !std::isfinite(beta0)) throw ValidationError("schedule.beta0", "must be >= 0");
    if (!(beta1 >= beta0) || !(beta1 > 0.0) || !std::isfinite(beta1))
      throw ValidationError("schedule.beta1", "must be > 0 and >= beta0");
    if (!(t_max > 0.0) || !std::isfinite(t_max)) throw ValidationError("schedule.t_max", "must be > 0");
    NoiseSchedule s;
    s.kind_ = ScheduleKind::LinearVP;
    s.beta0_ = beta0;
    s.beta1_ = beta1;
    s.t_max_ = t_max;
    s.finish();
    return s;
  }

  static NoiseSchedule cosine(double s_offset = kDefaultCosineS, double t_max = kDefaultCosineT) {
    if (!(s_offset >= 0.0) || !std::isfinite(s_offset)) throw ValidationError("schedule.s", "must be >= 0");
    // alpha reaches zero at t = 1, so the horizon has to stay strictly below it.
    if (!(t_max > 0.0) || !(t_max < 1.0)) throw ValidationError("schedule.t_max", "must lie in (0, 1) for cosine");
    NoiseSchedule s;
    s.kind_ = ScheduleKind::CosineVP;
    s.s_ = s_offset;
    s.t_max_ = t_max;
    s.finish();
    return s;
  }

  ScheduleKind kind() const noexcept { return kind_; }
  double beta0() const noexcept { return beta0_; }
  double beta1() const noexcept { return beta1_; }
  double s_offset() const noexcept { return s_; }
  double t_max() const noexcept { return t_max_; }
  double nsr_max() const noexcept { return nsr_max_; }

  double log_alpha(double t) const {
    check_time(t);
    return log_alpha_unchecked(t);
  }

  double alpha(double t) const { return std::exp(log_alpha(t)); }

  double sigma(double t) const { return std::sqrt(-std::expm1(2.0 * log_alpha(t))); }

  /// sigma / alpha = sqrt(alpha^-2 - 1), evaluated through expm1 so small t keeps full precision.
  double nsr(double t) const {
    check_time(t);
    return nsr_unchecked(t);
  }

  /// Inverse of `nsr`. Values a few ulps beyond NSR(T) are accepted and map to T.
  double rnsr(double tau) const {
    if (std::isnan(tau) || tau < 0.0) throw DomainError("rnsr: tau must be >= 0, got " + fmt_g(tau));
    if (tau > nsr_max_ * (1.0 + 1e-12))
      throw DomainError("rnsr: tau=" + fmt_g(tau) + " exceeds NSR(T)=" + fmt_g(nsr_max_));
    if (tau == 0.0) return 0.0;
    const double log1p_tau_sq = std::log1p(tau * tau);
    double t = 0.0;
    if (kind_ == ScheduleKind::LinearVP) {
      const double db = beta1_ - beta0_;
      t = 2.0 * log1p_tau_sq / (std::sqrt(beta0_ * beta0_ + 2.0 * db * log1p_tau_sq) + beta0_);
    } else {
      // log(alpha) for this tau is -log(1 + tau^2) / 2; arccos argument clamped to [-1, 1].
      const double arg = std::clamp(std::exp(-0.5 * log1p_tau_sq + log_cos_offset_), -1.0, 1.0);
      t = 2.0 * (1.0 + s_) / std::numbers::pi * std::acos(arg) - s_;
    }
    return std::clamp(t, 0.0, t_max_);
  }

  DriftDiffusion drift_diffusion(double t) const {
    check_time(t);
    double f = 0.0;
    if (kind_ == ScheduleKind::LinearVP) {
      f = -0.5 * (beta1_ - beta0_) * t - 0.5 * beta0_;
    } else {
      const double w = 0.5 * std::numbers::pi / (1.0 + s_);
      f = -w * std::tan(w * (t + s_));
    }
    // With sigma^2 = 1 - alpha^2, d sigma^2/dt = -2 f alpha^2, hence g^2 = -2 f.
    return {f, -2.0 * f};
  }

  std::string describe() const {
    if (kind_ == ScheduleKind::LinearVP)
      return "linear(beta0=" + fmt_g(beta0_) + ", beta1=" + fmt_g(beta1_) +
             ", T=" + fmt_g(t_max_) + ")";
    return "cosine(s=" + fmt_g(s_) + ", T=" + fmt_g(t_max_) + ")";
  }

 private:
  NoiseSchedule() = default;

  void finish() {
    if (kind_ == ScheduleKind::CosineVP)
      log_cos_offset_ = std::log(std::cos(0.5 * std::numbers::pi * s_ / (1.0 + s_)));
    nsr_max_ = nsr_unchecked(t_max_);
  }

  void check_time(double t) const {
    if (!(t >= 0.0 && t <= t_max_))
      throw DomainError("time " + fmt_g(t) + " outside [0, " + fmt_g(t_max_) + "]");
  }

  double log_alpha_unchecked(double t) const {
    if (kind_ == ScheduleKind::LinearVP) return -0.25 * (beta1_ - beta0_) * t * t - 0.5 * beta0_ * t;
    return std::log(std::cos(0.5 * std::numbers::pi * (t + s_) / (1.0 + s_))) - log_cos_offset_;
  }

  double nsr_unchecked(double t) const {
    if (t == 0.0) return 0.0;
    return std::sqrt(std::expm1(-2.0 * log_alpha_unchecked(t)));
  }

  ScheduleKind kind_ = ScheduleKind::LinearVP;
  double beta0_ = 0.0;
  double beta1_ = 0.0;
  double s_ = 0.0;
  double t_max_ = 1.0;
  double log_cos_offset_ = 0.0;
  double nsr_max_ = 0.0;
};

}  // namespace scire
