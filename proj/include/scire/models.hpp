#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include "scire/errors.hpp"
#include "scire/format.hpp"
#include "scire/schedule.hpp"
#include "scire/vector.hpp"

namespace scire {

/// Any (x, t) -> D-vector evaluation: a data, velocity or score model, a classifier gradient.
using Field = std::function<Vector(VectorView x, double t)>;

/// Noise prediction model eps(x, t) with an externally readable evaluation counter.
///
/// `operator()` is the only entry point and bumps the counter exactly once per call. The
/// counter is atomic, so concurrent calls on a pure model are fine.
class EpsModel {
 public:
  EpsModel() = default;
  EpsModel(const EpsModel&) = delete;
  EpsModel& operator=(const EpsModel&) = delete;
  virtual ~EpsModel() = default;

  Vector operator()(VectorView x, double t) const {
    count_.fetch_add(1, std::memory_order_relaxed);
    return evaluate(x, t);
  }

  std::size_t eval_count() const noexcept { return count_.load(std::memory_order_relaxed); }
  void reset_count() noexcept { count_.store(0, std::memory_order_relaxed); }

 protected:
  virtual Vector evaluate(VectorView x, double t) const = 0;

 private:
  mutable std::atomic<std::size_t> count_{0};
};

/// Adapts a plain callable to the model contract.
class FunctionModel final : public EpsModel {
 public:
  explicit FunctionModel(Field fn) : fn_(std::move(fn)) {}

 protected:
  Vector evaluate(VectorView x, double t) const override { return fn_(x, t); }

 private:
  Field fn_;
};

// ---------------------------------------------------------------------------------------------
// Synthetic models with known exact solutions.

struct ConstantEps {
  Vector c;
};

/// eps = sum_j coeffs[j] * NSR(t)^j, state independent.
struct TauPolyEps {
  std::vector<Vector> coeffs;
};

/// eps = lambda * x.
struct LinearStateEps {
  double lambda = 0.0;
};

using SyntheticFamily = std::variant<ConstantEps, TauPolyEps, LinearStateEps>;

inline constexpr std::size_t kMaxTauPolyDegree = 6;

inline void validate_family(const SyntheticFamily& family) {
  std::visit(
      [](const auto& f) {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConstantEps>) {
          if (!vec::all_finite(f.c)) throw ValidationError("model.coeffs", "constant must be finite");
        } else if constexpr (std::is_same_v<T, TauPolyEps>) {
          if (f.coeffs.empty()) throw ValidationError("model.coeffs", "need at least one coefficient");
          if (f.coeffs.size() > kMaxTauPolyDegree + 1)
            throw ValidationError("model.coeffs", "polynomial degree must be <= 6");
          for (const auto& c : f.coeffs) {
            if (c.size() != f.coeffs.front().size())
              throw ValidationError("model.coeffs", "coefficient vectors differ in dimension");
            if (!vec::all_finite(c)) throw ValidationError("model.coeffs", "coefficients must be finite");
          }
        } else {
          if (!std::isfinite(f.lambda)) throw ValidationError("model.lambda", "must be finite");
        }
      },
      family);
}

inline Vector eval_synthetic(const SyntheticFamily& family, const NoiseSchedule& schedule, VectorView x, double t) {
  return std::visit(
      [&](const auto& f) -> Vector {
        using T = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<T, ConstantEps>) {
          return f.c;
        } else if constexpr (std::is_same_v<T, TauPolyEps>) {
          const double tau = schedule.nsr(t);
          // Horner from the highest power down.
          Vector out = f.coeffs.back();
          for (std::size_t j = f.coeffs.size() - 1; j-- > 0;) {
            for (std::size_t d = 0; d < out.size(); ++d) out[d] = out[d] * tau + f.coeffs[j][d];
          }
          return out;
        } else {
          return vec::scaled(f.lambda, x);
        }
      },
      family);
}

class SyntheticModel final : public EpsModel {
 public:
  SyntheticModel(SyntheticFamily family, NoiseSchedule schedule)
      : family_(std::move(family)), schedule_(schedule) {
    validate_family(family_);
  }

  const SyntheticFamily& family() const noexcept { return family_; }

 protected:
  Vector evaluate(VectorView x, double t) const override { return eval_synthetic(family_, schedule_, x, t); }

 private:
  SyntheticFamily family_;
  NoiseSchedule schedule_;
};

// ---------------------------------------------------------------------------------------------
// Discrete-time models.

/// Model trained on discrete labels; evaluable at any real label in [0, max_label].
struct LabelModel {
  std::function<Vector(VectorView x, double label)> fn;
  double max_label = 0.0;
};

enum class DiscreteWrapKind { Discrete1, Discrete2 };

struct DiscreteWrapMode {
  DiscreteWrapKind kind = DiscreteWrapKind::Discrete2;
  int n_labels = 1000;
};

/// Continuous-time view of a discrete-label model.
///   Discrete1: label = 1000 * max(t - T/N, 0)
///   Discrete2: label = 1000 * (N - 1) t / (N T)
class DiscreteWrappedModel final : public EpsModel {
 public:
  DiscreteWrappedModel(LabelModel base, DiscreteWrapMode mode, const NoiseSchedule& schedule)
      : base_(std::move(base)), mode_(mode), t_max_(schedule.t_max()) {
    if (mode_.n_labels < 2) throw ValidationError("n_labels", "must be >= 2");
    if (!base_.fn) throw ValidationError("base", "label model has no evaluation function");
  }

  double label(double t) const {
    const double n = mode_.n_labels;
    if (mode_.kind == DiscreteWrapKind::Discrete1) return 1000.0 * std::max(t - t_max_ / n, 0.0);
    return 1000.0 * (n - 1.0) * t / (n * t_max_);
  }

 protected:
  Vector evaluate(VectorView x, double t) const override {
    const double l = label(t);
    if (!(l >= 0.0 && l <= base_.max_label * (1.0 + 1e-12)))
      throw DomainError("discrete label " + fmt_g(l) + " outside [0, " + fmt_g(base_.max_label) +
                        "]");
    return base_.fn(x, std::min(l, base_.max_label));
  }

 private:
  LabelModel base_;
  DiscreteWrapMode mode_;
  double t_max_;
};

inline std::unique_ptr<EpsModel> wrap_discrete(LabelModel base, DiscreteWrapMode mode, const NoiseSchedule& schedule) {
  return std::make_unique<DiscreteWrappedModel>(std::move(base), mode, schedule);
}

/// State-independent table over labels 1000 n / N (n = 0 .. N-1), linearly interpolated
/// between entries. Row n holds the value at discrete time t_{n+1} = (n + 1) T / N.
class LabelTable {
 public:
  LabelTable(std::vector<Vector> rows, int n_labels) : rows_(std::move(rows)), n_labels_(n_labels) {
    if (n_labels_ < 2 || rows_.size() != static_cast<std::size_t>(n_labels_))
      throw ValidationError("n_labels", "table must have exactly n_labels rows");
  }

  /// Samples a synthetic family on the discrete time grid.
  static LabelTable from_synthetic(const SyntheticFamily& family, const NoiseSchedule& schedule, int n_labels,
                                   std::size_t dim) {
    std::vector<Vector> rows;
    rows.reserve(n_labels);
    const Vector zero(dim, 0.0);
    for (int n = 0; n < n_labels; ++n) {
      const double t = std::min(schedule.t_max() * (n + 1) / n_labels, schedule.t_max());
      rows.push_back(eval_synthetic(family, schedule, zero, t));
    }
    return LabelTable(std::move(rows), n_labels);
  }

  double max_label() const { return 1000.0 * (n_labels_ - 1) / n_labels_; }

  Vector at(double label) const {
    const double pos = label * n_labels_ / 1000.0;
    if (!(pos >= 0.0 && pos <= n_labels_ - 1 + 1e-9))
      throw DomainError("label " + fmt_g(label) + " outside table");
    const auto lo = static_cast<std::size_t>(std::min(std::floor(pos), static_cast<double>(n_labels_ - 2)));
    const double w = std::clamp(pos - static_cast<double>(lo), 0.0, 1.0);
    return vec::axpby(1.0 - w, rows_[lo], w, rows_[lo + 1]);
  }

  LabelModel as_label_model() const {
    auto self = std::make_shared<LabelTable>(*this);
    return {[self](VectorView, double label) { return self->at(label); }, max_label()};
  }

 private:
  std::vector<Vector> rows_;
  int n_labels_;
};

// ---------------------------------------------------------------------------------------------
// Parameterisation conversions.

enum class ModelKind { Noise, Data, Velocity, Score };

/// Re-expresses a data / velocity / score model as noise prediction using the VP identities
///   x = alpha x0 + sigma eps,  v = alpha eps - sigma x0,  s = -eps / sigma.
class ConvertedModel final : public EpsModel {
 public:
  ConvertedModel(ModelKind kind, Field src, const NoiseSchedule& schedule)
      : kind_(kind), src_(std::move(src)), schedule_(schedule) {}

 protected:
  Vector evaluate(VectorView x, double t) const override {
    Vector out = src_(x, t);
    switch (kind_) {
      case ModelKind::Noise: return out;
      case ModelKind::Score: return vec::scaled(-schedule_.sigma(t), out);
      case ModelKind::Data: {
        const double sigma = schedule_.sigma(t);
        if (sigma == 0.0) throw DomainError("data-model conversion is singular at sigma_t = 0");
        return vec::axpby(1.0 / sigma, x, -schedule_.alpha(t) / sigma, out);
      }
      case ModelKind::Velocity: return vec::axpby(schedule_.alpha(t), out, schedule_.sigma(t), x);
    }
    return out;
  }

 private:
  ModelKind kind_;
  Field src_;
  NoiseSchedule schedule_;
};

inline std::unique_ptr<EpsModel> convert_model(ModelKind kind, Field src, const NoiseSchedule& schedule) {
  return std::make_unique<ConvertedModel>(kind, std::move(src), schedule);
}

/// Classifier guidance: eps(x, t, y) = eps(x, t) - scale * sigma_t * grad_x log p_t(y | x).
/// The base model must outlive the guided one.
class GuidedModel final : public EpsModel {
 public:
  GuidedModel(const EpsModel& base, Field grad_log_p, double guidance_scale, const NoiseSchedule& schedule)
      : base_(base), grad_(std::move(grad_log_p)), scale_(guidance_scale), schedule_(schedule) {}

 protected:
  Vector evaluate(VectorView x, double t) const override {
    Vector out = base_(x, t);
    if (scale_ == 0.0) return out;
    vec::add_scaled(out, -scale_ * schedule_.sigma(t), grad_(x, t));
    return out;
  }

 private:
  const EpsModel& base_;
  Field grad_;
  double scale_;
  NoiseSchedule schedule_;
};

inline std::unique_ptr<EpsModel> guided_model(const EpsModel& base, Field grad_log_p, double guidance_scale,
                                              const NoiseSchedule& schedule) {
  return std::make_unique<GuidedModel>(base, std::move(grad_log_p), guidance_scale, schedule);
}

}  // namespace scire
