#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "scire/errors.hpp"
#include "scire/format.hpp"
#include "scire/vector.hpp"

namespace scire {

/// How the first-derivative estimate is normalised.
///  Finite(m): recursive derivative estimation with the order-m partial sums (m >= 3).
///  Limit:     the m -> infinity value (e - 1) / e.
///  Fde:       plain finite difference (phi_1 = 1).
class Phi1Mode {
 public:
  enum class Kind { Finite, Limit, Fde };

  static Phi1Mode finite(int m) {
    if (m < 3) throw ValidationError("solver.phi1", "finite order m must be >= 3, got " + std::to_string(m));
    return Phi1Mode(Kind::Finite, m);
  }
  static Phi1Mode limit() { return Phi1Mode(Kind::Limit, 0); }
  static Phi1Mode fde() { return Phi1Mode(Kind::Fde, 0); }

  Kind kind() const noexcept { return kind_; }
  int m() const noexcept { return m_; }

  /// Config spelling: m<order>, limit or fde.
  std::string name() const {
    switch (kind_) {
      case Kind::Finite: return "m" + std::to_string(m_);
      case Kind::Limit: return "limit";
      case Kind::Fde: return "fde";
    }
    return "?";
  }

  static std::optional<Phi1Mode> parse(const std::string& s) {
    if (s == "limit") return limit();
    if (s == "fde") return fde();
    if (s.size() >= 2 && s[0] == 'm') {
      try {
        std::size_t used = 0;
        const int m = std::stoi(s.substr(1), &used);
        if (used == s.size() - 1 && m >= 3) return finite(m);
      } catch (const std::exception&) {
      }
    }
    return std::nullopt;
  }

  friend bool operator==(const Phi1Mode&, const Phi1Mode&) = default;

 private:
  Phi1Mode(Kind kind, int m) : kind_(kind), m_(m) {}
  Kind kind_;
  int m_;
};

/// Partial-sum coefficient phi_j for j in {1, 2, 3}:
///   phi_1(m) = sum_{k=1..m} (-1)^(k-1)/k!,  phi_2(m) = sum_{k=2..m} (-1)^k/k!,
///   phi_3(m) = sum_{k=3..m} (-1)^(k+1)/k!.
/// Limit and Fde only define phi_1.
inline double phi(int j, const Phi1Mode& mode) {
  if (j < 1 || j > 3) throw std::out_of_range("phi: j must be 1, 2 or 3, got " + std::to_string(j));
  switch (mode.kind()) {
    case Phi1Mode::Kind::Limit:
      if (j != 1) throw UnsupportedError("phi: limit mode only defines phi_1");
      return (std::numbers::e - 1.0) / std::numbers::e;
    case Phi1Mode::Kind::Fde:
      if (j != 1) throw UnsupportedError("phi: fde mode only defines phi_1");
      return 1.0;
    case Phi1Mode::Kind::Finite: break;
  }
  // Sign of the k-th term: phi_1 -> (-1)^(k-1), phi_2 -> (-1)^k, phi_3 -> (-1)^(k+1).
  const double lead_sign = (j == 2) ? -1.0 : 1.0;
  double sum = 0.0;
  double inv_fact = 1.0;
  for (int k = 1; k <= mode.m(); ++k) {
    inv_fact /= k;
    if (k < j) continue;
    const double sign = ((k - 1) % 2 == 0) ? lead_sign : -lead_sign;
    sum += sign * inv_fact;
  }
  return sum;
}

/// Relative size below which a signed NSR gap is treated as zero.
inline constexpr double kDegenerateStepRatio = 1e-15;

/// First-derivative estimate (eps_far - eps_near) / (phi_1 * h) consumed by the solvers.
/// `tau_ref` is the NSR value the gap is measured from; it only scales the degeneracy guard.
inline Vector rde_diff(VectorView eps_far, VectorView eps_near, double h, const Phi1Mode& mode,
                       double tau_ref = 0.0) {
  if (!(std::abs(h) >= kDegenerateStepRatio * std::max(std::abs(tau_ref), 1.0)))
    throw DegenerateStepError("rde_diff: degenerate NSR step h=" + fmt_g(h));
  return vec::scaled(1.0 / (phi(1, mode) * h), vec::sub(eps_far, eps_near));
}

}  // namespace scire
