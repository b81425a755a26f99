#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "scire/schedule.hpp"
#include "test_support.hpp"

namespace {

using scire::DomainError;
using scire::NoiseSchedule;
using scire::ValidationError;

std::vector<NoiseSchedule> both_schedules() { return {NoiseSchedule::linear(), NoiseSchedule::cosine()}; }

TEST(Schedule, Defaults) {
  const auto lin = NoiseSchedule::linear();
  EXPECT_EQ(lin.beta0(), 0.1);
  EXPECT_EQ(lin.beta1(), 20.0);
  EXPECT_EQ(lin.t_max(), 1.0);
  const auto cos = NoiseSchedule::cosine();
  EXPECT_EQ(cos.s_offset(), 0.008);
  EXPECT_EQ(cos.t_max(), 0.9946);
}

TEST(Schedule, LogAlphaLinear) {
  const auto s = NoiseSchedule::linear(0.1, 20.0);
  EXPECT_EQ(s.log_alpha(0.0), 0.0);
  // -(20 - 0.1)/4 - 0.1/2
  EXPECT_NEAR(s.log_alpha(1.0), -5.025, 1e-14);
}

TEST(Schedule, LogAlphaCosineAtZero) { EXPECT_NEAR(NoiseSchedule::cosine().log_alpha(0.0), 0.0, 1e-16); }

TEST(Schedule, LogAlphaOutsideDomainThrows) {
  const auto s = NoiseSchedule::linear();
  EXPECT_THROW(s.log_alpha(-1e-9), DomainError);
  EXPECT_THROW(s.log_alpha(1.0 + 1e-9), DomainError);
  EXPECT_THROW(NoiseSchedule::cosine().nsr(0.995), DomainError);
}

TEST(Schedule, NsrValues) {
  const auto s = NoiseSchedule::linear(0.1, 20.0);
  EXPECT_EQ(s.nsr(0.0), 0.0);
  // alpha = e^-5.025, sigma = sqrt(1 - alpha^2): ratio by hand in extended precision.
  EXPECT_NEAR(s.nsr(1.0), 152.1669702839465, 1e-10);
  EXPECT_NEAR(s.nsr(0.5), 3.41291830906912036833, 1e-13);
  EXPECT_NEAR(s.nsr(0.25896026243279663), 1.0, 1e-12);
  const auto c = NoiseSchedule::cosine();
  EXPECT_NEAR(c.nsr(0.9946), 118.82365097258097825, 1e-9);
  EXPECT_NEAR(c.nsr(0.3), 0.52037729661020220493, 1e-14);
}

TEST(Schedule, RnsrValues) {
  const auto s = NoiseSchedule::linear(0.1, 20.0);
  EXPECT_EQ(s.rnsr(0.0), 0.0);
  const double expected = 2.0 * std::log(2.0) / (std::sqrt(0.01 + 39.8 * std::log(2.0)) + 0.1);
  EXPECT_NEAR(s.rnsr(1.0), expected, 1e-15);
  EXPECT_NEAR(s.rnsr(1.0), 0.25897, 1e-5);
  EXPECT_NEAR(s.rnsr(s.nsr(0.5)), 0.5, 1e-9);
}

TEST(Schedule, RnsrDomain) {
  const auto s = NoiseSchedule::linear();
  EXPECT_THROW(s.rnsr(-0.1), DomainError);
  EXPECT_THROW(s.rnsr(s.nsr_max() * 1.001), DomainError);
  // Rounding slack at the top of the range maps to T.
  EXPECT_EQ(s.rnsr(s.nsr_max() * (1.0 + 1e-14)), 1.0);
}

TEST(Schedule, StableLinearInverseMatchesDifferenceOfRootsAwayFromZero) {
  const auto s = NoiseSchedule::linear(0.1, 20.0);
  for (double tau : {0.5, 1.0, 10.0, 100.0}) {
    const double l = std::log(1.0 + tau * tau);
    const double naive = (std::sqrt(0.01 + 2.0 * 19.9 * l) - 0.1) / 19.9;
    EXPECT_NEAR(s.rnsr(tau), naive, 1e-13 * std::max(naive, 1.0));
  }
  // Small tau: the stable form keeps relative precision (t ~ 2 tau^2 / (2 beta0) = tau^2 / beta0).
  const double tiny = 1e-6;
  EXPECT_NEAR(s.rnsr(tiny) / (tiny * tiny / 0.1), 1.0, 1e-4);
}

TEST(Schedule, VpIdentityOnGrid) {
  for (const auto& s : both_schedules()) {
    for (int i = 0; i <= 1000; ++i) {
      const double t = s.t_max() * i / 1000.0;
      const double a = s.alpha(t);
      const double g = s.sigma(t);
      EXPECT_NEAR(a * a + g * g, 1.0, 1e-12) << s.describe() << " t=" << t;
    }
  }
}

TEST(Schedule, NsrStrictlyIncreasing) {
  for (const auto& s : both_schedules()) {
    double prev = s.nsr(0.0);
    for (int i = 1; i <= 1000; ++i) {
      const double t = s.t_max() * i / 1000.0;
      const double v = s.nsr(t);
      EXPECT_GT(v, prev) << s.describe() << " t=" << t;
      prev = v;
    }
  }
}

TEST(Schedule, RoundTripBothDirections) {
  for (const auto& s : both_schedules()) {
    for (int i = 0; i <= 1000; ++i) {
      const double t = 1e-4 + (s.t_max() - 1e-4) * i / 1000.0;
      EXPECT_NEAR(s.rnsr(s.nsr(t)), t, 1e-9) << s.describe();
    }
    for (int i = 0; i <= 1000; ++i) {
      const double tau = s.nsr_max() * i / 1000.0;
      EXPECT_LT(std::abs(s.nsr(s.rnsr(tau)) - tau) / std::max(tau, 1.0), 1e-9) << s.describe() << " tau=" << tau;
    }
  }
}

TEST(Schedule, DriftLinearClosedForm) {
  const auto s = NoiseSchedule::linear(0.1, 20.0);
  EXPECT_NEAR(s.drift_diffusion(0.0).f, -0.05, 1e-15);
  for (double t : {0.1, 0.37, 0.9}) EXPECT_NEAR(s.drift_diffusion(t).f, -19.9 * t / 2.0 - 0.05, 1e-13);
}

TEST(Schedule, DriftDiffusionMatchesFiniteDifferences) {
  const double step = 1e-6;
  for (const auto& s : both_schedules()) {
    for (double t : {0.05, 0.2, 0.5, 0.8}) {
      const auto dd = s.drift_diffusion(t);
      const double f_fd = scire::testing::central_diff([&](double u) { return s.log_alpha(u); }, t, step);
      const double dsig2 = scire::testing::central_diff(
          [&](double u) {
            const double g = s.sigma(u);
            return g * g;
          },
          t, step);
      const double sig = s.sigma(t);
      const double g_fd = dsig2 - 2.0 * f_fd * sig * sig;
      EXPECT_NEAR(dd.f, f_fd, 1e-5 * std::abs(f_fd)) << s.describe();
      EXPECT_NEAR(dd.g_sq, g_fd, 1e-5 * std::abs(g_fd)) << s.describe();
      // g^2 = 2 sigma alpha dNSR/dt
      const double dnsr = scire::testing::central_diff([&](double u) { return s.nsr(u); }, t, step);
      EXPECT_NEAR(dd.g_sq, 2.0 * sig * s.alpha(t) * dnsr, 1e-5 * dd.g_sq) << s.describe();
    }
  }
}

TEST(Schedule, ValidationNamesField) {
  try {
    NoiseSchedule::linear(0.1, 20.0, -1.0);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.field(), "schedule.t_max");
  }
  EXPECT_THROW(NoiseSchedule::cosine(0.008, 1.0), ValidationError);
  EXPECT_THROW(NoiseSchedule::linear(-0.1, 20.0), ValidationError);
}

TEST(Schedule, DegenerateConstantBetaStillInverts) {
  const auto s = NoiseSchedule::linear(1.0, 1.0);
  for (double t : {0.01, 0.3, 1.0}) EXPECT_NEAR(s.rnsr(s.nsr(t)), t, 1e-12);
}

}  // namespace
