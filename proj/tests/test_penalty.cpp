#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "gsmooth/penalty.hpp"

using namespace gsmooth;

namespace {

// Straight transcription of the two-branch Huber definition, kept separate
// from the library so both can be wrong only independently.
double huber_ref(double x, double a) {
  return std::fabs(x) < a ? 0.5 * x * x / a : std::fabs(x) - 0.5 * a;
}

// min over l in {0, x} of huber(x - l) + (b - a/2) [l != 0], with argmin.
std::pair<double, double> truncation_min(double x, double a, double b) {
  const double keep = huber_ref(x, a);
  const double cut = huber_ref(0.0, a) + (x != 0.0 ? b - 0.5 * a : 0.0);
  return keep <= cut ? std::pair{keep, 0.0} : std::pair{cut, x};
}

std::vector<std::pair<double, double>> param_grid() {
  std::vector<std::pair<double, double>> out;
  for (double a : {1e-3, 0.05, 0.3, 1.0})
    for (double scale : {1.0, 1.5, 3.0, 10.0}) out.emplace_back(a, a * scale);
  return out;
}

}  // namespace

TEST(Huber, Examples) {
  EXPECT_EQ(huber(0.0, 0.1), 0.0);
  EXPECT_NEAR(huber(0.05, 0.1), 0.0125, 1e-15);
  EXPECT_NEAR(huber(0.2, 0.1), 0.15, 1e-15);
  EXPECT_THROW(huber(1.0, 0.0), std::domain_error);
  EXPECT_THROW(huber(1.0, -1.0), std::domain_error);
}

TEST(Huber, SymmetricAndC1AtKnee) {
  for (double a : {1e-3, 0.1, 1.0}) {
    EXPECT_EQ(huber(0.37, a), huber(-0.37, a));
    const double h = 1e-9;
    EXPECT_NEAR(huber(a - h, a), huber(a + h, a), 1e-8);
    const double left = (huber(a, a) - huber(a - h, a)) / h;
    const double right = (huber(a + h, a) - huber(a, a)) / h;
    EXPECT_NEAR(left, right, 1e-6);
  }
}

TEST(TruncatedHuber, Examples) {
  const TruncatedHuberParams p{1e-3, 0.15};
  EXPECT_NEAR(truncated_huber(0.2, p), 0.1495, 1e-15);
  EXPECT_NEAR(truncated_huber(0.05, p), 0.0495, 1e-15);
  for (double x = -1.0; x <= 1.0; x += 0.125)
    EXPECT_NEAR(truncated_huber(x, {2.0, 2.0}), x * x / 4.0, 1e-15);
}

TEST(TruncatedHuber, InvalidParams) {
  EXPECT_THROW(truncated_huber(0.1, {0.2, 0.1}), std::domain_error);
  EXPECT_THROW(truncated_huber(0.1, {0.0, 0.1}), std::domain_error);
}

TEST(TruncatedHuber, ContinuousAndBounded) {
  for (auto [a, b] : param_grid()) {
    const TruncatedHuberParams p{a, b};
    EXPECT_NEAR(truncated_huber(b, p), truncated_huber(std::nextafter(b, 10.0), p), 1e-12);
    for (double x = -2.0; x <= 2.0; x += 0.01) EXPECT_LE(truncated_huber(x, p), b - 0.5 * a + 1e-15);
  }
}

TEST(TruncatedHuber, DegradesToHuberAboveRange) {
  for (double a : {1e-3, 0.05, 0.3, 1.0})
    for (double x = -1.0; x <= 1.0; x += 1.0 / 256) EXPECT_EQ(truncated_huber(x, {a, 2.0}), huber(x, a));
}

TEST(TruncatedHuber, TruncationIdentityAndArgmin) {
  for (auto [a, b] : param_grid()) {
    std::vector<double> xs;
    for (int k = -400; k <= 400; ++k) xs.push_back(k / 200.0);
    xs.push_back(b);
    xs.push_back(-b);
    for (double x : xs) {
      const auto [value, argmin] = truncation_min(x, a, b);
      EXPECT_NEAR(truncated_huber(x, {a, b}), value, 1e-12) << x << ' ' << a << ' ' << b;
      EXPECT_EQ(l_update(x, b), argmin) << x << ' ' << a << ' ' << b;
    }
    EXPECT_EQ(l_update(b, b), 0.0);
    EXPECT_EQ(l_update(-b, b), 0.0);
  }
}

TEST(EdgeStop, Examples) {
  const TruncatedHuberParams p{1e-3, 0.15};
  EXPECT_NEAR(edge_stop(0.0005, p), 1000.0, 1e-9);
  EXPECT_NEAR(edge_stop(0.1, p), 10.0, 1e-12);
  EXPECT_EQ(edge_stop(0.2, p), 0.0);
}

TEST(EdgeStop, MatchesDerivativeOverX) {
  for (auto [a, b] : param_grid()) {
    const TruncatedHuberParams p{a, b};
    for (double x = -2.0; x <= 2.0; x += 0.0137) {
      if (x == 0.0) continue;
      const double h = 1e-7 * std::max(1.0, std::fabs(x));
      bool near_kink = false;
      for (double k : {a, b})
        if (std::fabs(std::fabs(x) - k) < 2 * h) near_kink = true;
      if (near_kink) continue;
      const double d = (truncated_huber(x + h, p) - truncated_huber(x - h, p)) / (2 * h);
      const double expect = edge_stop(x, p);
      EXPECT_NEAR(d / x, expect, 1e-6 * std::max(1.0, expect)) << x << ' ' << a << ' ' << b;
    }
  }
}

TEST(EdgeStop, NonIncreasing) {
  const TruncatedHuberParams p{0.05, 0.3};
  double prev = edge_stop(0.0, p);
  EXPECT_EQ(prev, 1.0 / 0.05);
  for (double x = 0.0; x <= 1.0; x += 0.001) {
    const double e = edge_stop(x, p);
    EXPECT_LE(e, prev);
    prev = e;
  }
}

TEST(LUpdate, Examples) {
  EXPECT_EQ(l_update(0.1, 0.15), 0.0);
  EXPECT_EQ(l_update(0.2, 0.15), 0.2);
  EXPECT_EQ(l_update(-0.3, 0.15), -0.3);
  for (double g = -1.0; g <= 1.0; g += 0.05) EXPECT_EQ(l_update(-g, 0.3), -l_update(g, 0.3));
}

TEST(MuUpdate, Examples) {
  EXPECT_NEAR(mu_update(0.05, 0.1), 5.0, 1e-12);
  EXPECT_NEAR(mu_update(0.2, 0.1), 2.5, 1e-12);
  EXPECT_NEAR(mu_update(0.1, 0.1), 5.0, 1e-12);
  EXPECT_THROW(mu_update(0.1, 0.0), std::domain_error);
}

TEST(Psi, Examples) {
  EXPECT_NEAR(psi(5.0, 0.1), 0.0, 1e-15);
  EXPECT_NEAR(psi(2.5, 0.1), 0.05, 1e-15);
  EXPECT_NEAR(2.5 * 0.2 * 0.2 + psi(2.5, 0.1), huber(0.2, 0.1), 1e-15);
  EXPECT_NEAR(5.0 * 0.05 * 0.05 + psi(5.0, 0.1), huber(0.05, 0.1), 1e-15);
  EXPECT_THROW(psi(0.0, 0.1), std::domain_error);
  EXPECT_THROW(psi(5.1, 0.1), std::domain_error);
}

// Independent of the closed form: brute-force minimize mu*x^2 + psi(mu) over a
// dense mu grid and compare with huber. Also recovers psi numerically as the
// conjugate sup_x (huber(x) - mu x^2) on an x grid.
TEST(Psi, ConjugateOracle) {
  for (double a : {1e-3, 0.05, 0.3, 1.0}) {
    const double mu_max = 0.5 / a;
    for (double frac : {1.0, 0.8, 0.5, 0.2, 0.05}) {
      const double mu = mu_max * frac;
      // sup over x of huber(x) - mu x^2 is attained at |x| = 1/(2mu) >= a.
      double best = -1e300;
      const double x_star = 0.5 / mu;
      for (int k = 0; k <= 2000; ++k) {
        const double x = x_star * k / 1000.0;
        best = std::max(best, huber_ref(x, a) - mu * x * x);
      }
      EXPECT_NEAR(psi(mu, a), best, 1e-10 * std::max(1.0, best));
    }
  }
}

TEST(HalfQuadratic, IdentityAndMinimality) {
  for (double a : {1e-3, 0.05, 0.3, 1.0}) {
    const double mu_max = 0.5 / a;
    for (int k = -200; k <= 200; ++k) {
      const double x = k / 100.0;
      const double mu = mu_update(x, a);
      EXPECT_GT(mu, 0.0);
      EXPECT_LE(mu, mu_max);
      const double h = huber(x, a);
      EXPECT_NEAR(mu * x * x + psi(mu, a), h, 1e-10);
      for (int j = 1; j <= 1000; ++j) {
        const double m = mu_max * j / 1000.0;
        EXPECT_GE(m * x * x + psi(m, a), h - 1e-10);
      }
    }
  }
}
