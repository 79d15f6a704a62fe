#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "epibifi/grid.hpp"
#include "epibifi/transport.hpp"

using namespace epibifi;

TEST(Grid, GeometryAndPeriodicNeighbours) {
  const Grid1D g(20.0, 150);
  EXPECT_NEAR(g.dx() * g.n_cells(), 20.0, 1e-12);
  EXPECT_DOUBLE_EQ(g.center(0), 0.5 * g.dx());
  EXPECT_DOUBLE_EQ(g.center(7), 7.5 * g.dx());
  EXPECT_EQ(g.left(0), 149);
  EXPECT_EQ(g.right(149), 0);
  EXPECT_EQ(g.left(5), 4);
  EXPECT_EQ(g.cell_centers().size(), 150u);
}

TEST(Grid, RejectsBadInput) {
  EXPECT_THROW(Grid1D(20.0, 2), ConfigError);
  EXPECT_THROW(Grid1D(0.0, 10), ConfigError);
  const Grid1D g(1.0, 10);
  std::vector<double> f(9, 0.0);
  EXPECT_THROW(g.integrate(f), ConfigError);
}

TEST(Minmod, Examples) {
  EXPECT_EQ(minmod(1.0, 2.0), 1.0);
  EXPECT_EQ(minmod(-1.0, 2.0), 0.0);
  EXPECT_EQ(minmod(-3.0, -2.0), -2.0);
  EXPECT_EQ(minmod(0.0, 5.0), 0.0);
}

TEST(Minmod, MagnitudeBound) {
  std::mt19937 gen(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int k = 0; k < 1000; ++k) {
    const double a = u(gen), b = u(gen);
    const double m = minmod(a, b);
    EXPECT_LE(std::abs(m), std::min(std::abs(a), std::abs(b)));
    if (a * b <= 0.0) {
      EXPECT_EQ(m, 0.0);
    }
  }
}

TEST(Reconstruct, ConstantFieldHasZeroSlopes) {
  const Grid1D g(20.0, 40);
  std::vector<double> f(40, 3.0), s(40);
  reconstruct(f, g, s);
  for (double v : s) EXPECT_EQ(v, 0.0);
}

TEST(Reconstruct, LinearRampAwayFromSeam) {
  const Grid1D g(10.0, 50);
  std::vector<double> f(50), s(50);
  for (int i = 0; i < 50; ++i) f[i] = 2.5 * g.center(i);
  reconstruct(f, g, s);
  for (int i = 1; i < 49; ++i) EXPECT_NEAR(s[i], 2.5, 1e-12);
  // The wrap from the top of the ramp back to its foot is a local extremum.
  EXPECT_EQ(s[0], 0.0);
  EXPECT_EQ(s[49], 0.0);
}

TEST(Reconstruct, SpikeHasZeroSlope) {
  const Grid1D g(1.0, 10);
  std::vector<double> f(10, 0.0), s(10);
  f[4] = 1.0;
  reconstruct(f, g, s);
  EXPECT_EQ(s[4], 0.0);
  EXPECT_EQ(s[3], 0.0);
  EXPECT_EQ(s[5], 0.0);
}

TEST(Reconstruct, LengthMismatch) {
  const Grid1D g(1.0, 10);
  std::vector<double> f(11, 0.0), s(11);
  EXPECT_THROW(reconstruct(f, g, s), ConfigError);
}

// Total variation of the piecewise-linear reconstruction, jumps at faces
// included, never exceeds the total variation of the cell averages.
TEST(Reconstruct, TotalVariationDiminishing) {
  std::mt19937 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const Grid1D g(3.0, 30);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> f(30), s(30);
    for (double& v : f) v = u(gen);
    reconstruct(f, g, s);
    double tv_cells = 0.0, tv_rec = 0.0;
    const double h = 0.5 * g.dx();
    for (int i = 0; i < 30; ++i) {
      tv_cells += std::abs(f[g.right(i)] - f[i]);
      tv_rec += std::abs(2.0 * h * s[i]);
      tv_rec += std::abs((f[g.right(i)] - h * s[g.right(i)]) - (f[i] + h * s[i]));
    }
    EXPECT_LE(tv_rec, tv_cells * (1.0 + 1e-12));
  }
}

TEST(InterfaceTerms, CentralDerivativeOfSmoothData) {
  double jmax[2];
  for (int k = 0; k < 2; ++k) {
    const int n = 200 << k;
    const Grid1D g(2.0 * M_PI, n);
    std::vector<double> f(n), s(n), c(n), j(n);
    for (int i = 0; i < n; ++i) f[i] = std::sin(g.center(i));
    interface_terms(f, g, s, c, j, 0.0);
    double err = 0.0;
    for (int i = 0; i < n; ++i) err = std::max(err, std::abs(c[i] - std::cos(g.center(i))));
    EXPECT_LT(err, 1e-3);
    jmax[k] = 0.0;
    for (double v : j) jmax[k] = std::max(jmax[k], std::abs(v));
  }
  // Limiter clipping at the extrema leaves jump terms of size O(dx).
  EXPECT_LT(jmax[0], 5e-2);
  EXPECT_LT(jmax[1], 0.6 * jmax[0]);
}

TEST(InterfaceTerms, ConservativeDifferences) {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Grid1D g(1.0, 25);
  std::vector<double> f(25), s(25), c(25), j(25);
  for (double& v : f) v = u(gen);
  interface_terms(f, g, s, c, j, 1.0);
  double sc = 0.0, sj = 0.0;
  for (int i = 0; i < 25; ++i) {
    sc += c[i];
    sj += j[i];
  }
  EXPECT_NEAR(sc, 0.0, 1e-12);
  EXPECT_NEAR(sj, 0.0, 1e-12);
}

TEST(UpwindWeight, LimitsAndMonotone) {
  EXPECT_EQ(upwind_weight(1.0, 1.0, 0.1), 1.0);
  EXPECT_NEAR(upwind_weight(1.0, 0.05, 0.1), 0.125, 1e-15);
  EXPECT_LT(upwind_weight(316.0, 1e-5, 0.13), 1e-3);
  double prev = 0.0;
  for (double tau = 1e-4; tau < 1.0; tau *= 2.0) {
    const double w = upwind_weight(1.0, tau, 0.1);
    EXPECT_GE(w, prev);
    prev = w;
  }
}
