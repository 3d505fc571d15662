// Copyright (c) 2026 the qpend authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <random>

#include "qpend/core.hpp"
#include "qpend/numerics.hpp"

using namespace qpend;

TEST_CASE("make_params derives q and validates inputs") {
  const auto p = make_params(10.0, 0.5);
  CHECK(p.q() == 40.0);  // exact in binary
  CHECK(make_params(1.0, 1.0).q() == 1.0);
  CHECK_THROWS_WITH_AS(make_params(0.0, 0.5), doctest::Contains("v0"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(make_params(10.0, -1.0), doctest::Contains("kbar"), std::invalid_argument);
}

TEST_CASE("q is recomputed, never stored: bit-for-bit equality") {
  std::mt19937 rng(2026);
  std::uniform_real_distribution<double> u(0.01, 50.0);
  for (int i = 0; i < 200; ++i) {
    const double v0 = u(rng), kbar = u(rng);
    const auto p = make_params(v0, kbar);
    CHECK(p.q() == v0 / (kbar * kbar));
  }
}

TEST_CASE("SpatialGrid invariants") {
  const auto g = SpatialGrid::make(1024, 2);
  CHECK(g.length() == doctest::Approx(2.0 * kPi).epsilon(1e-15));
  CHECK(g.dx == doctest::Approx(g.length() / 1024).epsilon(1e-15));
  CHECK(g.x_at(0) == g.x_min);
  CHECK(g.x_at(1023) == doctest::Approx(g.x_max - g.dx).epsilon(1e-14));
  CHECK_THROWS_AS(SpatialGrid::make(1000, 2), std::invalid_argument);   // not a power of two
  CHECK_THROWS_AS(SpatialGrid::make(1024, 3), std::invalid_argument);   // odd wells
  CHECK_THROWS_AS(SpatialGrid::make(1024, 0), std::invalid_argument);
}

TEST_CASE("hermite_eval recurrence") {
  CHECK(hermite_eval(0, 0.37) == 1.0);
  CHECK(hermite_eval(1, 0.7) == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(hermite_eval(4, 1.0) == doctest::Approx(-20.0).epsilon(1e-14));  // 16 - 48 + 12
  const double y = 0.3;
  CHECK(hermite_eval(5, y) ==
        doctest::Approx(32 * std::pow(y, 5) - 160 * std::pow(y, 3) + 120 * y).epsilon(1e-13));
  CHECK_THROWS_AS(hermite_eval(-1, 0.0), std::invalid_argument);
}

TEST_CASE("oscillator eigenstates: nodes, parity, orthonormality") {
  const auto p = make_params(10.0, 0.5);  // q = 40
  const auto spec = oscillator_basis(p, 12);
  CHECK(spec.beta * spec.beta == doctest::Approx(2.0 * std::sqrt(40.0)).epsilon(1e-14));
  CHECK(spec.omega_h * spec.omega_h == doctest::Approx(4.0 * p.v0).epsilon(1e-14));
  const auto grid = SpatialGrid::make(1024, 2);

  const auto phi0 = oscillator_eigenstate(spec, 0, grid);
  CHECK(phi0.norm == 1.0);
  CHECK(field_norm(phi0) == doctest::Approx(1.0).epsilon(1e-12));

  auto count_sign_changes = [&](const WavefunctionField& f) {
    int changes = 0;
    double prev = 0.0;
    for (std::size_t i = 0; i < grid.n_points; ++i) {
      if (std::abs(grid.x_at(i)) >= 0.5 * kPi) continue;
      const double v = f.amp[i].real();
      if (std::abs(v) < 1e-12) continue;
      if (prev != 0.0 && v * prev < 0.0) ++changes;
      prev = v;
    }
    return changes;
  };
  CHECK(count_sign_changes(phi0) == 0);
  const auto phi3 = oscillator_eigenstate(spec, 3, grid);
  CHECK(count_sign_changes(phi3) == 3);

  // parity: phi_n(-x) = (-1)^n phi_n(x) pointwise
  for (int n : {3, 4}) {
    const auto f = oscillator_eigenstate(spec, n, grid);
    const double sign = (n % 2 == 0) ? 1.0 : -1.0;
    double worst = 0.0;
    for (std::size_t i = 1; i < grid.n_points; ++i) {
      const std::size_t j = grid.n_points - i;  // x_j = -x_i
      worst = std::max(worst, std::abs(f.amp[i].real() - sign * f.amp[j].real()));
    }
    CHECK(worst < 1e-9);
  }

  // Gram matrix over n, m <= 10
  std::vector<WavefunctionField> basis;
  for (int n = 0; n <= 10; ++n) basis.push_back(oscillator_eigenstate(spec, n, grid));
  for (int a = 0; a <= 10; ++a)
    for (int b = a; b <= 10; ++b) {
      const double g = inner(basis[std::size_t(a)], basis[std::size_t(b)]).real();
      if (a == b) CHECK(std::abs(g - 1.0) < 1e-10);
      else CHECK(std::abs(g) < 1e-8);
    }
}

TEST_CASE("oscillator eigenstate containment guard") {
  // shallow well: beta^2 = 2 sqrt(q) = 4, high state spills past the domain edge
  const auto p = make_params(4.0, 1.0);
  const auto spec = oscillator_basis(p, 40);
  const auto grid = SpatialGrid::make(512, 2);
  CHECK_THROWS_WITH_AS(oscillator_eigenstate(spec, 30, grid),
                       doctest::Contains("not well-contained"), std::runtime_error);
  CHECK_THROWS_AS(oscillator_eigenstate(spec, 41, grid), std::invalid_argument);  // beyond n_max
}

TEST_CASE("gaussian wavepacket moments") {
  const auto grid = SpatialGrid::make(1024, 2);
  const double kbar = 0.5;

  const auto f = gaussian_wavepacket(grid, 0.0, 0.0, 0.5, kbar);  // sigma_x = 0.5
  CHECK(f.norm == 1.0);
  double mean_x = 0.0, var_x = 0.0;
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    mean_x += grid.x_at(i) * std::norm(f.amp[i]) * grid.dx;
    var_x += sq(grid.x_at(i)) * std::norm(f.amp[i]) * grid.dx;
  }
  CHECK(std::abs(mean_x) < grid.dx);
  CHECK(var_x == doctest::Approx(0.25).epsilon(0.01));  // sigma_x^2

  // <p> through the spectral derivative
  const auto fk = gaussian_wavepacket(grid, 0.0, 1.0, 1.0, kbar);
  std::vector<Complex> a = fk.amp;
  Fft fft(grid.n_points);
  fft.forward(a);
  const double dk = 2.0 * kPi / grid.length();
  double pb = 0.0, tot = 0.0;
  for (std::size_t j = 0; j < grid.n_points; ++j) {
    const double m = (j < grid.n_points / 2) ? double(j) : double(j) - double(grid.n_points);
    pb += kbar * dk * m * std::norm(a[j]);
    tot += std::norm(a[j]);
  }
  CHECK(pb / tot == doctest::Approx(1.0).epsilon(1e-6));

  CHECK_THROWS_AS(gaussian_wavepacket(grid, 0.0, 0.0, -1.0, kbar), std::invalid_argument);
  CHECK_THROWS_WITH_AS(gaussian_wavepacket(grid, 0.0, 0.0, 0.05, kbar),
                       doctest::Contains("too wide"), std::runtime_error);  // sigma_x = 5
  CHECK_THROWS_AS(gaussian_wavepacket(grid, 7.0, 0.0, 1.0, kbar), std::invalid_argument);
}
