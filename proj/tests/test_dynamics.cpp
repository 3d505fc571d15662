// Copyright (c) 2026 the qpend authors.
// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>

#include "qpend/dynamics.hpp"
#include "qpend/revival.hpp"

using namespace qpend;

namespace {
const LatticeParams kFig2 = make_params(10.0, 0.5);
const double kTcl = kPi / std::sqrt(10.0);
}  // namespace

TEST_CASE("grid eigensolve matches the characteristic values") {
  const auto grid = SpatialGrid::make(1024, 2);
  const auto sys = grid_eigensolve(kFig2, grid, 20, 1e-12);
  const auto s = characteristic_values(40.0, 9, 1e-12);
  CHECK(std::abs(sys.energies[0] - 0.125 * s.a_n(0)) < 1e-8);
  // bound region: eight nearly degenerate doublets below the barrier top
  int below = 0;
  for (double e : sys.energies) below += (e < kFig2.v0) ? 1 : 0;
  CHECK(below == 16);
  for (int lvl = 0; lvl < 8; ++lvl) {
    CHECK(sys.well_level[std::size_t(2 * lvl)] == lvl);
    CHECK(sys.well_level[std::size_t(2 * lvl + 1)] == lvl);
  }
  // states orthonormal on the grid
  for (std::size_t a = 0; a < 12; ++a)
    for (std::size_t b = a; b < 12; ++b) {
      double g = 0.0;
      for (std::size_t i = 0; i < grid.n_points; ++i) g += sys.states[a][i] * sys.states[b][i];
      g *= grid.dx;
      CHECK(std::abs(g - (a == b ? 1.0 : 0.0)) < 1e-8);
    }
  // deterministic sign: the largest-magnitude sample is positive
  for (std::size_t k = 0; k < sys.states.size(); ++k) {
    double peak = 0.0, at = 0.0;
    for (double v : sys.states[k])
      if (std::abs(v) > peak) { peak = std::abs(v); at = v; }
    CHECK(at > 0.0);
  }
  CHECK_THROWS_AS(grid_eigensolve(kFig2, grid, 1000, 1e-10), std::invalid_argument);
  CHECK_THROWS_AS(grid_eigensolve(kFig2, SpatialGrid::make(1024, 4), 8, 1e-10),
                  std::invalid_argument);
  // a coarse grid cannot host the deep-well Fourier content
  CHECK_THROWS_WITH_AS(grid_eigensolve(kFig2, SpatialGrid::make(256, 2), 40, 1e-10),
                       doctest::Contains("spectral accuracy"), std::runtime_error);
}

TEST_CASE("asymptotic ce_n functions overlap the exact low levels") {
  const auto grid = SpatialGrid::make(1024, 2);
  const auto sys = grid_eigensolve(kFig2, grid, 8, 1e-12);
  for (int n = 0; n <= 2; ++n) {
    std::ptrdiff_t idx = -1;
    for (std::size_t k = 0; k < sys.states.size(); ++k)
      if (sys.mathieu_class[k] == 'a' && sys.class_index[k] == n) idx = std::ptrdiff_t(k);
    REQUIRE(idx >= 0);
    const auto ce = asymptotic_ce(n, 40.0, grid);
    double ov = 0.0;
    for (std::size_t i = 0; i < grid.n_points; ++i)
      ov += ce.amp[i].real() * sys.states[std::size_t(idx)][i];
    ov *= grid.dx;
    CHECK(ov * ov > 0.999);
  }
}

TEST_CASE("vanishing depth reduces to the free rotor ladder") {
  const auto p = make_params(1e-10, 0.5);
  const auto sys = grid_eigensolve(p, SpatialGrid::make(512, 2), 9, 1e-12);
  const int m_of[9] = {0, 1, 1, 2, 2, 3, 3, 4, 4};
  for (int k = 0; k < 9; ++k)
    CHECK(std::abs(sys.energies[std::size_t(k)] - 0.125 * m_of[k] * m_of[k]) < 1e-8);
}

TEST_CASE("packet expansion: completeness and preconditions") {
  const auto grid = SpatialGrid::make(1024, 2);
  const auto psi0 = gaussian_wavepacket(grid, 0.35 * 0.5 * kPi, 0.0, 1.0, 0.5);
  const auto d = expand_packet(grid_eigensolve(kFig2, grid, 96, 1e-12), psi0);
  CHECK(d.missing_probability <= 1e-8);
  CHECK(d.mean_level() == doctest::Approx(1.71).epsilon(0.02));
  CHECK_THROWS_WITH_AS(expand_packet(grid_eigensolve(kFig2, grid, 12, 1e-12), psi0),
                       doctest::Contains("miss probability"), std::runtime_error);
}

TEST_CASE("split-operator: unitarity, reversibility, conserved energy") {
  const auto grid = SpatialGrid::make(1024, 2);
  const auto psi0 = gaussian_wavepacket(grid, 0.0, 1.0, 1.0, 0.5);

  PropagationConfig pc;
  pc.dt = 1e-4;
  pc.t_max = 2.0;
  pc.record_stride = 20000;
  const auto res = split_operator_evolve(psi0, kFig2, pc);  // 2e4 steps
  CHECK(std::abs(field_norm(res.psi_final) - 1.0) < 1e-11);
  CHECK(std::abs(res.trace.values.front() - Complex{1.0, 0.0}) < 1e-12);
  for (const auto& v : res.trace.values) CHECK(std::abs(v) <= 1.0 + 1e-10);

  // forward then conjugate-backward returns the initial packet
  PropagationConfig pf;
  pf.dt = 0.005;
  pf.t_max = 2.0;
  pf.record_stride = 1 << 20;
  auto fwd = split_operator_evolve(psi0, kFig2, pf);
  for (auto& a : fwd.psi_final.amp) a = std::conj(a);
  const auto back = split_operator_evolve(fwd.psi_final, kFig2, pf);
  double dev = 0.0;
  for (std::size_t i = 0; i < grid.n_points; ++i)
    dev = std::max(dev, std::abs(std::conj(back.psi_final.amp[i]) - psi0.amp[i]));
  CHECK(dev < 1e-8);

  // <H> is conserved to the Strang accuracy budget
  PropagationConfig pe;
  pe.dt = 5e-5;
  pe.t_max = 2.0 * kTcl;
  pe.record_stride = 1 << 20;
  const auto re = split_operator_evolve(psi0, kFig2, pe);
  CHECK(std::abs(mean_energy(re.psi_final, kFig2) - mean_energy(psi0, kFig2)) <
        1e-8 * std::abs(mean_energy(psi0, kFig2)));

  PropagationConfig bad;
  bad.dt = 1.0;
  bad.t_max = 2.0;
  CHECK_THROWS_AS(split_operator_evolve(psi0, kFig2, bad), std::invalid_argument);
  WavefunctionField unnorm = psi0;
  for (auto& a : unnorm.amp) a *= 1.5;
  PropagationConfig ok;
  ok.dt = 0.005;
  ok.t_max = 1.0;
  CHECK_THROWS_AS(split_operator_evolve(unnorm, kFig2, ok), std::invalid_argument);
}

TEST_CASE("free-particle dispersion matches the closed form") {
  const auto grid = SpatialGrid::make(1024, 2);
  const auto p = make_params(1e-12, 0.5);
  const auto g0 = gaussian_wavepacket(grid, 0.0, 0.0, 1.0, 0.5);  // sigma0 = 0.25
  PropagationConfig pc;
  pc.dt = 0.002;
  pc.t_max = 0.3;
  pc.record_stride = 1 << 20;
  const auto r = split_operator_evolve(g0, p, pc);
  double x2 = 0.0;
  for (std::size_t i = 0; i < grid.n_points; ++i)
    x2 += sq(grid.x_at(i)) * std::norm(r.psi_final.amp[i]) * grid.dx;
  const double s0 = 0.25;
  const double expect = sq(s0) + sq(0.5 * 0.3 / (2.0 * s0));
  CHECK(std::abs(x2 - expect) < 1e-6);
}

TEST_CASE("eigenbasis evolution: two-state toy is exact") {
  const auto grid = SpatialGrid::make(256, 2);
  GridEigensystem toy;
  toy.grid = grid;
  toy.params = kFig2;
  toy.energies = {0.0, 1.3};
  toy.states.assign(2, std::vector<double>(grid.n_points, 0.0));
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    toy.states[0][i] = std::cos(2.0 * grid.x_at(i)) / std::sqrt(kPi);
    toy.states[1][i] = std::sin(2.0 * grid.x_at(i)) / std::sqrt(kPi);
  }
  toy.mathieu_class = {'a', 'b'};
  toy.class_index = {0, 2};
  toy.well_level = {0, 1};
  EigenDecomposition d;
  d.system = toy;
  d.amplitudes = {Complex(std::sqrt(0.5), 0.0), Complex(0.0, std::sqrt(0.5))};
  d.missing_probability = 0.0;
  const std::vector<double> times = {0.0, 0.17, 0.5, 1.9, 4.4};
  const auto tr = eigenbasis_evolve(d, times);
  for (std::size_t i = 0; i < times.size(); ++i)
    CHECK(std::norm(tr.values[i]) ==
          doctest::Approx(sq(std::cos(1.3 * times[i] / (2.0 * 0.5)))).epsilon(1e-12).scale(1e-12));
  EigenDecomposition leaky = d;
  leaky.missing_probability = 1e-3;
  CHECK_THROWS_AS(eigenbasis_evolve(leaky, times), std::runtime_error);
}

TEST_CASE("split-operator and eigenbasis evolution agree") {
  const auto grid = SpatialGrid::make(1024, 2);
  const auto psi0 = gaussian_wavepacket(grid, 0.0, 1.0, 1.0, 0.5);
  PropagationConfig pc;
  pc.dt = kTcl / 1000.0;
  pc.t_max = kTcl;
  pc.record_stride = 25;
  const auto split = split_operator_evolve(psi0, kFig2, pc);
  const auto d = expand_packet(grid_eigensolve(kFig2, grid, 64, 1e-12), psi0, 1e-6);
  const auto eig = eigenbasis_evolve(d, split.trace.times);
  double worst = 0.0;
  for (std::size_t i = 0; i < eig.times.size(); ++i)
    worst = std::max(worst,
                     std::abs(std::norm(eig.values[i]) - std::norm(split.trace.values[i])));
  CHECK(worst < 5e-6);
}

TEST_CASE("Strang splitting converges at second order") {
  const auto grid = SpatialGrid::make(512, 2);
  const auto psi0 = gaussian_wavepacket(grid, 0.0, 1.0, 1.0, 0.5);
  const auto d = expand_packet(grid_eigensolve(kFig2, grid, 48, 1e-12), psi0, 1e-6);
  const std::vector<double> tend = {3.0 * kTcl};
  const double ref = std::norm(eigenbasis_evolve(d, tend).values[0]);
  double err[2];
  int k = 0;
  for (double dt : {kTcl / 200.0, kTcl / 400.0}) {
    PropagationConfig pc;
    pc.dt = dt;
    pc.t_max = 3.0 * kTcl;
    pc.record_stride = 1 << 20;
    const auto r = split_operator_evolve(psi0, kFig2, pc);
    err[k++] = std::abs(std::norm(r.trace.values.back()) - ref);
  }
  CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("even packet at the well center beats at twice the fundamental") {
  const auto grid = SpatialGrid::make(1024, 2);
  const auto psi0 = gaussian_wavepacket(grid, 0.0, 0.0, 0.6, 0.5);  // breathing mode
  const auto d = expand_packet(grid_eigensolve(kFig2, grid, 64, 1e-12), psi0, 1e-6);
  // amplitudes on odd well levels vanish by parity
  for (std::size_t k = 0; k < d.amplitudes.size(); ++k)
    if (d.system.well_level[k] % 2 == 1) CHECK(std::abs(d.amplitudes[k]) < 1e-10);
  std::vector<double> times;
  for (double t = 0.0; t <= 6.0 * kTcl; t += kTcl / 160.0) times.push_back(t);
  const auto tr = eigenbasis_evolve(d, times);
  const auto rep = detect_periodicity(tr, 0.5);
  CHECK(rep.fundamental_period < 0.62 * kTcl);
  CHECK(rep.fundamental_period == doctest::Approx(0.5 * kTcl).epsilon(0.08));
}

TEST_CASE("model-energy substitution keeps weights and reorders by energy") {
  const auto grid = SpatialGrid::make(1024, 2);
  const auto psi0 = gaussian_wavepacket(grid, 0.35 * 0.5 * kPi, 0.0, 1.0, 0.5);
  const auto d0 = expand_packet(grid_eigensolve(kFig2, grid, 48, 1e-12), psi0, 1e-6);
  const auto model = energy_model(kFig2, EnergyLabel::quartic);
  const auto d = with_model_energies(d0, model);
  CHECK(d.amplitudes.size() == d0.amplitudes.size());
  for (std::size_t k = 0; k < d.system.energies.size(); ++k) {
    CHECK(d.system.energies[k] ==
          doctest::Approx(model.energy(double(d.system.well_level[k]))).epsilon(1e-14));
    if (k > 0) CHECK(d.system.energies[k] >= d.system.energies[k - 1]);
  }
  double w0 = 0.0, w1 = 0.0;
  for (const auto& c : d0.amplitudes) w0 += std::norm(c);
  for (const auto& c : d.amplitudes) w1 += std::norm(c);
  CHECK(w0 == doctest::Approx(w1).epsilon(1e-14));
}

TEST_CASE("density maps: normalization and revival correlation") {
  const auto grid = SpatialGrid::make(1024, 2);
  const auto psi0 = gaussian_wavepacket(grid, 0.35 * 0.5 * kPi, 0.0, 1.0, 0.5);
  PropagationConfig pc;
  pc.dt = kTcl / 100.0;
  pc.t_max = 2.0 * kTcl;
  pc.record_stride = 10;
  pc.record_snapshots = true;
  pc.snapshot_stride = 2;
  const auto res = split_operator_evolve(psi0, kFig2, pc);
  REQUIRE(res.snapshots.size() >= 3);
  const auto dm = density_map(res.snapshots, res.snapshot_times, 1);
  for (const auto& row : dm.rho) {
    double sum = 0.0;
    for (double v : row) sum += v;
    CHECK(sum * grid.dx == doctest::Approx(1.0).epsilon(1e-8));
    for (double v : row) CHECK(v >= 0.0);
  }
  // t = 0 slice peaks at the packet center
  std::size_t imax = 0;
  for (std::size_t i = 0; i < dm.rho[0].size(); ++i)
    if (dm.rho[0][i] > dm.rho[0][imax]) imax = i;
  CHECK(std::abs(dm.x[imax] - 0.35 * 0.5 * kPi) < 3.0 * grid.dx);

  // at the quartic-model revival the density pattern reproduces the t = 0 one
  const auto d = with_model_energies(
      expand_packet(grid_eigensolve(kFig2, grid, 64, 1e-12), psi0, 1e-6),
      energy_model(kFig2, EnergyLabel::quartic));
  auto field_at = [&](double t) {
    WavefunctionField f{grid, std::vector<Complex>(grid.n_points, Complex{0.0, 0.0}), 1.0};
    for (std::size_t k = 0; k < d.amplitudes.size(); ++k) {
      const Complex phase =
          d.amplitudes[k] * std::polar(1.0, -d.system.energies[k] * t / kFig2.kbar);
      for (std::size_t i = 0; i < grid.n_points; ++i)
        f.amp[i] += phase * d.system.states[k][i];
    }
    return f;
  };
  const auto f0 = field_at(0.0);
  const auto fr = field_at(0.98684 * 16.0 * kPi);
  double c01 = 0.0, c00 = 0.0, c11 = 0.0;
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double r0 = std::norm(f0.amp[i]), r1 = std::norm(fr.amp[i]);
    c01 += r0 * r1;
    c00 += r0 * r0;
    c11 += r1 * r1;
  }
  CHECK(c01 / std::sqrt(c00 * c11) > 0.9);

  CHECK_THROWS_AS(density_map(res.snapshots, std::vector<double>{0.0}, 1),
                  std::invalid_argument);
}
