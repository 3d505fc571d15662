// Copyright (c) 2026 the qpend authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpend/core.hpp"
#include "qpend/mathieu.hpp"
#include "qpend/numerics.hpp"
#include "qpend/perturbation.hpp"

namespace qpend {

struct PropagationConfig {
  double dt = 0.0;
  double t_max = 0.0;
  int record_stride = 1;          // steps between autocorrelation samples
  bool record_snapshots = false;  // keep downsampled wavefunction snapshots
  int snapshot_stride = 10;       // records between snapshots
};

inline void validate(const PropagationConfig& c, const LatticeParams& p) {
  if (!(c.dt > 0.0)) throw std::invalid_argument("PropagationConfig: dt must be > 0");
  if (!(c.t_max >= c.dt)) throw std::invalid_argument("PropagationConfig: t_max must be >= dt");
  if (c.record_stride < 1) throw std::invalid_argument("PropagationConfig: record_stride >= 1");
  if (c.snapshot_stride < 1) throw std::invalid_argument("PropagationConfig: snapshot_stride >= 1");
  // phase advanced by the potential factor in one step must stay well inside a radian
  if (c.dt * p.v0 / p.kbar >= 0.5)
    throw std::invalid_argument("PropagationConfig: dt too large, potential phase per step >= 0.5 rad");
  if (c.t_max / c.dt > 2e9) throw std::invalid_argument("PropagationConfig: too many steps");
}

/// Time series of A(t) = <psi(0)|psi(t)>.
struct AutocorrelationTrace {
  std::vector<double> times;
  std::vector<Complex> values;
  LatticeParams params{1.0, 1.0};
};

/// Exact eigenpairs of H = -(kbar^2/2) d^2/dx^2 - v0 cos(2x) on the periodic
/// two-well domain, solved sector-by-sector in the cosine/sine Fourier bases
/// (states come out parity-pure even when a doublet is degenerate to
/// round-off). States are real on the grid, unit grid norm, phase fixed by
/// making the largest-magnitude sample positive.
struct GridEigensystem {
  SpatialGrid grid;
  LatticeParams params{1.0, 1.0};
  std::vector<double> energies;              // ascending
  std::vector<std::vector<double>> states;   // states[k][i] on the grid
  std::vector<char> mathieu_class;           // 'a' cosine-like, 'b' sine-like
  std::vector<int> class_index;              // n in a_n or b_n
  std::vector<int> well_level;               // oscillator-like level of the deep-well doublet
};

inline GridEigensystem grid_eigensolve(const LatticeParams& p, const SpatialGrid& grid,
                                       int n_states, double tol = 1e-10) {
  if (n_states < 1) throw std::invalid_argument("grid_eigensolve: n_states must be >= 1");
  if (std::size_t(n_states) > grid.n_points / 4)
    throw std::invalid_argument("grid_eigensolve: n_states must not exceed n_points/4");
  if (grid.n_wells != 2)
    throw std::invalid_argument("grid_eigensolve: two-well domain required (n_wells == 2)");

  using detail::MathieuSector;
  const double q = p.q();
  const double e_scale = 0.5 * p.kbar * p.kbar;

  struct Raw {
    MathieuSector sector;
    detail::SectorResult res;
  };
  std::vector<Raw> raw;
  // every sector must reach past the merged cut so no low state can be missed
  std::size_t per_sector = std::size_t(n_states) / 2 + 4;
  for (;;) {
    const std::size_t m0 = detail::initial_cutoff(q, int(per_sector));
    raw.clear();
    for (MathieuSector s : {MathieuSector::a_even, MathieuSector::a_odd, MathieuSector::b_odd,
                            MathieuSector::b_even})
      raw.push_back({s, detail::solve_sector(s, q, per_sector, tol, true, m0)});
    double sector_top = std::numeric_limits<double>::infinity();
    for (const Raw& r : raw) sector_top = std::min(sector_top, r.res.values.back());
    std::vector<double> all;
    for (const Raw& r : raw) all.insert(all.end(), r.res.values.begin(), r.res.values.end());
    std::nth_element(all.begin(), all.begin() + (n_states - 1), all.end());
    if (all[std::size_t(n_states - 1)] <= sector_top) break;
    per_sector *= 2;
  }

  // highest Fourier wavenumber used must stay below the grid Nyquist limit
  for (const Raw& r : raw) {
    const std::size_t kmax = 2 * r.res.cutoff + 1;
    if (kmax >= grid.n_points / 2)
      throw std::runtime_error(
          "grid_eigensolve: requested states beyond spectral accuracy of the grid (needs "
          "wavenumber " + std::to_string(kmax) + ", Nyquist " +
          std::to_string(grid.n_points / 2) + ")");
  }

  struct Entry {
    double energy;
    char cls;
    int class_index;
    int well_level;
    const std::vector<double>* coeffs;
    MathieuSector sector;
  };
  std::vector<Entry> entries;
  for (const Raw& r : raw) {
    for (std::size_t j = 0; j < r.res.values.size(); ++j) {
      Entry e;
      e.energy = e_scale * r.res.values[j];
      e.coeffs = &r.res.vectors[j];
      e.sector = r.sector;
      switch (r.sector) {
        case MathieuSector::a_even: e.cls = 'a'; e.class_index = int(2 * j); break;
        case MathieuSector::a_odd:  e.cls = 'a'; e.class_index = int(2 * j + 1); break;
        case MathieuSector::b_odd:  e.cls = 'b'; e.class_index = int(2 * j + 1); break;
        default:                    e.cls = 'b'; e.class_index = int(2 * j + 2); break;
      }
      e.well_level = (e.cls == 'a') ? e.class_index : e.class_index - 1;
      entries.push_back(e);
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const Entry& x, const Entry& y) { return x.energy < y.energy; });
  entries.resize(std::size_t(n_states));

  GridEigensystem sys;
  sys.grid = grid;
  sys.params = p;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * kPi);
  const double inv_sqrt_pi = 1.0 / std::sqrt(kPi);
  for (const Entry& e : entries) {
    std::vector<double> psi(grid.n_points, 0.0);
    const auto& c = *e.coeffs;
    for (std::size_t i = 0; i < grid.n_points; ++i) {
      const double x = grid.x_at(i);
      double v = 0.0;
      switch (e.sector) {
        case MathieuSector::a_even:
          v = c[0] * inv_sqrt_2pi;
          for (std::size_t m = 1; m < c.size(); ++m)
            v += c[m] * inv_sqrt_pi * std::cos(2.0 * double(m) * x);
          break;
        case MathieuSector::a_odd:
          for (std::size_t m = 0; m < c.size(); ++m)
            v += c[m] * inv_sqrt_pi * std::sin((2.0 * double(m) + 1.0) * x);
          break;
        case MathieuSector::b_odd:
          for (std::size_t m = 0; m < c.size(); ++m)
            v += c[m] * inv_sqrt_pi * std::cos((2.0 * double(m) + 1.0) * x);
          break;
        case MathieuSector::b_even:
          for (std::size_t m = 0; m < c.size(); ++m)
            v += c[m] * inv_sqrt_pi * std::sin((2.0 * double(m) + 2.0) * x);
          break;
      }
      psi[i] = v;
    }
    // unit grid norm and a deterministic sign
    double s = 0.0, peak = 0.0;
    std::size_t ipeak = 0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      s += psi[i] * psi[i];
      if (std::abs(psi[i]) > peak) { peak = std::abs(psi[i]); ipeak = i; }
    }
    const double scale = ((psi[ipeak] < 0.0) ? -1.0 : 1.0) / std::sqrt(s * grid.dx);
    for (double& v : psi) v *= scale;

    sys.energies.push_back(e.energy);
    sys.states.push_back(std::move(psi));
    sys.mathieu_class.push_back(e.cls);
    sys.class_index.push_back(e.class_index);
    sys.well_level.push_back(e.well_level);
  }
  return sys;
}

/// Eigensystem made of single-well oscillator states with energies supplied by
/// a closed-form EnergyModel; drives the model-dynamics pipelines.
inline GridEigensystem oscillator_eigensystem(const LatticeParams& p, const EnergyModel& model,
                                              const SpatialGrid& grid, int n_states) {
  if (n_states < 1) throw std::invalid_argument("oscillator_eigensystem: n_states must be >= 1");
  GridEigensystem sys;
  sys.grid = grid;
  sys.params = p;
  const OscillatorBasisSpec spec = oscillator_basis(p, n_states - 1);
  for (int n = 0; n < n_states; ++n) {
    WavefunctionField f = oscillator_eigenstate(spec, n, grid);
    std::vector<double> psi(grid.n_points);
    for (std::size_t i = 0; i < psi.size(); ++i) psi[i] = f.amp[i].real();
    sys.energies.push_back(model.energy(double(n)));
    sys.states.push_back(std::move(psi));
    sys.mathieu_class.push_back('a');
    sys.class_index.push_back(n);
    sys.well_level.push_back(n);
  }
  return sys;
}

/// Expansion of a packet over an eigensystem: amplitudes c_k = <state_k|psi0>.
struct EigenDecomposition {
  GridEigensystem system;
  std::vector<Complex> amplitudes;
  double missing_probability = 0.0;

  double mean_level() const {
    double m = 0.0;
    for (std::size_t k = 0; k < amplitudes.size(); ++k)
      m += std::norm(amplitudes[k]) * double(system.well_level[k]);
    return m;
  }
};

/// Same decomposition with level energies replaced by a closed-form model:
/// the packet's populations evolve under the model's spectrum (both members
/// of a deep-well doublet get the level energy). This is how the model
/// time-scale structure is isolated for packets too wide to expand in
/// well-contained oscillator states alone.
inline EigenDecomposition with_model_energies(EigenDecomposition d, const EnergyModel& model) {
  for (std::size_t k = 0; k < d.system.energies.size(); ++k)
    d.system.energies[k] = model.energy(double(d.system.well_level[k]));
  // ascending-energy order is part of the eigensystem contract
  std::vector<std::size_t> order(d.system.energies.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return d.system.energies[a] < d.system.energies[b];
  });
  EigenDecomposition out;
  out.missing_probability = d.missing_probability;
  out.system.grid = d.system.grid;
  out.system.params = d.system.params;
  for (std::size_t k : order) {
    out.system.energies.push_back(d.system.energies[k]);
    out.system.states.push_back(std::move(d.system.states[k]));
    out.system.mathieu_class.push_back(d.system.mathieu_class[k]);
    out.system.class_index.push_back(d.system.class_index[k]);
    out.system.well_level.push_back(d.system.well_level[k]);
    out.amplitudes.push_back(d.amplitudes[k]);
  }
  return out;
}

inline EigenDecomposition expand_packet(GridEigensystem system, const WavefunctionField& psi0,
                                        double completeness_tol = 1e-8) {
  if (psi0.grid != system.grid) throw std::invalid_argument("expand_packet: grids differ");
  EigenDecomposition d;
  d.amplitudes.resize(system.states.size());
  double total = 0.0;
  for (std::size_t k = 0; k < system.states.size(); ++k) {
    Complex c{0.0, 0.0};
    for (std::size_t i = 0; i < psi0.amp.size(); ++i) c += system.states[k][i] * psi0.amp[i];
    c *= system.grid.dx;
    d.amplitudes[k] = c;
    total += std::norm(c);
  }
  d.missing_probability = 1.0 - total;
  d.system = std::move(system);
  if (d.missing_probability > completeness_tol)
    throw std::runtime_error("expand_packet: retained states miss probability " +
                             format_sci(d.missing_probability));
  return d;
}

/// Split-operator run results: the autocorrelation trace, the final field, and
/// (optionally) downsampled snapshots for density maps.
struct EvolveResult {
  AutocorrelationTrace trace;
  WavefunctionField psi_final;
  std::vector<double> snapshot_times;
  std::vector<WavefunctionField> snapshots;
};

/// Strang-split propagation exp(-iV dt/2kbar) exp(-iT dt/kbar) exp(-iV dt/2kbar)
/// per step, kinetic factor applied in momentum space. Unitary to round-off;
/// aborts if the norm drifts beyond 1e-8.
inline EvolveResult split_operator_evolve(const WavefunctionField& psi0, const LatticeParams& p,
                                          const PropagationConfig& config) {
  validate(config, p);
  if (std::abs(field_norm(psi0) - 1.0) > 1e-8)
    throw std::invalid_argument("split_operator_evolve: psi0 must be normalized");

  const SpatialGrid& grid = psi0.grid;
  const std::size_t n = grid.n_points;
  const Fft fft(n);

  std::vector<Complex> phase_v(n), phase_t(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double v = -p.v0 * std::cos(2.0 * grid.x_at(i));
    phase_v[i] = std::polar(1.0, -v * config.dt / (2.0 * p.kbar));
  }
  const double dk = 2.0 * kPi / grid.length();
  for (std::size_t j = 0; j < n; ++j) {
    const double m = (j < n / 2) ? double(j) : double(j) - double(n);
    const double k = dk * m;
    phase_t[j] = std::polar(1.0, -p.kbar * k * k * config.dt / 2.0);
  }

  const long n_steps = std::lround(config.t_max / config.dt);
  EvolveResult out;
  out.trace.params = p;
  WavefunctionField psi = psi0;

  long record_count = 0;
  auto record = [&](long step) {
    const double t = double(step) * config.dt;
    out.trace.times.push_back(t);
    out.trace.values.push_back(inner(psi0, psi));
    const double drift = std::abs(field_norm(psi) - 1.0);
    if (drift > 1e-8)
      throw std::runtime_error("split_operator_evolve: norm drift " + format_sci(drift));
    if (config.record_snapshots && record_count % config.snapshot_stride == 0) {
      out.snapshot_times.push_back(t);
      out.snapshots.push_back(psi);
    }
    ++record_count;
  };

  record(0);
  std::vector<Complex>& a = psi.amp;
  for (long step = 1; step <= n_steps; ++step) {
    for (std::size_t i = 0; i < n; ++i) a[i] *= phase_v[i];
    fft.forward(a);
    for (std::size_t i = 0; i < n; ++i) a[i] *= phase_t[i];
    fft.inverse(a);
    for (std::size_t i = 0; i < n; ++i) a[i] *= phase_v[i];
    if (step % config.record_stride == 0 || step == n_steps) record(step);
  }
  psi.norm = field_norm(psi);
  out.psi_final = std::move(psi);
  return out;
}

/// Phase evolution in the eigenbasis, exact at arbitrary times:
/// A(t) = sum_k |c_k|^2 exp(-i (E_k - E_0) t / kbar). The overall phase
/// exp(-i E_0 t / kbar) is factored out; |A|^2, the observable, is unaffected.
inline AutocorrelationTrace eigenbasis_evolve(const EigenDecomposition& d,
                                              std::span<const double> times) {
  if (d.missing_probability > 1e-6)
    throw std::runtime_error("eigenbasis_evolve: packet not contained in retained states, missing " +
                             format_sci(d.missing_probability));
  if (d.system.energies.empty()) throw std::invalid_argument("eigenbasis_evolve: empty system");
  AutocorrelationTrace tr;
  tr.params = d.system.params;
  tr.times.assign(times.begin(), times.end());
  tr.values.resize(times.size());
  const double e0 = d.system.energies.front();
  std::vector<double> w(d.amplitudes.size());
  for (std::size_t k = 0; k < w.size(); ++k) w[k] = std::norm(d.amplitudes[k]);
  for (std::size_t it = 0; it < tr.times.size(); ++it) {
    Complex acc{0.0, 0.0};
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (w[k] == 0.0) continue;
      acc += w[k] * std::polar(1.0, -(d.system.energies[k] - e0) * tr.times[it] / tr.params.kbar);
    }
    tr.values[it] = acc;
  }
  return tr;
}

/// Spatiotemporal probability density table from field snapshots sharing one
/// grid, optionally downsampled in x.
struct DensityMap {
  std::vector<double> times;
  std::vector<double> x;
  std::vector<std::vector<double>> rho;  // rho[it][ix]
};

inline DensityMap density_map(std::span<const WavefunctionField> snapshots,
                              std::span<const double> times, int stride_x = 1) {
  if (snapshots.size() != times.size())
    throw std::invalid_argument("density_map: snapshot/time count mismatch");
  if (stride_x < 1) throw std::invalid_argument("density_map: stride must be >= 1");
  DensityMap m;
  if (snapshots.empty()) return m;
  const SpatialGrid& grid = snapshots.front().grid;
  for (const auto& s : snapshots)
    if (s.grid != grid) throw std::invalid_argument("density_map: snapshots on different grids");
  m.times.assign(times.begin(), times.end());
  for (std::size_t i = 0; i < grid.n_points; i += std::size_t(stride_x))
    m.x.push_back(grid.x_at(i));
  for (const auto& s : snapshots) {
    std::vector<double> row;
    row.reserve(m.x.size());
    for (std::size_t i = 0; i < grid.n_points; i += std::size_t(stride_x))
      row.push_back(std::norm(s.amp[i]));
    m.rho.push_back(std::move(row));
  }
  return m;
}

/// Mean energy <psi|H|psi> via the spectral kinetic term (conserved-quantity
/// checks in tests).
inline double mean_energy(const WavefunctionField& psi, const LatticeParams& p) {
  const std::size_t n = psi.grid.n_points;
  std::vector<Complex> a = psi.amp;
  const Fft fft(n);
  fft.forward(a);
  const double dk = 2.0 * kPi / psi.grid.length();
  double kin = 0.0, tot = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double m = (j < n / 2) ? double(j) : double(j) - double(n);
    const double k = dk * m;
    kin += 0.5 * p.kbar * p.kbar * k * k * std::norm(a[j]);
    tot += std::norm(a[j]);
  }
  kin /= tot;
  double pot = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    pot += -p.v0 * std::cos(2.0 * psi.grid.x_at(i)) * std::norm(psi.amp[i]) * psi.grid.dx;
  return kin + pot;
}

}  // namespace qpend
