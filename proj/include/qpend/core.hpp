// Copyright (c) 2026 the qpend authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpend/numerics.hpp"

// Canonical convention used throughout: H = p^2/2 - v0*cos(2x), spatial period
// pi, commutator [x, p] = i*kbar. The well-depth parameter is q = v0/kbar^2
// and energies map to Mathieu characteristic values via E = (kbar^2/2) * a.

namespace qpend {

using Complex = std::complex<double>;

struct LatticeParams {
  double v0;    // lattice depth amplitude, > 0
  double kbar;  // scaled Planck constant, > 0

  double q() const { return v0 / (kbar * kbar); }
};

inline LatticeParams make_params(double v0, double kbar) {
  if (!(v0 > 0.0)) throw std::invalid_argument("make_params: v0 must be > 0");
  if (!(kbar > 0.0)) throw std::invalid_argument("make_params: kbar must be > 0");
  return LatticeParams{v0, kbar};
}

/// Uniform periodic grid covering an even number of potential wells, one well
/// per pi. x_max is identified with x_min.
struct SpatialGrid {
  std::size_t n_points = 0;
  int n_wells = 0;
  double x_min = 0.0;
  double x_max = 0.0;
  double dx = 0.0;

  static SpatialGrid make(std::size_t n_points, int n_wells) {
    if (n_points < 8 || (n_points & (n_points - 1)) != 0)
      throw std::invalid_argument("SpatialGrid: n_points must be a power of two, >= 8");
    if (n_wells < 2 || n_wells % 2 != 0)
      throw std::invalid_argument("SpatialGrid: n_wells must be even and >= 2");
    SpatialGrid g;
    g.n_points = n_points;
    g.n_wells = n_wells;
    const double len = double(n_wells) * kPi;
    g.x_min = -0.5 * len;
    g.x_max = 0.5 * len;
    g.dx = len / double(n_points);
    return g;
  }

  double length() const { return x_max - x_min; }
  double x_at(std::size_t i) const { return x_min + dx * double(i); }

  bool operator==(const SpatialGrid&) const = default;
};

/// Complex amplitudes on a periodic grid, unit L2 norm after construction.
struct WavefunctionField {
  SpatialGrid grid;
  std::vector<Complex> amp;
  double norm = 0.0;
};

inline double field_norm(const SpatialGrid& grid, std::span<const Complex> amp) {
  double s = 0.0;
  for (const Complex& a : amp) s += std::norm(a);
  return std::sqrt(s * grid.dx);
}

inline double field_norm(const WavefunctionField& f) { return field_norm(f.grid, f.amp); }

inline void renormalize(WavefunctionField& f) {
  const double n = field_norm(f);
  if (!(n > 0.0)) throw std::runtime_error("renormalize: field has zero norm");
  const double inv = 1.0 / n;
  for (Complex& a : f.amp) a *= inv;
  f.norm = 1.0;
}

/// <bra|ket> by grid quadrature (exact for band-limited periodic data).
inline Complex inner(const WavefunctionField& bra, const WavefunctionField& ket) {
  if (bra.grid != ket.grid) throw std::invalid_argument("inner: grids differ");
  Complex s{0.0, 0.0};
  for (std::size_t i = 0; i < bra.amp.size(); ++i) s += std::conj(bra.amp[i]) * ket.amp[i];
  return s * bra.grid.dx;
}

/// Harmonic-well basis attached to one lattice site: beta^2 = 2*sqrt(q),
/// omega_h = 2*sqrt(v0).
struct OscillatorBasisSpec {
  double beta;
  double omega_h;
  int n_max;
};

inline OscillatorBasisSpec oscillator_basis(const LatticeParams& p, int n_max) {
  if (n_max < 0) throw std::invalid_argument("oscillator_basis: n_max must be >= 0");
  return OscillatorBasisSpec{std::sqrt(2.0 * std::sqrt(p.q())), 2.0 * std::sqrt(p.v0), n_max};
}

/// Physicists' Hermite polynomial H_n(y) by the three-term recurrence.
/// Plain double arithmetic; overflows for extreme n/y (n <= 200 supported).
inline double hermite_eval(int n, double y) {
  if (n < 0) throw std::invalid_argument("hermite_eval: n must be >= 0");
  double hm = 1.0;
  if (n == 0) return hm;
  double h = 2.0 * y;
  for (int k = 1; k < n; ++k) {
    const double hp = 2.0 * y * h - 2.0 * double(k) * hm;
    hm = h;
    h = hp;
  }
  return h;
}

/// Unit-normalized oscillator function u_n(y) = H_n(y) e^{-y^2/2} / sqrt(2^n n! sqrt(pi)).
/// The normalized recurrence avoids factorial overflow at any n.
inline double oscillator_u(int n, double y) {
  double um = std::pow(kPi, -0.25) * std::exp(-0.5 * y * y);
  if (n == 0) return um;
  double u = std::sqrt(2.0) * y * um;
  for (int k = 1; k < n; ++k) {
    const double up =
        std::sqrt(2.0 / double(k + 1)) * y * u - std::sqrt(double(k) / double(k + 1)) * um;
    um = u;
    u = up;
  }
  return u;
}

/// Oscillator eigenstate phi_n centered on the well at x = 0, sampled on the
/// grid and renormalized there. Contained means the tail where the periodic
/// images meet (half a domain length from the center) is below 1e-8 of the
/// peak amplitude.
inline WavefunctionField oscillator_eigenstate(const OscillatorBasisSpec& spec, int n,
                                               const SpatialGrid& grid) {
  if (n < 0 || n > spec.n_max)
    throw std::invalid_argument("oscillator_eigenstate: n out of basis range");
  WavefunctionField f{grid, std::vector<Complex>(grid.n_points), 0.0};
  const double root_beta = std::sqrt(spec.beta);
  double peak = 0.0;
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double v = root_beta * oscillator_u(n, spec.beta * grid.x_at(i));
    f.amp[i] = Complex(v, 0.0);
    peak = std::max(peak, std::abs(v));
  }
  const double tail = std::abs(root_beta * oscillator_u(n, spec.beta * 0.5 * grid.length()));
  if (!(peak > 0.0) || tail > 1e-8 * peak)
    throw std::runtime_error("oscillator_eigenstate: state not well-contained, tail fraction " +
                             format_sci(peak > 0.0 ? tail / peak : 1.0));
  renormalize(f);
  return f;
}

/// Minimum-uncertainty packet ~ exp(-(x-x0)^2/(4 sigma_x^2)) exp(i p0 x / kbar)
/// with sigma_x = kbar / (2 dp), normalized on the grid.
inline WavefunctionField gaussian_wavepacket(const SpatialGrid& grid, double x0, double p0,
                                             double dp, double kbar) {
  if (!(dp > 0.0)) throw std::invalid_argument("gaussian_wavepacket: dp must be > 0");
  if (!(kbar > 0.0)) throw std::invalid_argument("gaussian_wavepacket: kbar must be > 0");
  if (!(x0 > grid.x_min && x0 < grid.x_max))
    throw std::invalid_argument("gaussian_wavepacket: x0 outside the domain");
  const double sigma = kbar / (2.0 * dp);
  // overlap of the packet with its nearest periodic image, <g(x)|g(x - L)>
  const double image = std::exp(-sq(grid.length()) / (8.0 * sq(sigma)));
  if (image > 1e-8)
    throw std::runtime_error("gaussian_wavepacket: packet too wide for domain, image overlap " +
                             format_sci(image));
  WavefunctionField f{grid, std::vector<Complex>(grid.n_points), 0.0};
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double x = grid.x_at(i);
    const double envelope = std::exp(-sq(x - x0) / (4.0 * sq(sigma)));
    f.amp[i] = std::polar(envelope, p0 * x / kbar);
  }
  renormalize(f);
  return f;
}

}  // namespace qpend
