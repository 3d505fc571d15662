// Copyright (c) 2026 the qpend authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpend/core.hpp"
#include "qpend/numerics.hpp"

namespace qpend {

namespace detail {

// The periodic eigenproblem splits into four symmetry sectors, each a real
// symmetric tridiagonal matrix in a cosine/sine Fourier basis on the two-well
// domain. Eigenvalues are in Mathieu units (a = 2E/kbar^2). Off-diagonal signs
// follow the physical potential -v0*cos(2x) so that eigenvectors are usable
// directly as basis coefficients; the signs do not affect eigenvalues.
enum class MathieuSector {
  a_even,  // basis {1, cos 2x, cos 4x, ...}            -> a_0, a_2, a_4, ...
  a_odd,   // basis {sin x, sin 3x, ...}                -> a_1, a_3, ...
  b_odd,   // basis {cos x, cos 3x, ...}                -> b_1, b_3, ...
  b_even   // basis {sin 2x, sin 4x, ...}               -> b_2, b_4, ...
};

inline void build_sector_matrix(MathieuSector s, double q, std::size_t m, std::vector<double>& d,
                                std::vector<double>& e) {
  d.resize(m);
  e.assign(m > 0 ? m - 1 : 0, -q);
  switch (s) {
    case MathieuSector::a_even:
      for (std::size_t j = 0; j < m; ++j) d[j] = sq(2.0 * double(j));
      if (m > 1) e[0] = -std::sqrt(2.0) * q;
      break;
    case MathieuSector::a_odd:
      for (std::size_t j = 0; j < m; ++j) d[j] = sq(2.0 * double(j) + 1.0);
      d[0] += q;
      break;
    case MathieuSector::b_odd:
      for (std::size_t j = 0; j < m; ++j) d[j] = sq(2.0 * double(j) + 1.0);
      d[0] -= q;
      break;
    case MathieuSector::b_even:
      for (std::size_t j = 0; j < m; ++j) d[j] = sq(2.0 * double(j) + 2.0);
      break;
  }
}

struct SectorResult {
  std::vector<double> values;
  std::vector<std::vector<double>> vectors;  // Fourier coefficients, empty unless requested
  std::size_t cutoff = 0;
  double residual = 0.0;
};

/// Solve one sector for its lowest `count` eigenvalues, doubling the Fourier
/// cutoff until the requested eigenvalues move by less than tol (floored at
/// the round-off scale of the matrix).
inline SectorResult solve_sector(MathieuSector s, double q, std::size_t count, double tol,
                                 bool want_vectors, std::size_t m_init,
                                 std::size_t m_cap = 512) {
  if (count == 0) return {{}, {}, m_init, 0.0};
  std::size_t m = std::max(m_init, count + 2);
  if (2 * m > m_cap)
    throw std::runtime_error("mathieu sector solve: not converged, initial cutoff " +
                             std::to_string(m) + " already near the cap " + std::to_string(m_cap));
  std::vector<double> d, e;

  auto values_at = [&](std::size_t size) {
    build_sector_matrix(s, q, size, d, e);
    auto eig = symtri_eigen(d, e, false);
    eig.values.resize(count);
    return eig.values;
  };

  std::vector<double> prev = values_at(m);
  double shift = 0.0;
  for (;;) {
    const std::size_t m2 = 2 * m;
    if (m2 > m_cap)
      throw std::runtime_error("mathieu sector solve: not converged at cutoff " +
                               std::to_string(m_cap) + ", residual " + std::to_string(shift));
    std::vector<double> next = values_at(m2);
    shift = 0.0;
    for (std::size_t i = 0; i < count; ++i) shift = std::max(shift, std::abs(next[i] - prev[i]));
    const double scale = std::max(1.0, std::abs(next[count - 1]));
    const double tol_eff = std::max(tol, 64.0 * std::numeric_limits<double>::epsilon() * scale);
    if (shift < tol_eff) {
      SectorResult out;
      out.values = std::move(next);
      out.cutoff = m2;
      out.residual = shift;
      if (want_vectors) {
        build_sector_matrix(s, q, m2, d, e);
        auto eig = symtri_eigen(d, e, true);
        out.vectors.assign(eig.vectors.begin(), eig.vectors.begin() + count);
      }
      return out;
    }
    prev = std::move(next);
    m = m2;
  }
}

inline std::size_t initial_cutoff(double q, int n_max) {
  // classically bound states carry Fourier components up to momentum ~ 2 sqrt(q)
  const double need = double(n_max) + std::ceil(4.0 * std::sqrt(std::max(q, 0.0)));
  return std::max<std::size_t>(32, std::size_t(need) + 1);
}

}  // namespace detail

/// Converged characteristic values a_0..a_nmax and b_1..b_nmax at fixed q.
struct MathieuSpectrum {
  double q = 0.0;
  std::vector<double> a;  // a[n] = a_n, n = 0..n_max
  std::vector<double> b;  // b[n-1] = b_n, n = 1..n_max
  std::size_t cutoff = 0;
  double residual = 0.0;

  int n_max() const { return int(a.size()) - 1; }
  double a_n(int n) const {
    if (n < 0 || n >= int(a.size())) throw std::invalid_argument("MathieuSpectrum: a_n out of range");
    return a[std::size_t(n)];
  }
  double b_n(int n) const {
    if (n < 1 || n > int(b.size())) throw std::invalid_argument("MathieuSpectrum: b_n out of range");
    return b[std::size_t(n - 1)];
  }
};

inline MathieuSpectrum characteristic_values(double q, int n_max, double tol = 1e-10) {
  if (n_max < 1) throw std::invalid_argument("characteristic_values: n_max must be >= 1");
  if (q < 0.0) throw std::invalid_argument("characteristic_values: q must be >= 0");
  using detail::MathieuSector;
  const std::size_t m0 = detail::initial_cutoff(q, n_max);

  const std::size_t n_a_even = std::size_t(n_max / 2) + 1;        // a_0, a_2, ...
  const std::size_t n_a_odd = std::size_t((n_max + 1) / 2);       // a_1, a_3, ...
  const std::size_t n_b_odd = std::size_t((n_max + 1) / 2);       // b_1, b_3, ...
  const std::size_t n_b_even = std::size_t(n_max / 2);            // b_2, b_4, ...

  auto ae = detail::solve_sector(MathieuSector::a_even, q, n_a_even, tol, false, m0);
  auto ao = detail::solve_sector(MathieuSector::a_odd, q, n_a_odd, tol, false, m0);
  auto bo = detail::solve_sector(MathieuSector::b_odd, q, n_b_odd, tol, false, m0);
  auto be = detail::solve_sector(MathieuSector::b_even, q, n_b_even, tol, false, m0);

  MathieuSpectrum s;
  s.q = q;
  s.a.resize(std::size_t(n_max) + 1);
  s.b.resize(std::size_t(n_max));
  for (int n = 0; n <= n_max; ++n)
    s.a[std::size_t(n)] = (n % 2 == 0) ? ae.values[std::size_t(n / 2)]
                                       : ao.values[std::size_t((n - 1) / 2)];
  for (int n = 1; n <= n_max; ++n)
    s.b[std::size_t(n - 1)] = (n % 2 == 1) ? bo.values[std::size_t((n - 1) / 2)]
                                           : be.values[std::size_t(n / 2 - 1)];
  s.cutoff = std::max({ae.cutoff, ao.cutoff, bo.cutoff, be.cutoff});
  s.residual = std::max({ae.residual, ao.residual, bo.residual, be.residual});
  return s;
}

/// Band structure over quasimomentum nu in [0, 1]: eigenvalues (Mathieu units)
/// of the tridiagonal matrix with diagonal (2m + nu)^2, m in [-M, M], and
/// off-diagonal q. Band edges at nu = 0 and nu = 1 coincide with the
/// characteristic values.
struct BlochBands {
  double q = 0.0;
  std::vector<double> nu;
  std::vector<std::vector<double>> energies;  // energies[i]: lowest n_bands values at nu[i]
};

inline BlochBands band_structure(double q, std::span<const double> nu_grid, int n_bands,
                                 double tol = 1e-10) {
  if (n_bands < 1) throw std::invalid_argument("band_structure: n_bands must be >= 1");
  if (q < 0.0) throw std::invalid_argument("band_structure: q must be >= 0");
  for (double nu : nu_grid)
    if (!(nu >= 0.0 && nu <= 1.0))
      throw std::invalid_argument("band_structure: nu values must lie in [0, 1]");

  BlochBands bb;
  bb.q = q;
  bb.nu.assign(nu_grid.begin(), nu_grid.end());
  bb.energies.resize(nu_grid.size());

  const std::size_t count = std::size_t(n_bands);
  for (std::size_t i = 0; i < nu_grid.size(); ++i) {
    const double nu = nu_grid[i];
    std::size_t m_half = detail::initial_cutoff(q, n_bands) / 2 + 2;
    std::vector<double> prev;
    double shift = 0.0;
    for (;;) {
      const std::size_t dim = 2 * m_half + 1;
      std::vector<double> d(dim), e(dim - 1, q);
      for (std::size_t j = 0; j < dim; ++j) {
        const double m = double(j) - double(m_half);
        d[j] = sq(2.0 * m + nu);
      }
      auto eig = symtri_eigen(std::move(d), std::move(e), false);
      eig.values.resize(count);
      if (!prev.empty()) {
        shift = 0.0;
        for (std::size_t k = 0; k < count; ++k)
          shift = std::max(shift, std::abs(eig.values[k] - prev[k]));
        const double scale = std::max(1.0, std::abs(eig.values[count - 1]));
        const double tol_eff =
            std::max(tol, 64.0 * std::numeric_limits<double>::epsilon() * scale);
        if (shift < tol_eff) {
          bb.energies[i] = std::move(eig.values);
          break;
        }
      }
      prev = std::move(eig.values);
      if (2 * m_half > 512)
        throw std::runtime_error("band_structure: not converged at cutoff 512, residual " +
                                 std::to_string(shift));
      m_half *= 2;
    }
  }
  return bb;
}

/// Small-q characteristic value, valid for n >= 2 (real n accepted):
/// n^2 + q^2/(2(n^2-1)) + (5n^2+7) q^4 / (32 (n^2-1)^3 (n^2-4)).
inline double asymptotic_a_small_q(double n, double q) {
  const double n2 = n * n;
  if (std::abs(n2 - 1.0) < 1e-12 || std::abs(n2 - 4.0) < 1e-12)
    throw std::invalid_argument("asymptotic_a_small_q: zero denominator at n^2 = 1 or 4");
  if (n < 2.0) throw std::invalid_argument("asymptotic_a_small_q: requires n >= 2");
  const double t1 = q * q / (2.0 * (n2 - 1.0));
  const double t2 = (5.0 * n2 + 7.0) * std::pow(q, 4) / (32.0 * std::pow(n2 - 1.0, 3) * (n2 - 4.0));
  return n2 + t1 + t2;
}

/// Deep-well characteristic value with s = 2n+1:
/// -2q + 2 s sqrt(q) - (s^2+1)/8 - (s^3+3s)/(2^7 sqrt(q)).
inline double asymptotic_a_large_q(int n, double q) {
  if (n < 0) throw std::invalid_argument("asymptotic_a_large_q: n must be >= 0");
  if (!(q > 0.0)) throw std::invalid_argument("asymptotic_a_large_q: q must be > 0");
  const double s = 2.0 * double(n) + 1.0;
  const double rq = std::sqrt(q);
  return -2.0 * q + 2.0 * s * rq - (s * s + 1.0) / 8.0 - (s * s * s + 3.0 * s) / (128.0 * rq);
}

/// Magnitude of the first term beyond asymptotic_a_large_q:
/// (5 s^4 + 34 s^2 + 9) / (2^12 q).
inline double asymptotic_a_large_q_next_term(int n, double q) {
  if (n < 0) throw std::invalid_argument("asymptotic_a_large_q_next_term: n must be >= 0");
  if (!(q > 0.0)) throw std::invalid_argument("asymptotic_a_large_q_next_term: q must be > 0");
  const double s = 2.0 * double(n) + 1.0;
  return (5.0 * std::pow(s, 4) + 34.0 * s * s + 9.0) / (4096.0 * q);
}

/// Deep-well band width b_{n+1} - a_n:
/// 2^{4n+5} sqrt(2/pi) q^{n/2 + 3/4} exp(-4 sqrt(q)) / n!, evaluated in log space.
inline double band_width_asymptotic(int n, double q) {
  if (n < 0) throw std::invalid_argument("band_width_asymptotic: n must be >= 0");
  if (!(q > 0.0)) throw std::invalid_argument("band_width_asymptotic: q must be > 0");
  const double ln = (4.0 * n + 5.0) * std::log(2.0) + 0.5 * std::log(2.0 / kPi) +
                    (0.5 * n + 0.75) * std::log(q) - 4.0 * std::sqrt(q) - log_factorial(n);
  return std::exp(ln);
}

/// Hopping matrix element between adjacent sites in recoil units:
/// J/E_R = (4/sqrt(pi)) v^{3/4} exp(-2 sqrt(v)) with v = V0/E_R.
inline double tunneling_J_over_recoil(double depth_over_recoil) {
  if (!(depth_over_recoil > 0.0))
    throw std::invalid_argument("tunneling_J_over_recoil: depth must be > 0");
  const double v = depth_over_recoil;
  return (4.0 / std::sqrt(kPi)) * std::pow(v, 0.75) * std::exp(-2.0 * std::sqrt(v));
}

/// In scaled units a single-photon recoil energy equals kbar^2/8, so the
/// depth-to-recoil ratio for given q = v0/kbar^2 is 8q.
inline double depth_over_recoil_from_q(double q) {
  if (!(q > 0.0)) throw std::invalid_argument("depth_over_recoil_from_q: q must be > 0");
  return 8.0 * q;
}

namespace detail {
/// Weber-like envelope D_k(alpha) = 2^{-k/2} exp(-alpha^2/4) H_k(alpha/sqrt 2); zero for k < 0.
inline double parabolic_d(int k, double alpha) {
  if (k < 0) return 0.0;
  return std::pow(2.0, -0.5 * double(k)) * std::exp(-0.25 * alpha * alpha) *
         hermite_eval(k, alpha / std::sqrt(2.0));
}
}  // namespace detail

/// Asymptotic even Mathieu function ce_n through order 1/q, evaluated on the
/// grid (the Mathieu variable v maps to the grid as v = x + pi/2, so
/// alpha = 2 q^{1/4} cos v = -2 q^{1/4} sin x). The closed-form normalization
/// is applied first, then the samples are renormalized on the grid.
inline WavefunctionField asymptotic_ce(int n, double q, const SpatialGrid& grid) {
  if (n < 0) throw std::invalid_argument("asymptotic_ce: n must be >= 0");
  if (!(q > 0.0)) throw std::invalid_argument("asymptotic_ce: q must be > 0");
  const double rq = std::sqrt(q);
  const double nd = double(n);

  // offset coefficients of the 1/sqrt(q) and 1/q corrections
  const double c4m_half = (std::pow(nd, 4) - 6.0 * std::pow(nd, 3) + 11.0 * nd * nd - 6.0 * nd);
  const double c2m_half = (4.0 * nd - 4.0 * nd * nd);
  const double c8m = (std::pow(nd, 8) - 28.0 * std::pow(nd, 7) + 322.0 * std::pow(nd, 6) -
                      1960.0 * std::pow(nd, 5) + 6769.0 * std::pow(nd, 4) -
                      13132.0 * std::pow(nd, 3) + 13068.0 * nd * nd - 5040.0 * nd) / 8.0;
  const double c6m = -(std::pow(nd, 6) - 15.0 * std::pow(nd, 5) + 85.0 * std::pow(nd, 4) -
                       225.0 * std::pow(nd, 3) + 274.0 * nd * nd - 120.0 * nd);
  const double c4m = 4.0 * (std::pow(nd, 5) - 7.0 * std::pow(nd, 4) + 17.0 * std::pow(nd, 3) -
                            17.0 * nd * nd + 6.0 * nd);
  const double c2m = -(std::pow(nd, 4) + 26.0 * std::pow(nd, 3) - 37.0 * nd * nd + 10.0 * nd);
  const double c2p = (nd * nd - 25.0 * nd - 36.0);
  const double c4p = -4.0 * (nd + 2.0);

  std::vector<double> leading(grid.n_points), corr(grid.n_points);
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    const double alpha = -2.0 * std::pow(q, 0.25) * std::sin(grid.x_at(i));
    auto D = [&](int k) { return detail::parabolic_d(k, alpha); };
    leading[i] = D(n);
    const double half = (c4m_half * D(n - 4) + c2m_half * D(n - 2) - 4.0 * D(n + 2) - D(n + 4)) /
                        (64.0 * rq);
    const double one = (c8m * D(n - 8) + c6m * D(n - 6) + c4m * D(n - 4) + c2m * D(n - 2) +
                        c2p * D(n + 2) + c4p * D(n + 4) + D(n + 6) + D(n + 8) / 8.0) /
                       (1024.0 * q);
    corr[i] = half + one;
  }

  double norm_lead = 0.0, norm_corr = 0.0;
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    norm_lead += sq(leading[i]);
    norm_corr += sq(corr[i]);
  }
  if (!(norm_lead > 0.0) || std::sqrt(norm_corr / norm_lead) > 0.5)
    throw std::runtime_error("asymptotic_ce: asymptotic series outside validity");

  // closed-form normalization (states normalized to pi), then grid renorm
  const double bracket =
      1.0 + (2.0 * nd + 1.0) / (8.0 * rq) +
      (std::pow(nd, 4) + 2.0 * std::pow(nd, 3) + 263.0 * nd * nd + 262.0 * nd + 108.0) /
          (2048.0 * q) +
      (6.0 * std::pow(nd, 5) + 15.0 * std::pow(nd, 4) + 1280.0 * std::pow(nd, 3) +
       1905.0 * nd * nd + 1778.0 * nd + 572.0) /
          (16384.0 * std::pow(q, 1.5));
  const double inv_c2 =
      std::exp(0.5 * std::log(2.0) + log_factorial(n)) / (std::sqrt(kPi) * std::pow(q, 0.25)) *
      bracket;
  const double cn = 1.0 / std::sqrt(inv_c2);

  WavefunctionField f{grid, std::vector<Complex>(grid.n_points), 0.0};
  for (std::size_t i = 0; i < grid.n_points; ++i)
    f.amp[i] = Complex(cn * (leading[i] + corr[i]), 0.0);
  renormalize(f);
  return f;
}

}  // namespace qpend
