// Copyright (c) 2026 the qpend authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace qpend {

inline constexpr double kPi = std::numbers::pi;

inline double sq(double x) { return x * x; }

/// Scientific-notation rendering for diagnostics (std::to_string drops
/// anything below 1e-6).
inline std::string format_sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3e", v);
  return std::string(buf);
}

/// ln(n!), exact product up to n = 20, log-gamma beyond.
inline double log_factorial(int n) {
  if (n < 0) throw std::invalid_argument("log_factorial: n must be >= 0");
  if (n <= 20) {
    double f = 1.0;
    for (int k = 2; k <= n; ++k) f *= double(k);
    return std::log(f);
  }
  return std::lgamma(double(n) + 1.0);
}

/// Eigen decomposition of a real symmetric tridiagonal matrix.
struct SymTriEigen {
  std::vector<double> values;                // ascending
  std::vector<std::vector<double>> vectors;  // vectors[k] belongs to values[k]; empty unless requested
};

/// Implicit-shift QL iteration for a symmetric tridiagonal matrix.
/// d holds the diagonal (size n), e the sub-diagonal (size n-1).
/// Eigenvectors, when requested, come out orthonormal.
inline SymTriEigen symtri_eigen(std::vector<double> d, std::vector<double> e,
                                bool want_vectors = false) {
  const std::size_t n = d.size();
  if (n == 0) return {};
  if (e.size() + 1 != n)
    throw std::invalid_argument("symtri_eigen: sub-diagonal must have size n-1");

  std::vector<double> z;  // row-major; column k is the eigenvector of d[k]
  if (want_vectors) {
    z.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) z[i * n + i] = 1.0;
  }

  constexpr double eps = std::numeric_limits<double>::epsilon();
  e.push_back(0.0);

  for (std::size_t l = 0; l < n; ++l) {
    int iter = 0;
    std::size_t m = l;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 64)
          throw std::runtime_error("symtri_eigen: QL iteration failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        for (std::size_t ip = m; ip-- > l;) {
          double f = s * e[ip];
          const double b = c * e[ip];
          r = std::hypot(f, g);
          e[ip + 1] = r;
          if (r == 0.0) {
            d[ip + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[ip + 1] - p;
          r = (d[ip] - g) * s + 2.0 * c * b;
          p = s * r;
          d[ip + 1] = g + p;
          g = c * r - b;
          if (want_vectors) {
            for (std::size_t k = 0; k < n; ++k) {
              f = z[k * n + ip + 1];
              z[k * n + ip + 1] = s * z[k * n + ip] + c * f;
              z[k * n + ip] = c * z[k * n + ip] - s * f;
            }
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

  SymTriEigen out;
  out.values.resize(n);
  for (std::size_t k = 0; k < n; ++k) out.values[k] = d[order[k]];
  if (want_vectors) {
    out.vectors.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      out.vectors[k].resize(n);
      for (std::size_t i = 0; i < n; ++i) out.vectors[k][i] = z[i * n + order[k]];
    }
  }
  return out;
}

/// Radix-2 FFT with precomputed twiddles. Twiddles are evaluated directly per
/// index (no running products), which keeps the transform pair unitary to
/// round-off; long propagation runs rely on that.
class Fft {
 public:
  explicit Fft(std::size_t n) : n_(n) {
    if (n < 2 || (n & (n - 1)) != 0)
      throw std::invalid_argument("Fft: size must be a power of two (>= 2)");
    twiddle_.resize(n / 2);
    for (std::size_t k = 0; k < n / 2; ++k)
      twiddle_[k] = std::polar(1.0, -2.0 * kPi * double(k) / double(n));
  }

  std::size_t size() const { return n_; }

  void forward(std::vector<std::complex<double>>& a) const { transform(a, false); }

  void inverse(std::vector<std::complex<double>>& a) const {
    transform(a, true);
    const double inv = 1.0 / double(n_);
    for (auto& x : a) x *= inv;
  }

 private:
  void transform(std::vector<std::complex<double>>& a, bool inverse) const {
    if (a.size() != n_) throw std::invalid_argument("Fft: buffer size mismatch");
    for (std::size_t i = 1, j = 0; i < n_; ++i) {
      std::size_t bit = n_ >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n_; len <<= 1) {
      const std::size_t half = len / 2;
      const std::size_t stride = n_ / len;
      for (std::size_t i = 0; i < n_; i += len) {
        for (std::size_t k = 0; k < half; ++k) {
          std::complex<double> w = twiddle_[k * stride];
          if (inverse) w = std::conj(w);
          const std::complex<double> u = a[i + k];
          const std::complex<double> v = a[i + k + half] * w;
          a[i + k] = u + v;
          a[i + k + half] = u - v;
        }
      }
    }
  }

  std::size_t n_;
  std::vector<std::complex<double>> twiddle_;
};

}  // namespace qpend
