// Copyright (c) 2026 the qpend authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpend/core.hpp"
#include "qpend/dynamics.hpp"
#include "qpend/perturbation.hpp"

namespace qpend {

/// Packet reconstruction time scales. Absent entries mean the corresponding
/// spectral derivative vanishes (the recurrence is pushed to infinite time).
struct TimeScales {
  std::optional<double> t_cl;   // j = 1
  std::optional<double> t_rev;  // j = 2
  std::optional<double> t_spr;  // j = 3
  std::optional<double> t_4;    // j = 4
  double n_bar = 0.0;
  EnergyLabel source = EnergyLabel::harmonic;
};

/// T_(j) = 2 pi j! kbar / |E^(j)(n_bar)|; empty when the derivative vanishes.
inline std::optional<double> timescale_from_derivatives(const EnergyModel& model, double n_bar,
                                                        int j) {
  if (j < 1 || j > 4) throw std::invalid_argument("timescale_from_derivatives: j must be 1..4");
  const double deriv = model.derivative(n_bar, j);
  if (std::abs(deriv) < 1e-14) return std::nullopt;
  double fact = 1.0;
  for (int r = 2; r <= j; ++r) fact *= double(r);
  return 2.0 * kPi * fact * model.params.kbar / std::abs(deriv);
}

inline TimeScales timescales_from_model(const EnergyModel& model, double n_bar) {
  TimeScales t;
  t.n_bar = n_bar;
  t.source = model.label;
  t.t_cl = timescale_from_derivatives(model, n_bar, 1);
  t.t_rev = timescale_from_derivatives(model, n_bar, 2);
  t.t_spr = timescale_from_derivatives(model, n_bar, 3);
  t.t_4 = timescale_from_derivatives(model, n_bar, 4);
  return t;
}

/// Closed-form time-scale factors, evaluated verbatim from their printed
/// forms (with s_bar = 2 n_bar + 1):
///   alpha1 = 1 + s/(8 sqrt q)            alpha2 = alpha1 + 3(s^2+1)/(2^8 q)
///   alpha3 = alpha2 + (5s^3+17s)/(2^11 q^{3/2})
///   beta1  = 3s/(16 q) - 1               beta2  = beta1 + (15 s^2 + 17)/(2^8 q)
///   gamma  = 5s/(8 sqrt q) - 1
/// applied to T_cl0 = pi/sqrt(v0), T_rev1 = 8 pi / kbar, T_spr2 = 64 pi sqrt(v0)/kbar^2.
/// Note beta1 carries q where the derivative route yields sqrt(q); the
/// derivative-based predictor is the canonical one, this evaluation is kept
/// for comparison.
inline TimeScales closed_form_timescales(const LatticeParams& p, double n_bar,
                                         EnergyLabel label) {
  if (label == EnergyLabel::numeric)
    throw std::invalid_argument("closed_form_timescales: closed-form labels only");
  const double q = p.q();
  const double s = 2.0 * n_bar + 1.0;
  const double rq = std::sqrt(q);
  const double t_cl0 = kPi / std::sqrt(p.v0);
  const double t_rev1 = 8.0 * kPi / p.kbar;
  const double t_spr2 = 64.0 * kPi * std::sqrt(p.v0) / (p.kbar * p.kbar);

  const double alpha1 = 1.0 + s / (8.0 * rq);
  const double alpha2 = alpha1 + 3.0 * (s * s + 1.0) / (256.0 * q);
  const double alpha3 = alpha2 + (5.0 * s * s * s + 17.0 * s) / (2048.0 * std::pow(q, 1.5));
  const double beta1 = 3.0 * s / (16.0 * q) - 1.0;
  const double beta2 = beta1 + (15.0 * s * s + 17.0) / (256.0 * q);
  const double gamma = 5.0 * s / (8.0 * rq) - 1.0;

  TimeScales t;
  t.n_bar = n_bar;
  t.source = label;
  switch (label) {
    case EnergyLabel::harmonic:
      t.t_cl = t_cl0;
      break;
    case EnergyLabel::quartic:
      t.t_cl = alpha1 * t_cl0;
      t.t_rev = t_rev1;
      break;
    case EnergyLabel::sixtic:
      t.t_cl = alpha2 * t_cl0;
      t.t_rev = std::abs(beta1) * t_rev1;
      t.t_spr = t_spr2;
      break;
    default:  // octic
      t.t_cl = alpha3 * t_cl0;
      t.t_rev = std::abs(beta2) * t_rev1;
      t.t_spr = std::abs(gamma) * t_spr2;
      break;
  }
  return t;
}

/// Detected periodicity of |A(t)|^2.
struct PeriodReport {
  std::vector<double> peak_times;    // refined local-maximum locations
  std::vector<double> peak_values;
  double fundamental_period = 0.0;   // median spacing of consecutive peaks
  std::vector<std::pair<double, double>> revival_candidates;  // (time, |A|^2)
  double threshold = 0.7;
};

/// Local maxima of |A|^2 above the threshold on a uniformly sampled trace.
/// Peak locations are refined by a parabola through the three samples around
/// each maximum; candidates are peaks reaching 0.9 of the strongest peak.
inline PeriodReport detect_periodicity(const AutocorrelationTrace& trace,
                                       double threshold = 0.7) {
  const std::size_t n = trace.times.size();
  if (n < 5) throw std::invalid_argument("detect_periodicity: trace too short");
  const double dt = trace.times[1] - trace.times[0];
  for (std::size_t i = 1; i + 1 < n; ++i)
    if (std::abs((trace.times[i + 1] - trace.times[i]) - dt) > 1e-9 * std::max(dt, 1.0))
      throw std::invalid_argument("detect_periodicity: trace must be uniformly sampled");

  std::vector<double> p2(n);
  for (std::size_t i = 0; i < n; ++i) p2[i] = std::norm(trace.values[i]);

  PeriodReport rep;
  rep.threshold = threshold;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (p2[i] < threshold) continue;
    if (!(p2[i] > p2[i - 1] && p2[i] >= p2[i + 1])) continue;
    // refine location and height with the parabola through the three samples
    const double denom = p2[i - 1] - 2.0 * p2[i] + p2[i + 1];
    double shift = 0.0;
    if (denom < 0.0) shift = 0.5 * (p2[i - 1] - p2[i + 1]) / denom;
    shift = std::clamp(shift, -0.5, 0.5);
    const double height = p2[i] + 0.25 * (p2[i + 1] - p2[i - 1]) * shift;
    rep.peak_times.push_back(trace.times[i] + shift * dt);
    rep.peak_values.push_back(std::min(height, 1.0));
  }
  if (rep.peak_times.size() < 2)
    throw std::runtime_error("detect_periodicity: no periodicity detected (fewer than 2 peaks)");

  std::vector<double> gaps;
  for (std::size_t i = 1; i < rep.peak_times.size(); ++i)
    gaps.push_back(rep.peak_times[i] - rep.peak_times[i - 1]);
  std::sort(gaps.begin(), gaps.end());
  const std::size_t mid = gaps.size() / 2;
  rep.fundamental_period =
      (gaps.size() % 2 == 1) ? gaps[mid] : 0.5 * (gaps[mid - 1] + gaps[mid]);
  // consecutive strict maxima are at least two samples apart by construction
  rep.fundamental_period = std::max(rep.fundamental_period, 2.0 * dt);

  const double vmax = *std::max_element(rep.peak_values.begin(), rep.peak_values.end());
  for (std::size_t i = 0; i < rep.peak_times.size(); ++i)
    if (rep.peak_values[i] >= 0.9 * vmax)
      rep.revival_candidates.emplace_back(rep.peak_times[i], rep.peak_values[i]);
  return rep;
}

enum class RevivalPhase { exact_at_trev_and_half, exact_at_trev, early };

struct RevivalPhaseRule {
  RevivalPhase classification = RevivalPhase::early;
  double residual = 0.0;  // 16 pi sqrt(q) mod 2 pi
};

/// |A|^2 returns to unity at T_rev exactly when sqrt(q) is a multiple of 1/8
/// (and already at T_rev/2 for a multiple of 1/4); otherwise the revival
/// arrives slightly early.
inline RevivalPhaseRule revival_phase_rule(double q) {
  if (!(q > 0.0)) throw std::invalid_argument("revival_phase_rule: q must be > 0");
  const double rq = std::sqrt(q);
  RevivalPhaseRule r;
  r.residual = std::fmod(16.0 * kPi * rq, 2.0 * kPi);
  if (r.residual < 0.0) r.residual += 2.0 * kPi;
  const double eps = 1e-9 * std::max(1.0, rq);
  const double frac8 = std::abs(rq * 8.0 - std::round(rq * 8.0));
  const double frac4 = std::abs(rq * 4.0 - std::round(rq * 4.0));
  if (frac4 < eps)
    r.classification = RevivalPhase::exact_at_trev_and_half;
  else if (frac8 < eps)
    r.classification = RevivalPhase::exact_at_trev;
  else
    r.classification = RevivalPhase::early;
  return r;
}

namespace detail {

/// Restrict a real/complex sample set to the central well |x| < pi/2 and
/// renormalize there. The exact periodic eigenstates split their weight over
/// every well; comparing single-well content against the well-attached
/// approximate states requires this restriction.
template <typename Getter>
inline std::vector<Complex> central_well_restriction(const SpatialGrid& grid, Getter&& get) {
  std::vector<Complex> out(grid.n_points, Complex{0.0, 0.0});
  double s = 0.0;
  for (std::size_t i = 0; i < grid.n_points; ++i) {
    if (std::abs(grid.x_at(i)) >= 0.5 * kPi) continue;
    out[i] = get(i);
    s += std::norm(out[i]);
  }
  s = std::sqrt(s * grid.dx);
  if (!(s > 0.0)) throw std::runtime_error("central well restriction: zero norm");
  for (auto& v : out) v /= s;
  return out;
}

}  // namespace detail

/// Projection S_n = |<phi_n^approx | psi_n^exact>|^2 of the n-th exact
/// cosine-like level onto the approximate family, both restricted to the
/// central well and renormalized there.
inline double projection_S(const GridEigensystem& exact, const LatticeParams& p,
                           EnergyLabel approx, int n,
                           CorrectionTables tables = CorrectionTables::as_printed) {
  if (n < 0) throw std::invalid_argument("projection_S: n must be >= 0");
  std::ptrdiff_t idx = -1;
  for (std::size_t k = 0; k < exact.states.size(); ++k)
    if (exact.mathieu_class[k] == 'a' && exact.class_index[k] == n) { idx = std::ptrdiff_t(k); break; }
  if (idx < 0)
    throw std::invalid_argument("projection_S: exact level a_" + std::to_string(n) +
                                " not present in the eigensystem");
  const WavefunctionField approx_state = corrected_eigenstate(p, approx, n, exact.grid, tables);
  const auto& ex = exact.states[std::size_t(idx)];
  const auto wa = detail::central_well_restriction(exact.grid, [&](std::size_t i) {
    return approx_state.amp[i];
  });
  const auto we = detail::central_well_restriction(exact.grid, [&](std::size_t i) {
    return Complex(ex[i], 0.0);
  });
  Complex ov{0.0, 0.0};
  for (std::size_t i = 0; i < wa.size(); ++i) ov += std::conj(wa[i]) * we[i];
  ov *= exact.grid.dx;
  return std::norm(ov);
}

struct ProjectionRow {
  int n;
  double s_harmonic, s_quartic, s_sixtic, s_octic;
};

inline std::vector<ProjectionRow> projection_table(const GridEigensystem& exact,
                                                   const LatticeParams& p, int n_max,
                                                   CorrectionTables tables =
                                                       CorrectionTables::as_printed) {
  std::vector<ProjectionRow> rows;
  for (int n = 0; n <= n_max; ++n)
    rows.push_back({n, projection_S(exact, p, EnergyLabel::harmonic, n, tables),
                    projection_S(exact, p, EnergyLabel::quartic, n, tables),
                    projection_S(exact, p, EnergyLabel::sixtic, n, tables),
                    projection_S(exact, p, EnergyLabel::octic, n, tables)});
  return rows;
}

}  // namespace qpend
