// Copyright (c) 2026 the qpend authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qpend/csv.hpp"
#include "qpend/dynamics.hpp"
#include "qpend/mathieu.hpp"
#include "qpend/perturbation.hpp"
#include "qpend/revival.hpp"

namespace qpend::cli {

/// Fully resolved command-line/config-file state for one invocation.
struct RunConfig {
  std::string subcommand;
  std::optional<double> v0, kbar, q;
  std::optional<std::string> q_range;  // "lo:hi:step"
  int n_max = -1;                      // -1: per-subcommand default
  std::size_t grid_points = 1024;
  int wells = 2;
  std::optional<double> dt, t_max, x0, p0;
  double dp = 1.0;  // the ground-state-matched spread at q = 40 up to a 1.26 factor
  int nu_points = 101;
  std::string model;  // empty: per-subcommand default
  int n_states = 0;   // 0: per-subcommand default
  double threshold = 0.7;
  double tol = 1e-10;
  std::string method = "split";
  std::optional<std::string> nbar_range;  // "lo:hi" integers
  std::string out_path = "out.csv";
  std::string density_out;
  std::string config_file;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> keys = {
      "v0", "kbar", "q", "q-range", "nmax", "grid-points", "wells", "dt", "tmax",
      "x0", "p0", "dp", "nu-points", "model", "nstates", "threshold", "tol",
      "method", "nbar", "out", "density-out"};
  return keys;
}

/// Plain `key = value` file, UTF-8, `#` comments. Returns flag tokens to be
/// injected before the explicit command-line flags (which therefore win).
inline std::vector<std::string> config_file_flags(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file: " + path);
  std::vector<std::string> flags;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config file: expected `key = value`, got: " + line);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto& known = known_config_keys();
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("config file: unknown key: " + key);
    if (value.empty()) throw std::invalid_argument("config file: empty value for key: " + key);
    flags.push_back("--" + key);
    flags.push_back(value);
  }
  return flags;
}

inline std::vector<double> parse_range(const std::string& spec) {
  double lo = 0.0, hi = 0.0, step = 0.0;
  char c1 = 0, c2 = 0;
  std::istringstream is(spec);
  if (!(is >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0.0) ||
      hi < lo || !(is >> std::ws).eof())
    throw std::invalid_argument("bad range (expected lo:hi:step): " + spec);
  std::vector<double> out;
  for (double v = lo; v <= hi + 0.5 * step; v += step) out.push_back(v);
  return out;
}

inline std::pair<int, int> parse_int_range(const std::string& spec) {
  const auto colon = spec.find(':');
  try {
    if (colon == std::string::npos) {
      const int v = std::stoi(spec);
      return {v, v};
    }
    const int lo = std::stoi(spec.substr(0, colon));
    const int hi = std::stoi(spec.substr(colon + 1));
    if (hi < lo) throw std::invalid_argument("");
    return {lo, hi};
  } catch (const std::exception&) {
    throw std::invalid_argument("bad integer range (expected lo:hi): " + spec);
  }
}

inline LatticeParams resolve_params(const RunConfig& c) {
  if (c.q && c.v0)
    throw std::invalid_argument("conflicting parameters: give either --v0 or --q, not both");
  if (c.q) {
    if (!c.kbar) throw std::invalid_argument("kbar required with q");
    return make_params(*c.q * (*c.kbar) * (*c.kbar), *c.kbar);
  }
  if (c.v0) {
    if (!c.kbar) throw std::invalid_argument("kbar required with v0");
    return make_params(*c.v0, *c.kbar);
  }
  throw std::invalid_argument("parameters required: --v0 with --kbar, or --q with --kbar");
}

inline void stamp_params(Table& t, const LatticeParams& p) {
  t.add_provenance("v0", format_double(p.v0));
  t.add_provenance("kbar", format_double(p.kbar));
  t.add_provenance("q", format_double(p.q()));
}

inline void stamp_common(Table& t, const RunConfig& c) {
  t.add_provenance("subcommand", c.subcommand);
  t.add_provenance("tol", format_double(c.tol));
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

inline void run_spectrum(const RunConfig& cfg) {
  const int n_max = cfg.n_max < 0 ? 10 : cfg.n_max;
  std::vector<double> qs;
  if (cfg.q_range) {
    qs = detail::parse_range(*cfg.q_range);
  } else if (cfg.q) {
    qs = {*cfg.q};
  } else if (cfg.v0 && cfg.kbar) {
    qs = {detail::resolve_params(cfg).q()};
  } else {
    throw std::invalid_argument("spectrum requires --q, --q-range, or --v0 with --kbar");
  }

  Table t;
  detail::stamp_common(t, cfg);
  if (cfg.v0 && cfg.kbar) detail::stamp_params(t, detail::resolve_params(cfg));
  if (cfg.q_range) t.add_provenance("q-range", *cfg.q_range);
  else t.add_provenance("q", format_double(qs.front()));
  t.add_provenance("nmax", format_int(n_max));
  t.columns = {"q", "n", "a_n", "b_n"};
  for (double q : qs) {
    const MathieuSpectrum s = characteristic_values(q, n_max, cfg.tol);
    for (int n = 0; n <= n_max; ++n)
      t.add_row({format_double(q), format_int(n), format_double(s.a_n(n)),
                 n >= 1 ? format_double(s.b_n(n)) : std::string("")});
  }
  write_csv_file(t, cfg.out_path);
}

inline void run_bands(const RunConfig& cfg) {
  const int n_bands = cfg.n_max < 0 ? 5 : cfg.n_max;
  double q;
  if (cfg.q && !cfg.kbar) q = *cfg.q;
  else q = detail::resolve_params(cfg).q();
  if (cfg.nu_points < 2) throw std::invalid_argument("bands: nu-points must be >= 2");
  std::vector<double> nu(std::size_t(cfg.nu_points));
  for (std::size_t i = 0; i < nu.size(); ++i) nu[i] = double(i) / double(nu.size() - 1);
  const BlochBands bb = band_structure(q, nu, n_bands, cfg.tol);

  Table t;
  detail::stamp_common(t, cfg);
  t.add_provenance("q", format_double(q));
  t.add_provenance("nbands", format_int(n_bands));
  t.add_provenance("nu-points", format_int(cfg.nu_points));
  t.columns = {"nu", "band", "a"};
  for (std::size_t i = 0; i < bb.nu.size(); ++i)
    for (int band = 0; band < n_bands; ++band)
      t.add_row({format_double(bb.nu[i]), format_int(band),
                 format_double(bb.energies[i][std::size_t(band)])});
  write_csv_file(t, cfg.out_path);
}

namespace detail {

struct PacketSetup {
  LatticeParams params{1.0, 1.0};
  SpatialGrid grid;
  WavefunctionField psi0;
  double x0, p0;
};

inline PacketSetup make_packet(const RunConfig& cfg, double default_x0, double default_p0) {
  PacketSetup s;
  s.params = resolve_params(cfg);
  s.grid = SpatialGrid::make(cfg.grid_points, cfg.wells);
  s.x0 = cfg.x0.value_or(default_x0);
  s.p0 = cfg.p0.value_or(default_p0);
  s.psi0 = gaussian_wavepacket(s.grid, s.x0, s.p0, cfg.dp, s.params.kbar);
  return s;
}

inline void stamp_packet(Table& t, const RunConfig& cfg, const PacketSetup& s) {
  stamp_params(t, s.params);
  t.add_provenance("grid-points", format_int(long(cfg.grid_points)));
  t.add_provenance("wells", format_int(cfg.wells));
  t.add_provenance("x0", format_double(s.x0));
  t.add_provenance("p0", format_double(s.p0));
  t.add_provenance("dp", format_double(cfg.dp));
}

inline void write_trace(Table&& t, const AutocorrelationTrace& trace, const std::string& path) {
  t.columns = {"t", "re_A", "im_A", "absA2"};
  for (std::size_t i = 0; i < trace.times.size(); ++i)
    t.add_row({format_double(trace.times[i]), format_double(trace.values[i].real()),
               format_double(trace.values[i].imag()), format_double(std::norm(trace.values[i]))});
  write_csv_file(t, path);
}

}  // namespace detail

inline void run_evolve(const RunConfig& cfg) {
  // default packet: rest at the well bottom with a momentum kick, so that
  // consecutive levels are populated and |A|^2 beats at the classical period
  detail::PacketSetup s = detail::make_packet(cfg, 0.0, 1.0);
  const double t_cl0 = kPi / std::sqrt(s.params.v0);
  PropagationConfig pc;
  pc.dt = cfg.dt.value_or(t_cl0 / 200.0);
  pc.t_max = cfg.t_max.value_or(12.0 * t_cl0);
  pc.record_snapshots = !cfg.density_out.empty();

  Table t;
  detail::stamp_common(t, cfg);
  detail::stamp_packet(t, cfg, s);
  t.add_provenance("method", cfg.method);
  t.add_provenance("dt", format_double(pc.dt));
  t.add_provenance("tmax", format_double(pc.t_max));

  if (cfg.method == "split") {
    const EvolveResult res = split_operator_evolve(s.psi0, s.params, pc);
    if (!cfg.density_out.empty()) {
      const DensityMap dm = density_map(res.snapshots, res.snapshot_times, 8);
      Table td;
      detail::stamp_common(td, cfg);
      detail::stamp_packet(td, cfg, s);
      td.columns = {"t", "x", "density"};
      for (std::size_t it = 0; it < dm.times.size(); ++it)
        for (std::size_t ix = 0; ix < dm.x.size(); ++ix)
          td.add_row({format_double(dm.times[it]), format_double(dm.x[ix]),
                      format_double(dm.rho[it][ix])});
      write_csv_file(td, cfg.density_out);
    }
    detail::write_trace(std::move(t), res.trace, cfg.out_path);
  } else if (cfg.method == "eigen") {
    if (!cfg.density_out.empty())
      throw std::invalid_argument("evolve: density output requires the split-operator method");
    const int n_states = cfg.n_states > 0 ? cfg.n_states : 64;
    const EigenDecomposition d =
        expand_packet(grid_eigensolve(s.params, s.grid, n_states, cfg.tol), s.psi0, 1e-6);
    std::vector<double> times;
    for (double tt = 0.0; tt <= pc.t_max + 0.5 * pc.dt; tt += pc.dt) times.push_back(tt);
    t.add_provenance("nstates", format_int(n_states));
    detail::write_trace(std::move(t), eigenbasis_evolve(d, times), cfg.out_path);
  } else {
    throw std::invalid_argument("evolve: unknown method (use split or eigen): " + cfg.method);
  }
}

inline void run_revivals(const RunConfig& cfg) {
  // default packet: displaced inside the well (0.35 well half-widths), at rest
  detail::PacketSetup s = detail::make_packet(cfg, 0.35 * 0.5 * kPi, 0.0);
  const LatticeParams& p = s.params;
  const std::string model_name = cfg.model.empty() ? "numeric" : cfg.model;
  const EnergyLabel label = energy_label_from_string(model_name);

  const double t_cl0 = kPi / std::sqrt(p.v0);
  const double t_rev1 = 8.0 * kPi / p.kbar;
  const double t_spr2 = 64.0 * kPi * std::sqrt(p.v0) / (p.kbar * p.kbar);
  const bool super = (label == EnergyLabel::sixtic || label == EnergyLabel::octic);
  const double dt = cfg.dt.value_or(t_cl0 / 200.0);
  const double t_max = cfg.t_max.value_or(super ? 1.05 * t_spr2 : 1.2 * t_rev1);

  const int n_states = cfg.n_states > 0 ? cfg.n_states : 64;
  EigenDecomposition d =
      expand_packet(grid_eigensolve(p, s.grid, n_states, cfg.tol), s.psi0, 1e-6);
  if (label != EnergyLabel::numeric)
    d = with_model_energies(std::move(d), energy_model(p, label));
  std::vector<double> times;
  for (double tt = 0.0; tt <= t_max + 0.5 * dt; tt += dt) times.push_back(tt);
  const AutocorrelationTrace trace = eigenbasis_evolve(d, times);

  const double n_bar = d.mean_level();
  TimeScales pred;
  if (label == EnergyLabel::numeric) {
    const int top = *std::max_element(d.system.well_level.begin(), d.system.well_level.end());
    const EnergyModel num = energy_model_numeric(p, top + 3, cfg.tol);
    const double nb = std::clamp(std::round(n_bar), 2.0, double(top));
    pred = timescales_from_model(num, nb);
  } else {
    pred = timescales_from_model(energy_model(p, label), n_bar);
  }

  const PeriodReport rep = detect_periodicity(trace, cfg.threshold);

  Table t;
  detail::stamp_common(t, cfg);
  detail::stamp_packet(t, cfg, s);
  t.add_provenance("model", model_name);
  t.add_provenance("nstates", format_int(n_states));
  t.add_provenance("nbar", format_double(n_bar));
  t.add_provenance("dt", format_double(dt));
  t.add_provenance("tmax", format_double(t_max));
  t.add_provenance("threshold", format_double(cfg.threshold));
  t.columns = {"peak_time", "absA2", "classification"};
  // a revival candidate reaches 0.9 of the strongest peak inside a +-10%
  // window around a predicted reconstruction time
  auto in_window = [&](double tp) {
    for (const auto& pred_t : {pred.t_rev, pred.t_spr})
      if (pred_t && std::abs(tp - *pred_t) <= 0.1 * *pred_t) return true;
    return false;
  };
  for (std::size_t i = 0; i < rep.peak_times.size(); ++i) {
    const bool strong =
        std::find_if(rep.revival_candidates.begin(), rep.revival_candidates.end(),
                     [&](const auto& c) { return c.first == rep.peak_times[i]; }) !=
        rep.revival_candidates.end();
    t.add_row({format_double(rep.peak_times[i]), format_double(rep.peak_values[i]),
               strong && in_window(rep.peak_times[i]) ? "revival_candidate" : "peak"});
  }
  t.add_row({format_double(rep.fundamental_period), "", "detected_fundamental"});
  if (pred.t_cl) t.add_row({format_double(*pred.t_cl), "", "predicted_t_cl"});
  if (pred.t_rev) t.add_row({format_double(*pred.t_rev), "", "predicted_t_rev"});
  if (pred.t_spr) t.add_row({format_double(*pred.t_spr), "", "predicted_t_spr"});
  write_csv_file(t, cfg.out_path);
}

inline void run_project(const RunConfig& cfg) {
  const LatticeParams p = detail::resolve_params(cfg);
  const SpatialGrid grid = SpatialGrid::make(cfg.grid_points, cfg.wells);
  const int n_max = cfg.n_max < 0 ? 7 : cfg.n_max;
  const int n_states = std::max(cfg.n_states, 2 * (n_max + 1) + 4);
  const GridEigensystem sys = grid_eigensolve(p, grid, n_states, cfg.tol);
  const auto rows = projection_table(sys, p, n_max);

  Table t;
  detail::stamp_common(t, cfg);
  detail::stamp_params(t, p);
  t.add_provenance("grid-points", format_int(long(cfg.grid_points)));
  t.add_provenance("wells", format_int(cfg.wells));
  t.add_provenance("nmax", format_int(n_max));
  t.add_provenance("nstates", format_int(n_states));
  t.columns = {"n", "S_harmonic", "S_quartic", "S_sixtic", "S_octic"};
  for (const auto& r : rows)
    t.add_row({format_int(r.n), format_double(r.s_harmonic), format_double(r.s_quartic),
               format_double(r.s_sixtic), format_double(r.s_octic)});
  write_csv_file(t, cfg.out_path);
}

inline void run_timescales(const RunConfig& cfg) {
  const LatticeParams p = detail::resolve_params(cfg);
  const std::string model_name = cfg.model.empty() ? "quartic" : cfg.model;
  const EnergyLabel label = energy_label_from_string(model_name);
  const auto [lo, hi] = detail::parse_int_range(cfg.nbar_range.value_or("0:7"));
  if (lo < 0) throw std::invalid_argument("timescales: nbar must be >= 0");

  EnergyModel model = (label == EnergyLabel::numeric)
                          ? energy_model_numeric(p, hi + 3, cfg.tol)
                          : energy_model(p, label);

  Table t;
  detail::stamp_common(t, cfg);
  detail::stamp_params(t, p);
  t.add_provenance("model", model_name);
  t.add_provenance("nbar", format_int(lo) + ":" + format_int(hi));
  t.columns = {"n_bar", "model", "T_cl", "T_rev", "T_spr"};
  auto cell = [](const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("inf");
  };
  for (int nb = lo; nb <= hi; ++nb) {
    // the numeric table needs interior points for the central stencils
    const double nbd = double(std::clamp(nb, label == EnergyLabel::numeric ? 2 : 0, hi + 1));
    const TimeScales ts = timescales_from_model(model, label == EnergyLabel::numeric ? nbd : nb);
    t.add_row({format_int(nb), model_name, cell(ts.t_cl), cell(ts.t_rev), cell(ts.t_spr)});
  }
  write_csv_file(t, cfg.out_path);
}

// ---------------------------------------------------------------------------
// Parsing and dispatch
// ---------------------------------------------------------------------------

/// Options are registered with take-last policy so that config-file values,
/// injected before the explicit flags, are overridden by them.
inline std::unique_ptr<CLI::App> build_app(RunConfig& cfg) {
  auto app = std::make_unique<CLI::App>(
      "quantum pendulum laboratory: Mathieu spectra, Bloch bands, wavepacket revivals");
  app->require_subcommand(1);

  auto opt = [](CLI::Option* o) { return o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast); };

  auto add_common = [&](CLI::App* sub) {
    sub->callback([&cfg, name = sub->get_name()] { cfg.subcommand = name; });
    opt(sub->add_option("--v0", cfg.v0, "lattice depth amplitude (scaled units)"));
    opt(sub->add_option("--kbar", cfg.kbar, "scaled Planck constant"));
    opt(sub->add_option("--q", cfg.q, "depth parameter q = v0/kbar^2"));
    opt(sub->add_option("--tol", cfg.tol, "eigenvalue convergence tolerance"));
    opt(sub->add_option("--out", cfg.out_path, "output CSV path"));
    opt(sub->add_option("--config", cfg.config_file, "config file with key = value lines"));
    return sub;
  };

  auto add_packet = [&](CLI::App* sub) {
    opt(sub->add_option("--grid-points", cfg.grid_points, "grid size (power of two)"));
    opt(sub->add_option("--wells", cfg.wells, "number of wells (even)"));
    opt(sub->add_option("--dt", cfg.dt, "time step / sample spacing"));
    opt(sub->add_option("--tmax", cfg.t_max, "final time"));
    opt(sub->add_option("--x0", cfg.x0, "packet center"));
    opt(sub->add_option("--p0", cfg.p0, "packet momentum"));
    opt(sub->add_option("--dp", cfg.dp, "packet momentum spread"));
    opt(sub->add_option("--nstates", cfg.n_states, "retained eigenstates"));
    return sub;
  };

  auto* spectrum = add_common(app->add_subcommand("spectrum", "characteristic values a_n, b_n"));
  opt(spectrum->add_option("--q-range", cfg.q_range, "q sweep lo:hi:step"));
  opt(spectrum->add_option("--nmax", cfg.n_max, "highest index n"));

  auto* bands = add_common(app->add_subcommand("bands", "Bloch band structure over nu"));
  opt(bands->add_option("--nmax", cfg.n_max, "number of bands"));
  opt(bands->add_option("--nu-points", cfg.nu_points, "quasimomentum samples in [0, 1]"));

  auto* evolve = add_packet(add_common(app->add_subcommand("evolve", "wavepacket propagation")));
  opt(evolve->add_option("--method", cfg.method, "split or eigen"));
  opt(evolve->add_option("--density-out", cfg.density_out, "optional density map CSV"));

  auto* revivals = add_packet(add_common(app->add_subcommand("revivals", "periodicity analysis")));
  opt(revivals->add_option("--model", cfg.model, "numeric|harmonic|quartic|sixtic|octic"));
  opt(revivals->add_option("--threshold", cfg.threshold, "peak detection threshold on |A|^2"));

  auto* project = add_common(app->add_subcommand("project", "overlap of exact and model states"));
  opt(project->add_option("--nmax", cfg.n_max, "highest level"));
  opt(project->add_option("--grid-points", cfg.grid_points, "grid size (power of two)"));
  opt(project->add_option("--wells", cfg.wells, "number of wells (even)"));
  opt(project->add_option("--nstates", cfg.n_states, "retained eigenstates"));

  auto* timescales = add_common(app->add_subcommand("timescales", "T_cl/T_rev/T_spr vs n_bar"));
  opt(timescales->add_option("--model", cfg.model, "numeric|harmonic|quartic|sixtic|octic"));
  opt(timescales->add_option("--nbar", cfg.nbar_range, "mean level or range lo:hi"));

  return app;
}

/// Splice `key = value` pairs from a --config file in right after the
/// subcommand token, so explicit flags keep precedence.
inline void inject_config_file(std::vector<std::string>& args) {
  for (std::size_t i = 1; i < args.size(); ++i) {
    std::string path;
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
    if (!path.empty() && i >= 2) {
      const auto flags = detail::config_file_flags(path);
      args.insert(args.begin() + 2, flags.begin(), flags.end());
      return;
    }
  }
}

/// Parse argv (args[0] is the program name). Throws CLI::ParseError on usage
/// errors and std::invalid_argument on config-file problems.
inline RunConfig parse_config(std::vector<std::string> args) {
  inject_config_file(args);
  RunConfig cfg;
  auto app = build_app(cfg);
  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());
  app->parse(int(argv.size()), argv.data());
  return cfg;
}

inline void run_and_write(const RunConfig& cfg) {
  if (cfg.subcommand == "spectrum") run_spectrum(cfg);
  else if (cfg.subcommand == "bands") run_bands(cfg);
  else if (cfg.subcommand == "evolve") run_evolve(cfg);
  else if (cfg.subcommand == "revivals") run_revivals(cfg);
  else if (cfg.subcommand == "project") run_project(cfg);
  else if (cfg.subcommand == "timescales") run_timescales(cfg);
  else throw std::invalid_argument("unknown subcommand: " + cfg.subcommand);
}

/// Full driver: 0 on success (including --help), nonzero usage code on bad
/// flags, 1 on computation errors, 2 on I/O errors.
inline int main(int argc, const char* const* argv) {
  try {
    std::vector<std::string> args(argv, argv + argc);
    inject_config_file(args);
    RunConfig cfg;
    auto app = build_app(cfg);
    std::vector<const char*> cargv;
    cargv.reserve(args.size());
    for (const auto& a : args) cargv.push_back(a.c_str());
    try {
      app->parse(int(cargv.size()), cargv.data());
    } catch (const CLI::ParseError& e) {
      return app->exit(e);  // prints help for --help (exit 0) or the offending token
    }
    run_and_write(cfg);
    return 0;
  } catch (const std::ios_base::failure& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace qpend::cli
