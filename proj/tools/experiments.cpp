// Figure-data recipes. Each writes CSV tables plus a summary JSON into its
// output directory; every file carries the run manifest.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>

#include "common.hpp"
#include "ionsim/effective.hpp"
#include "ionsim/geometry.hpp"
#include "ionsim/scheduler.hpp"

namespace ionsim::cli {
namespace {

using io::from_hz;
using io::to_hz;
constexpr double kPi = std::numbers::pi;

struct Physics {
  double gradient_hz = 1000.0;
  double rate_hz = 0.0;   // when positive the gradient becomes beta * rate
  double nu_hz = 1.0e6;
  double eta = 0.1;
  double alpha = 20.0;
  double beta = 40.0;
  int cutoff = 2;
  double tol = 1e-9;
  int threads = default_threads();
  std::string out;

  void add(CLI::App& app, const std::string& default_out) {
    out = default_out;
    app.add_option("--gradient-hz", gradient_hz, "Gradient Delta, Hz")->capture_default_str();
    app.add_option("--rate-hz", rate_hz, "Hop rate, Hz; sets Delta = beta * rate");
    app.add_option("--nu-hz", nu_hz, "COM mode frequency, Hz")->capture_default_str();
    app.add_option("--eta", eta, "COM Lamb-Dicke factor per ion")->capture_default_str();
    app.add_option("--alpha", alpha, "xi = alpha N Delta")->capture_default_str();
    app.add_option("--beta", beta, "Delta / Omega_n")->capture_default_str();
    app.add_option("--cutoff", cutoff, "Fock cutoff")->capture_default_str();
    app.add_option("--tol", tol, "Integrator tolerance")->check(CLI::Range(1e-12, 1e-4))->capture_default_str();
    app.add_option("--threads", threads, "Worker threads for sweeps")->capture_default_str();
    app.add_option("--out", out, "Output directory")->capture_default_str();
  }
  double gradient() const { return rate_hz > 0 ? from_hz(rate_hz) * beta : from_hz(gradient_hz); }
  double rate() const { return gradient() / beta; }
  ChainConfig chain(int n, std::vector<int> spacers = {}) const {
    auto c = ChainConfig::com_mode(n, gradient(), from_hz(nu_hz), eta, cutoff);
    c.spacers = std::move(spacers);
    return c;
  }
  std::string path(const std::string& file) const { return out + "/" + file; }
};

void parse(CLI::App& app, const std::vector<std::string>& args) {
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    std::printf("%s", app.help().c_str());
    throw;
  } catch (const CLI::ParseError& e) {
    throw UsageError(app.get_name() + ": " + e.what());
  }
}

EffectiveModel effective_of(const CompiledGeometry& g) {
  EffectiveModel m;
  m.n_sites = g.n_ions;
  m.terms = g.terms;
  m.spacers = g.spacers;
  return m;
}

std::vector<double> strobe_grid(const DriveSchedule& s, double t_window, int max_samples) {
  if (!s.strobe) throw NumericalError("schedule has no stroboscopic period");
  const double T = s.strobe->period;
  const int count = std::max(1, static_cast<int>(std::ceil(t_window / T)));
  const int every = std::max(1, count / std::max(1, max_samples));
  return stroboscopic_times(T * every, (count + every - 1) / every);
}

Trajectory full_run(const DriveSchedule& s, const ChainConfig& chain, const InitialState& init,
                    const std::vector<double>& times, double tol) {
  SimulationOptions so;
  so.integrator.tol = tol;
  auto res = simulate(s, chain, init, times, so);
  if (res.best().stats.max_top_fock > so.leakage_threshold)
    throw NumericalError("Fock leakage above threshold after rerun");
  return res.best();
}

std::string comparison_csv(const Comparison& c) {
  std::ostringstream csv;
  csv << std::setprecision(12) << "t,fidelity,overlap,pe_distance\n";
  for (std::size_t i = 0; i < c.times.size(); ++i)
    csv << c.times[i] << ',' << c.fidelity[i] << ',' << c.overlap[i] << ',' << c.pe_distance[i] << '\n';
  return csv.str();
}

// ---- ab-ring ----

void ab_ring(const std::vector<std::string>& args, io::RunManifest& m) {
  CLI::App app{"Circulating excitation on the ring", "ab-ring"};
  Physics p;
  p.add(app, "ab-ring");
  int n = 5, samples = 60;
  double loop_flux = 3.0 * kPi / 4.0, revolutions = 1.0;
  std::string init = "packet:1";
  bool effective_only = false;
  app.add_option("--n", n, "Ring size")->capture_default_str();
  app.add_option("--loop-flux", loop_flux, "Loop flux, rad")->capture_default_str();
  app.add_option("--revolutions", revolutions, "Run length in packet revolutions")->capture_default_str();
  app.add_option("--samples", samples, "Approximate number of samples")->capture_default_str();
  app.add_option("--init", init, "single:S or packet:K[:PHI0]")->capture_default_str();
  app.add_flag("--effective-only", effective_only, "Skip the full dynamics");
  parse(app, args);

  const auto g = compile(geometry::Ring{n, loop_flux, p.rate()});
  const auto chain = p.chain(n);
  const auto sched = schedule(g.terms, chain, ScheduleKnobs{.alpha = p.alpha});
  const double fluxq = loop_flux / (2.0 * kPi);
  const double v = wavepacket_velocity(n, 0, fluxq, p.rate());
  const double vmax = 4.0 * p.rate() * std::sin(kPi / n);
  const double t_rev = 2.0 * kPi / std::max(std::abs(v), 0.05 * vmax);
  const auto times = strobe_grid(sched, revolutions * t_rev, samples);
  const InitialState s0 = parse_initial_state(init, "ground", 0, n);

  const Trajectory eff = evolve_effective(effective_of(g), initial_spin_state(s0, n), times);
  write_csv_artifact(p.path("heatmap_effective.csv"), io::trajectory_csv(eff), m);
  json summary = {{"n", n},
                  {"loop_flux", loop_flux},
                  {"rate_hz", to_hz(p.rate())},
                  {"velocity_analytic_hz", to_hz(v)},
                  {"samples", times.size()}};
  if (s0.kind == InitialState::Kind::wave_packet) summary["velocity_effective_hz"] = to_hz(phase_track(eff).velocity);
  if (!effective_only) {
    const Trajectory full = full_run(sched, chain, s0, times, p.tol);
    write_csv_artifact(p.path("heatmap_full.csv"), io::trajectory_csv(full), m);
    auto used = chain;
    used.fock_cutoff = full.stats.fock_cutoff;
    const Comparison c = compare(full, Basis(used), eff, frame_from_schedule(sched));
    write_csv_artifact(p.path("comparison.csv"), comparison_csv(c), m);
    summary["min_fidelity"] = c.min_fidelity();
    summary["max_pe_distance"] = c.max_distance();
    if (s0.kind == InitialState::Kind::wave_packet) {
      const auto pt = phase_track(full);
      summary["velocity_full_hz"] = to_hz(pt.velocity);
      summary["velocity_full_ci95_hz"] = to_hz(pt.ci95);
    }
  }
  write_json_artifact(p.path("summary.json"), summary, m);
  std::printf("%s\n", summary.dump(2).c_str());
}

// ---- flux-velocity-sweep ----

void flux_velocity_sweep(const std::vector<std::string>& args, io::RunManifest& m) {
  CLI::App app{"Packet velocity versus loop flux", "flux-velocity-sweep"};
  Physics p;
  p.add(app, "flux-velocity-sweep");
  int n = 5, points = 17, samples = 40;
  double flux_min = 0.0, flux_max = 1.0, revolutions = 0.5;
  bool effective_only = false;
  app.add_option("--n", n, "Ring size")->capture_default_str();
  app.add_option("--points", points, "Number of flux values")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--flux-min", flux_min, "First flux, flux quanta")->capture_default_str();
  app.add_option("--flux-max", flux_max, "Last flux, flux quanta")->capture_default_str();
  app.add_option("--revolutions", revolutions, "Window in revolutions of the fastest packet")->capture_default_str();
  app.add_option("--samples", samples, "Approximate samples per run")->capture_default_str();
  app.add_flag("--effective-only", effective_only, "Skip the full dynamics");
  parse(app, args);

  struct Row {
    double flux, v_eq, v_eff, v_full = std::nan(""), ci_full = std::nan("");
    bool mismatch = false;
  };
  std::vector<Row> rows(points);
  const double vmax = 4.0 * p.rate() * std::sin(kPi / n);
  const double window = revolutions * 2.0 * kPi / vmax;
  parallel_for(points, p.threads, [&](int i) {
    const double fq = points == 1 ? flux_min : flux_min + (flux_max - flux_min) * i / (points - 1);
    const auto g = compile(geometry::Ring{n, 2.0 * kPi * fq, p.rate()});
    const auto chain = p.chain(n);
    const auto sched = schedule(g.terms, chain, ScheduleKnobs{.alpha = p.alpha});
    const auto times = strobe_grid(sched, window, samples);
    InitialState s0;
    s0.kind = InitialState::Kind::wave_packet;
    Row r{fq, wavepacket_velocity(n, 0, fq, p.rate()), 0.0};
    r.v_eff = phase_track(evolve_effective(effective_of(g), initial_spin_state(s0, n), times)).velocity;
    if (!effective_only) {
      const auto pt = phase_track(full_run(sched, chain, s0, times, p.tol));
      r.v_full = pt.velocity;
      r.ci_full = pt.ci95;
      r.mismatch = pt.profile_mismatch;
    }
    rows[i] = r;
  });

  std::ostringstream csv;
  csv << std::setprecision(12)
      << "flux_quanta,v_analytic_hz,v_effective_hz,v_full_hz,ci95_full_hz,rel_dev_effective,rel_dev_full,"
         "dev_full_over_vmax,profile_mismatch\n";
  double worst_eff = 0, worst_full = 0;
  for (const auto& r : rows) {
    const double de = std::abs(r.v_eff - r.v_eq) / std::abs(r.v_eq);
    const double df = std::abs(r.v_full - r.v_eq) / std::abs(r.v_eq);
    worst_eff = std::max(worst_eff, de);
    if (!effective_only) worst_full = std::max(worst_full, df);
    csv << r.flux << ',' << to_hz(r.v_eq) << ',' << to_hz(r.v_eff) << ',' << to_hz(r.v_full) << ','
        << to_hz(r.ci_full) << ',' << de << ',' << df << ',' << std::abs(r.v_full - r.v_eq) / vmax << ','
        << (r.mismatch ? 1 : 0) << '\n';
  }
  write_csv_artifact(p.path("velocity.csv"), csv.str(), m);
  json summary = {{"n", n}, {"points", points}, {"max_rel_dev_effective", worst_eff}};
  if (!effective_only) summary["max_rel_dev_full"] = worst_full;
  write_json_artifact(p.path("summary.json"), summary, m);
  std::printf("%s\n", summary.dump(2).c_str());
}

// ---- bloch-oscillation ----

void bloch_oscillation(const std::vector<std::string>& args, io::RunManifest& m) {
  CLI::App app{"Packet under a linearly growing flux", "bloch-oscillation"};
  Physics p;
  p.rate_hz = 0.05;
  p.add(app, "bloch-oscillation");
  int n = 6, samples = 400;
  double delta1_hz = 0.1, loop_flux = 0.0, cycles = 1.0;
  bool full = false;
  app.add_option("--n", n, "Ring size")->capture_default_str();
  app.add_option("--delta1", delta1_hz, "Phase rate delta_1 of the n=1 term, Hz")->capture_default_str();
  app.add_option("--loop-flux", loop_flux, "Initial loop flux, rad")->capture_default_str();
  app.add_option("--cycles", cycles, "Run length in Bloch periods (N flux quanta)")->capture_default_str();
  app.add_option("--samples", samples, "Samples")->capture_default_str();
  app.add_flag("--full", full, "Also integrate the full dynamics");
  parse(app, args);
  if (delta1_hz == 0.0) throw UsageError("--delta1 must be non-zero");

  auto g = compile(geometry::Ring{n, loop_flux, p.rate()});
  for (auto& t : g.terms)
    if (t.range == 1) t.detuning = from_hz(delta1_hz);
  const double flux_rate = (n - 1) * std::abs(from_hz(delta1_hz));
  const double t_bloch = n * 2.0 * kPi / flux_rate;
  const double t_final = cycles * t_bloch;
  std::vector<double> times(samples + 1);
  for (int i = 0; i <= samples; ++i) times[i] = t_final * i / samples;
  InitialState s0;
  s0.kind = InitialState::Kind::wave_packet;

  const Trajectory eff = evolve_effective(effective_of(g), initial_spin_state(s0, n), times);
  write_csv_artifact(p.path("heatmap_effective.csv"), io::trajectory_csv(eff), m);
  auto phase_table = [&](const Trajectory& tr, const std::string& file) {
    const auto pt = phase_track(tr, 1.0);
    std::ostringstream csv;
    csv << std::setprecision(12) << "t,phase,residual\n";
    for (std::size_t i = 0; i < pt.times.size(); ++i)
      csv << pt.times[i] << ',' << pt.phase[i] << ',' << pt.residual[i] << '\n';
    write_csv_artifact(p.path(file), csv.str(), m);
    const auto [lo, hi] = std::minmax_element(pt.phase.begin(), pt.phase.end());
    return std::pair{*hi - *lo, pt.phase.back() - pt.phase.front()};
  };
  const auto [excursion, drift] = phase_table(eff, "phase_effective.csv");
  const double static_advance = std::abs(wavepacket_velocity(n, 0, loop_flux / (2 * kPi), p.rate())) * t_final;
  json summary = {{"n", n},
                  {"delta1_hz", delta1_hz},
                  {"bloch_period_s", t_bloch},
                  {"t_final_s", t_final},
                  {"phase_excursion_effective", excursion},
                  {"net_phase_drift_effective", drift},
                  {"static_flux_phase_advance", static_advance}};
  if (full) {
    const auto sched = schedule(g.terms, p.chain(n), ScheduleKnobs{.alpha = p.alpha});
    const Trajectory tr = full_run(sched, p.chain(n), s0, times, p.tol);
    write_csv_artifact(p.path("heatmap_full.csv"), io::trajectory_csv(tr), m);
    const auto [ex, dr] = phase_table(tr, "phase_full.csv");
    summary["phase_excursion_full"] = ex;
    summary["net_phase_drift_full"] = dr;
  }
  write_json_artifact(p.path("summary.json"), summary, m);
  std::printf("%s\n", summary.dump(2).c_str());
}

// ---- triangular-ed ----

void triangular_ed(const std::vector<std::string>& args, io::RunManifest& m) {
  CLI::App app{"Triangular ladder spectra versus j = J2/J1", "triangular-ed"};
  Physics p;
  p.add(app, "triangular-ed");
  int n = 8, points = 21, levels = 4;
  double j_min = 0.0, j_max = 1.0, j1_hz = 1.0, phi1 = 0.0, phi2 = 0.0;
  app.add_option("--n", n, "Number of sites")->capture_default_str();
  app.add_option("--points", points, "Number of j values")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--j-min", j_min, "Smallest j")->capture_default_str();
  app.add_option("--j-max", j_max, "Largest j")->capture_default_str();
  app.add_option("--j1-hz", j1_hz, "Rung coupling J1, Hz")->capture_default_str();
  app.add_option("--phi1", phi1, "Phase of the n=1 term, rad")->capture_default_str();
  app.add_option("--phi2", phi2, "Phase of the n=2 term, rad")->capture_default_str();
  app.add_option("--levels", levels, "Lowest levels kept per sector")->capture_default_str();
  parse(app, args);

  std::vector<std::string> blocks(points);
  parallel_for(points, p.threads, [&](int i) {
    const double j = points == 1 ? j_min : j_min + (j_max - j_min) * i / (points - 1);
    const double j1 = from_hz(j1_hz);
    const auto g = compile(geometry::TriangularLadder{n, j1, j * j1, phi1, phi2});
    const auto model = effective_of(g);
    std::ostringstream out;
    out << std::setprecision(12);
    for (int exc = 0; exc <= n; ++exc) {
      const Sector sector(n, exc);
      const auto es = diagonalize(build_h_eff(model, sector));
      for (int l = 0; l < std::min<int>(levels, es.values.size()); ++l)
        out << j << ',' << exc << ',' << l << ',' << to_hz(es.values[l]) << '\n';
    }
    blocks[i] = out.str();
  });
  std::string csv = "j,sector,level,energy_hz\n";
  for (const auto& b : blocks) csv += b;
  write_csv_artifact(p.path("spectra.csv"), csv, m);
  std::printf("triangular-ed: %d j values, %d sectors -> %s\n", points, n + 1, p.path("spectra.csv").c_str());
}

// ---- spacer-ladder ----

void spacer_ladder(const std::vector<std::string>& args, io::RunManifest& m) {
  CLI::App app{"Chain with a spacer ion folded into a two-leg ladder", "spacer-ladder"};
  Physics p;
  p.rate_hz = 1.0;
  p.add(app, "spacer-ladder");
  int n = 11, spacer = 6;
  std::vector<int> ranges{1, 6};
  app.add_option("--n", n, "Number of ions")->capture_default_str();
  app.add_option("--spacer", spacer, "Spacer ion (1-based)")->capture_default_str();
  app.add_option("--ranges", ranges, "Hop ranges")->delimiter(',')->capture_default_str();
  parse(app, args);

  geometry::Custom c;
  c.n = n;
  c.spacers = to_zero_based({spacer}, n);
  for (int r : ranges) c.terms.push_back({r, p.rate(), 0.0, 0.0});
  const auto g = compile(c);
  const auto graph = expand_to_graph(g.terms, g.spacers, n);
  const int active = n - static_cast<int>(g.spacers.size());
  const bool even = active % 2 == 0;
  const auto ladder = grid_graph(2, active / 2);
  const bool iso = even && isomorphic(active_adjacency(graph), ladder);

  std::ostringstream edges;
  edges << std::setprecision(12) << "from,to,weight_re_hz,weight_im_hz\n";
  for (const auto& e : graph.edges())
    if (e.from < e.to)
      edges << e.from + 1 << ',' << e.to + 1 << ',' << to_hz(e.weight.real()) << ',' << to_hz(e.weight.imag()) << '\n';
  write_csv_artifact(p.path("edges.csv"), edges.str(), m);

  const auto chain_es = diagonalize(build_h_eff(effective_of(g), Sector(n, 1)));
  std::vector<double> chain_levels;
  for (Eigen::Index i = 0; i < chain_es.values.size(); ++i) chain_levels.push_back(chain_es.values[i]);
  chain_levels.erase(std::remove_if(chain_levels.begin(), chain_levels.end(),
                                    [](double e) { return std::abs(e) < 1e-12; }),
                     chain_levels.end());
  Mat h = Mat::Zero(ladder.size(), ladder.size());
  for (std::size_t a = 0; a < ladder.size(); ++a)
    for (int b : ladder[a]) h(a, b) = p.rate();
  const auto ladder_es = diagonalize(h);
  std::vector<double> ladder_levels;
  for (Eigen::Index i = 0; i < ladder_es.values.size(); ++i) ladder_levels.push_back(ladder_es.values[i]);
  ladder_levels.erase(std::remove_if(ladder_levels.begin(), ladder_levels.end(),
                                     [](double e) { return std::abs(e) < 1e-12; }),
                      ladder_levels.end());
  double diff = chain_levels.size() == ladder_levels.size() ? 0.0 : std::nan("");
  std::ostringstream spec;
  spec << std::setprecision(12) << "level,energy_chain_hz,energy_ladder_hz\n";
  for (std::size_t i = 0; i < std::max(chain_levels.size(), ladder_levels.size()); ++i) {
    const double a = i < chain_levels.size() ? chain_levels[i] : std::nan("");
    const double b = i < ladder_levels.size() ? ladder_levels[i] : std::nan("");
    diff = std::max(diff, std::abs(a - b));
    spec << i << ',' << to_hz(a) << ',' << to_hz(b) << '\n';
  }
  write_csv_artifact(p.path("spectrum.csv"), spec.str(), m);
  json summary = {{"n", n},
                  {"spacer", spacer},
                  {"ranges", ranges},
                  {"isomorphic_to_ladder", iso},
                  {"ladder_cols", active / 2},
                  {"max_nonzero_level_difference_hz", to_hz(diff)}};
  write_json_artifact(p.path("summary.json"), summary, m);
  std::printf("%s\n", summary.dump(2).c_str());
}

// ---- appendix-a-equivalence ----

/// Fit P(t) = a + b cos(2 W t) and return W sqrt(2 b'), b' the oscillating amplitude.
double two_site_rate(const std::vector<double>& t, const std::vector<double>& p, double guess) {
  auto solve = [&](double w, double* hop) {
    double s1 = 0, sc = 0, scc = 0, sp = 0, spc = 0;
    const double n = static_cast<double>(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double c = std::cos(2.0 * w * t[i]);
      s1 += 1;
      sc += c;
      scc += c * c;
      sp += p[i];
      spc += p[i] * c;
    }
    const double det = n * scc - sc * sc;
    const double a = (sp * scc - sc * spc) / det, b = (n * spc - sc * sp) / det;
    double res = 0;
    for (std::size_t i = 0; i < t.size(); ++i) res += std::pow(p[i] - a - b * std::cos(2.0 * w * t[i]), 2);
    if (hop) *hop = w * std::sqrt(std::max(0.0, 2.0 * b));
    (void)s1;
    return res;
  };
  double best = guess, best_res = solve(guess, nullptr);
  for (int i = -200; i <= 200; ++i) {
    const double w = guess * (1.0 + 0.0025 * i);
    if (w <= 0) continue;
    const double r = solve(w, nullptr);
    if (r < best_res) best_res = r, best = w;
  }
  double lo = best * 0.997, hi = best * 1.003;
  for (int it = 0; it < 80; ++it) {
    const double m1 = lo + (hi - lo) / 3, m2 = hi - (hi - lo) / 3;
    if (solve(m1, nullptr) < solve(m2, nullptr)) hi = m2;
    else lo = m1;
  }
  double hop = 0;
  solve(0.5 * (lo + hi), &hop);
  return hop;
}

void appendix_a(const std::vector<std::string>& args, io::RunManifest& m) {
  CLI::App app{"Three-tone comb: hop rates versus tone amplitude products", "appendix-a-equivalence"};
  Physics p;
  p.add(app, "appendix-a-equivalence");
  std::vector<std::string> sets{"1,1,1", "1,2,1", "2,1,1", "1,1,2", "1,0.5,2"};
  int samples = 160;
  app.add_option("--sets", sets, "Relative amplitudes a0,a1,a2 (repeatable, ';' separated)")->delimiter(';');
  app.add_option("--samples", samples, "Samples per run")->capture_default_str();
  parse(app, args);

  constexpr int n = 3;
  const double delta = p.gradient();
  const double xi = std::round(p.alpha * n * 4.0) / 4.0 * delta;
  const std::vector<int> offsets{0, 1, 2};
  const std::vector<double> phases{0.0, 0.0, 0.0};
  // reference: each tone product contributes Delta / (2 beta) at unit amplitudes
  const double eta = p.eta;

  std::vector<std::vector<double>> amps;
  for (const auto& s : sets) {
    std::vector<double> a;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) a.push_back(std::stod(tok));
    if (a.size() != 3) throw UsageError("each amplitude set needs three values");
    amps.push_back(a);
  }

  struct Result {
    double law1, law2, hop1, hop2;
  };
  std::vector<Result> out(amps.size());
  // runs: (set, which) with which = 0 -> sites 1,2 (range 1), 1 -> sites 1,3 (range 2)
  parallel_for(static_cast<int>(amps.size()) * 2, p.threads, [&](int job) {
    const int set = job / 2, which = job % 2;
    const auto chain = p.chain(n, {which == 0 ? 2 : 1});
    double eps = 1.25 * delta;
    double scale = 0.0;
    DriveSchedule s;
    for (int iter = 0; iter < 40; ++iter) {
      const double c = eta * eta / (2.0 * (xi + eps));
      scale = std::sqrt(delta / (2.0 * p.beta) / c);
      std::vector<double> rabi;
      for (double a : amps[set]) rabi.push_back(a * scale);
      s = shared_schedule(offsets, rabi, phases, chain, xi, eps, true);
      if (pair_line_distance(s) >= 2.0 * n * delta) break;
      eps += 0.5 * delta;
    }
    const double c = eta * eta / (2.0 * (xi + eps));
    std::vector<double> rabi;
    for (double a : amps[set]) rabi.push_back(a * scale);
    double law = 0.0;
    for (const auto& [range, j] : induced_couplings(offsets, rabi, phases, n, c))
      if (range == which + 1) law = std::abs(j);
    const double guess = std::max(law, 1e-3 * delta / p.beta);
    std::vector<double> times(samples + 1);
    const double t_final = 1.5 * kPi / guess;
    for (int i = 0; i <= samples; ++i) times[i] = t_final * i / samples;
    InitialState s0;
    s0.site = 0;
    const Trajectory tr = full_run(s, chain, s0, times, p.tol);
    std::vector<double> pe;
    for (const auto& r : tr.records) pe.push_back(r.p_excited[0]);
    const double hop = two_site_rate(times, pe, guess);
    if (which == 0) out[set].law1 = law, out[set].hop1 = hop;
    else out[set].law2 = law, out[set].hop2 = hop;
  });

  std::ostringstream csv;
  csv << std::setprecision(12)
      << "a0,a1,a2,range1_law_hz,range1_extracted_hz,range1_rel,range2_law_hz,range2_extracted_hz,range2_rel\n";
  double worst = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const auto& r = out[i];
    const double e1 = std::abs(r.hop1 / r.law1 - 1.0), e2 = std::abs(r.hop2 / r.law2 - 1.0);
    worst = std::max({worst, e1, e2});
    csv << amps[i][0] << ',' << amps[i][1] << ',' << amps[i][2] << ',' << to_hz(r.law1) << ',' << to_hz(r.hop1)
        << ',' << e1 << ',' << to_hz(r.law2) << ',' << to_hz(r.hop2) << ',' << e2 << '\n';
  }
  write_csv_artifact(p.path("rates.csv"), csv.str(), m);
  json summary = {{"sets", amps.size()}, {"max_relative_deviation", worst}};
  write_json_artifact(p.path("summary.json"), summary, m);
  std::printf("%s\n", summary.dump(2).c_str());
}

// ---- scaling-law ----

void scaling_law(const std::vector<std::string>& args, io::RunManifest& m) {
  CLI::App app{"Hop rate versus ion number at fixed alpha, beta, eta1", "scaling-law"};
  Physics p;
  p.add(app, "scaling-law");
  int n_min = 3, n_max = 10;
  double eta1 = 0.1, omega0_hz = 2.0e4;
  app.add_option("--n-min", n_min, "Smallest chain")->capture_default_str();
  app.add_option("--n-max", n_max, "Largest chain")->capture_default_str();
  app.add_option("--eta1", eta1, "Single-ion Lamb-Dicke factor")->capture_default_str();
  app.add_option("--omega0-hz", omega0_hz, "Tone Rabi frequency, Hz")->capture_default_str();
  parse(app, args);
  if (n_min < 2 || n_max < n_min) throw UsageError("need 2 <= n-min <= n-max");

  std::ostringstream csv;
  csv << std::setprecision(12) << "n,gradient_hz,xi_hz,eta,rate_hz,realized_rate_hz,rate_times_n_hz\n";
  double ref = 0.0, worst = 0.0;
  for (int n = n_min; n <= n_max; ++n) {
    const auto d = scaling_design(n, p.alpha, p.beta, eta1, from_hz(omega0_hz));
    auto chain = ChainConfig::com_mode_single_ion(n, d.gradient, from_hz(p.nu_hz), eta1, p.cutoff);
    ScheduleKnobs k;
    k.alpha = p.alpha;
    k.correct_gradient = false;
    const auto s = schedule({{1, d.rate, 0.0, 0.0}}, chain, k);
    const double realized = realized_rate(s, 0);
    if (n == n_min) ref = d.rate * n;
    worst = std::max(worst, std::abs(d.rate * n / ref - 1.0));
    csv << n << ',' << to_hz(d.gradient) << ',' << to_hz(d.xi) << ',' << d.eta << ',' << to_hz(d.rate) << ','
        << to_hz(realized) << ',' << to_hz(d.rate * n) << '\n';
  }
  write_csv_artifact(p.path("scaling.csv"), csv.str(), m);
  json summary = {{"max_relative_deviation_of_rate_times_n", worst}};
  write_json_artifact(p.path("summary.json"), summary, m);
  std::printf("%s\n", summary.dump(2).c_str());
}

const std::map<std::string, void (*)(const std::vector<std::string>&, io::RunManifest&)>& recipes() {
  static const std::map<std::string, void (*)(const std::vector<std::string>&, io::RunManifest&)> table{
      {"ab-ring", ab_ring},
      {"flux-velocity-sweep", flux_velocity_sweep},
      {"bloch-oscillation", bloch_oscillation},
      {"triangular-ed", triangular_ed},
      {"spacer-ladder", spacer_ladder},
      {"appendix-a-equivalence", appendix_a},
      {"scaling-law", scaling_law}};
  return table;
}

}  // namespace

std::vector<std::string> experiment_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : recipes()) names.push_back(k);
  return names;
}

void run_experiment(const std::string& name, const std::vector<std::string>& args, io::RunManifest& manifest) {
  const auto it = recipes().find(name);
  if (it == recipes().end()) {
    std::string known;
    for (const auto& n : experiment_names()) known += " " + n;
    throw UsageError("unknown experiment '" + name + "'; known:" + known);
  }
  it->second(args, manifest);
}

}  // namespace ionsim::cli
