// ionsim command-line front end. Frequencies in files and flags are Hz; site
// labels are 1-based. Exit codes: 0 success, 2 usage or schema error, 3
// numerical failure.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "ionsim/dynamics.hpp"
#include "ionsim/effective.hpp"
#include "ionsim/geometry.hpp"
#include "ionsim/io.hpp"
#include "ionsim/magnus.hpp"
#include "ionsim/scheduler.hpp"

namespace ionsim::cli {
namespace {

using io::from_hz;
using io::to_hz;

json option_values(const CLI::App& app) {
  json out = json::object();
  for (const auto* opt : app.get_options()) {
    const auto name = opt->get_name();
    if (name.empty() || name == "--help" || name == "-h") continue;
    if (opt->count() > 0) {
      const auto& r = opt->results();
      out[name] = r.size() == 1 ? json(r.front()) : json(r);
    } else if (!opt->get_default_str().empty()) {
      out[name] = opt->get_default_str();
    }
  }
  return out;
}

// ---- compile ----

struct CompileArgs {
  std::string spec_file, geometry, out = "terms.json";
  int n = 0, rows = 0, cols = 0, w = 0, h = 0;
  double loop_flux = 0, rate_hz = 1, j1_hz = 1, j2_hz = 1, j2_over_j1 = 0, phi1 = 0, phi2 = 0;
  double flux = 0, flux1 = 0, flux2 = 0;
};

void run_compile(const CLI::App& app, const CompileArgs& a, io::RunManifest& m) {
  json spec;
  if (!a.spec_file.empty()) {
    if (!a.geometry.empty()) throw UsageError("give either --spec or --geometry");
    m.add_input(a.spec_file);
    spec = io::read_json(a.spec_file);
  } else {
    if (a.geometry.empty()) throw UsageError("give --spec FILE or --geometry NAME");
    spec["geometry"] = a.geometry;
    auto set = [&](const char* flag, const char* key, const json& v) {
      if (app.get_option(flag)->count() > 0) spec[key] = v;
    };
    set("--n", "n", a.n);
    set("--loop-flux", "loop_flux", a.loop_flux);
    set("--rate-hz", "rate_hz", a.rate_hz);
    set("--j1-hz", "j1_hz", a.j1_hz);
    set("--j2-hz", "j2_hz", a.j2_hz);
    set("--j2-over-j1", "j2_over_j1", a.j2_over_j1);
    set("--phi1", "phi1", a.phi1);
    set("--phi2", "phi2", a.phi2);
    set("--rows", "rows", a.rows);
    set("--cols", "cols", a.cols);
    set("--flux", "flux", a.flux);
    set("--w", "w", a.w);
    set("--h", "h", a.h);
    set("--flux1", "flux1", a.flux1);
    set("--flux2", "flux2", a.flux2);
  }
  const GeometrySpec g = io::geometry_from_json(spec);
  const CompiledGeometry c = compile(g);
  json doc = io::terms_to_json(c, geometry_name(g));
  doc["source"] = io::geometry_to_json(g);
  write_json_artifact(a.out, doc, m);
  std::printf("compiled %s: %d ions, %zu terms, %zu spacers -> %s\n", geometry_name(g).c_str(), c.n_ions,
              c.terms.size(), c.spacers.size(), a.out.c_str());
}

// ---- schedule ----

struct ScheduleArgs {
  std::string terms_file, out = "schedule.json";
  ChainOptions chain;
  double alpha = 20.0;
  double beta = 0.0;
  std::vector<std::string> xi;
  std::string epsilon = "auto";
  std::vector<double> delta_hz;
  bool no_red = false, no_correction = false, stark_only = false, reduce = false;
  double red_phase_offset = 0.0, margin = 20.0, amplitude_cap = 0.1, reduce_tolerance = 1e-6;
  long strobe_bound = 64;
};

void run_schedule(const ScheduleArgs& a, io::RunManifest& m) {
  m.add_input(a.terms_file);
  CompiledGeometry g = io::terms_from_json(io::read_json(a.terms_file));
  validate_terms(g.terms, g.n_ions);
  const ChainConfig chain = a.chain.build(g.n_ions, g.spacers, m);

  if (!a.delta_hz.empty()) {
    if (a.delta_hz.size() != g.terms.size()) throw UsageError("--delta needs one value per term");
    for (std::size_t i = 0; i < g.terms.size(); ++i) g.terms[i].detuning = from_hz(a.delta_hz[i]);
  }
  if (a.beta > 0) {
    double top = 0;
    for (const auto& t : g.terms) top = std::max(top, std::abs(t.rate));
    if (top <= 0) throw UsageError("--beta needs a non-zero rate");
    const double scale = chain.gradient / a.beta / top;
    for (auto& t : g.terms) t.rate *= scale;
  }

  ScheduleKnobs k;
  k.alpha = a.alpha;
  k.include_red = !a.no_red;
  k.red_phase_offset = a.red_phase_offset;
  k.correct_gradient = !a.no_correction;
  k.slow_shift_correction = !a.stark_only;
  k.margin_ratio = a.margin;
  k.amplitude_cap = a.amplitude_cap;
  k.strobe_bound = a.strobe_bound;
  if (!(a.xi.size() == 1 && a.xi[0] == "auto") && !a.xi.empty()) {
    if (a.xi.size() != g.terms.size()) throw UsageError("--xi needs 'auto' or one value per term");
    for (const auto& v : a.xi) {
      try {
        k.xi.push_back(from_hz(std::stod(v)));
      } catch (const std::exception&) {
        throw UsageError("cannot parse --xi value '" + v + "'");
      }
    }
  }
  if (a.epsilon != "auto") {
    try {
      k.epsilon = from_hz(std::stod(a.epsilon));
    } catch (const std::exception&) {
      throw UsageError("--epsilon must be 'auto' or a frequency in Hz");
    }
  }

  const DriveSchedule s =
      a.reduce ? reduce_tones(g.terms, chain, k, a.reduce_tolerance) : schedule(g.terms, chain, k);
  const AdiabaticityReport r = validate(s, chain, a.margin);
  write_json_artifact(a.out, io::schedule_to_json(s, chain, &r), m);
  std::printf("schedule: %zu tones, alpha=%.4g beta=%.4g, T=%s, margins %s -> %s\n", s.tones.size(), r.alpha,
              r.beta, s.strobe ? (std::to_string(s.strobe->period) + " s").c_str() : "none",
              r.ok() ? "pass" : "flagged", a.out.c_str());
  for (const auto& f : r.flags) std::printf("  flag: %s\n", f.c_str());
}

// ---- validate ----

struct ValidateArgs {
  std::string schedule_file, out = "report.json";
  double margin = 20.0;
  bool strict = false;
};

int run_validate(const ValidateArgs& a, io::RunManifest& m) {
  m.add_input(a.schedule_file);
  const json doc = io::read_json(a.schedule_file);
  const DriveSchedule s = io::schedule_from_json(doc);
  const ChainConfig chain = io::schedule_chain(doc);
  const AdiabaticityReport r = validate(s, chain, a.margin);
  json out = io::report_to_json(r);
  out["schema_version"] = io::kSchemaVersion;
  out["kind"] = "adiabaticity_report";
  write_json_artifact(a.out, out, m);
  std::printf("validate: alpha=%.4g beta=%.4g worst census ratio %.4g, %zu flags -> %s\n", r.alpha, r.beta,
              r.worst_census_ratio, r.flags.size(), a.out.c_str());
  for (const auto& f : r.flags) std::printf("  flag: %s\n", f.c_str());
  return (a.strict && !r.ok()) ? kExitNumerical : kExitOk;
}

// ---- simulate / compare ----

struct RunArgs {
  std::string schedule_file, out;
  std::string init = "single:1", phonons = "ground";
  std::uint64_t seed = 0;
  int periods = 0, every = 1, samples = 100, cutoff = 0;
  double t_final = 0.0, tol = 1e-9, leakage = 1e-6;
  bool no_rerun = false, effective = false;
  std::string snapshots, frame = "stark", full_out;
};

EffectiveModel model_from_schedule(const DriveSchedule& s) {
  EffectiveModel m;
  m.n_sites = s.n_ions;
  m.spacers = s.spacers;
  for (const auto& t : s.terms) m.terms.push_back({t.n, t.rate, t.phase, t.delta});
  return m;
}

struct Loaded {
  DriveSchedule sched;
  ChainConfig chain;
};

Loaded load_schedule(const RunArgs& a, io::RunManifest& m) {
  m.add_input(a.schedule_file);
  const json doc = io::read_json(a.schedule_file);
  Loaded l{io::schedule_from_json(doc), io::schedule_chain(doc)};
  if (a.cutoff > 0) l.chain.fock_cutoff = a.cutoff;
  return l;
}

SimulationResult run_full(const Loaded& l, const InitialState& init, const std::vector<double>& times,
                          const RunArgs& a) {
  SimulationOptions so;
  so.integrator.tol = a.tol;
  so.leakage_threshold = a.leakage;
  so.allow_rerun = !a.no_rerun;
  SimulationResult res = simulate(l.sched, l.chain, init, times, so);
  const auto& best = res.best();
  if (best.stats.max_top_fock > a.leakage)
    throw NumericalError("Fock leakage " + std::to_string(best.stats.max_top_fock) + " above threshold " +
                         std::to_string(a.leakage) + " at cutoff " + std::to_string(best.stats.fock_cutoff) +
                         "; raise --cutoff");
  return res;
}

json stats_json(const IntegratorStats& s) {
  return {{"steps", s.steps},         {"rejected", s.rejected},         {"rhs_evaluations", s.rhs_evaluations},
          {"max_top_fock", s.max_top_fock}, {"norm_drift", s.norm_drift}, {"fock_cutoff", s.fock_cutoff}};
}

void run_simulate(const RunArgs& a, io::RunManifest& m) {
  const Loaded l = load_schedule(a, m);
  m.seed = a.seed;
  const InitialState init = parse_initial_state(a.init, a.phonons, a.seed, l.sched.n_ions);
  const auto times = sample_times(l.sched, a.periods, a.every, a.t_final, a.samples);
  Trajectory traj;
  json diag;
  if (a.effective) {
    traj = evolve_effective(model_from_schedule(l.sched), initial_spin_state(init, l.sched.n_ions), times);
    diag = {{"model", "effective"}};
  } else {
    SimulationResult res = run_full(l, init, times, a);
    diag = {{"model", "full"}, {"stats", stats_json(res.best().stats)}, {"rerun", res.rerun.has_value()}};
    traj = res.best();
  }
  if (init.kind == InitialState::Kind::wave_packet) {
    const PhaseTrack pt = phase_track(traj);
    diag["phase_track"] = {{"velocity_hz", to_hz(pt.velocity)},
                           {"ci95_hz", to_hz(pt.ci95)},
                           {"profile_mismatch", pt.profile_mismatch}};
    std::printf("packet angular velocity %.6g Hz (+- %.2g)\n", to_hz(pt.velocity), to_hz(pt.ci95));
  }
  write_csv_artifact(a.out, io::trajectory_csv(traj), m, diag);
  if (!a.snapshots.empty()) {
    json snaps = io::snapshots_to_json(traj);
    snaps["basis"] = {{"n_ions", l.sched.n_ions},
                      {"n_modes", a.effective ? 0 : static_cast<int>(l.chain.modes.size())},
                      {"fock_cutoff", a.effective ? 0 : traj.stats.fock_cutoff}};
    write_json_artifact(a.snapshots, snaps, m);
  }
  std::printf("simulate: %zu samples -> %s\n", traj.times.size(), a.out.c_str());
}

int run_compare(const RunArgs& a, io::RunManifest& m) {
  const Loaded l = load_schedule(a, m);
  m.seed = a.seed;
  const InitialState init = parse_initial_state(a.init, a.phonons, a.seed, l.sched.n_ions);
  const auto times = sample_times(l.sched, a.periods, a.every, a.t_final, a.samples);
  const SimulationResult res = run_full(l, init, times, a);
  const Trajectory& full = res.best();
  const Trajectory eff =
      evolve_effective(model_from_schedule(l.sched), initial_spin_state(init, l.sched.n_ions), times);
  FrameCorrection frame;
  if (a.frame == "stark") frame = frame_from_schedule(l.sched);
  else if (a.frame != "none") throw UsageError("--frame must be stark or none");
  ChainConfig used = l.chain;
  used.fock_cutoff = full.stats.fock_cutoff;
  const Comparison c = compare(full, Basis(used), eff, frame);

  std::ostringstream csv;
  csv << std::setprecision(12) << "t,fidelity,overlap,pe_distance\n";
  for (std::size_t i = 0; i < c.times.size(); ++i)
    csv << c.times[i] << ',' << c.fidelity[i] << ',' << c.overlap[i] << ',' << c.pe_distance[i] << '\n';
  json diag = {{"min_fidelity", c.min_fidelity()},
               {"max_pe_distance", c.max_distance()},
               {"stats", stats_json(full.stats)}};
  write_csv_artifact(a.out, csv.str(), m, diag);
  if (!a.full_out.empty()) {
    io::RunManifest mf = m;
    write_csv_artifact(a.full_out, io::trajectory_csv(full), mf, {{"model", "full"}});
  }
  std::printf("compare: min fidelity %.6f, max P_e distance %.3g -> %s\n", c.min_fidelity(), c.max_distance(),
              a.out.c_str());
  return kExitOk;
}

// ---- verify-magnus ----

struct MagnusArgs {
  std::string schedule_file, out = "magnus.json";
  ChainOptions chain;
  int n = 3, range = 1;
  double alpha = 20.0, beta = 40.0, phase = 0.0;
  bool red = false;
  double threshold = 1e-4, chi1_threshold = 1e-8, first_order_threshold = 0.0;
  double tolerance = 1e-10;
};

int run_verify_magnus(const MagnusArgs& a, io::RunManifest& m) {
  DriveSchedule s;
  ChainConfig chain;
  if (!a.schedule_file.empty()) {
    m.add_input(a.schedule_file);
    const json doc = io::read_json(a.schedule_file);
    s = io::schedule_from_json(doc);
    chain = io::schedule_chain(doc);
  } else {
    chain = a.chain.build(a.n, {}, m);
    if (a.beta <= 0) throw UsageError("--beta must be positive");
    ScheduleKnobs k;
    k.alpha = a.alpha;
    k.include_red = a.red;
    k.correct_gradient = false;
    s = schedule({{a.range, chain.gradient / a.beta, a.phase, 0.0}}, chain, k);
  }
  MagnusOptions mo;
  mo.tolerance = a.tolerance;
  const MagnusReport r = verify_magnus(s, chain, mo);
  json doc = io::magnus_report_to_json(r);
  doc["thresholds"] = {{"closed_form", a.threshold},
                       {"chi1_relative", a.chi1_threshold},
                       {"first_order", a.first_order_threshold}};
  bool pass = r.max_closed_residual <= a.threshold && r.chi1_relative <= a.chi1_threshold;
  if (a.first_order_threshold > 0) pass = pass && r.max_first_order_residual <= a.first_order_threshold;
  doc["pass"] = pass;
  write_json_artifact(a.out, doc, m);
  std::printf("verify-magnus: closed-form residual %.3g (threshold %.3g), chi1 %.3g (threshold %.3g), "
              "first-order residual %.3g -> %s\n",
              r.max_closed_residual, a.threshold, r.chi1_relative, a.chi1_threshold, r.max_first_order_residual,
              pass ? "pass" : "FAIL");
  return pass ? kExitOk : kExitNumerical;
}

// ---- replay ----

std::vector<std::string> replay_arguments(const std::string& file, const std::vector<std::string>& extra) {
  const auto m = io::RunManifest::from_json(io::read_json(file));
  for (const auto& [path, hash] : m.inputs) {
    const auto now = io::hex64(io::fnv1a64(io::read_file(path)));
    if (now != hash) throw io::SchemaError("input " + path + " changed since the recorded run (" + hash + " -> " + now + ")");
  }
  std::vector<std::string> args = m.argv;
  args.insert(args.end(), extra.begin(), extra.end());
  return args;
}

int run(std::vector<std::string> args) {
  if (args.size() >= 2 && args[0] == "--manifest")
    args = replay_arguments(args[1], {args.begin() + 2, args.end()});

  CLI::App app{"Trapped-ion synthetic gauge field simulator. Frequencies are in Hz, sites are 1-based.", "ionsim"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  std::string manifest_dummy;
  app.add_option("--manifest", manifest_dummy, "Replay the run recorded in a manifest file (must come first)");

  io::RunManifest manifest;
  manifest.argv = args;
  int code = kExitOk;

  CompileArgs ca;
  auto* compile_cmd = app.add_subcommand("compile", "Compile a geometry into hopping terms");
  compile_cmd->set_help_flag("--help", "Print this help message and exit");
  compile_cmd->add_option("--spec", ca.spec_file, "Geometry file (JSON)")->check(CLI::ExistingFile);
  compile_cmd->add_option("--geometry", ca.geometry, "ring, triangular, rectangular, cylinder, mobius, helix, torus");
  compile_cmd->add_option("--n", ca.n, "Number of ions");
  compile_cmd->add_option("--loop-flux", ca.loop_flux, "Ring loop flux, rad");
  compile_cmd->add_option("--rate-hz", ca.rate_hz, "Hop rate, Hz");
  compile_cmd->add_option("--j1-hz", ca.j1_hz, "Triangular ladder rung coupling, Hz");
  compile_cmd->add_option("--j2-hz", ca.j2_hz, "Triangular ladder leg coupling, Hz");
  compile_cmd->add_option("--j2-over-j1", ca.j2_over_j1, "Triangular ladder coupling ratio j");
  compile_cmd->add_option("--phi1", ca.phi1, "Triangular ladder phase of the n=1 term, rad");
  compile_cmd->add_option("--phi2", ca.phi2, "Triangular ladder phase of the n=2 term, rad");
  compile_cmd->add_option("--rows", ca.rows, "Lattice rows");
  compile_cmd->add_option("--cols", ca.cols, "Lattice columns");
  compile_cmd->add_option("--flux", ca.flux, "Cylinder flux, rad");
  compile_cmd->add_option("--w", ca.w, "Helix/torus width");
  compile_cmd->add_option("--h", ca.h, "Helix/torus height");
  compile_cmd->add_option("--flux1", ca.flux1, "Torus flux through the first cycle, rad");
  compile_cmd->add_option("--flux2", ca.flux2, "Torus flux through the second cycle, rad");
  compile_cmd->add_option("--out", ca.out, "Output terms file")->capture_default_str();

  ScheduleArgs sa;
  auto* schedule_cmd = app.add_subcommand("schedule", "Synthesize the drive tones for a terms file");
  schedule_cmd->add_option("--terms", sa.terms_file, "Terms file")->required()->check(CLI::ExistingFile);
  sa.chain.add(*schedule_cmd);
  schedule_cmd->add_option("--alpha", sa.alpha, "xi = alpha N Delta for the automatic layout")->capture_default_str();
  schedule_cmd->add_option("--beta", sa.beta, "Rescale rates so the largest equals Delta/beta");
  schedule_cmd->add_option("--xi", sa.xi, "'auto' or one detuning per term, Hz")->delimiter(',');
  schedule_cmd->add_option("--epsilon", sa.epsilon, "'auto' or the red/blue asymmetry, Hz")->capture_default_str();
  schedule_cmd->add_option("--delta", sa.delta_hz, "Per-term phase-rate delta_n, Hz")->delimiter(',');
  schedule_cmd->add_flag("--no-red", sa.no_red, "Blue sideband pairs only");
  schedule_cmd->add_option("--red-phase-offset", sa.red_phase_offset, "Extra phase of the red pair, rad");
  schedule_cmd->add_flag("--no-gradient-correction", sa.no_correction, "Keep the bare tone splittings");
  schedule_cmd->add_flag("--stark-only", sa.stark_only, "Correct only the ground-state Stark gradient");
  schedule_cmd->add_flag("--reduce", sa.reduce, "Use a shared-tone comb");
  schedule_cmd->add_option("--reduce-tolerance", sa.reduce_tolerance, "Residual allowed for the comb")->capture_default_str();
  schedule_cmd->add_option("--margin", sa.margin, "Required adiabaticity margin")->capture_default_str();
  schedule_cmd->add_option("--amplitude-cap", sa.amplitude_cap, "Tone Rabi cap as a fraction of the mode frequency")->capture_default_str();
  schedule_cmd->add_option("--strobe-bound", sa.strobe_bound, "Largest m searched for the period")->capture_default_str();
  schedule_cmd->add_option("--out", sa.out, "Output schedule file")->capture_default_str();

  ValidateArgs va;
  auto* validate_cmd = app.add_subcommand("validate", "Adiabaticity and resonance report for a schedule");
  validate_cmd->add_option("--schedule", va.schedule_file, "Schedule file")->required()->check(CLI::ExistingFile);
  validate_cmd->add_option("--margin", va.margin, "Required adiabaticity margin")->capture_default_str();
  validate_cmd->add_option("--out", va.out, "Output report")->capture_default_str();
  validate_cmd->add_flag("--strict", va.strict, "Exit 3 when any margin is flagged");

  RunArgs ra;
  ra.out = "trajectory.csv";
  auto add_run_options = [](CLI::App* cmd, RunArgs& r) {
    cmd->add_option("--schedule", r.schedule_file, "Schedule file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--init", r.init, "single:S, packet:K[:PHI0] or bits:B")->capture_default_str();
    cmd->add_option("--phonons", r.phonons, "ground, fock:N or thermal:NBAR")->capture_default_str();
    cmd->add_option("--seed", r.seed, "Seed for thermal sampling")->capture_default_str();
    cmd->add_option("--periods", r.periods, "Number of stroboscopic periods to run");
    cmd->add_option("--every", r.every, "Sample every k periods")->capture_default_str();
    cmd->add_option("--t-final", r.t_final, "Final time, s (when --periods is not given)");
    cmd->add_option("--samples", r.samples, "Uniform samples with --t-final")->capture_default_str();
    cmd->add_option("--tol", r.tol, "Integrator tolerance")->check(CLI::Range(1e-12, 1e-4))->capture_default_str();
    cmd->add_option("--leakage", r.leakage, "Top Fock population threshold")->capture_default_str();
    cmd->add_option("--cutoff", r.cutoff, "Override the Fock cutoff");
    cmd->add_flag("--no-rerun", r.no_rerun, "Do not repeat at a higher cutoff on leakage");
    cmd->add_option("--out", r.out, "Output CSV")->capture_default_str();
  };
  auto* simulate_cmd = app.add_subcommand("simulate", "Integrate the full spin-phonon dynamics");
  add_run_options(simulate_cmd, ra);
  simulate_cmd->add_flag("--effective", ra.effective, "Evolve the ideal effective spin model instead");
  simulate_cmd->add_option("--snapshots", ra.snapshots, "Also write state amplitudes (JSON)");

  RunArgs ca2;
  ca2.out = "compare.csv";
  auto* compare_cmd = app.add_subcommand("compare", "Full versus effective dynamics at the sample times");
  add_run_options(compare_cmd, ca2);
  compare_cmd->add_option("--frame", ca2.frame, "stark or none")->capture_default_str();
  compare_cmd->add_option("--full-out", ca2.full_out, "Also write the full trajectory CSV");

  MagnusArgs ma;
  auto* magnus_cmd = app.add_subcommand("verify-magnus", "Numeric Magnus terms versus closed forms");
  magnus_cmd->add_option("--schedule", ma.schedule_file, "Single-term schedule file")->check(CLI::ExistingFile);
  ma.chain.add(*magnus_cmd);
  magnus_cmd->add_option("--n", ma.n, "Number of ions")->capture_default_str();
  magnus_cmd->add_option("--range", ma.range, "Hop range of the single term")->capture_default_str();
  magnus_cmd->add_option("--alpha", ma.alpha, "xi = alpha N Delta")->capture_default_str();
  magnus_cmd->add_option("--beta", ma.beta, "Delta / Omega_n")->capture_default_str();
  magnus_cmd->add_option("--phase", ma.phase, "Term phase, rad")->capture_default_str();
  magnus_cmd->add_flag("--red", ma.red, "Add the red sideband pair");
  magnus_cmd->add_option("--threshold", ma.threshold, "Closed-form relative residual threshold")->capture_default_str();
  magnus_cmd->add_option("--chi1-threshold", ma.chi1_threshold, "First Magnus term threshold")->capture_default_str();
  magnus_cmd->add_option("--first-order-threshold", ma.first_order_threshold, "First-order expansion threshold (0 = report only)");
  magnus_cmd->add_option("--quadrature-tol", ma.tolerance, "Quadrature refinement tolerance")->capture_default_str();
  magnus_cmd->add_option("--out", ma.out, "Output report")->capture_default_str();

  std::string experiment_name;
  auto* experiment_cmd = app.add_subcommand("experiment", "Figure-data recipes");
  experiment_cmd->add_option("name", experiment_name, "Recipe name")->required();
  experiment_cmd->allow_extras();
  experiment_cmd->prefix_command();

  std::vector<const char*> argv{"ionsim"};
  for (const auto& s : args) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  auto* sub = app.get_subcommands().front();
  manifest.subcommand = sub->get_name();
  manifest.parameters = option_values(*sub);

  if (sub == compile_cmd) run_compile(*compile_cmd, ca, manifest);
  else if (sub == schedule_cmd) run_schedule(sa, manifest);
  else if (sub == validate_cmd) code = run_validate(va, manifest);
  else if (sub == simulate_cmd) run_simulate(ra, manifest);
  else if (sub == compare_cmd) code = run_compare(ca2, manifest);
  else if (sub == magnus_cmd) code = run_verify_magnus(ma, manifest);
  else if (sub == experiment_cmd) {
    manifest.parameters = {{"name", experiment_name}, {"args", experiment_cmd->remaining()}};
    run_experiment(experiment_name, experiment_cmd->remaining(), manifest);
  }
  return code;
}

}  // namespace
}  // namespace ionsim::cli

int main(int argc, char** argv) {
  using namespace ionsim;
  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    return cli::run(args);
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return cli::kExitNumerical;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return cli::kExitUsage;
  } catch (const CLI::Error& e) {
    if (e.get_exit_code() == 0) return cli::kExitOk;
    std::cerr << "usage error: " << e.what() << '\n';
    return cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "failure: " << e.what() << '\n';
    return cli::kExitNumerical;
  }
}
