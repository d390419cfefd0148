// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 when any fails.
// Usage: acceptance [criterion numbers...]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "ionsim/dynamics.hpp"
#include "ionsim/effective.hpp"
#include "ionsim/geometry.hpp"
#include "ionsim/magnus.hpp"
#include "ionsim/scheduler.hpp"

using namespace ionsim;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kDelta = 2 * kPi * 1000.0;
constexpr double kNu = 2 * kPi * 1.0e6;
constexpr double kEta = 0.1;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

std::vector<double> eigenvalues(const Mat& h) {
  const auto v = diagonalize(h).values;
  return {v.data(), v.data() + v.size()};
}

double max_sorted_difference(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) return INFINITY;
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---- 1 ----

Outcome ring_spectrum_check() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double rate = 0.7;
  double worst = 0.0;
  for (int n : {5, 8, 12})
    for (int draw = 0; draw < 10; ++draw) {
      const double flux = u(rng);
      std::vector<double> expect;
      for (int k = 0; k < n; ++k) expect.push_back(2 * rate * std::cos(2 * kPi * (k + flux) / n));
      const auto ed = eigenvalues(build_h_eff(ring_model(n, 2 * kPi * flux, rate), Sector(n, 1)));
      worst = std::max(worst, max_sorted_difference(ed, expect));
    }
  const double secs = seconds_since(t0);
  return {worst <= 1e-10 && secs < 1.0, fmt("max |E_ed - E_k| = %.2e over N=5,8,12 x 10 fluxes, %.3f s", worst, secs)};
}

// ---- 2 ----

std::vector<double> free_fermion_levels(int n, double flux, int n_exc, double rate) {
  // parity-dependent boundary twist: odd excitation number keeps the flux, even adds half a quantum
  const double twist = flux + (n_exc % 2 == 0 ? 0.5 : 0.0);
  std::vector<double> single(n);
  for (int m = 0; m < n; ++m) single[m] = 2 * rate * std::cos(2 * kPi * (m + twist) / n);
  std::vector<double> out;
  std::vector<int> pick(n, 0);
  std::fill(pick.begin(), pick.begin() + n_exc, 1);
  std::sort(pick.begin(), pick.end());
  do {
    double e = 0.0;
    for (int m = 0; m < n; ++m)
      if (pick[m]) e += single[m];
    out.push_back(e);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return out;
}

Outcome jordan_wigner_check() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937 rng(202);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  double worst = 0.0;
  int spectra = 0;
  for (int draw = 0; draw < 5; ++draw) {
    const double flux = u(rng);
    for (int n = 3; n <= 8; ++n) {
      const auto model = ring_model(n, 2 * kPi * flux, 1.0);
      for (int k = 0; k <= n; ++k) {
        const auto ed = eigenvalues(build_h_eff(model, Sector(n, k)));
        worst = std::max(worst, max_sorted_difference(ed, free_fermion_levels(n, flux, k, 1.0)));
        ++spectra;
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= 1e-9 && secs < 30.0, fmt("%d sector spectra, max deviation %.2e, %.2f s", spectra, worst, secs)};
}

// ---- 3 ----

/// int_0^T e^{i x t} dt
cplx integral_e(double x, double T) {
  if (std::abs(x) * T < 1e-9) return {T, 0.5 * x * T * T};
  return (std::polar(1.0, x * T) - 1.0) / cplx(0.0, x);
}

/// int_0^T t e^{i x t} dt
cplx integral_te(double x, double T) {
  if (std::abs(x) * T < 1e-9) return {0.5 * T * T, x * T * T * T / 3.0};
  const cplx ix(0.0, x);
  return T * std::polar(1.0, x * T) / ix - (std::polar(1.0, x * T) - 1.0) / (ix * ix);
}

/// int_0^T dt1 int_0^t1 dt2 e^{i a t1} e^{i b t2}
cplx nested_integral(double a, double b, double T) {
  if (std::abs(b) * T < 1e-9) return integral_te(a, T);
  return (integral_e(a + b, T) - integral_e(a, T)) / cplx(0.0, b);
}

/// Exact first and second Magnus terms of a sum-of-exponentials drive.
std::pair<Mat, Mat> exact_magnus(const DriveSchedule& s, const ChainConfig& c, const Basis& b, double T) {
  std::vector<Mat> ops;
  std::vector<double> freqs;
  for (int site = 0; site < c.n_ions; ++site)
    for (int l = 0; l < static_cast<int>(c.modes.size()); ++l)
      for (const auto& t : s.tones) {
        const bool blue = t.sideband == Sideband::blue;
        const Mat x = ladder_matrix(b, LadderKind::spin_raise, site) *
                      ladder_matrix(b, blue ? LadderKind::phonon_raise : LadderKind::phonon_lower, l);
        const cplx amp = cplx(0.0, 0.5 * c.modes[l].lamb_dicke[site] * t.amplitude) * std::polar(1.0, -t.phase);
        const double w = (site + 1) * c.gradient + (blue ? 1 : -1) * c.modes[l].frequency - t.detuning;
        ops.push_back(amp * x);
        freqs.push_back(w);
        ops.push_back(Mat((amp * x).adjoint()));
        freqs.push_back(-w);
      }
  const auto dim = static_cast<Eigen::Index>(b.dimension());
  Mat chi1 = Mat::Zero(dim, dim), chi2 = Mat::Zero(dim, dim);
  for (std::size_t p = 0; p < ops.size(); ++p) {
    chi1 += integral_e(freqs[p], T) * ops[p];
    for (std::size_t q = 0; q < ops.size(); ++q) {
      const cplx j = nested_integral(freqs[p], freqs[q], T);
      chi2 += j * (ops[p] * ops[q] - ops[q] * ops[p]);
    }
  }
  return {chi1, cplx(0.0, -1.0) * chi2};
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

DriveSchedule single_pair(const ChainConfig& chain, int n, double alpha, bool red) {
  ScheduleKnobs k;
  k.alpha = alpha;
  k.include_red = red;
  k.correct_gradient = false;
  return schedule({{n, chain.gradient / 40, 0.4, 0.0}}, chain, k);
}

Outcome magnus_oracle_check() {
  const auto chain = ChainConfig::com_mode(3, kDelta, kNu, kEta, 2);
  const Basis basis(chain);
  double chi1_worst = 0.0, numeric_worst = 0.0, closed_worst = 0.0, shrink_min = INFINITY;
  for (int n : {1, 2}) {
    const auto s = single_pair(chain, n, 20.0, false);
    const double T = s.strobe->period;
    const auto m = magnus_terms(s, chain, basis, T);
    const auto [x1, x2] = exact_magnus(s, chain, basis, T);
    chi1_worst = std::max(chi1_worst, m.chi1.norm() / (kEta * s.terms[0].omega_blue * T));
    const auto cf = closed_form(s, T);
    for (int k = 0; k + n < 3; ++k) {
      const cplx exact = hop_coefficient(x2, basis, k, k + n);
      numeric_worst = std::max(numeric_worst, rel(hop_coefficient(m.chi2, basis, k, k + n), exact));
      closed_worst = std::max(closed_worst, rel(cf.hop[k], exact));
    }
    for (int k = 0; k < 3; ++k) {
      const double exact = sz_coefficient(x2, basis, k);
      numeric_worst = std::max(numeric_worst, rel(sz_coefficient(m.chi2, basis, k), exact));
      closed_worst = std::max(closed_worst, rel(cf.sz[k], exact));
    }
    const auto r20 = verify_magnus(s, chain);
    const auto r40 = verify_magnus(single_pair(chain, n, 40.0, false), chain);
    shrink_min = std::min(shrink_min, r20.max_first_order_residual / r40.max_first_order_residual);
  }
  const bool pass = chi1_worst <= 1e-8 && numeric_worst <= 1e-4 && closed_worst <= 1e-4 && shrink_min >= 3.0;
  return {pass, fmt("|chi1|/(eta Om_b T) = %.1e, numeric vs exact %.1e, closed form vs exact %.1e, "
                    "first-order residual shrink at 2 alpha %.2fx",
                    chi1_worst, numeric_worst, closed_worst, shrink_min)};
}

// ---- 4 ----

Outcome red_cancellation_check() {
  const auto chain = ChainConfig::com_mode(3, kDelta, kNu, kEta, 2);
  const Basis basis(chain);
  // least-squares line c(k) = A + B k over 1-based sites; A is the uniform part
  auto uniform_sz = [&](bool red, double* worst_site) {
    const auto s = single_pair(chain, 1, 20.0, red);
    const auto m = magnus_terms(s, chain, basis, s.strobe->period);
    double sk = 0, sc = 0, skk = 0, skc = 0;
    *worst_site = 0.0;
    for (int k = 1; k <= 3; ++k) {
      const double c = sz_coefficient(m.chi2, basis, k - 1) / s.strobe->period;
      sk += k, sc += c, skk += k * k, skc += k * c;
      *worst_site = std::max(*worst_site, std::abs(c));
    }
    const double slope = (3 * skc - sk * sc) / (3 * skk - sk * sk);
    return std::abs((sc - slope * sk) / 3);
  };
  double site_blue = 0.0, site_both = 0.0;
  const double blue = uniform_sz(false, &site_blue);
  const double both = uniform_sz(true, &site_both);
  const double reduction = blue / both;

  const auto dyn_chain = ChainConfig::com_mode(3, kDelta, kNu, kEta, 4);
  auto fock_distance = [&](bool red) {
    ScheduleKnobs k;
    k.include_red = red;
    const auto s = schedule({{1, kDelta / 40, 0.3, 0.0}}, dyn_chain, k);
    const double T = s.strobe->period;
    const auto times = stroboscopic_times(T, static_cast<int>(std::ceil(2 * kPi / (kDelta / 40) / T)));
    SimulationOptions so;
    so.allow_rerun = false;
    InitialState a;
    a.phonons = InitialState::Phonons::fock;
    InitialState b = a;
    b.fock_n = 1;
    return max_pe_distance(simulate(s, dyn_chain, a, times, so).best(), simulate(s, dyn_chain, b, times, so).best());
  };
  const double d_both = fock_distance(true);
  const double d_blue = fock_distance(false);
  return {reduction >= 1e3 && d_both <= 1e-2,
          fmt("uniform sz(a^dag a + 1/2) reduced %.2ex (largest site coefficient %.1fx), Fock n=0 vs n=1 "
              "P_e distance %.4f with red (%.4f blue only)",
              reduction, site_blue / site_both, d_both, d_blue)};
}

// ---- 5 ----

EffectiveModel effective_of(const CompiledGeometry& g) {
  EffectiveModel m;
  m.n_sites = g.n_ions;
  m.terms = g.terms;
  m.spacers = g.spacers;
  return m;
}

Trajectory full_trajectory(const DriveSchedule& s, const ChainConfig& chain, const InitialState& init,
                           const std::vector<double>& times) {
  SimulationOptions so;
  const auto res = simulate(s, chain, init, times, so);
  return res.best();
}

Outcome flux_velocity_check() {
  const int n = 5;
  const double rate = kDelta / 40;
  const double vmax = 4 * rate * std::sin(kPi / n);
  const auto chain = ChainConfig::com_mode(n, kDelta, kNu, kEta, 2);
  InitialState packet;
  packet.kind = InitialState::Kind::wave_packet;
  double worst_full = 0.0, worst_eff = 0.0;
  std::ostringstream table;
  for (int i = 0; i < 9; ++i) {
    const double flux = i / 8.0;
    const auto g = compile(geometry::Ring{n, 2 * kPi * flux, rate});
    const auto s = schedule(g.terms, chain, {});
    const double T = s.strobe->period;
    const auto times = stroboscopic_times(T, static_cast<int>(std::ceil(2 * kPi / vmax / T)));
    // -4 Omega sin(pi/N) sin(2 pi (Phi - 1/2) / N) for the packet built from momenta 0 and -1
    const double v = -vmax * std::sin(2 * kPi * (flux - 0.5) / n);
    const double v_eff =
        phase_track(evolve_effective(effective_of(g), initial_spin_state(packet, n), times)).velocity;
    const double v_full = phase_track(full_trajectory(s, chain, packet, times)).velocity;
    worst_eff = std::max(worst_eff, std::abs(v_eff - v) / vmax);
    worst_full = std::max(worst_full, std::abs(v_full - v) / vmax);
    table << fmt(" %.3f:%+.3f/%+.3f", flux, v_full / vmax, v / vmax);
  }
  return {worst_full <= 1e-2 && worst_eff <= 1e-3,
          fmt("9 fluxes, |v - v_eq|/v_max: full %.3f, effective %.1e; v_full/v_eq in units of v_max:", worst_full,
              worst_eff) +
              table.str()};
}

// ---- 6 ----

double ring_infidelity(double alpha, double beta) {
  const int n = 5;
  const double rate = kDelta / beta;
  const double flux = 0.375;
  const auto g = compile(geometry::Ring{n, 2 * kPi * flux, rate});
  const auto chain = ChainConfig::com_mode(n, kDelta, kNu, kEta, 2);
  ScheduleKnobs k;
  k.alpha = alpha;
  const auto s = schedule(g.terms, chain, k);
  const double T = s.strobe->period;
  const double v = 4 * rate * std::sin(kPi / n) * std::abs(std::sin(2 * kPi * (flux - 0.5) / n));
  const auto times = stroboscopic_times(T, static_cast<int>(std::ceil(2 * kPi / v / T)));
  InitialState packet;
  packet.kind = InitialState::Kind::wave_packet;
  const auto full = full_trajectory(s, chain, packet, times);
  const auto eff = evolve_effective(effective_of(g), initial_spin_state(packet, n), times);
  auto used = chain;
  used.fock_cutoff = full.stats.fock_cutoff;
  return 1.0 - compare(full, Basis(used), eff, frame_from_schedule(s)).min_fidelity();
}

Outcome convergence_check() {
  std::vector<double> inf;
  std::string rungs;
  for (auto [a, b] : std::vector<std::pair<double, double>>{{20, 40}, {40, 80}, {80, 160}}) {
    inf.push_back(ring_infidelity(a, b));
    rungs += fmt(" (%g,%g): %.4f", a, b, inf.back());
  }
  const bool monotone = inf[1] < inf[0] && inf[2] < inf[1];
  return {1.0 - inf[0] >= 0.99 && monotone,
          fmt("min fidelity at alpha=20, beta=40: %.4f; infidelity ladder%s (%s)", 1.0 - inf[0], rungs.c_str(),
              monotone ? "decreasing" : "not decreasing")};
}

// ---- 7 ----

/// Hop rate J from P(t) = a + b cos(2 W t) + c sin(2 W t) with J = W sqrt(2 |(b, c)|).
double fitted_hop(const std::vector<double>& t, const std::vector<double>& p, double guess) {
  auto fit = [&](double w, double* amplitude) {
    Eigen::MatrixXd a(t.size(), 3);
    Eigen::VectorXd y(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
      a(i, 0) = 1.0;
      a(i, 1) = std::cos(2 * w * t[i]);
      a(i, 2) = std::sin(2 * w * t[i]);
      y[i] = p[i];
    }
    const Eigen::VectorXd x = a.colPivHouseholderQr().solve(y);
    if (amplitude) *amplitude = std::hypot(x[1], x[2]);
    return (a * x - y).squaredNorm();
  };
  double best = guess, best_res = INFINITY;
  for (int i = 0; i <= 400; ++i) {
    const double w = guess * (0.5 + i / 400.0);
    const double r = fit(w, nullptr);
    if (r < best_res) best_res = r, best = w;
  }
  double lo = best * (1 - 1.0 / 400), hi = best * (1 + 1.0 / 400);
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  for (int it = 0; it < 100; ++it) {
    const double m1 = hi - golden * (hi - lo), m2 = lo + golden * (hi - lo);
    if (fit(m1, nullptr) < fit(m2, nullptr)) hi = m2;
    else lo = m1;
  }
  double amplitude = 0.0;
  const double w = 0.5 * (lo + hi);
  fit(w, &amplitude);
  return w * std::sqrt(2.0 * amplitude);
}

Outcome appendix_a_check() {
  const int n = 3;
  const std::vector<int> offsets{0, 1, 2};
  const std::vector<double> phases{0.0, 0.0, 0.0};
  const std::vector<std::vector<double>> sets{{1, 1, 1}, {1, 2, 1}, {2, 1, 1}, {1, 1, 2}, {1, 0.5, 2}};
  const double xi = 20.0 * n * kDelta;
  const double unit_rate = kDelta / 80;  // per tone product at unit amplitudes
  std::vector<double> hop1, hop2, law1, law2;
  for (const auto& amp : sets) {
    law1.push_back(amp[0] * amp[1] + amp[1] * amp[2]);
    law2.push_back(amp[0] * amp[2]);
    for (int range : {1, 2}) {
      const auto chain = [&] {
        auto c = ChainConfig::com_mode(n, kDelta, kNu, kEta, 2);
        c.spacers = {range == 1 ? 2 : 1};
        return c;
      }();
      double eps = 1.25 * kDelta;
      DriveSchedule s;
      double scale = 0.0;
      for (int iter = 0; iter < 40; ++iter) {
        scale = std::sqrt(unit_rate * 2 * (xi + eps)) / kEta;
        std::vector<double> rabi;
        for (double a : amp) rabi.push_back(a * scale);
        s = shared_schedule(offsets, rabi, phases, chain, xi, eps, true);
        if (pair_line_distance(s) >= 2.0 * n * kDelta) break;
        eps += 0.5 * kDelta;
      }
      const double guess = unit_rate * (range == 1 ? law1.back() : law2.back());
      const int samples = 200;
      std::vector<double> times(samples + 1);
      for (int i = 0; i <= samples; ++i) times[i] = 1.5 * kPi / guess * i / samples;
      const auto tr = full_trajectory(s, chain, InitialState{}, times);
      std::vector<double> pe;
      for (const auto& r : tr.records) pe.push_back(r.p_excited[0]);
      (range == 1 ? hop1 : hop2).push_back(fitted_hop(times, pe, guess));
    }
  }
  double worst = 0.0;
  for (std::size_t i = 1; i < sets.size(); ++i) {
    worst = std::max(worst, std::abs((hop1[i] / hop1[0]) / (law1[i] / law1[0]) - 1.0));
    worst = std::max(worst, std::abs((hop2[i] / hop2[0]) / (law2[i] / law2[0]) - 1.0));
  }
  return {worst <= 0.05, fmt("extracted rate ratios versus amplitude-product ratios over %zu sets, max deviation %.4f "
                             "(range 1 unit-set rate %.3f Hz, range 2 %.3f Hz)",
                             sets.size(), worst, hop1[0] / (2 * kPi), hop2[0] / (2 * kPi))};
}

// ---- 8 ----

Outcome appendix_b_check() {
  auto chain = ChainConfig::com_mode(3, kDelta, kNu, kEta, 2);
  chain.modes.push_back({kNu + 10.37 * kDelta, {0.08, 0.0, -0.08}});
  ScheduleKnobs k;
  k.alpha = 20.0;
  k.include_red = false;
  k.correct_gradient = false;
  const auto s = schedule({{1, kDelta / 40, 0.2, 0.0}}, chain, k);
  const Basis basis(chain);
  MagnusOptions cross;
  cross.pairs = ModePairs::cross_mode;
  const Mat chi = magnus_terms(s, chain, basis, s.strobe->period, cross).chi2;
  // partial trace over the phonons: every spin operator projection of the inter-mode block
  const auto pd = static_cast<Eigen::Index>(basis.phonon_dimension());
  const auto sd = static_cast<Eigen::Index>(basis.spin_dimension());
  double worst = 0.0;
  for (Eigen::Index a = 0; a < sd; ++a)
    for (Eigen::Index b = 0; b < sd; ++b) {
      cplx tr{};
      for (Eigen::Index p = 0; p < pd; ++p) tr += chi(a * pd + p, b * pd + p);
      worst = std::max(worst, std::abs(tr) / static_cast<double>(pd));
    }
  const double scale = chi.cwiseAbs().maxCoeff();
  const double projection = worst / scale;

  const auto single = ChainConfig::com_mode(3, kDelta, kNu, kEta, 2);
  double b_err = 0.0;
  for (double xi_b : {5.0 * kDelta, 60.0 * kDelta, 1234.5 * kDelta}) {
    const auto m = multimode_b_matrix(single, kNu + xi_b);
    const double expect = kEta * kEta / (2.0 * xi_b);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) b_err = std::max(b_err, std::abs(m.b(i, j) - expect) / expect);
  }
  return {projection <= 1e-8 && scale > 0.0 && b_err <= 1e-13,
          fmt("inter-mode chi2 spin projection %.1e of its largest element %.2e; COM B matrix relative error %.1e",
              projection, scale, b_err)};
}

// ---- 9 ----

using CensusKey = std::tuple<std::string, int, int, int, int>;

std::map<CensusKey, double> census_oracle(const DriveSchedule& s, const ChainConfig& c, double margin) {
  std::map<CensusKey, double> out;
  auto w = [&](const Tone& t, int site) {
    const double side = t.sideband == Sideband::blue ? c.modes[s.mode].frequency : -c.modes[s.mode].frequency;
    return (site + 1) * c.gradient + side - t.detuning;
  };
  auto rate = [&](const Tone& a, const Tone& b) {
    return std::max(std::abs(s.terms[a.term].rate), std::abs(s.terms[b.term].rate));
  };
  for (std::size_t a = 0; a < s.tones.size(); ++a)
    for (std::size_t b = a; b < s.tones.size(); ++b) {
      const auto& ta = s.tones[a];
      const auto& tb = s.tones[b];
      const bool same = ta.sideband == tb.sideband;
      for (int i = 0; i < c.n_ions; ++i)
        for (int j = 0; j < c.n_ions; ++j) {
          if (same && a == b && i == j) continue;
          if (!same && i == j) continue;
          const double d = same ? std::abs(w(ta, i) - w(tb, j)) : std::abs(w(ta, i) + w(tb, j));
          if (same && d < 1e-6 * c.gradient) continue;  // the engineered hop
          if (d / rate(ta, tb) < margin)
            out[{same ? "hop" : "pair", static_cast<int>(a), static_cast<int>(b), i, j}] = d;
        }
    }
  return out;
}

Outcome scheduler_laws_check() {
  const auto g = compile(geometry::Ring{5, 0.6, kDelta / 40});
  const auto chain = ChainConfig::com_mode(5, kDelta, kNu, kEta, 2);
  ScheduleKnobs k;
  k.correct_gradient = false;
  const auto s = schedule(g.terms, chain, k);
  const double margin = 300.0;
  const auto expect = census_oracle(s, chain, margin);
  const auto got = resonance_census(s, margin);
  std::map<CensusKey, double> lib;
  for (const auto& e : got) lib[{e.kind, e.tone_a, e.tone_b, e.site_a, e.site_b}] = e.distance;
  bool same_set = lib.size() == expect.size();
  double dist_err = 0.0;
  for (const auto& [key, d] : expect) {
    const auto it = lib.find(key);
    if (it == lib.end()) {
      same_set = false;
      continue;
    }
    dist_err = std::max(dist_err, std::abs(it->second - d) / std::max(d, 1e-300));
  }

  const double alpha = 20.0, beta = 40.0, eta1 = 0.1, omega0 = 2 * kPi * 2.0e4;
  double ref = 0.0, law_err = 0.0, amp_ref = 0.0, amp_err = 0.0;
  for (int n = 3; n <= 10; ++n) {
    const auto d = scaling_design(n, alpha, beta, eta1, omega0);
    const auto c = ChainConfig::com_mode_single_ion(n, d.gradient, kNu, eta1, 2);
    ScheduleKnobs kn;
    kn.xi = {d.xi};
    kn.include_red = false;
    kn.correct_gradient = false;
    const auto sn = schedule({{1, d.rate, 0.0, 0.0}}, c, kn);
    const double realized = realized_rate(sn, 0);
    if (n == 3) ref = realized * n, amp_ref = sn.terms[0].omega_blue;
    law_err = std::max(law_err, std::abs(realized * n / ref - 1.0));
    amp_err = std::max(amp_err, std::abs(sn.terms[0].omega_blue / amp_ref - 1.0));
    // the same rate from the tone amplitude alone: eta^2 Omega^2 / (4 xi) with eta = eta1 / sqrt(N)
    const double from_amp = eta1 * eta1 / n * std::pow(sn.terms[0].omega_blue, 2) / (4 * alpha * n * d.gradient);
    law_err = std::max(law_err, std::abs(from_amp / realized - 1.0));
  }
  return {same_set && !expect.empty() && dist_err <= 1e-9 && law_err <= 1e-6 && amp_err <= 1e-6,
          fmt("census %zu lines (oracle %zu) %s, distance error %.1e; N x rate over N=3..10 varies by %.1e at "
              "fixed tone amplitude (spread %.1e)",
              lib.size(), expect.size(), same_set ? "identical" : "DIFFERENT", dist_err, law_err, amp_err)};
}

// ---- 10 ----

Outcome gauge_check() {
  std::mt19937 rng(1010);
  std::uniform_real_distribution<double> phase(-kPi, kPi), coupling(0.2, 2.0);
  const int n = 7;
  double worst = 0.0;
  for (int draw = 0; draw < 20; ++draw) {
    const double gauge = phase(rng);
    const auto g = compile(geometry::TriangularLadder{n, coupling(rng), coupling(rng), phase(rng), phase(rng)});
    EffectiveModel m = effective_of(g);
    EffectiveModel lib = m, own = m;
    lib.terms = apply_gauge(m.terms, gauge);
    for (auto& t : own.terms) t.phase += t.range * gauge;
    for (int k = 0; k <= n; ++k) {
      const auto ref = eigenvalues(build_h_eff(m, Sector(n, k)));
      worst = std::max(worst, max_sorted_difference(ref, eigenvalues(build_h_eff(lib, Sector(n, k)))));
      worst = std::max(worst, max_sorted_difference(ref, eigenvalues(build_h_eff(own, Sector(n, k)))));
    }
  }
  return {worst <= 1e-10, fmt("20 draws, N=7, all sectors, max spectral change %.2e", worst)};
}

// ---- 11 ----

Outcome spacer_ladder_check() {
  const auto g = compile(geometry::Custom{11, {{1, 1.0, 0.0, 0.0}, {6, 1.0, 0.0, 0.0}}, {5}});
  const auto graph = expand_to_graph(g.terms, g.spacers, g.n_ions);
  // explicit embedding: ladder cell (row, col) sits on ion 6 row + col
  std::set<std::pair<int, int>> expected, actual;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 5; ++c) {
      const int site = 6 * r + c;
      if (c + 1 < 5) expected.insert({site, site + 1});
      if (r == 0) expected.insert({site, site + 6});
    }
  for (const auto& e : graph.edges())
    if (e.from < e.to) actual.insert({e.from, e.to});
  const bool explicit_map = expected == actual;
  const bool iso = isomorphic(active_adjacency(graph), grid_graph(2, 5));
  return {explicit_map && iso, fmt("%zu edges, explicit embedding %s, isomorphism search %s", actual.size(),
                                   explicit_map ? "matches" : "differs", iso ? "matches" : "differs")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"ring spectrum", ring_spectrum_check},
      {"Jordan-Wigner equivalence", jordan_wigner_check},
      {"Magnus oracle", magnus_oracle_check},
      {"red-sideband cancellation", red_cancellation_check},
      {"flux-velocity curve", flux_velocity_check},
      {"full versus effective convergence", convergence_check},
      {"three-tone comb rate law", appendix_a_check},
      {"inter-mode structure", appendix_b_check},
      {"scheduler laws", scheduler_laws_check},
      {"gauge invariance", gauge_check},
      {"spacer geometry", spacer_ladder_check}};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failed = 0, run = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    ++run;
    if (!o.pass) ++failed;
    std::printf("criterion %2d %s: %s: %s [%.1f s]\n", id, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", run - failed, run);
  return failed == 0 ? 0 : 1;
}
