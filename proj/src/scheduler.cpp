#include "ionsim/scheduler.hpp"

#include <algorithm>
#include <cstdint>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <set>
#include <unordered_map>
#include <sstream>

namespace ionsim {

using std::numbers::pi;

std::string to_string(Sideband s) { return s == Sideband::blue ? "blue" : "red"; }

Sideband sideband_from_string(const std::string& s) {
  if (s == "blue") return Sideband::blue;
  if (s == "red") return Sideband::red;
  throw std::invalid_argument("unknown sideband '" + s + "'");
}

double PhaseProgram::operator()(double t) const {
  if (times.empty()) return 0.0;
  const double base = phases.front();
  if (t <= times.front()) return 0.0;
  if (t >= times.back()) return phases.back() - base;
  const auto it = std::upper_bound(times.begin(), times.end(), t);
  const std::size_t j = static_cast<std::size_t>(it - times.begin());
  const double f = (t - times[j - 1]) / (times[j] - times[j - 1]);
  return phases[j - 1] + f * (phases[j] - phases[j - 1]) - base;
}

double PhaseProgram::max_slope() const {
  double s = 0.0;
  for (std::size_t j = 1; j < times.size(); ++j)
    s = std::max(s, std::abs((phases[j] - phases[j - 1]) / (times[j] - times[j - 1])));
  return s;
}

double DriveSchedule::tone_offset(const Tone& t) const {
  return t.sideband == Sideband::blue ? t.detuning - mode_frequency
                                      : t.detuning + mode_frequency;
}

double rabi_for_rate(double rate_per_sideband, double eta, double xi) {
  if (!(eta > 0.0) || !(xi > 0.0)) throw std::invalid_argument("eta and xi must be positive");
  if (rate_per_sideband < 0.0) throw std::invalid_argument("negative rate");
  return std::sqrt(4.0 * xi * rate_per_sideband) / eta;
}

namespace {

double mean_eta(const ChainConfig& chain, int mode) {
  double s = 0.0;
  int count = 0;
  for (int k = 0; k < chain.n_ions; ++k) {
    if (chain.is_spacer(k)) continue;
    s += std::abs(chain.modes[mode].lamb_dicke[k]);
    ++count;
  }
  if (count == 0 || s == 0.0) throw std::invalid_argument("mediating mode has no coupling");
  return s / count;
}

// Smallest value of the form q(2j+1) (q = Delta/4) that is >= x.
double snap_quarter(double x, double gradient) {
  const double q = gradient / 4.0;
  const double j = std::max(0.0, std::ceil((x / q - 1.0) / 2.0 - 1e-12));
  return q * (2.0 * j + 1.0);
}

StarkFit fit_sites(const std::vector<double>& values, const ChainConfig& chain) {
  StarkFit fit;
  fit.shifts = values;
  std::vector<int> active;
  for (int k = 0; k < static_cast<int>(values.size()); ++k)
    if (!chain.is_spacer(k)) active.push_back(k);
  if (active.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k : active) {
      sx += k;
      sy += values[k];
      sxx += static_cast<double>(k) * k;
      sxy += k * values[k];
    }
    const double m = static_cast<double>(active.size());
    fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    fit.offset = (sy - fit.slope * sx) / m;
  } else if (active.size() == 1) {
    fit.offset = values[active[0]];
  }
  return fit;
}

void emit_term_tones(DriveSchedule& s, int index) {
  const TermDrive& td = s.terms[index];
  const double nu = s.mode_frequency;
  const double split = td.n * (s.gradient + s.gradient_offset) / 2.0;
  const double d2 = td.delta / 2.0;
  const double pr = td.phase + s.red_phase_offset;
  s.tones.push_back({nu + td.xi_b + split - d2, td.omega_blue, td.phase / 2.0, Sideband::blue, index, +1});
  s.tones.push_back({nu + td.xi_b - split + d2, td.omega_blue, -td.phase / 2.0, Sideband::blue, index, -1});
  if (!s.include_red) return;
  s.tones.push_back({-(nu + td.xi_r) + split - d2, td.omega_red, pr / 2.0, Sideband::red, index, +1});
  s.tones.push_back({-(nu + td.xi_r) - split + d2, td.omega_red, -pr / 2.0, Sideband::red, index, -1});
}

void emit_comb(DriveSchedule& s, const std::vector<int>& offsets, const std::vector<double>& rabi,
               const std::vector<double>& phases, double xi_b, double xi_r) {
  const double nu = s.mode_frequency;
  const double step = s.gradient + s.gradient_offset;
  for (std::size_t i = 0; i < offsets.size(); ++i)
    s.tones.push_back({nu + xi_b + offsets[i] * step, rabi[i], phases[i], Sideband::blue, -1, 0});
  if (!s.include_red) return;
  const double scale = std::sqrt(xi_r / xi_b);
  for (std::size_t i = 0; i < offsets.size(); ++i)
    s.tones.push_back({-(nu + xi_r) + offsets[i] * step, rabi[i] * scale, phases[i], Sideband::red, -1, 0});
}

std::vector<double> nominal_offsets(const DriveSchedule& s) {
  std::vector<double> out;
  for (const auto& t : s.tones) out.push_back(s.tone_offset(t));
  return out;
}

void attach_strobe(DriveSchedule& s, const ScheduleKnobs& knobs) {
  try {
    s.strobe = stroboscopic_period(s, knobs.strobe_bound, knobs.strobe_tolerance);
  } catch (const NumericalError&) {
    s.strobe.reset();
  }
}

double max_term_rate(const DriveSchedule& s) {
  double r = 0.0;
  for (const auto& t : s.terms) r = std::max(r, std::abs(t.rate));
  return r;
}

struct CensusResult {
  std::vector<CensusEntry> entries;
  double worst = std::numeric_limits<double>::infinity();
};

CensusResult run_census(const DriveSchedule& s, double margin_ratio) {
  CensusResult out;
  const int n = s.n_ions;
  std::vector<int> active;
  for (int k = 0; k < n; ++k)
    if (std::find(s.spacers.begin(), s.spacers.end(), k) == s.spacers.end()) active.push_back(k);
  std::set<int> ranges;
  for (const auto& t : s.terms) ranges.insert(t.n);

  const double delta = s.gradient;
  auto rate_of = [&](const Tone& a, const Tone& b) {
    double r = 0.0;
    if (a.term >= 0) r = std::max(r, std::abs(s.terms[a.term].rate));
    if (b.term >= 0) r = std::max(r, std::abs(s.terms[b.term].rate));
    if (r == 0.0) r = max_term_rate(s);
    return r > 0.0 ? r : 1.0;
  };
  auto w = [&](const Tone& t, int site) { return (site + 1) * delta - s.tone_offset(t); };

  const std::size_t nt = s.tones.size();
  for (std::size_t a = 0; a < nt; ++a) {
    for (std::size_t b = a; b < nt; ++b) {
      const Tone& ta = s.tones[a];
      const Tone& tb = s.tones[b];
      const double rate = rate_of(ta, tb);
      if (ta.sideband == tb.sideband) {
        for (int i : active)
          for (int j : active) {
            if (a == b && i == j) continue;
            const double dist = std::abs(w(ta, i) - w(tb, j));
            const int sep = std::abs(i - j);
            if (ta.term >= 0 && ta.term == tb.term && a != b && sep == s.terms[ta.term].n && dist < 0.25 * delta)
              continue;
            if (ta.term < 0 && tb.term < 0 && a != b && ranges.count(sep) &&
                dist < 0.25 * delta) {
              const int diff = std::abs(static_cast<int>(std::lround(
                  (s.tone_offset(ta) - s.tone_offset(tb)) / (delta + s.gradient_offset))));
              if (diff == sep) continue;
            }
            const double ratio = dist / rate;
            out.worst = std::min(out.worst, ratio);
            if (ratio < margin_ratio)
              out.entries.push_back({"hop", static_cast<int>(a), static_cast<int>(b), i, j, dist, ratio});
          }
      } else {
        for (int i : active)
          for (int j : active) {
            if (i == j) continue;
            const double dist = std::abs(w(ta, i) + w(tb, j));
            const double ratio = dist / rate;
            out.worst = std::min(out.worst, ratio);
            if (ratio < margin_ratio)
              out.entries.push_back({"pair", static_cast<int>(a), static_cast<int>(b), i, j, dist, ratio});
          }
      }
    }
  }
  std::sort(out.entries.begin(), out.entries.end(),
            [](const CensusEntry& x, const CensusEntry& y) { return x.ratio < y.ratio; });
  return out;
}

}  // namespace

// Closest approach of a blue-red tone pair to a two-excitation transition of distinct sites.
double pair_line_distance(const DriveSchedule& s) {
  double best = std::numeric_limits<double>::infinity();
  auto w = [&](const Tone& t, int site) { return (site + 1) * s.gradient - s.tone_offset(t); };
  for (const auto& a : s.tones) {
    if (a.sideband != Sideband::blue) continue;
    for (const auto& b : s.tones) {
      if (b.sideband != Sideband::red) continue;
      for (int i = 0; i < s.n_ions; ++i)
        for (int j = 0; j < s.n_ions; ++j)
          if (i != j) best = std::min(best, std::abs(w(a, i) + w(b, j)));
    }
  }
  return best;
}

static double default_pair_clearance(const DriveSchedule& s) { return 2.0 * s.n_ions * s.gradient; }

std::vector<CensusEntry> resonance_census(const DriveSchedule& sched, double margin_ratio) {
  return run_census(sched, margin_ratio).entries;
}

DriveSchedule schedule(const std::vector<HoppingTerm>& terms, const ChainConfig& chain,
                       const ScheduleKnobs& knobs) {
  chain.validate();
  validate_terms(terms, chain.n_ions);
  if (terms.empty()) throw std::invalid_argument("no hopping terms to schedule");
  if (knobs.mode < 0 || knobs.mode >= static_cast<int>(chain.modes.size()))
    throw std::invalid_argument("mediating mode index out of range");
  if (!knobs.xi.empty() && knobs.xi.size() != terms.size())
    throw std::invalid_argument("one xi per term required");

  DriveSchedule s;
  s.n_ions = chain.n_ions;
  s.gradient = chain.gradient;
  s.mode = knobs.mode;
  s.mode_frequency = chain.modes[knobs.mode].frequency;
  s.eta = mean_eta(chain, knobs.mode);
  s.include_red = knobs.include_red;
  s.red_phase_offset = knobs.red_phase_offset;
  s.spacers = chain.spacers;

  const double delta = chain.gradient;
  const int n = chain.n_ions;
  const double eta = s.eta;
  const double per_sb = knobs.include_red ? 0.5 : 1.0;
  s.n_ions = n;
  const double clearance = knobs.pair_clearance > 0.0 ? knobs.pair_clearance : default_pair_clearance(s);

  // Pair-creation floor: 20 x eta^2 Om_r Om_b / xi (= 80 x rate per sideband) and 5 Omega_n.
  auto eps_floor = [&](double rate) {
    return std::max(20.0 * 4.0 * per_sb * std::abs(rate), 5.0 * std::abs(rate));
  };

  for (const auto& t : terms) {
    TermDrive td;
    td.n = t.range;
    td.rate = t.rate;
    td.phase = t.phase;
    td.delta = t.detuning;
    s.terms.push_back(td);
  }

  auto fill = [&](TermDrive& td, double xi, double eps) {
    td.xi = xi;
    td.epsilon = knobs.include_red ? eps : 0.0;
    td.xi_b = xi + td.epsilon;
    td.xi_r = xi - td.epsilon;
    if (!(td.xi_r > 0.0)) throw std::invalid_argument("epsilon must be smaller than xi");
    td.omega_blue = rabi_for_rate(per_sb * std::abs(td.rate), eta, td.xi_b);
    td.omega_red = knobs.include_red ? rabi_for_rate(per_sb * std::abs(td.rate), eta, td.xi_r) : 0.0;
  };
  auto rebuild = [&](std::size_t upto) {
    s.tones.clear();
    for (std::size_t i = 0; i < upto; ++i) emit_term_tones(s, static_cast<int>(i));
  };

  if (knobs.epsilon && knobs.include_red) {
    for (const auto& t : terms)
      if (*knobs.epsilon < eps_floor(t.rate) * (1.0 - 1e-12))
        throw std::invalid_argument("epsilon below the pair-creation margin (" +
                                    std::to_string(eps_floor(t.rate)) + " rad/s required)");
  }

  if (!knobs.xi.empty()) {
    for (std::size_t i = 0; i < terms.size(); ++i) {
      if (!(knobs.xi[i] > 0.0)) throw std::invalid_argument("xi must be positive");
      const double eps = knobs.epsilon ? *knobs.epsilon : snap_quarter(eps_floor(terms[i].rate), delta);
      fill(s.terms[i], knobs.xi[i], eps);
    }
    rebuild(terms.size());
  } else {
    // Automatic layout on the quarter grid: xi, eps = Delta/4 mod Delta/2 keeps xi_b, xi_r on
    // the Delta/2 grid (stroboscopic with m = 1) and 2 eps half-way between integer multiples of Delta.
    const double xi0 = snap_quarter(knobs.alpha * n * delta, delta);
    double eps0 = knobs.epsilon ? *knobs.epsilon : snap_quarter(eps_floor(terms[0].rate), delta);
    fill(s.terms[0], xi0, eps0);
    rebuild(1);
    if (!knobs.epsilon && knobs.include_red) {
      // Move every blue-red pair line clear of the two-excitation band.
      while (pair_line_distance(s) < clearance * (1.0 - 1e-12)) {
        eps0 += 0.5 * delta;
        fill(s.terms[0], xi0, eps0);
        rebuild(1);
      }
    }
    for (std::size_t i = 1; i < terms.size(); ++i) {
      const double base_eps =
          knobs.epsilon ? *knobs.epsilon : std::max(snap_quarter(eps_floor(terms[i].rate), delta), eps0);
      double best_score = -1.0;
      TermDrive best = s.terms[i];
      bool done = false;
      for (int step = 2 * n; step <= 8 * n + 16 && !done; ++step) {
        const double spacing = 0.5 * delta * step;
        for (int e = 0; e < 4 && !done; ++e) {
          if (knobs.epsilon && e > 0) break;
          TermDrive cand = s.terms[i];
          fill(cand, s.terms[i - 1].xi + spacing, base_eps + 0.5 * delta * e);
          s.terms[i] = cand;
          rebuild(i + 1);
          double score = run_census(s, knobs.margin_ratio).worst;
          if (knobs.include_red && !knobs.epsilon)
            score = std::min(score, knobs.margin_ratio * pair_line_distance(s) / clearance);
          if (score > best_score) {
            best_score = score;
            best = cand;
          }
          if (score >= knobs.margin_ratio * (1.0 - 1e-9)) done = true;
        }
      }
      s.terms[i] = best;
      rebuild(i + 1);
    }
  }

  const double cap = knobs.amplitude_cap * s.mode_frequency;
  for (const auto& td : s.terms) {
    if (td.omega_blue > cap || td.omega_red > cap) {
      std::ostringstream msg;
      msg << "requested rate " << td.rate << " rad/s for n=" << td.n
          << " needs Rabi frequency " << std::max(td.omega_blue, td.omega_red)
          << " rad/s above the cap " << cap << " rad/s";
      throw std::invalid_argument(msg.str());
    }
  }
  attach_strobe(s, knobs);
  if (knobs.correct_gradient)
    s = apply_gradient_correction(std::move(s), chain, knobs.slow_shift_correction);
  else s.stark = ground_stark_shifts(s, chain);
  return s;
}

AdiabaticityReport validate(const DriveSchedule& sched, const ChainConfig& chain,
                            double margin_ratio) {
  AdiabaticityReport r;
  const double delta = sched.gradient;
  const int n = sched.n_ions;
  (void)chain;
  double min_xi = std::numeric_limits<double>::infinity();
  double min_beta = std::numeric_limits<double>::infinity();
  for (const auto& td : sched.terms) {
    min_xi = std::min(min_xi, td.xi);
    const double om_b = sched.eta * sched.eta * td.omega_blue * td.omega_blue / (2.0 * td.xi_b);
    if (om_b > 0.0) min_beta = std::min(min_beta, delta / om_b);
    r.predicted_rates.push_back(realized_rate(sched, static_cast<int>(&td - sched.terms.data())));
    if (sched.include_red) {
      const double coupling = sched.eta * sched.eta * td.omega_blue * td.omega_red / td.xi;
      r.pair_creation_margins.push_back(coupling > 0.0 ? 2.0 * td.epsilon / coupling
                                                       : std::numeric_limits<double>::infinity());
    }
  }
  r.alpha = min_xi / (delta * n);
  r.beta = min_beta;
  for (std::size_t a = 0; a < sched.terms.size(); ++a)
    for (std::size_t b = a + 1; b < sched.terms.size(); ++b) {
      const auto& ta = sched.terms[a];
      const auto& tb = sched.terms[b];
      const double denom = std::max(std::abs(ta.rate), std::abs(tb.rate));
      for (int m = 0; m < n; ++m) {
        const double margin = std::abs(std::abs(ta.xi - tb.xi) - m * delta) / denom;
        r.cross_margins.push_back({static_cast<int>(a), static_cast<int>(b), m, margin});
        if (margin < margin_ratio * (1.0 - 1e-9))
          r.flags.push_back("cross-term margin " + std::to_string(margin) + " at m=" +
                            std::to_string(m) + " between terms " + std::to_string(a) + " and " +
                            std::to_string(b));
      }
    }
  const auto census = run_census(sched, margin_ratio);
  r.census = census.entries;
  r.worst_census_ratio = census.worst;
  if (!census.entries.empty())
    r.flags.push_back(std::to_string(census.entries.size()) +
                      " unwanted resonances closer than " + std::to_string(margin_ratio) +
                      "x the coupling (worst " + std::to_string(census.worst) + ")");
  if (sched.include_red) r.pair_line_distance = pair_line_distance(sched);
  if (r.alpha < 2.0) r.flags.push_back("alpha below 2");
  if (r.beta < 10.0) r.flags.push_back("beta below 10");
  return r;
}

StroboscopicPeriod stroboscopic_period(double gradient, const std::vector<double>& offsets,
                                       long m_bound, double tolerance,
                                       std::optional<double> xi_b) {
  if (!(gradient > 0.0)) throw std::invalid_argument("gradient must be positive");
  StroboscopicPeriod best;
  best.residual = std::numeric_limits<double>::infinity();
  for (long m = 1; m <= m_bound; ++m) {
    const double t = 4.0 * pi * static_cast<double>(m) / gradient;
    double worst = 0.0;
    for (double o : offsets) {
      const double cycles = t * o / (2.0 * pi);
      const double miss = std::abs(cycles - std::round(cycles)) / std::max(1.0, std::abs(cycles));
      worst = std::max(worst, miss);
    }
    if (worst < best.residual) {
      best.period = t;
      best.m = m;
      best.residual = worst;
    }
    if (worst <= tolerance) break;
  }
  if (xi_b) best.M_b = std::lround(best.period * *xi_b / (2.0 * pi));
  if (best.residual > tolerance) {
    std::ostringstream msg;
    msg << "no commensurate period up to m=" << m_bound << "; nearest miss T=" << best.period
        << " s (m=" << best.m << ") with relative residual " << best.residual;
    throw NumericalError(msg.str());
  }
  return best;
}

StroboscopicPeriod stroboscopic_period(const DriveSchedule& sched, long m_bound,
                                       double tolerance) {
  std::optional<double> xi_b;
  if (!sched.terms.empty()) xi_b = sched.terms.front().xi_b;
  DriveSchedule nominal = sched;
  if (sched.gradient_offset != 0.0) {
    nominal.gradient_offset = 0.0;
    nominal.tones.clear();
    if (!sched.shared)
      for (std::size_t i = 0; i < sched.terms.size(); ++i) emit_term_tones(nominal, static_cast<int>(i));
    else
      nominal.tones = sched.tones;
  }
  return stroboscopic_period(sched.gradient, nominal_offsets(nominal), m_bound, tolerance, xi_b);
}

StarkFit ground_stark_shifts(const DriveSchedule& sched, const ChainConfig& chain) {
  std::vector<double> shifts(static_cast<std::size_t>(sched.n_ions), 0.0);
  for (int k = 0; k < sched.n_ions; ++k) {
    if (chain.is_spacer(k)) continue;
    for (const auto& tone : sched.tones) {
      for (const auto& mode : chain.modes) {
        const double g = 0.5 * mode.lamb_dicke[k] * tone.amplitude;
        const double nu = tone.sideband == Sideband::blue ? mode.frequency : -mode.frequency;
        const double w = (k + 1) * sched.gradient + nu - tone.detuning;
        if (w == 0.0) throw NumericalError("tone resonant with a carrier sideband transition");
        shifts[k] += g * g / w;
      }
    }
  }
  return fit_sites(shifts, chain);
}

SlowSpinModel slow_spin_model(const DriveSchedule& sched, const ChainConfig& chain,
                              double resonance_window) {
  const int n = sched.n_ions;
  if (n > 62) throw std::invalid_argument("too many ions for the slow spin model");
  if (resonance_window <= 0.0) resonance_window = 0.1 * sched.gradient;
  struct Leg {
    int site, mode;
    bool blue;
    cplx c;
    double w;   // positive frequency of the phonon-creating leg
  };
  std::vector<Leg> legs;
  for (int k = 0; k < n; ++k)
    for (std::size_t m = 0; m < chain.modes.size(); ++m)
      for (const auto& tone : sched.tones) {
        const auto& mode = chain.modes[m];
        const cplx c = cplx(0.0, 0.5 * mode.lamb_dicke[k] * tone.amplitude) * std::polar(1.0, -tone.phase);
        if (c == 0.0) continue;
        const bool blue = tone.sideband == Sideband::blue;
        const double w = (k + 1) * sched.gradient + (blue ? mode.frequency : -mode.frequency) - tone.detuning;
        if (w == 0.0) throw NumericalError("tone resonant with a carrier sideband transition");
        if (blue) legs.push_back({k, static_cast<int>(m), true, c, -w});
        else legs.push_back({k, static_cast<int>(m), false, std::conj(c), w});
      }

  // Spin states with at most three excitations; the first n + 1 are the vacuum and single excitations.
  std::vector<std::uint64_t> states{0};
  for (int a = 0; a < n; ++a) states.push_back(std::uint64_t{1} << a);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b) states.push_back((std::uint64_t{1} << a) | (std::uint64_t{1} << b));
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      for (int c = b + 1; c < n; ++c)
        states.push_back((std::uint64_t{1} << a) | (std::uint64_t{1} << b) | (std::uint64_t{1} << c));
  std::unordered_map<std::uint64_t, int> index;
  for (std::size_t i = 0; i < states.size(); ++i) index[states[i]] = static_cast<int>(i);
  const int low = n + 1;
  const int dim = static_cast<int>(states.size());

  // Per frequency: columns of M on the low states (A) and rows of M into them (B).
  struct Component {
    double freq;
    Mat a, b;
  };
  std::vector<Component> comps;
  auto slot = [&](double f) -> Component& {
    for (auto& c : comps)
      if (std::abs(c.freq - f) <= 1e-9 * (1.0 + std::abs(f))) return c;
    comps.push_back({f, Mat::Zero(dim, low), Mat::Zero(low, dim)});
    return comps.back();
  };
  auto bit = [](std::uint64_t s, int k) { return (s >> k) & 1u; };
  for (const auto& lm : legs)
    for (const auto& ln : legs) {
      if (lm.mode != ln.mode) continue;
      const int a = lm.site, b = ln.site;
      // h_m^dag h_n on the phonon vacuum: spin part S_m^dag S_n with S = s+ (blue) or s- (red).
      if (lm.blue != ln.blue && a == b) continue;
      const cplx coef = std::conj(lm.c) * ln.c * 0.5 * (1.0 / lm.w + 1.0 / ln.w);
      Component& comp = slot(lm.w - ln.w);
      for (int col = 0; col < dim; ++col) {
        std::uint64_t st = states[col];
        // Apply S_n first, then S_m^dag.
        auto apply = [&](int site, bool raise) {
          if (raise == static_cast<bool>(bit(st, site))) return false;
          st ^= std::uint64_t{1} << site;
          return true;
        };
        const bool n_raise = ln.blue;     // S_n = s+ for blue, s- for red
        const bool m_raise = !lm.blue;    // S_m^dag = s- for blue, s+ for red
        if (!apply(b, n_raise) || !apply(a, m_raise)) continue;
        const auto it = index.find(st);
        if (it == index.end()) continue;
        const int row = it->second;
        if (col < low) comp.a(row, col) += coef;
        if (row < low) comp.b(row, col) += coef;
      }
    }

  Mat res = Mat::Zero(low, low), corr = Mat::Zero(low, low);
  for (const auto& c : comps) {
    if (std::abs(c.freq) < resonance_window) res += c.a.topRows(low);
    else if (c.freq < 0.0)
      corr += (c.a.adjoint() * c.a - c.b * c.b.adjoint()) / (-c.freq);
  }
  SlowSpinModel out;
  out.resonant = res.bottomRightCorner(n, n) - res(0, 0) * Mat::Identity(n, n);
  out.correction = corr.bottomRightCorner(n, n) - corr(0, 0) * Mat::Identity(n, n);
  return out;
}


StarkFit single_excitation_shifts(const DriveSchedule& sched, const ChainConfig& chain) {
  const SlowSpinModel m = slow_spin_model(sched, chain);
  std::vector<double> v(static_cast<std::size_t>(sched.n_ions));
  for (int k = 0; k < sched.n_ions; ++k) v[k] = (m.resonant(k, k) + m.correction(k, k)).real();
  return fit_sites(v, chain);
}

double gradient_correction(const DriveSchedule& sched, const ChainConfig& chain) {
  DriveSchedule nominal = sched;
  nominal.gradient_offset = 0.0;
  nominal.tones.clear();
  if (!sched.shared) {
    for (std::size_t i = 0; i < sched.terms.size(); ++i) emit_term_tones(nominal, static_cast<int>(i));
  } else {
    nominal.tones = sched.tones;
  }
  return ground_stark_shifts(nominal, chain).slope;
}

double gradient_correction_analytic(double eta, double omega0, double xi_b, double gradient) {
  return eta * eta * omega0 * omega0 * gradient / (xi_b * xi_b);
}

DriveSchedule apply_gradient_correction(DriveSchedule sched, const ChainConfig& chain,
                                        bool include_slow_shifts) {
  auto shifts = [&](const DriveSchedule& x) {
    return include_slow_shifts ? single_excitation_shifts(x, chain) : ground_stark_shifts(x, chain);
  };
  if (sched.shared) {
    // Shared combs: scale every tone position relative to the lowest tone of each sideband.
    double base_b = std::numeric_limits<double>::infinity();
    double base_r = std::numeric_limits<double>::infinity();
    for (const auto& t : sched.tones) {
      if (t.sideband == Sideband::blue) base_b = std::min(base_b, t.detuning);
      else base_r = std::min(base_r, t.detuning);
    }
    for (int iter = 0; iter < 3; ++iter) {
      const double g = shifts(sched).slope;
      const double step0 = sched.gradient + sched.gradient_offset;
      const double step1 = sched.gradient + g;
      for (auto& t : sched.tones) {
        const double base = t.sideband == Sideband::blue ? base_b : base_r;
        t.detuning = base + (t.detuning - base) / step0 * step1;
      }
      sched.gradient_offset = g;
    }
    sched.stark = shifts(sched);
    return sched;
  }
  sched.gradient_offset = 0.0;
  for (int iter = 0; iter < 4; ++iter) {
    sched.tones.clear();
    for (std::size_t i = 0; i < sched.terms.size(); ++i) emit_term_tones(sched, static_cast<int>(i));
    sched.stark = shifts(sched);
    if (iter < 3) sched.gradient_offset = sched.stark.slope;
  }
  return sched;
}

std::vector<std::pair<int, cplx>> induced_couplings(const std::vector<int>& offsets,
                                                    const std::vector<double>& amplitudes,
                                                    const std::vector<double>& phases,
                                                    int n_ions, double c) {
  std::vector<std::pair<int, cplx>> out;
  auto add = [&](int range, cplx v) {
    for (auto& [r, acc] : out)
      if (r == range) {
        acc += v;
        return;
      }
    out.emplace_back(range, v);
  };
  for (std::size_t i = 0; i < offsets.size(); ++i)
    for (std::size_t j = 0; j < offsets.size(); ++j) {
      if (offsets[j] <= offsets[i]) continue;
      const int d = offsets[j] - offsets[i];
      if (d >= n_ions) continue;
      add(d, c * amplitudes[i] * amplitudes[j] * std::polar(1.0, phases[j] - phases[i]));
    }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return out;
}

namespace {

std::vector<std::vector<int>> candidate_combs(int n_ions, int max_tones) {
  std::vector<std::vector<int>> out;
  const int top = 2 * n_ions;
  for (int k = 2; k <= max_tones; ++k) {
    std::vector<std::vector<int>> level;
    std::vector<int> cur{0};
    std::function<void(int)> rec = [&](int start) {
      if (static_cast<int>(cur.size()) == k) {
        level.push_back(cur);
        return;
      }
      for (int v = start; v <= top; ++v) {
        cur.push_back(v);
        rec(v + 1);
        cur.pop_back();
      }
    };
    rec(1);
    std::stable_sort(level.begin(), level.end(),
                     [](const auto& a, const auto& b) { return a.back() < b.back(); });
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

std::set<int> comb_ranges(const std::vector<int>& comb, int n_ions) {
  std::set<int> r;
  for (std::size_t i = 0; i < comb.size(); ++i)
    for (std::size_t j = i + 1; j < comb.size(); ++j) {
      const int d = std::abs(comb[j] - comb[i]);
      if (d < n_ions) r.insert(d);
    }
  return r;
}

}  // namespace

SharedToneLayout reduce_layout(const std::vector<HoppingTerm>& terms, int n_ions,
                               double tolerance, int max_tones) {
  validate_terms(terms, n_ions);
  std::set<int> wanted;
  for (const auto& t : terms) wanted.insert(t.range);
  std::vector<int> comb;
  std::set<int> closest;
  for (const auto& c : candidate_combs(n_ions, max_tones)) {
    const auto r = comb_ranges(c, n_ions);
    if (r == wanted) {
      comb = c;
      break;
    }
    if (closest.empty() && std::includes(r.begin(), r.end(), wanted.begin(), wanted.end()))
      closest = r;
  }
  if (comb.empty()) {
    std::ostringstream msg;
    msg << "no comb of up to " << max_tones << " tones realizes exactly the requested ranges";
    if (!closest.empty()) {
      msg << "; the smallest covering comb also induces";
      for (int r : closest)
        if (!wanted.count(r)) msg << " n=" << r;
    }
    throw std::invalid_argument(msg.str());
  }

  const std::size_t k = comb.size();
  std::vector<int> ranges(wanted.begin(), wanted.end());
  std::vector<cplx> target(ranges.size());
  double tnorm = 0.0;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    for (const auto& t : terms)
      if (t.range == ranges[i]) target[i] = std::polar(t.rate, t.phase);
    tnorm += std::norm(target[i]);
  }
  tnorm = std::sqrt(tnorm / ranges.size());
  if (tnorm == 0.0) throw std::invalid_argument("all requested rates are zero");

  // Unknowns: log amplitudes (k) and phases of tones 1..k-1 (tone 0 fixed at 0).
  const std::size_t nv = 2 * k - 1;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
  for (std::size_t i = 0; i < k; ++i) x[i] = 0.5 * std::log(tnorm);

  // Phase seed from linear least squares on pairs that alone produce a range.
  {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ranges.size()),
                                              static_cast<Eigen::Index>(k - 1));
    Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ranges.size()));
    for (std::size_t r = 0; r < ranges.size(); ++r) {
      bool placed = false;
      for (std::size_t i = 0; i < k && !placed; ++i)
        for (std::size_t j = i + 1; j < k && !placed; ++j)
          if (comb[j] - comb[i] == ranges[r]) {
            a(r, j - 1) += 1.0;
            if (i > 0) a(r, i - 1) -= 1.0;
            b[r] = std::arg(target[r]);
            placed = true;
          }
    }
    const Eigen::VectorXd th = a.completeOrthogonalDecomposition().solve(b);
    for (std::size_t i = 1; i < k; ++i) x[k + i - 1] = th[i - 1];
  }

  auto unpack = [&](const Eigen::VectorXd& v, std::vector<double>& amp, std::vector<double>& ph) {
    amp.resize(k);
    ph.assign(k, 0.0);
    for (std::size_t i = 0; i < k; ++i) amp[i] = std::exp(v[i]);
    for (std::size_t i = 1; i < k; ++i) ph[i] = v[k + i - 1];
  };
  auto residual = [&](const Eigen::VectorXd& v) {
    std::vector<double> amp, ph;
    unpack(v, amp, ph);
    const auto got = induced_couplings(comb, amp, ph, n_ions);
    Eigen::VectorXd res(static_cast<Eigen::Index>(2 * ranges.size()));
    for (std::size_t r = 0; r < ranges.size(); ++r) {
      cplx val{};
      for (const auto& [rr, c] : got)
        if (rr == ranges[r]) val = c;
      const cplx d = (val - target[r]) / tnorm;
      res[2 * r] = d.real();
      res[2 * r + 1] = d.imag();
    }
    return res;
  };

  Eigen::VectorXd res = residual(x);
  for (int it = 0; it < 200 && res.norm() > 1e-14; ++it) {
    Eigen::MatrixXd jac(res.size(), static_cast<Eigen::Index>(nv));
    for (std::size_t v = 0; v < nv; ++v) {
      Eigen::VectorXd xp = x;
      const double h = 1e-7;
      xp[v] += h;
      jac.col(v) = (residual(xp) - res) / h;
    }
    const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(-res);
    double lambda = 1.0;
    Eigen::VectorXd trial = x + step;
    Eigen::VectorXd tres = residual(trial);
    while (tres.norm() > res.norm() && lambda > 1e-6) {
      lambda *= 0.5;
      trial = x + lambda * step;
      tres = residual(trial);
    }
    if (tres.norm() >= res.norm()) break;
    x = trial;
    res = tres;
  }

  SharedToneLayout out;
  out.offsets = comb;
  unpack(x, out.amplitudes, out.phases);
  out.residual = res.norm() / std::sqrt(static_cast<double>(ranges.size()));
  if (out.residual > tolerance) {
    std::ostringstream msg;
    msg << "inconsistent rate system for the shared comb: least-squares residual " << out.residual;
    throw std::invalid_argument(msg.str());
  }
  return out;
}

DriveSchedule shared_schedule(const std::vector<int>& offsets, const std::vector<double>& rabi,
                              const std::vector<double>& phases, const ChainConfig& chain,
                              double xi, double epsilon, bool include_red, int mode) {
  chain.validate();
  if (offsets.size() != rabi.size() || offsets.size() != phases.size())
    throw std::invalid_argument("offsets, amplitudes and phases must have equal length");
  DriveSchedule s;
  s.n_ions = chain.n_ions;
  s.gradient = chain.gradient;
  s.mode = mode;
  s.mode_frequency = chain.modes.at(mode).frequency;
  s.eta = mean_eta(chain, mode);
  s.include_red = include_red;
  s.shared = true;
  s.spacers = chain.spacers;
  const double eps = include_red ? epsilon : 0.0;
  const double xi_b = xi + eps, xi_r = xi - eps;
  if (!(xi_r > 0.0)) throw std::invalid_argument("epsilon must be smaller than xi");
  const double c = s.eta * s.eta / ((include_red ? 2.0 : 4.0) * xi_b);
  for (const auto& [range, j] : induced_couplings(offsets, rabi, phases, chain.n_ions, c)) {
    TermDrive td;
    td.n = range;
    td.rate = std::abs(j);
    td.phase = std::arg(j);
    td.xi = xi;
    td.epsilon = eps;
    td.xi_b = xi_b;
    td.xi_r = xi_r;
    s.terms.push_back(td);
  }
  emit_comb(s, offsets, rabi, phases, xi_b, xi_r);
  try {
    s.strobe = stroboscopic_period(s);
  } catch (const NumericalError&) {
  }
  s.stark = ground_stark_shifts(s, chain);
  return s;
}

DriveSchedule reduce_tones(const std::vector<HoppingTerm>& terms, const ChainConfig& chain,
                           const ScheduleKnobs& knobs, double tolerance) {
  for (const auto& t : terms)
    if (t.detuning != 0.0) throw std::invalid_argument("shared tones support static phases only");
  const auto layout = reduce_layout(terms, chain.n_ions, tolerance);
  const double delta = chain.gradient;
  double max_rate = 0.0;
  for (const auto& t : terms) max_rate = std::max(max_rate, t.rate);
  const double per_sb = knobs.include_red ? 0.5 : 1.0;
  const double xi = knobs.xi.empty() ? snap_quarter(knobs.alpha * chain.n_ions * delta, delta)
                                     : knobs.xi.front();
  const double eps = knobs.epsilon
                         ? *knobs.epsilon
                         : snap_quarter(std::max(80.0 * per_sb * max_rate, 5.0 * max_rate), delta);
  const double eta = mean_eta(chain, knobs.mode);
  const double c = eta * eta / ((knobs.include_red ? 2.0 : 4.0) * (xi + (knobs.include_red ? eps : 0.0)));
  std::vector<double> rabi(layout.amplitudes.size());
  for (std::size_t i = 0; i < rabi.size(); ++i) rabi[i] = layout.amplitudes[i] / std::sqrt(c);
  auto s = shared_schedule(layout.offsets, rabi, layout.phases, chain, xi, eps, knobs.include_red,
                           knobs.mode);
  const double cap = knobs.amplitude_cap * s.mode_frequency;
  for (double r : rabi)
    if (r > cap) throw std::invalid_argument("shared comb needs a Rabi frequency above the cap");
  if (knobs.correct_gradient)
    s = apply_gradient_correction(std::move(s), chain, knobs.slow_shift_correction);
  return s;
}

ScalingDesign scaling_design(int n, double alpha, double beta, double eta1, double omega0) {
  if (n < 2 || !(alpha > 0) || !(beta > 0) || !(eta1 > 0) || !(omega0 > 0))
    throw std::invalid_argument("scaling design needs positive parameters and N >= 2");
  ScalingDesign d;
  d.n = n;
  d.eta = eta1 / std::sqrt(static_cast<double>(n));
  d.gradient = eta1 * omega0 * std::sqrt(beta / (2.0 * alpha)) / n;
  d.xi = alpha * n * d.gradient;
  d.rate = d.gradient / beta;
  return d;
}

double realized_rate(const DriveSchedule& sched, int term) {
  const auto& td = sched.terms.at(static_cast<std::size_t>(term));
  if (sched.shared) return td.rate;
  const double e2 = sched.eta * sched.eta;
  double r = e2 * td.omega_blue * td.omega_blue / (4.0 * td.xi_b);
  if (sched.include_red) r += e2 * td.omega_red * td.omega_red / (4.0 * td.xi_r);
  return r;
}

}  // namespace ionsim
