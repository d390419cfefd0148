#include "ionsim/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace ionsim {

using std::numbers::pi;

std::vector<DriveChannel> drive_channels(const DriveSchedule& sched, const ChainConfig& chain) {
  std::vector<DriveChannel> out;
  for (int s = 0; s < chain.n_ions; ++s) {
    if (chain.is_spacer(s)) continue;
    for (int l = 0; l < static_cast<int>(chain.modes.size()); ++l) {
      const double eta = chain.modes[l].lamb_dicke[s];
      if (eta == 0.0) continue;
      for (Sideband sb : {Sideband::blue, Sideband::red}) {
        DriveChannel ch{s, l, sb, {}, {}, {}};
        const double nu = sb == Sideband::blue ? chain.modes[l].frequency : -chain.modes[l].frequency;
        for (std::size_t j = 0; j < sched.tones.size(); ++j) {
          const Tone& t = sched.tones[j];
          if (t.sideband != sb || t.amplitude == 0.0) continue;
          ch.amps.push_back(cplx(0.0, 0.5 * eta * t.amplitude) * std::polar(1.0, -t.phase));
          ch.freqs.push_back((s + 1) * chain.gradient + nu - t.detuning);
          ch.tones.push_back(static_cast<int>(j));
        }
        if (!ch.amps.empty()) out.push_back(std::move(ch));
      }
    }
  }
  return out;
}

std::vector<LadderEntry> channel_operator(const Basis& basis, const DriveChannel& ch) {
  std::vector<LadderEntry> out;
  const std::uint64_t bit = std::uint64_t{1} << ch.site;
  const std::size_t stride = basis.phonon_stride(ch.mode);
  const int cutoff = basis.fock_cutoff();
  const bool raise = ch.sideband == Sideband::blue;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    if (basis.spins(i) & bit) continue;
    const int n = basis.phonon(i, ch.mode);
    std::size_t j = i + bit * basis.phonon_dimension();
    double amp;
    if (raise) {
      if (n == cutoff) continue;
      j += stride;
      amp = std::sqrt(n + 1.0);
    } else {
      if (n == 0) continue;
      j -= stride;
      amp = std::sqrt(static_cast<double>(n));
    }
    out.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), amp});
  }
  return out;
}

FullHamiltonian::FullHamiltonian(const DriveSchedule& sched, const ChainConfig& chain,
                                 const Basis& basis, std::vector<double> potentials)
    : basis_(basis), gradient_(chain.gradient) {
  if (basis.n_spins() != chain.n_ions || basis.n_modes() != static_cast<int>(chain.modes.size()))
    throw std::invalid_argument("basis does not match the chain");
  if (basis.dimension() > std::numeric_limits<std::uint32_t>::max())
    throw std::invalid_argument("basis too large for the sparse representation");
  if (sched.n_ions != chain.n_ions) throw std::invalid_argument("schedule built for another chain");
  for (const auto& td : sched.terms) programs_.push_back(td.program);

  for (int l = 0; l < static_cast<int>(chain.modes.size()); ++l)
    for (Sideband sb : {Sideband::blue, Sideband::red}) {
      Group g{l, sb, {}, {}, {}, {}};
      const double nu = sb == Sideband::blue ? chain.modes[l].frequency : -chain.modes[l].frequency;
      for (const auto& t : sched.tones) {
        if (t.sideband != sb || t.amplitude == 0.0) continue;
        g.offsets.push_back(t.detuning - nu);
        g.weights.push_back(std::polar(t.amplitude, -t.phase));
        g.signs.push_back(t.phase_sign);
        g.terms.push_back(t.term);
      }
      if (g.offsets.empty()) continue;
      const int gi = static_cast<int>(groups_.size());
      groups_.push_back(g);
      for (int s = 0; s < chain.n_ions; ++s) {
        if (chain.is_spacer(s) || chain.modes[l].lamb_dicke[s] == 0.0) continue;
        DriveChannel ch{s, l, sb, {}, {}, {}};
        channels_.push_back({s, gi, 0.5 * chain.modes[l].lamb_dicke[s], channel_operator(basis, ch)});
        for (double o : g.offsets)
          fastest_ = std::max(fastest_, std::abs((s + 1) * chain.gradient - o));
      }
    }

  if (!potentials.empty()) {
    if (static_cast<int>(potentials.size()) != chain.n_ions)
      throw std::invalid_argument("one potential per ion required");
    diagonal_.assign(basis.dimension(), 0.0);
    for (std::size_t i = 0; i < basis.dimension(); ++i) {
      const std::uint64_t s = basis.spins(i);
      for (int k = 0; k < chain.n_ions; ++k) diagonal_[i] += 0.5 * potentials[k] * ((s >> k & 1U) ? 1.0 : -1.0);
    }
  }
}

cplx FullHamiltonian::group_sum(const Group& g, double t) const {
  cplx acc{};
  for (std::size_t j = 0; j < g.offsets.size(); ++j) {
    double ph = -g.offsets[j] * t;
    if (g.signs[j] != 0 && g.terms[j] >= 0 && programs_[g.terms[j]])
      ph -= 0.5 * g.signs[j] * (*programs_[g.terms[j]])(t);
    acc += g.weights[j] * std::polar(1.0, ph);
  }
  return acc;
}

void FullHamiltonian::apply(double t, const Vec& psi, Vec& out) const {
  out.setZero(psi.size());
  std::vector<cplx> sums(groups_.size());
  for (std::size_t g = 0; g < groups_.size(); ++g) sums[g] = group_sum(groups_[g], t);
  for (const auto& ch : channels_) {
    const cplx c = cplx(0.0, ch.prefactor) * std::polar(1.0, (ch.site + 1) * gradient_ * t) * sums[ch.group];
    const cplx cc = std::conj(c);
    for (const auto& e : ch.entries) {
      out[e.dst] += c * e.amp * psi[e.src];
      out[e.src] += cc * e.amp * psi[e.dst];
    }
  }
  if (!diagonal_.empty())
    for (Eigen::Index i = 0; i < psi.size(); ++i) out[i] += diagonal_[i] * psi[i];
}

Mat FullHamiltonian::dense(double t) const {
  const auto dim = static_cast<Eigen::Index>(basis_.dimension());
  Mat h(dim, dim);
  Vec e = Vec::Zero(dim), col(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    e[j] = 1.0;
    apply(t, e, col);
    h.col(j) = col;
    e[j] = 0.0;
  }
  return h;
}

namespace {

int definite_sector(const Basis& basis, const Vec& psi) {
  std::vector<double> w(static_cast<std::size_t>(basis.n_spins() + 1), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const double p = std::norm(psi[static_cast<Eigen::Index>(i)]);
    w[popcount(basis.spins(i))] += p;
    total += p;
  }
  const auto it = std::max_element(w.begin(), w.end());
  return (total > 0.0 && *it > (1.0 - 1e-3) * total) ? static_cast<int>(it - w.begin()) : -1;
}

void record(Trajectory& tr, const Basis& basis, const Vec& psi, double t, bool keep) {
  tr.times.push_back(t);
  tr.records.push_back(measure(basis, psi, t));
  tr.sectors.push_back(definite_sector(basis, psi));
  if (keep) tr.states.push_back(psi);
}

}  // namespace

Trajectory integrate(const FullHamiltonian& h, const Vec& psi0, const std::vector<double>& times,
                     const IntegratorOptions& opts) {
  if (!(opts.tol >= 1e-12 && opts.tol <= 1e-4))
    throw std::invalid_argument("integrator tolerance must lie in [1e-12, 1e-4]");
  if (times.empty()) throw std::invalid_argument("no sample times");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("sample times must increase");
  if (times.front() < 0.0) throw std::invalid_argument("sample times must be non-negative");
  const Basis& basis = h.basis();
  if (static_cast<std::size_t>(psi0.size()) != basis.dimension())
    throw std::invalid_argument("initial state does not match the basis");

  Trajectory tr;
  tr.n_sites = basis.n_spins();
  tr.stats.fock_cutoff = basis.fock_cutoff();
  double hmax = opts.max_step;
  if (hmax <= 0.0)
    hmax = h.fastest_frequency() > 0.0 ? (2.0 * pi / h.fastest_frequency()) / 20.0
                                       : std::max(times.back(), 1.0);
  const double span = std::max(times.back(), 1e-300);
  const double hmin = opts.min_step * span;

  // Dormand-Prince 5(4) tableau.
  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                          a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                          a64 = 49.0 / 176, a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                          e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

  const auto dim = psi0.size();
  Vec y = psi0, k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), tmp(dim), y5(dim);
  const cplx mi(0.0, -1.0);
  auto rhs = [&](double t, const Vec& v, Vec& out) {
    h.apply(t, v, out);
    out *= mi;
    ++tr.stats.rhs_evaluations;
  };

  const double norm0 = psi0.squaredNorm();
  double t = 0.0;
  double step = hmax;
  std::size_t next = 0;
  while (next < times.size() && times[next] <= 0.0) {
    record(tr, basis, y, times[next], opts.keep_states);
    ++next;
  }
  rhs(t, y, k1);
  bool fsal = true;
  while (next < times.size()) {
    const double target = times[next];
    step = std::min(step, hmax);
    bool hit = false;
    if (t + step >= target) {
      step = target - t;
      hit = true;
    }
    if (!fsal) rhs(t, y, k1);
    tmp = y + step * a21 * k1;
    rhs(t + c2 * step, tmp, k2);
    tmp = y + step * (a31 * k1 + a32 * k2);
    rhs(t + c3 * step, tmp, k3);
    tmp = y + step * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * step, tmp, k4);
    tmp = y + step * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * step, tmp, k5);
    tmp = y + step * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + step, tmp, k6);
    y5 = y + step * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + step, y5, k7);
    tmp = step * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double err = 0.0;
    for (Eigen::Index i = 0; i < dim; ++i) {
      const double sc = opts.tol + opts.tol * std::max(std::abs(y[i]), std::abs(y5[i]));
      err = std::max(err, std::abs(tmp[i]) / sc);
    }
    if (err <= 1.0) {
      t = hit ? target : t + step;
      y.swap(y5);
      k1.swap(k7);
      fsal = true;
      ++tr.stats.steps;
      if (tr.stats.steps > opts.max_steps) throw NumericalError("integrator step budget exhausted");
      if (hit) {
        record(tr, basis, y, t, opts.keep_states);
        tr.stats.max_top_fock = std::max(tr.stats.max_top_fock, top_fock_population(basis, y));
        ++next;
      }
      const double grow = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
      if (!hit) step *= grow;
      else step = std::max(step, hmax * 1e-3) * grow;
    } else {
      ++tr.stats.rejected;
      fsal = true;  // k1 still belongs to (t, y)
      step *= std::max(0.2, 0.9 * std::pow(err, -0.2));
      if (step < hmin) {
        std::ostringstream msg;
        msg << "step size underflow at t=" << t << " (step " << step
            << "); the drive is too stiff for tolerance " << opts.tol;
        throw NumericalError(msg.str());
      }
    }
  }
  tr.stats.norm_drift = std::abs(y.squaredNorm() - norm0);
  return tr;
}

Vec initial_spin_state(const InitialState& s, int n_sites) {
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n_sites);
  Vec v = Vec::Zero(dim);
  switch (s.kind) {
    case InitialState::Kind::single_excitation:
      if (s.site < 0 || s.site >= n_sites) throw std::invalid_argument("initial site out of range");
      v[static_cast<Eigen::Index>(std::uint64_t{1} << s.site)] = 1.0;
      break;
    case InitialState::Kind::wave_packet: {
      const Vec p = wavepacket_state(n_sites, s.k, s.phi0);
      for (int i = 0; i < n_sites; ++i) v[static_cast<Eigen::Index>(std::uint64_t{1} << i)] = p[i];
      break;
    }
    case InitialState::Kind::bitstring:
      if (s.bits >= static_cast<std::uint64_t>(dim)) throw std::invalid_argument("bitstring out of range");
      v[static_cast<Eigen::Index>(s.bits)] = 1.0;
      break;
    case InitialState::Kind::custom: {
      if (s.amplitudes.size() != dim) throw std::invalid_argument("custom amplitudes have wrong length");
      const double nrm = s.amplitudes.norm();
      if (!(nrm > 0.0)) throw std::invalid_argument("custom amplitudes vanish");
      v = s.amplitudes / nrm;
      break;
    }
  }
  return v;
}

std::vector<int> sample_thermal(double nbar, int cutoff, int n_modes, std::uint64_t seed) {
  if (nbar < 0.0) throw std::invalid_argument("nbar must be non-negative");
  std::vector<int> out(static_cast<std::size_t>(n_modes), 0);
  if (nbar == 0.0) return out;
  std::mt19937_64 rng(seed);
  const double q = nbar / (1.0 + nbar);
  std::vector<double> w(static_cast<std::size_t>(cutoff + 1));
  for (int n = 0; n <= cutoff; ++n) w[n] = std::pow(q, n);
  std::discrete_distribution<int> dist(w.begin(), w.end());
  for (auto& n : out) n = dist(rng);
  return out;
}

std::vector<int> initial_phonons(const InitialState& s, int n_modes, int cutoff) {
  switch (s.phonons) {
    case InitialState::Phonons::ground:
      return std::vector<int>(static_cast<std::size_t>(n_modes), 0);
    case InitialState::Phonons::fock:
      if (s.fock_n < 0 || s.fock_n > cutoff) throw std::invalid_argument("Fock number outside cutoff");
      return std::vector<int>(static_cast<std::size_t>(n_modes), s.fock_n);
    case InitialState::Phonons::thermal:
      return sample_thermal(s.nbar, cutoff, n_modes, s.seed);
  }
  return {};
}

Vec initial_state(const InitialState& s, const Basis& basis) {
  const auto ph = initial_phonons(s, basis.n_modes(), basis.fock_cutoff());
  return embed_spin_state(basis, initial_spin_state(s, basis.n_spins()), ph);
}

SimulationResult simulate(const DriveSchedule& sched, ChainConfig chain, const InitialState& init,
                          const std::vector<double>& times, const SimulationOptions& opts) {
  chain.validate();
  SimulationResult out;
  {
    const Basis basis(chain);
    const FullHamiltonian h(sched, chain, basis, opts.potentials);
    out.trajectory = integrate(h, initial_state(init, basis), times, opts.integrator);
  }
  out.leakage_exceeded = out.trajectory.stats.max_top_fock > opts.leakage_threshold;
  if (out.leakage_exceeded && opts.allow_rerun) {
    chain.fock_cutoff += 2;
    const Basis basis(chain);
    const FullHamiltonian h(sched, chain, basis, opts.potentials);
    out.rerun = integrate(h, initial_state(init, basis), times, opts.integrator);
  }
  return out;
}

namespace {

ObservableRecord measure_spin(int n, const Vec& psi, double t) {
  ObservableRecord r;
  r.time = t;
  r.p_excited.assign(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double p = std::norm(psi[i]);
    if (p == 0.0) continue;
    r.norm += p;
    for (int k = 0; k < n; ++k)
      if (static_cast<std::uint64_t>(i) >> k & 1U) r.p_excited[k] += p;
  }
  for (double pe : r.p_excited) r.total_sz += 2.0 * pe - r.norm;
  return r;
}

int spin_sector_of(int n, const Vec& psi) {
  std::vector<double> w(static_cast<std::size_t>(n + 1), 0.0);
  double total = 0.0;
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    const double p = std::norm(psi[i]);
    w[popcount(static_cast<std::uint64_t>(i))] += p;
    total += p;
  }
  const auto it = std::max_element(w.begin(), w.end());
  return (total > 0.0 && *it > (1.0 - 1e-3) * total) ? static_cast<int>(it - w.begin()) : -1;
}

// exp(-i K) for hermitian K.
Mat expm_hermitian(const Mat& k) {
  Eigen::SelfAdjointEigenSolver<Mat> es(k);
  const Eigen::VectorXd ev = es.eigenvalues();
  Vec ph(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) ph[i] = std::polar(1.0, -ev[i]);
  return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace

Trajectory evolve_effective(const EffectiveModel& model, const Vec& psi0,
                            const std::vector<double>& times, double max_step) {
  model.validate();
  const int n = model.n_sites;
  const auto dim = static_cast<Eigen::Index>(std::size_t{1} << n);
  if (psi0.size() != dim) throw std::invalid_argument("initial spin state has wrong dimension");
  for (std::size_t i = 1; i < times.size(); ++i)
    if (!(times[i] > times[i - 1])) throw std::invalid_argument("sample times must increase");

  std::vector<Sector> sectors;
  std::vector<Vec> parts;
  for (int e = 0; e <= n; ++e) {
    Sector sec(n, e);
    Vec part = full_to_sector(sec, psi0);
    if (part.squaredNorm() == 0.0) continue;
    sectors.push_back(std::move(sec));
    parts.push_back(std::move(part));
  }

  Trajectory tr;
  tr.n_sites = n;
  std::vector<Vec> states(times.size(), Vec::Zero(dim));

  if (!model.time_dependent()) {
    for (std::size_t s = 0; s < sectors.size(); ++s) {
      const auto es = diagonalize(build_h_eff(model, sectors[s]), 1 << 14);
      const Vec c = es.vectors.adjoint() * parts[s];
      for (std::size_t i = 0; i < times.size(); ++i) {
        Vec ph(c.size());
        for (Eigen::Index j = 0; j < c.size(); ++j) ph[j] = c[j] * std::polar(1.0, -es.values[j] * times[i]);
        states[i] += sector_to_full(sectors[s], es.vectors * ph);
      }
    }
  } else {
    // Fourth-order Magnus steps with two Gauss points.
    const double scale = std::max(model.scale(), 1e-300);
    const double h_cap = max_step > 0.0 ? max_step : 0.02 / scale;
    const double g1 = 0.5 - std::sqrt(3.0) / 6.0, g2 = 0.5 + std::sqrt(3.0) / 6.0;
    for (std::size_t s = 0; s < sectors.size(); ++s) {
      Vec v = parts[s];
      double t = 0.0;
      for (std::size_t i = 0; i < times.size(); ++i) {
        const double target = times[i];
        const double gap = target - t;
        if (gap > 0.0) {
          const int steps = static_cast<int>(std::ceil(gap / h_cap));
          const double h = gap / steps;
          for (int k = 0; k < steps; ++k) {
            const Mat h1 = build_h_eff(model, sectors[s], t + g1 * h);
            const Mat h2 = build_h_eff(model, sectors[s], t + g2 * h);
            // Omega = -i h/2 (H1 + H2) - (sqrt3/12) h^2 [H2, H1]; exp(Omega) = exp(-i K).
            const Mat comm = h2 * h1 - h1 * h2;
            const Mat kmat = 0.5 * h * (h1 + h2) + cplx(0.0, -std::sqrt(3.0) / 12.0 * h * h) * comm;
            v = expm_hermitian(0.5 * (kmat + kmat.adjoint())) * v;
            t += h;
          }
          t = target;
        }
        states[i] += sector_to_full(sectors[s], v);
      }
    }
  }
  for (std::size_t i = 0; i < times.size(); ++i) {
    tr.times.push_back(times[i]);
    tr.records.push_back(measure_spin(n, states[i], times[i]));
    tr.sectors.push_back(spin_sector_of(n, states[i]));
    tr.states.push_back(std::move(states[i]));
  }
  return tr;
}

FrameCorrection frame_from_schedule(const DriveSchedule& sched) {
  FrameCorrection f;
  f.offset = sched.stark.offset;
  f.slope = sched.gradient_offset;
  return f;
}

Vec project_vacuum(const Basis& basis, const Vec& psi) {
  Vec out(static_cast<Eigen::Index>(basis.spin_dimension()));
  for (std::size_t s = 0; s < basis.spin_dimension(); ++s)
    out[static_cast<Eigen::Index>(s)] = psi[static_cast<Eigen::Index>(s * basis.phonon_dimension())];
  return out;
}

double Comparison::min_fidelity() const {
  return fidelity.empty() ? 1.0 : *std::min_element(fidelity.begin(), fidelity.end());
}

double Comparison::max_distance() const {
  return pe_distance.empty() ? 0.0 : *std::max_element(pe_distance.begin(), pe_distance.end());
}

Comparison compare(const Trajectory& full, const Basis& basis, const Trajectory& eff,
                   const FrameCorrection& frame) {
  if (full.n_sites != eff.n_sites) throw std::invalid_argument("trajectories have different N");
  if (full.times.size() != eff.times.size()) throw std::invalid_argument("sample grids differ");
  if (full.states.size() != full.times.size() || eff.states.size() != eff.times.size())
    throw std::invalid_argument("comparison needs state snapshots");
  Comparison c;
  const int n = full.n_sites;
  for (std::size_t i = 0; i < full.times.size(); ++i) {
    if (std::abs(full.times[i] - eff.times[i]) > 1e-9 * std::max(1.0, std::abs(full.times[i])))
      throw std::invalid_argument("sample times differ");
    const double t = full.times[i];
    Vec spin = project_vacuum(basis, full.states[i]);
    for (Eigen::Index s = 0; s < spin.size(); ++s) {
      double f = 0.0;
      for (int k = 0; k < n; ++k)
        if (static_cast<std::uint64_t>(s) >> k & 1U) f += frame.offset + frame.slope * k;
      spin[s] *= std::polar(1.0, f * t);
    }
    const cplx ov = eff.states[i].dot(spin);
    const double ns = spin.squaredNorm(), ne = eff.states[i].squaredNorm();
    c.times.push_back(t);
    c.overlap.push_back(std::norm(ov));
    c.fidelity.push_back(ns > 0.0 && ne > 0.0 ? std::norm(ov) / (ns * ne) : 0.0);
    double d = 0.0;
    for (int k = 0; k < n; ++k)
      d = std::max(d, std::abs(full.records[i].p_excited[k] - eff.records[i].p_excited[k]));
    c.pe_distance.push_back(d);
  }
  return c;
}

double max_pe_distance(const Trajectory& a, const Trajectory& b) {
  if (a.records.size() != b.records.size()) throw std::invalid_argument("sample grids differ");
  double d = 0.0;
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& pa = a.records[i].p_excited;
    const auto& pb = b.records[i].p_excited;
    if (pa.size() != pb.size()) throw std::invalid_argument("trajectories have different N");
    for (std::size_t k = 0; k < pa.size(); ++k) d = std::max(d, std::abs(pa[k] - pb[k]));
  }
  return d;
}

PhaseTrack phase_track(const Trajectory& traj, double residual_threshold) {
  PhaseTrack out;
  const int n = traj.n_sites;
  if (n < 3) throw std::invalid_argument("phase tracking needs N >= 3");
  double prev = 0.0;
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    const auto& p = traj.records[i].p_excited;
    cplx z{};
    double mean = 0.0;
    for (int s = 0; s < n; ++s) {
      z += p[s] * std::polar(1.0, 2.0 * pi * s / n);
      mean += p[s];
    }
    mean /= n;
    double ph = std::arg(z);
    if (i > 0) ph = prev + std::remainder(ph - prev, 2.0 * pi);
    prev = ph;
    // Least-squares cosine profile: a + b cos(theta_s - ph) with b = 2|z|/n.
    const double b = 2.0 * std::abs(z) / n;
    double rss = 0.0, tss = 0.0;
    for (int s = 0; s < n; ++s) {
      const double model = mean + b * std::cos(2.0 * pi * s / n - ph);
      rss += (p[s] - model) * (p[s] - model);
      tss += p[s] * p[s];
    }
    const double rel = tss > 0.0 ? std::sqrt(rss / tss) : 0.0;
    out.times.push_back(traj.times[i]);
    out.phase.push_back(ph);
    out.residual.push_back(rel);
    if (rel > residual_threshold) out.profile_mismatch = true;
  }
  const std::size_t m = out.times.size();
  if (m >= 2) {
    double st = 0, sp = 0, stt = 0, stp = 0;
    for (std::size_t i = 0; i < m; ++i) {
      st += out.times[i];
      sp += out.phase[i];
      stt += out.times[i] * out.times[i];
      stp += out.times[i] * out.phase[i];
    }
    const double dm = static_cast<double>(m);
    const double sxx = stt - st * st / dm;
    out.velocity = (stp - st * sp / dm) / sxx;
    out.intercept = (sp - out.velocity * st) / dm;
    if (m > 2) {
      double rss = 0.0;
      for (std::size_t i = 0; i < m; ++i) {
        const double r = out.phase[i] - out.intercept - out.velocity * out.times[i];
        rss += r * r;
      }
      out.ci95 = 1.96 * std::sqrt(rss / (dm - 2.0) / sxx);
    }
  }
  return out;
}

std::vector<double> stroboscopic_times(double period, int count) {
  if (!(period > 0.0) || count < 0) throw std::invalid_argument("bad stroboscopic grid");
  std::vector<double> t(static_cast<std::size_t>(count + 1));
  for (int k = 0; k <= count; ++k) t[k] = k * period;
  return t;
}

}  // namespace ionsim
