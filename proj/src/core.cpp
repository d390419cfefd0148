#include "ionsim/core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ionsim {

void ChainConfig::validate() const {
  if (n_ions < 2) throw std::invalid_argument("chain needs at least two ions");
  if (n_ions > 62) throw std::invalid_argument("chain too long for the bitstring basis");
  if (!(gradient > 0.0)) throw std::invalid_argument("gradient must be positive");
  if (fock_cutoff < 1) throw std::invalid_argument("fock cutoff must be >= 1");
  if (modes.empty()) throw std::invalid_argument("at least one motional mode is required");
  for (std::size_t l = 0; l < modes.size(); ++l) {
    const Mode& m = modes[l];
    if (!(m.frequency > 0.0)) throw std::invalid_argument("mode frequencies must be positive");
    if (static_cast<int>(m.lamb_dicke.size()) != n_ions)
      throw std::invalid_argument("Lamb-Dicke row length must equal the ion count");
    if (l > 0 && !(m.frequency > modes[l - 1].frequency))
      throw std::invalid_argument("mode frequencies must be strictly increasing");
  }
  for (int s : spacers)
    if (s < 0 || s >= n_ions) throw std::invalid_argument("spacer site out of range");
}

bool ChainConfig::is_spacer(int site) const {
  return std::find(spacers.begin(), spacers.end(), site) != spacers.end();
}

ChainConfig ChainConfig::com_mode(int n_ions, double gradient, double nu, double eta,
                                  int fock_cutoff) {
  ChainConfig c;
  c.n_ions = n_ions;
  c.gradient = gradient;
  c.fock_cutoff = fock_cutoff;
  c.modes.push_back(Mode{nu, std::vector<double>(static_cast<std::size_t>(std::max(n_ions, 0)), eta)});
  return c;
}

ChainConfig ChainConfig::com_mode_single_ion(int n_ions, double gradient, double nu,
                                             double eta1, int fock_cutoff) {
  return com_mode(n_ions, gradient, nu, eta1 / std::sqrt(static_cast<double>(n_ions)),
                  fock_cutoff);
}

Basis::Basis(int n_spins, int n_modes, int fock_cutoff, std::size_t dimension_cap)
    : n_spins_(n_spins), n_modes_(n_modes), cutoff_(fock_cutoff) {
  if (n_spins < 1 || n_spins > 62) throw std::invalid_argument("spin count out of range");
  if (n_modes < 0) throw std::invalid_argument("negative mode count");
  if (fock_cutoff < 0) throw std::invalid_argument("negative fock cutoff");
  const double levels = fock_cutoff + 1.0;
  const double dim = std::ldexp(1.0, n_spins) * std::pow(levels, n_modes);
  if (dim > static_cast<double>(dimension_cap))
    throw std::invalid_argument("basis dimension " + std::to_string(dim) +
                                " exceeds cap " + std::to_string(dimension_cap));
  strides_.assign(static_cast<std::size_t>(n_modes), 1);
  phonon_dim_ = 1;
  for (int l = n_modes - 1; l >= 0; --l) {
    strides_[l] = phonon_dim_;
    phonon_dim_ *= static_cast<std::size_t>(fock_cutoff + 1);
  }
  dimension_ = (std::size_t{1} << n_spins) * phonon_dim_;
}

Basis::Basis(const ChainConfig& config, std::size_t dimension_cap)
    : Basis(config.n_ions, static_cast<int>(config.modes.size()), config.fock_cutoff,
            dimension_cap) {}

std::size_t Basis::index(std::uint64_t spins, std::span<const int> phonons) const {
  if (spins >= spin_dimension()) throw std::invalid_argument("spin configuration out of range");
  if (static_cast<int>(phonons.size()) != n_modes_)
    throw std::invalid_argument("phonon tuple has wrong length");
  std::size_t p = 0;
  for (int l = 0; l < n_modes_; ++l) {
    if (phonons[l] < 0 || phonons[l] > cutoff_)
      throw std::invalid_argument("phonon number outside cutoff");
    p += static_cast<std::size_t>(phonons[l]) * strides_[l];
  }
  return static_cast<std::size_t>(spins) * phonon_dim_ + p;
}

int Basis::phonon(std::size_t index, int mode) const {
  return static_cast<int>((index % phonon_dim_) / strides_[mode] %
                          static_cast<std::size_t>(cutoff_ + 1));
}

std::vector<int> Basis::phonons(std::size_t index) const {
  std::vector<int> out(static_cast<std::size_t>(n_modes_));
  for (int l = 0; l < n_modes_; ++l) out[l] = phonon(index, l);
  return out;
}

Vec apply_ladder(const Basis& basis, const Vec& state, LadderKind kind, int label,
                 LeakageCounter* leakage) {
  if (static_cast<std::size_t>(state.size()) != basis.dimension())
    throw std::invalid_argument("state dimension does not match basis");
  const bool spin_op = kind == LadderKind::spin_raise || kind == LadderKind::spin_lower;
  if (spin_op && (label < 0 || label >= basis.n_spins()))
    throw std::invalid_argument("site label out of range");
  if (!spin_op && (label < 0 || label >= basis.n_modes()))
    throw std::invalid_argument("mode label out of range");

  Vec out = Vec::Zero(state.size());
  const std::size_t dim = basis.dimension();
  switch (kind) {
    case LadderKind::spin_raise:
    case LadderKind::spin_lower: {
      const std::uint64_t bit = std::uint64_t{1} << label;
      const bool raise = kind == LadderKind::spin_raise;
      for (std::size_t i = 0; i < dim; ++i) {
        if (state[i] == cplx{}) continue;
        const std::uint64_t s = basis.spins(i);
        if (raise == static_cast<bool>(s & bit)) continue;
        const std::uint64_t t = raise ? (s | bit) : (s & ~bit);
        out[static_cast<Eigen::Index>(t * basis.phonon_dimension() + i % basis.phonon_dimension())] +=
            state[i];
      }
      break;
    }
    case LadderKind::phonon_raise: {
      const std::size_t stride = basis.phonon_stride(label);
      for (std::size_t i = 0; i < dim; ++i) {
        if (state[i] == cplx{}) continue;
        const int n = basis.phonon(i, label);
        if (n == basis.fock_cutoff()) {
          if (leakage) {
            leakage->lost_norm += std::norm(state[i]) * (n + 1.0);
            ++leakage->events;
          }
          continue;
        }
        out[i + stride] += std::sqrt(n + 1.0) * state[i];
      }
      break;
    }
    case LadderKind::phonon_lower: {
      const std::size_t stride = basis.phonon_stride(label);
      for (std::size_t i = 0; i < dim; ++i) {
        const int n = basis.phonon(i, label);
        if (n == 0 || state[i] == cplx{}) continue;
        out[i - stride] += std::sqrt(static_cast<double>(n)) * state[i];
      }
      break;
    }
  }
  return out;
}

std::vector<std::uint64_t> spin_sector(int n_spins, int n_exc) {
  if (n_exc < 0 || n_exc > n_spins) throw std::invalid_argument("excitation number out of range");
  std::vector<std::uint64_t> out;
  const std::uint64_t total = std::uint64_t{1} << n_spins;
  for (std::uint64_t s = 0; s < total; ++s)
    if (popcount(s) == n_exc) out.push_back(s);
  return out;
}

std::vector<std::size_t> excitation_sector(const Basis& basis, int n_exc) {
  std::vector<std::size_t> out;
  for (std::uint64_t s : spin_sector(basis.n_spins(), n_exc))
    for (std::size_t p = 0; p < basis.phonon_dimension(); ++p)
      out.push_back(static_cast<std::size_t>(s) * basis.phonon_dimension() + p);
  return out;
}

ObservableRecord measure(const Basis& basis, const Vec& state, double time) {
  ObservableRecord r;
  r.time = time;
  r.p_excited.assign(static_cast<std::size_t>(basis.n_spins()), 0.0);
  r.mean_phonons.assign(static_cast<std::size_t>(basis.n_modes()), 0.0);
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const double p = std::norm(state[static_cast<Eigen::Index>(i)]);
    if (p == 0.0) continue;
    r.norm += p;
    const std::uint64_t s = basis.spins(i);
    for (int k = 0; k < basis.n_spins(); ++k)
      if (s >> k & 1U) r.p_excited[k] += p;
    for (int l = 0; l < basis.n_modes(); ++l) r.mean_phonons[l] += p * basis.phonon(i, l);
  }
  for (double pe : r.p_excited) r.total_sz += 2.0 * pe - r.norm;
  return r;
}

double top_fock_population(const Basis& basis, const Vec& state) {
  double worst = 0.0;
  for (int l = 0; l < basis.n_modes(); ++l) {
    double p = 0.0;
    for (std::size_t i = 0; i < basis.dimension(); ++i)
      if (basis.phonon(i, l) == basis.fock_cutoff()) p += std::norm(state[static_cast<Eigen::Index>(i)]);
    worst = std::max(worst, p);
  }
  return worst;
}

Vec product_state(const Basis& basis, std::uint64_t spins, std::span<const int> phonons) {
  Vec v = Vec::Zero(static_cast<Eigen::Index>(basis.dimension()));
  v[static_cast<Eigen::Index>(basis.index(spins, phonons))] = 1.0;
  return v;
}

Vec embed_spin_state(const Basis& basis, const Vec& spin_state, std::span<const int> phonons) {
  if (static_cast<std::size_t>(spin_state.size()) != basis.spin_dimension())
    throw std::invalid_argument("spin state has wrong dimension");
  Vec v = Vec::Zero(static_cast<Eigen::Index>(basis.dimension()));
  const std::size_t offset = basis.index(0, phonons);
  for (std::size_t s = 0; s < basis.spin_dimension(); ++s)
    v[static_cast<Eigen::Index>(s * basis.phonon_dimension() + offset)] =
        spin_state[static_cast<Eigen::Index>(s)];
  return v;
}

Mat ladder_matrix(const Basis& basis, LadderKind kind, int label) {
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  Mat m = Mat::Zero(dim, dim);
  Vec e = Vec::Zero(dim);
  for (Eigen::Index j = 0; j < dim; ++j) {
    e[j] = 1.0;
    m.col(j) = apply_ladder(basis, e, kind, label);
    e[j] = 0.0;
  }
  return m;
}

}  // namespace ionsim
