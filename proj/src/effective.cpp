#include "ionsim/effective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace ionsim {

using std::numbers::pi;

void EffectiveModel::validate() const {
  if (n_sites < 1) throw std::invalid_argument("effective model needs at least one site");
  validate_terms(terms, n_sites);
  if (!potentials.empty() && static_cast<int>(potentials.size()) != n_sites)
    throw std::invalid_argument("one potential per site required");
  for (double v : potentials)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite site potential");
  if (!programs.empty() && programs.size() != terms.size())
    throw std::invalid_argument("one phase program per term required");
  for (int s : spacers)
    if (s < 0 || s >= n_sites) throw std::invalid_argument("spacer out of range");
}

bool EffectiveModel::time_dependent() const {
  for (const auto& t : terms)
    if (t.detuning != 0.0) return true;
  for (const auto& p : programs)
    if (p) return true;
  return false;
}

double EffectiveModel::scale() const {
  double s = 0.0, d = 0.0, v = 0.0;
  for (const auto& t : terms) {
    s += std::abs(t.rate);
    d = std::max(d, std::abs(t.detuning));
  }
  for (double x : potentials) v = std::max(v, std::abs(x));
  return s + v + d;
}

Sector::Sector(int n_sites, std::optional<int> n_exc) : n_sites_(n_sites), n_exc_(n_exc) {
  if (n_sites < 1 || n_sites > 30) throw std::invalid_argument("sector site count out of range");
  if (n_exc) {
    configs_ = spin_sector(n_sites, *n_exc);
  } else {
    configs_.resize(std::size_t{1} << n_sites);
    for (std::size_t i = 0; i < configs_.size(); ++i) configs_[i] = i;
  }
}

long Sector::find(std::uint64_t config) const {
  auto it = std::lower_bound(configs_.begin(), configs_.end(), config);
  if (it == configs_.end() || *it != config) return -1;
  return static_cast<long>(it - configs_.begin());
}

Mat build_h_eff(const EffectiveModel& model, const Sector& sector, double t) {
  model.validate();
  if (sector.n_sites() != model.n_sites) throw std::invalid_argument("sector size mismatch");
  const auto dim = static_cast<Eigen::Index>(sector.size());
  Mat h = Mat::Zero(dim, dim);
  std::vector<bool> spacer(static_cast<std::size_t>(model.n_sites), false);
  for (int s : model.spacers) spacer[s] = true;

  for (std::size_t ti = 0; ti < model.terms.size(); ++ti) {
    const auto& term = model.terms[ti];
    if (term.rate == 0.0) continue;
    double phase = term.phase - term.detuning * t;
    if (!model.programs.empty() && model.programs[ti]) phase += model.programs[ti](t);
    const cplx w = std::polar(term.rate, phase);
    for (Eigen::Index c = 0; c < dim; ++c) {
      const std::uint64_t cfg = sector.config(static_cast<std::size_t>(c));
      for (int i = 0; i + term.range < model.n_sites; ++i) {
        const int j = i + term.range;
        if (spacer[i] || spacer[j]) continue;
        const bool bi = cfg >> i & 1U, bj = cfg >> j & 1U;
        if (bi == bj) continue;
        const std::uint64_t out = cfg ^ (std::uint64_t{1} << i) ^ (std::uint64_t{1} << j);
        const long r = sector.find(out);
        if (r < 0) continue;
        // s+_i s-_j moves the excitation j -> i with weight w; the conjugate moves it back.
        h(r, c) += bj ? w : std::conj(w);
      }
    }
  }
  if (!model.potentials.empty()) {
    for (Eigen::Index c = 0; c < dim; ++c) {
      const std::uint64_t cfg = sector.config(static_cast<std::size_t>(c));
      double e = 0.0;
      for (int k = 0; k < model.n_sites; ++k)
        e += 0.5 * model.potentials[k] * ((cfg >> k & 1U) ? 1.0 : -1.0);
      h(c, c) += e;
    }
  }
  return h;
}

Eigensystem diagonalize(const Mat& h, std::size_t dimension_cap) {
  if (static_cast<std::size_t>(h.rows()) > dimension_cap)
    throw std::invalid_argument("matrix dimension exceeds diagonalization cap");
  Eigensystem out;
  if (h.rows() == 0) return out;
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  if (es.info() != Eigen::Success) throw NumericalError("eigensolver failed to converge");
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  const double scale = std::max(h.norm(), 1e-300);
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    const double r = (h * out.vectors.col(i) - out.values[i] * out.vectors.col(i)).norm();
    out.max_residual = std::max(out.max_residual, r / scale);
  }
  return out;
}

std::vector<double> ring_spectrum(int n, double flux, double rate) {
  if (n < 3) throw std::invalid_argument("ring needs N >= 3");
  std::vector<double> e(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) e[k] = 2.0 * rate * std::cos(2.0 * pi * (k + flux) / n);
  return e;
}

double wavepacket_velocity(int n, int k, double flux, double rate) {
  if (n < 3) throw std::invalid_argument("ring needs N >= 3");
  return -4.0 * rate * std::sin(pi / n) * std::sin(2.0 * pi * (flux + k - 0.5) / n);
}

Vec wavepacket_state(int n, int k, double phi0) {
  if (n < 3) throw std::invalid_argument("ring needs N >= 3");
  Vec v(n);
  const cplx rel = std::polar(1.0, phi0);
  for (int s = 0; s < n; ++s) {
    const cplx a = std::polar(1.0, 2.0 * pi * k * s / n);
    const cplx b = std::polar(1.0, 2.0 * pi * (k - 1) * s / n);
    v[s] = (a + rel * b) / std::sqrt(2.0 * n);
  }
  return v;
}

std::vector<double> jordan_wigner_oracle(int n, double loop_flux, int n_exc, double rate) {
  if (n < 3) throw std::invalid_argument("ring needs N >= 3");
  if (n_exc < 1 || n_exc > n - 1) throw std::invalid_argument("excitation number out of range");
  const double phi = loop_flux / n;
  Mat h = Mat::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    h(i, i + 1) = std::polar(rate, phi);
    h(i + 1, i) = std::conj(h(i, i + 1));
  }
  const double twist = (n_exc % 2 == 1) ? 1.0 : -1.0;
  h(n - 1, 0) += twist * std::polar(rate, phi);
  h(0, n - 1) += twist * std::polar(rate, -phi);
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  const Eigen::VectorXd eps = es.eigenvalues();

  std::vector<double> out;
  for (std::uint64_t s : spin_sector(n, n_exc)) {
    double e = 0.0;
    for (int i = 0; i < n; ++i)
      if (s >> i & 1U) e += eps[i];
    out.push_back(e);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Vec sector_to_full(const Sector& sector, const Vec& v) {
  if (static_cast<std::size_t>(v.size()) != sector.size())
    throw std::invalid_argument("vector does not match sector");
  Vec full = Vec::Zero(static_cast<Eigen::Index>(std::size_t{1} << sector.n_sites()));
  for (std::size_t i = 0; i < sector.size(); ++i)
    full[static_cast<Eigen::Index>(sector.config(i))] = v[static_cast<Eigen::Index>(i)];
  return full;
}

Vec full_to_sector(const Sector& sector, const Vec& v) {
  if (static_cast<std::size_t>(v.size()) != (std::size_t{1} << sector.n_sites()))
    throw std::invalid_argument("vector is not a full spin-space vector");
  Vec out(static_cast<Eigen::Index>(sector.size()));
  for (std::size_t i = 0; i < sector.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = v[static_cast<Eigen::Index>(sector.config(i))];
  return out;
}

EffectiveModel ring_model(int n, double loop_flux, double rate) {
  const auto g = compile(geometry::Ring{n, loop_flux, rate});
  EffectiveModel m;
  m.n_sites = n;
  m.terms = g.terms;
  return m;
}

}  // namespace ionsim
