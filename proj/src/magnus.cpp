#include "ionsim/magnus.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Sparse>

namespace ionsim {

using std::numbers::pi;

namespace {

constexpr double kGaussNodes[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                   -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                   0.7966664774136267,  0.9602898564975363};
constexpr double kGaussWeights[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                     0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                     0.2223810344533745, 0.1012285362903763};

using Sparse = Eigen::SparseMatrix<cplx>;

// f_p at time t for p = 2c (channel coefficient) and p = 2c + 1 (its conjugate).
void coefficients(const std::vector<DriveChannel>& ch, double t, std::vector<cplx>& out) {
  for (std::size_t c = 0; c < ch.size(); ++c) {
    cplx f{};
    for (std::size_t j = 0; j < ch[c].amps.size(); ++j) f += ch[c].amps[j] * std::polar(1.0, ch[c].freqs[j] * t);
    out[2 * c] = f;
    out[2 * c + 1] = std::conj(f);
  }
}

struct Integrals {
  Mat nested;                  // I_pq = int f_p(t) int_0^t f_q
  std::vector<cplx> single;    // int f_p
};

Integrals integrate_panels(const std::vector<DriveChannel>& ch, double period, long panels) {
  const std::size_t p = 2 * ch.size();
  Integrals out;
  out.nested = Mat::Zero(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
  out.single.assign(p, cplx{});
  std::vector<cplx> f(p), g(p), big_f(p);
  Vec fv(static_cast<Eigen::Index>(p)), fw(static_cast<Eigen::Index>(p));
  const double h = period / static_cast<double>(panels);
  for (long m = 0; m < panels; ++m) {
    const double s = h * static_cast<double>(m);
    std::vector<cplx> panel_sum(p, cplx{});
    for (int a = 0; a < 8; ++a) {
      const double u = 0.5 * h * (1.0 + kGaussNodes[a]);
      const double w = 0.5 * h * kGaussWeights[a];
      coefficients(ch, s + u, f);
      // Inner integral from the panel start to the node.
      std::fill(big_f.begin(), big_f.end(), cplx{});
      for (int b = 0; b < 8; ++b) {
        coefficients(ch, s + 0.5 * u * (1.0 + kGaussNodes[b]), g);
        const double wb = 0.5 * u * kGaussWeights[b];
        for (std::size_t q = 0; q < p; ++q) big_f[q] += wb * g[q];
      }
      for (std::size_t q = 0; q < p; ++q) {
        fv[static_cast<Eigen::Index>(q)] = w * f[q];
        fw[static_cast<Eigen::Index>(q)] = out.single[q] + big_f[q];
        panel_sum[q] += w * f[q];
      }
      out.nested.noalias() += fv * fw.transpose();
    }
    for (std::size_t q = 0; q < p; ++q) out.single[q] += panel_sum[q];
  }
  return out;
}

Sparse channel_matrix(const Basis& basis, const DriveChannel& ch) {
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  std::vector<Eigen::Triplet<cplx>> trip;
  for (const auto& e : channel_operator(basis, ch)) trip.emplace_back(e.dst, e.src, e.amp);
  Sparse x(dim, dim);
  x.setFromTriplets(trip.begin(), trip.end());
  return x;
}

double max_abs(const Mat& m) { return m.size() ? m.cwiseAbs().maxCoeff() : 0.0; }

const TermDrive& single_term(const DriveSchedule& sched) {
  if (sched.terms.size() != 1 || sched.shared)
    throw std::invalid_argument("decomposition is defined for a single-term schedule");
  const auto& td = sched.terms[0];
  if (td.delta != 0.0 || td.program)
    throw std::invalid_argument("closed forms need a static term (delta = 0, no phase program)");
  if (sched.gradient_offset != 0.0)
    throw std::invalid_argument("closed forms need an uncorrected gradient");
  return td;
}

}  // namespace

MagnusTerms magnus_terms(const DriveSchedule& sched, const ChainConfig& chain, const Basis& basis,
                         double period, const MagnusOptions& opts) {
  if (!(period > 0.0)) throw std::invalid_argument("period must be positive");
  if (basis.dimension() > opts.dimension_cap)
    throw std::invalid_argument("basis dimension " + std::to_string(basis.dimension()) +
                                " exceeds the dense Magnus cap");
  for (const auto& td : sched.terms)
    if (td.program) throw std::invalid_argument("phase programs are not supported by the Magnus oracle");
  const auto channels = drive_channels(sched, chain);

  MagnusTerms out;
  out.period = period;
  const auto dim = static_cast<Eigen::Index>(basis.dimension());
  out.chi1 = Mat::Zero(dim, dim);
  out.chi2 = Mat::Zero(dim, dim);
  if (channels.empty()) return out;

  double fastest = 0.0;
  for (const auto& c : channels)
    for (double w : c.freqs) fastest = std::max(fastest, std::abs(w));
  long panels = 1;
  if (fastest > 0.0)
    panels = std::max(1L, static_cast<long>(std::ceil(period / (opts.panel_fraction * 2.0 * pi / fastest))));

  Integrals cur = integrate_panels(channels, period, panels);
  double change = 0.0;
  for (int r = 0; r < opts.max_refinements; ++r) {
    Integrals next = integrate_panels(channels, period, 2 * panels);
    panels *= 2;
    const double scale = std::max(max_abs(next.nested), 1e-300);
    change = max_abs(next.nested - cur.nested) / scale;
    cur = std::move(next);
    if (change < opts.tolerance) break;
  }
  out.panels = panels;
  out.quadrature_error = change;

  std::vector<Sparse> x;
  std::vector<int> mode_of;
  for (const auto& c : channels) {
    Sparse m = channel_matrix(basis, c);
    x.push_back(m);
    x.push_back(Sparse(m.adjoint()));
    mode_of.push_back(c.mode);
    mode_of.push_back(c.mode);
  }
  const std::size_t p = x.size();
  Sparse chi1(dim, dim);
  for (std::size_t a = 0; a < p; ++a) chi1 += cur.single[a] * x[a];
  out.chi1 = Mat(chi1);

  // chi2 = -i sum_pq (I_pq - I_qp) X_p X_q.
  Sparse acc(dim, dim);
  for (std::size_t a = 0; a < p; ++a) {
    Sparse y(dim, dim);
    for (std::size_t b = 0; b < p; ++b) {
      const bool same = mode_of[a] == mode_of[b];
      if ((opts.pairs == ModePairs::same_mode && !same) || (opts.pairs == ModePairs::cross_mode && same))
        continue;
      const cplx k = cur.nested(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) -
                     cur.nested(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a));
      if (k != cplx{}) y += k * x[b];
    }
    acc += Sparse(x[a] * y);
  }
  out.chi2 = cplx(0.0, -1.0) * Mat(acc);
  return out;
}

cplx hop_coefficient(const Mat& chi, const Basis& basis, int from, int to, int fock) {
  if (from < 0 || to < 0 || from >= basis.n_spins() || to >= basis.n_spins())
    throw std::invalid_argument("site out of range");
  if (fock < 0 || fock > basis.fock_cutoff()) throw std::invalid_argument("Fock number outside cutoff");
  const std::vector<int> ph(static_cast<std::size_t>(basis.n_modes()), fock);
  const auto i = basis.index(std::uint64_t{1} << from, ph);
  const auto j = basis.index(std::uint64_t{1} << to, ph);
  return chi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
}

double sz_coefficient(const Mat& chi, const Basis& basis, int site) {
  if (basis.fock_cutoff() < 2) throw std::invalid_argument("sz extraction needs a Fock cutoff of at least 2");
  if (site < 0 || site >= basis.n_spins()) throw std::invalid_argument("site out of range");
  std::vector<int> ph(static_cast<std::size_t>(basis.n_modes()), 0);
  auto diag = [&](std::uint64_t spins, int n) {
    ph[0] = n;
    const auto i = static_cast<Eigen::Index>(basis.index(spins, ph));
    return chi(i, i).real();
  };
  const std::uint64_t up = std::uint64_t{1} << site;
  const double d1 = diag(up, 1) - diag(0, 1);
  const double d0 = diag(up, 0) - diag(0, 0);
  return 0.5 * (d1 - d0);
}

double hopping_projection(const Mat& chi, const Basis& basis) {
  const double norm = chi.norm();
  if (norm == 0.0) return 0.0;
  const std::size_t pd = basis.phonon_dimension();
  double worst = 0.0;
  for (int a = 0; a < basis.n_spins(); ++a)
    for (int b = 0; b < basis.n_spins(); ++b) {
      if (a == b) continue;
      cplx tr{};
      std::size_t count = 0;
      for (std::uint64_t s = 0; s < basis.spin_dimension(); ++s) {
        if (!(s >> b & 1U) || (s >> a & 1U)) continue;
        const std::uint64_t t = s ^ (std::uint64_t{1} << a) ^ (std::uint64_t{1} << b);
        for (std::size_t ph = 0; ph < pd; ++ph) {
          tr += chi(static_cast<Eigen::Index>(t * pd + ph), static_cast<Eigen::Index>(s * pd + ph));
          ++count;
        }
      }
      if (count) worst = std::max(worst, std::abs(tr) / (std::sqrt(static_cast<double>(count)) * norm));
    }
  return worst;
}

double excitation_commutator(const Mat& chi, const Basis& basis) {
  const double scale = max_abs(chi);
  if (scale == 0.0) return 0.0;
  std::vector<double> q(basis.dimension());
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    const int up = popcount(basis.spins(i));
    double v = 0.5 * (2 * up - basis.n_spins());
    for (int l = 0; l < basis.n_modes(); ++l) v -= basis.phonon(i, l);
    q[i] = v;
  }
  double worst = 0.0;
  for (Eigen::Index j = 0; j < chi.cols(); ++j)
    for (Eigen::Index i = 0; i < chi.rows(); ++i)
      worst = std::max(worst, std::abs(chi(i, j)) * std::abs(q[j] - q[i]));
  return worst / scale;
}

cplx closed_form_hop(double period, double eta, double rabi, double xi, double gradient, int k,
                     int n, double phase, Sideband sb) {
  const double shift = 2.0 * gradient * (k + 0.5 * n);
  const double den = sb == Sideband::blue ? 2.0 * xi - shift : 2.0 * xi + shift;
  return std::polar(period * eta * eta * rabi * rabi / den, -phase);
}

double closed_form_sz(double period, double eta, double rabi, double xi, double gradient, int k,
                      int n, Sideband sb) {
  const double half = 0.5 * n * gradient;
  const double pre = period * eta * eta * rabi * rabi;
  if (sb == Sideband::blue) {
    const double x = xi - k * gradient;
    return -pre * x / (x * x - half * half);
  }
  const double x = xi + k * gradient;
  return pre * x / (x * x - half * half);
}

MagnusPrediction closed_form(const DriveSchedule& sched, double period) {
  const auto& td = single_term(sched);
  const int n = sched.n_ions;
  MagnusPrediction out;
  for (int k = 1; k + td.n <= n; ++k) {
    cplx h = closed_form_hop(period, sched.eta, td.omega_blue, td.xi_b, sched.gradient, k, td.n,
                             td.phase, Sideband::blue);
    if (sched.include_red)
      h += closed_form_hop(period, sched.eta, td.omega_red, td.xi_r, sched.gradient, k, td.n,
                           td.phase + sched.red_phase_offset, Sideband::red);
    out.hop.push_back(h);
  }
  for (int k = 1; k <= n; ++k) {
    double z = closed_form_sz(period, sched.eta, td.omega_blue, td.xi_b, sched.gradient, k, td.n,
                              Sideband::blue);
    if (sched.include_red)
      z += closed_form_sz(period, sched.eta, td.omega_red, td.xi_r, sched.gradient, k, td.n, Sideband::red);
    out.sz.push_back(z);
  }
  return out;
}

Decomposition analytic_decomposition(const DriveSchedule& sched, double period) {
  const auto& td = single_term(sched);
  Decomposition d;
  const double eta2 = sched.eta * sched.eta;
  const double grad = sched.gradient;
  d.rate_blue = eta2 * td.omega_blue * td.omega_blue / (2.0 * td.xi_b);
  d.hz_blue = 2.0 * d.rate_blue;
  d.hop_gradient = d.rate_blue * grad / td.xi_b;
  d.sz_gradient = -2.0 * d.rate_blue * grad / td.xi_b;
  if (sched.include_red) {
    d.rate_red = eta2 * td.omega_red * td.omega_red / (2.0 * td.xi_r);
    d.hop_gradient -= d.rate_red * grad / td.xi_r;
    d.sz_gradient -= 2.0 * d.rate_red * grad / td.xi_r;
  }
  const int n = sched.n_ions;
  const cplx red_phase = std::polar(1.0, -sched.red_phase_offset);
  for (int k = 1; k + td.n <= n; ++k) {
    const double x = grad * (k + 0.5 * td.n);
    cplx h = d.rate_blue * (1.0 + x / td.xi_b);
    if (sched.include_red) h += red_phase * d.rate_red * (1.0 - x / td.xi_r);
    d.per_period.hop.push_back(period * std::polar(1.0, -td.phase) * h);
  }
  for (int k = 1; k <= n; ++k) {
    double z = -2.0 * d.rate_blue * (1.0 + k * grad / td.xi_b);
    if (sched.include_red) z += 2.0 * d.rate_red * (1.0 - k * grad / td.xi_r);
    d.per_period.sz.push_back(period * z);
  }
  return d;
}

MagnusReport verify_magnus(const DriveSchedule& sched, const ChainConfig& chain_in,
                           const MagnusOptions& opts) {
  const auto& td = single_term(sched);
  if (!sched.strobe) throw NumericalError("schedule has no stroboscopic period");
  ChainConfig chain = chain_in;
  chain.fock_cutoff = std::max(chain.fock_cutoff, 2);
  const Basis basis(chain);
  MagnusReport r;
  r.period = sched.strobe->period;
  r.m = sched.strobe->m;
  const auto terms = magnus_terms(sched, chain, basis, r.period, opts);
  r.panels = terms.panels;
  r.quadrature_error = terms.quadrature_error;
  r.chi1_relative = max_abs(terms.chi1) / (sched.eta * td.omega_blue * r.period);
  const double n2 = terms.chi2.norm();
  r.hermiticity = n2 > 0.0 ? (terms.chi2 - terms.chi2.adjoint()).norm() / n2 : 0.0;

  const auto cf = closed_form(sched, r.period);
  const auto fo = analytic_decomposition(sched, r.period);
  const double unit = r.period * fo.rate_blue;
  auto add = [&](std::vector<CoefficientCheck>& into, double& worst, const std::string& name,
                 cplx num, cplx ana, double scale) {
    const double res = std::abs(num - ana) / scale;
    into.push_back({name, num, ana, res});
    worst = std::max(worst, res);
  };
  for (std::size_t i = 0; i < cf.hop.size(); ++i) {
    const int k = static_cast<int>(i) + 1;
    const cplx num = hop_coefficient(terms.chi2, basis, k - 1, k - 1 + td.n);
    const std::string name = "hop_" + std::to_string(k) + "_" + std::to_string(k + td.n);
    add(r.closed_form, r.max_closed_residual, name, num, cf.hop[i], std::abs(cf.hop[i]));
    add(r.first_order, r.max_first_order_residual, name, num, fo.per_period.hop[i], unit);
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < cf.sz.size(); ++i) {
    const int k = static_cast<int>(i) + 1;
    if (chain.is_spacer(k - 1)) continue;
    const double num = sz_coefficient(terms.chi2, basis, k - 1);
    const std::string name = "sz_" + std::to_string(k);
    add(r.closed_form, r.max_closed_residual, name, num, cf.sz[i], std::abs(cf.sz[i]));
    add(r.first_order, r.max_first_order_residual, name, num, fo.per_period.sz[i], unit);
    sx += k;
    sy += num;
    sxx += static_cast<double>(k) * k;
    sxy += k * num;
  }
  const double m = static_cast<double>(r.first_order.size() - cf.hop.size());
  if (m >= 2) {
    r.sz_slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    r.sz_intercept = (sy - r.sz_slope * sx) / m;
  }
  return r;
}

MultiModeCoupling multimode_b_matrix(const ChainConfig& chain, double omega_b) {
  const int n = chain.n_ions;
  MultiModeCoupling out;
  out.b = Eigen::MatrixXd::Zero(n, n);
  for (const auto& mode : chain.modes) {
    const double xi = omega_b - mode.frequency;
    if (std::abs(xi) <= 1e-12 * std::max(1.0, std::abs(mode.frequency)))
      throw std::invalid_argument("drive resonant with a motional mode");
    if (static_cast<int>(mode.lamb_dicke.size()) != n)
      throw std::invalid_argument("Lamb-Dicke row length differs from the ion count");
    out.xi.push_back(xi);
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k) out.b(i, k) += mode.lamb_dicke[i] * mode.lamb_dicke[k] / (2.0 * xi);
  }
  return out;
}

}  // namespace ionsim
