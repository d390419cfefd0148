#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "ionsim/scheduler.hpp"

namespace testing {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

/// Dense sigma^+ on site `site` of an n-spin register, bit s of the index = site s excited.
inline Eigen::MatrixXcd sigma_plus(int n, int site) {
  const int dim = 1 << n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (int x = 0; x < dim; ++x)
    if (!(x >> site & 1)) m(x | (1 << site), x) = 1.0;
  return m;
}

inline Eigen::MatrixXcd sigma_z(int n, int site) {
  const int dim = 1 << n;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim, dim);
  for (int x = 0; x < dim; ++x) m(x, x) = (x >> site & 1) ? 1.0 : -1.0;
  return m;
}

inline Eigen::VectorXd sorted_eigenvalues(const Eigen::MatrixXcd& h) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
  return es.eigenvalues();
}

/// Interaction-picture drive assembled from the tone list with dense ladder matrices.
struct DenseDrive {
  std::vector<Eigen::MatrixXcd> ops;
  std::vector<cplx> amps;
  std::vector<double> freqs;

  DenseDrive(const ionsim::DriveSchedule& s, const ionsim::ChainConfig& c, const ionsim::Basis& b) {
    for (int site = 0; site < c.n_ions; ++site) {
      if (c.is_spacer(site)) continue;
      for (int l = 0; l < static_cast<int>(c.modes.size()); ++l)
        for (const auto& t : s.tones) {
          const bool blue = t.sideband == ionsim::Sideband::blue;
          const auto phonon = blue ? ionsim::LadderKind::phonon_raise : ionsim::LadderKind::phonon_lower;
          const Eigen::MatrixXcd x = ionsim::ladder_matrix(b, ionsim::LadderKind::spin_raise, site) *
                                     ionsim::ladder_matrix(b, phonon, l);
          ops.push_back(x);
          amps.push_back(cplx(0.0, 0.5 * c.modes[l].lamb_dicke[site] * t.amplitude) * std::polar(1.0, -t.phase));
          const double side = blue ? c.modes[l].frequency : -c.modes[l].frequency;
          freqs.push_back((site + 1) * c.gradient + side - t.detuning);
        }
    }
  }

  Eigen::MatrixXcd operator()(double t) const {
    Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(ops[0].rows(), ops[0].cols());
    for (std::size_t i = 0; i < ops.size(); ++i) {
      const Eigen::MatrixXcd term = amps[i] * std::polar(1.0, freqs[i] * t) * ops[i];
      v += term + Eigen::MatrixXcd(term.adjoint());
    }
    return v;
  }
};

}  // namespace testing
