#pragma once

// First two Magnus terms of the interaction-picture drive over one period,
// computed by nested quadrature, plus closed-form and first-order predictions
// for single-term schedules.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ionsim/core.hpp"
#include "ionsim/dynamics.hpp"
#include "ionsim/scheduler.hpp"

namespace ionsim {

enum class ModePairs { all, same_mode, cross_mode };

struct MagnusOptions {
  double panel_fraction = 0.05;   // panel length / shortest oscillation period
  double tolerance = 1e-10;       // relative change between refinements
  int max_refinements = 6;
  ModePairs pairs = ModePairs::all;
  std::size_t dimension_cap = 4096;
};

/// chi1 = int_0^T V dt and chi2 = -i int_0^T dt1 int_0^t1 dt2 [V(t1), V(t2)].
/// Both are hermitian with this normalization.
struct MagnusTerms {
  Mat chi1;
  Mat chi2;
  double period = 0.0;
  long panels = 0;
  double quadrature_error = 0.0;   // relative change at the last refinement
};

MagnusTerms magnus_terms(const DriveSchedule& sched, const ChainConfig& chain, const Basis& basis,
                         double period, const MagnusOptions& opts = {});

/// <k+n, phonons|chi|k, phonons> for single excitations, every mode in Fock state `fock`.
cplx hop_coefficient(const Mat& chi, const Basis& basis, int from, int to, int fock = 0);

/// Coefficient c of sz_site (a^dag a + 1/2) for mode 0 (needs cutoff >= 2).
double sz_coefficient(const Mat& chi, const Basis& basis, int site);

/// Largest normalized Hilbert-Schmidt overlap of chi with s+_a s-_b (a != b) x identity.
double hopping_projection(const Mat& chi, const Basis& basis);

/// Largest |[chi, Sz/2 - a^dag a]| element relative to the largest chi element.
double excitation_commutator(const Mat& chi, const Basis& basis);

/// Closed forms at a stroboscopic T for a single term on a uniform mode.
/// k is the 1-based lower site, n the range; the hop multiplies s+_{k+n} s-_k.
cplx closed_form_hop(double period, double eta, double rabi, double xi, double gradient, int k,
                     int n, double phase, Sideband sb);
double closed_form_sz(double period, double eta, double rabi, double xi, double gradient, int k,
                      int n, Sideband sb);

struct MagnusPrediction {
  std::vector<cplx> hop;          // per lower site k = 1..N-n
  std::vector<double> sz;         // per site k = 1..N
};

/// Exact second-order closed forms summed over the schedule's sidebands.
MagnusPrediction closed_form(const DriveSchedule& sched, double period);

/// First-order-in-Delta/xi expansion: homogeneous hop Omega_{n,b}, H_z coefficient
/// 2 Omega_{n,b} and the gradient corrections.
struct Decomposition {
  double rate_blue = 0.0;              // Omega_{n,b} = eta^2 Omega0^2 / (2 xi_b)
  double rate_red = 0.0;
  double hz_blue = 0.0;                // 2 Omega_{n,b}
  double hop_gradient = 0.0;           // hop coefficient per unit (k + n/2)
  double sz_gradient = 0.0;            // sz coefficient per unit k
  MagnusPrediction per_period;         // first-order predictions scaled by T
};

Decomposition analytic_decomposition(const DriveSchedule& sched, double period);

struct CoefficientCheck {
  std::string coefficient;
  cplx numeric;
  cplx analytic;
  double relative_residual = 0.0;
};

struct MagnusReport {
  double period = 0.0;
  long m = 0;
  long panels = 0;
  double quadrature_error = 0.0;
  double chi1_relative = 0.0;          // max |chi1| / (eta Omega_b T)
  double hermiticity = 0.0;            // ||chi2 - chi2^dag|| / ||chi2||
  std::vector<CoefficientCheck> closed_form;
  std::vector<CoefficientCheck> first_order;   // residual relative to T Omega_{n,b}
  double max_closed_residual = 0.0;
  double max_first_order_residual = 0.0;
  double sz_intercept = 0.0;           // linear fit of sz over k
  double sz_slope = 0.0;
};

/// Runs the numeric oracle for a single-term schedule at its stroboscopic period.
MagnusReport verify_magnus(const DriveSchedule& sched, const ChainConfig& chain,
                           const MagnusOptions& opts = {});

struct MultiModeCoupling {
  Eigen::MatrixXd b;
  std::vector<double> xi;              // omega_b - nu_j per mode
};

/// B_ik = sum_j eta_ji eta_jk / (2 (omega_b - nu_j)), omega_b the blue detuning.
MultiModeCoupling multimode_b_matrix(const ChainConfig& chain, double omega_b);

}  // namespace ionsim
