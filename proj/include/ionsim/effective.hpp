#pragma once

// Ideal effective spin models: index-shift hopping with Peierls phases, site
// potentials, ring analytics and the Jordan-Wigner fermion oracle.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "ionsim/core.hpp"
#include "ionsim/geometry.hpp"

namespace ionsim {

/// Extra time-dependent phase added to the static phi_n of one term.
using PhaseFunction = std::function<double(double)>;

struct EffectiveModel {
  int n_sites = 0;
  std::vector<HoppingTerm> terms;
  std::vector<int> spacers;            // 0-based
  std::vector<double> potentials;      // V_k, empty or one per site
  std::vector<PhaseFunction> programs; // empty or one per term (null entries allowed)

  void validate() const;
  bool time_dependent() const;
  double scale() const;  // sum of |rates| + max|V| + max|delta|, for step control
};

/// Spin configurations of one excitation sector with a reverse lookup.
class Sector {
 public:
  Sector(int n_sites, std::optional<int> n_exc);

  int n_sites() const { return n_sites_; }
  std::optional<int> excitations() const { return n_exc_; }
  std::size_t size() const { return configs_.size(); }
  std::uint64_t config(std::size_t i) const { return configs_[i]; }
  /// Position of a configuration, or -1 when outside the sector.
  long find(std::uint64_t config) const;

 private:
  int n_sites_;
  std::optional<int> n_exc_;
  std::vector<std::uint64_t> configs_;
};

/// H = sum_n Omega_n e^{i(phi_n - delta_n t)} sum_i s+_i s-_{i+n} + h.c. + 1/2 sum_k V_k sz_k
/// over the given sector (nullopt = full 2^N space). Edges touching spacers are dropped.
Mat build_h_eff(const EffectiveModel& model, const Sector& sector, double t = 0.0);

struct Eigensystem {
  Eigen::VectorXd values;  // ascending
  Mat vectors;
  double max_residual = 0.0;
};

Eigensystem diagonalize(const Mat& h, std::size_t dimension_cap = 8192);

/// 2 Omega cos(2 pi (k + Phi) / N), k = 0..N-1 (Phi in units of the flux quantum).
std::vector<double> ring_spectrum(int n, double flux, double rate);

/// -4 Omega sin(pi/N) sin(2 pi (Phi + k - 1/2) / N).
double wavepacket_velocity(int n, int k, double flux, double rate);

/// (|k> + e^{i phi0}|k-1>)/sqrt2 in the single-excitation sector, ordered by site.
Vec wavepacket_state(int n, int k, double phi0);

/// Many-body energies of the ring in the n_exc sector from free fermions with
/// a boundary twist set by the excitation parity. Ascending.
std::vector<double> jordan_wigner_oracle(int n, double loop_flux, int n_exc, double rate = 1.0);

/// Maps a sector vector into the full 2^N spin space.
Vec sector_to_full(const Sector& sector, const Vec& v);
/// Restricts a full spin-space vector to a sector.
Vec full_to_sector(const Sector& sector, const Vec& v);

EffectiveModel ring_model(int n, double loop_flux, double rate);

}  // namespace ionsim
