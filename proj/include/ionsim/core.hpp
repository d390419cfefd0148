#pragma once

// State space and ladder-operator algebra for N two-level ions coupled to a
// set of truncated bosonic modes. Everything lives in the interaction picture
// of the bare Hamiltonian (qubit splitting, gradient, mode energies), with
// hbar = 1 and all frequencies angular.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace ionsim {

using cplx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;

inline constexpr std::size_t kDefaultDimensionCap = 2'000'000;

/// Raised when a computation fails for numerical reasons (stiffness, leakage,
/// incommensurate frequencies). Contract violations use std::invalid_argument.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Mode {
  double frequency = 0.0;           // nu_l, rad/s
  std::vector<double> lamb_dicke;   // eta_{l,k}, one entry per ion
};

struct ChainConfig {
  int n_ions = 0;
  double gradient = 0.0;            // Delta, rad/s between adjacent ions
  std::vector<Mode> modes;
  int fock_cutoff = 1;              // max phonon number per mode
  double qubit_splitting = 0.0;     // omega_0, informational only
  std::vector<int> spacers;         // 0-based sites that do not couple to the drive

  /// Throws std::invalid_argument on a malformed configuration.
  void validate() const;

  bool is_spacer(int site) const;

  /// Single centre-of-mass mode with uniform Lamb-Dicke row eta.
  static ChainConfig com_mode(int n_ions, double gradient, double nu, double eta,
                              int fock_cutoff);

  /// COM mode with eta = eta1 / sqrt(N), eta1 the single-ion Lamb-Dicke parameter.
  static ChainConfig com_mode_single_ion(int n_ions, double gradient, double nu,
                                         double eta1, int fock_cutoff);
};

/// Index layout: spin-major, phonon-minor.
///   index = spins * phonon_dimension + sum_l n_l * stride_l
/// Bit s of `spins` is 1 when ion s (0-based) is excited; the last mode has stride 1.
class Basis {
 public:
  Basis(int n_spins, int n_modes, int fock_cutoff,
        std::size_t dimension_cap = kDefaultDimensionCap);
  explicit Basis(const ChainConfig& config,
                 std::size_t dimension_cap = kDefaultDimensionCap);

  int n_spins() const { return n_spins_; }
  int n_modes() const { return n_modes_; }
  int fock_cutoff() const { return cutoff_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t spin_dimension() const { return std::size_t{1} << n_spins_; }
  std::size_t phonon_dimension() const { return phonon_dim_; }

  std::size_t index(std::uint64_t spins, std::span<const int> phonons) const;
  std::uint64_t spins(std::size_t index) const { return index / phonon_dim_; }
  int phonon(std::size_t index, int mode) const;
  std::vector<int> phonons(std::size_t index) const;
  std::size_t phonon_stride(int mode) const { return strides_[mode]; }

 private:
  int n_spins_;
  int n_modes_;
  int cutoff_;
  std::size_t phonon_dim_;
  std::size_t dimension_;
  std::vector<std::size_t> strides_;
};

enum class LadderKind { spin_raise, spin_lower, phonon_raise, phonon_lower };

/// Accumulates the squared norm lost when a phonon is raised past the cutoff.
struct LeakageCounter {
  double lost_norm = 0.0;
  std::size_t events = 0;
};

/// Matrix-free application of one ladder operator. `label` is a site for spin
/// operators and a mode index for phonon operators.
Vec apply_ladder(const Basis& basis, const Vec& state, LadderKind kind, int label,
                 LeakageCounter* leakage = nullptr);

/// Spin configurations with exactly n_exc excitations, ascending.
std::vector<std::uint64_t> spin_sector(int n_spins, int n_exc);

/// Full-basis indices whose spin part lies in the n_exc sector.
std::vector<std::size_t> excitation_sector(const Basis& basis, int n_exc);

inline int popcount(std::uint64_t bits) { return __builtin_popcountll(bits); }

struct ObservableRecord {
  double time = 0.0;
  std::vector<double> p_excited;     // per ion, (1 + <sigma_z>)/2
  std::vector<double> mean_phonons;  // per mode
  double norm = 0.0;
  double total_sz = 0.0;             // <sum sigma_z>
};

ObservableRecord measure(const Basis& basis, const Vec& state, double time);

/// Population of the highest Fock level of any mode (truncation diagnostic).
double top_fock_population(const Basis& basis, const Vec& state);

/// Product state |spins> (x) |phonons>.
Vec product_state(const Basis& basis, std::uint64_t spins, std::span<const int> phonons);

/// Embeds a spin-space vector (length 2^N) into the full basis with a fixed
/// phonon configuration.
Vec embed_spin_state(const Basis& basis, const Vec& spin_state,
                     std::span<const int> phonons);

/// Dense matrix of a ladder operator over the full basis (oracle/test helper and
/// dense Magnus construction).
Mat ladder_matrix(const Basis& basis, LadderKind kind, int label);

}  // namespace ionsim
