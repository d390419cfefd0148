#pragma once

// Full interaction-picture dynamics of spins plus modes under a drive schedule,
// ideal effective evolution, and the comparisons between the two.

#include <cstdint>
#include <optional>
#include <vector>

#include "ionsim/core.hpp"
#include "ionsim/effective.hpp"
#include "ionsim/scheduler.hpp"

namespace ionsim {

/// One (site, mode, sideband) coupling: V contains f(t) X + h.c. with
/// X = s+_site a_mode^dag (blue) or s+_site a_mode (red) and
/// f(t) = sum_j amps[j] e^{i freqs[j] t}.
struct DriveChannel {
  int site = 0;
  int mode = 0;
  Sideband sideband = Sideband::blue;
  std::vector<cplx> amps;
  std::vector<double> freqs;
  std::vector<int> tones;  // index into the schedule's tone list
};

std::vector<DriveChannel> drive_channels(const DriveSchedule& sched, const ChainConfig& chain);

/// Sparse structure of a channel operator on a basis: X|src> = amp |dst>.
struct LadderEntry {
  std::uint32_t src;
  std::uint32_t dst;
  double amp;
};
std::vector<LadderEntry> channel_operator(const Basis& basis, const DriveChannel& ch);

class FullHamiltonian {
 public:
  FullHamiltonian(const DriveSchedule& sched, const ChainConfig& chain, const Basis& basis,
                  std::vector<double> potentials = {});

  /// out = H(t) psi.
  void apply(double t, const Vec& psi, Vec& out) const;
  Mat dense(double t) const;
  /// Largest |frequency| appearing in any channel coefficient.
  double fastest_frequency() const { return fastest_; }
  const Basis& basis() const { return basis_; }

 private:
  struct Group {
    int mode;
    Sideband sideband;
    std::vector<double> offsets;   // o_j, coefficient carries e^{-i o_j t}
    std::vector<cplx> weights;     // Omega_j e^{-i theta_j}
    std::vector<int> signs;        // phase-program sign per tone
    std::vector<int> terms;
  };
  struct Channel {
    int site;
    int group;
    double prefactor;              // eta / 2
    std::vector<LadderEntry> entries;
  };
  cplx group_sum(const Group& g, double t) const;

  Basis basis_;
  double gradient_;
  std::vector<Group> groups_;
  std::vector<Channel> channels_;
  std::vector<std::optional<PhaseProgram>> programs_;
  std::vector<double> diagonal_;   // potentials, 1/2 sum V_k sz_k
  double fastest_ = 0.0;
};

struct IntegratorOptions {
  double tol = 1e-9;
  double max_step = 0.0;            // 0 -> 1/20 of the fastest drive period
  double min_step = 1e-14;          // relative to the time span
  std::size_t max_steps = 200'000'000;
  bool keep_states = true;
};

struct IntegratorStats {
  std::size_t steps = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  double max_top_fock = 0.0;
  double norm_drift = 0.0;
  int fock_cutoff = 0;
};

struct Trajectory {
  int n_sites = 0;
  std::vector<double> times;
  std::vector<ObservableRecord> records;
  std::vector<int> sectors;          // definite excitation number or -1
  std::vector<Vec> states;           // full basis (or spin space for effective runs)
  IntegratorStats stats;
};

/// Adaptive Dormand-Prince 5(4) with a step ceiling; never renormalizes.
Trajectory integrate(const FullHamiltonian& h, const Vec& psi0, const std::vector<double>& times,
                     const IntegratorOptions& opts = {});

struct InitialState {
  enum class Kind { single_excitation, wave_packet, bitstring, custom };
  enum class Phonons { ground, fock, thermal };
  Kind kind = Kind::single_excitation;
  int site = 0;                  // 0-based
  int k = 0;
  double phi0 = 0.0;
  std::uint64_t bits = 0;
  Vec amplitudes;                // custom, length 2^N
  Phonons phonons = Phonons::ground;
  int fock_n = 0;
  double nbar = 0.0;
  std::uint64_t seed = 0;
};

Vec initial_spin_state(const InitialState& s, int n_sites);
std::vector<int> initial_phonons(const InitialState& s, int n_modes, int cutoff);
Vec initial_state(const InitialState& s, const Basis& basis);

/// Fock numbers drawn from a truncated geometric distribution with mean nbar.
std::vector<int> sample_thermal(double nbar, int cutoff, int n_modes, std::uint64_t seed);

struct SimulationResult {
  Trajectory trajectory;
  std::optional<Trajectory> rerun;   // cutoff + 2 when leakage exceeded the threshold
  bool leakage_exceeded = false;
  const Trajectory& best() const { return rerun ? *rerun : trajectory; }
};

struct SimulationOptions {
  IntegratorOptions integrator;
  double leakage_threshold = 1e-6;
  bool allow_rerun = true;
  std::vector<double> potentials;
};

/// Integrates from the initial state and applies the cutoff policy: when the
/// top Fock level holds more than the threshold, the run is repeated at cutoff + 2.
SimulationResult simulate(const DriveSchedule& sched, ChainConfig chain, const InitialState& init,
                          const std::vector<double>& times, const SimulationOptions& opts = {});

/// Spin-only evolution under the effective model, state given in the full 2^N space.
Trajectory evolve_effective(const EffectiveModel& model, const Vec& psi0,
                            const std::vector<double>& times, double max_step = 0.0);

/// Site frequencies f_s = offset + slope * s of the rotating frame that
/// removes the drive-induced Stark shifts.
struct FrameCorrection {
  double offset = 0.0;
  double slope = 0.0;
};
FrameCorrection frame_from_schedule(const DriveSchedule& sched);

struct Comparison {
  std::vector<double> times;
  std::vector<double> fidelity;          // projected on the phonon vacuum, renormalized
  std::vector<double> overlap;           // unrenormalized
  std::vector<double> pe_distance;       // max_s |P_e full - P_e eff|
  double min_fidelity() const;
  double max_distance() const;
};

Comparison compare(const Trajectory& full, const Basis& basis, const Trajectory& eff,
                   const FrameCorrection& frame = {});

/// Observable-level distance between two trajectories sampled at the same times.
double max_pe_distance(const Trajectory& a, const Trajectory& b);

/// Spin part of a full state on the phonon vacuum, in the 2^N space.
Vec project_vacuum(const Basis& basis, const Vec& psi);

struct PhaseTrack {
  std::vector<double> times;
  std::vector<double> phase;       // unwrapped
  std::vector<double> residual;    // relative rms of the cosine-profile fit
  double velocity = 0.0;
  double ci95 = 0.0;
  double intercept = 0.0;
  bool profile_mismatch = false;
};

PhaseTrack phase_track(const Trajectory& traj, double residual_threshold = 0.1);

/// Times k T for k = 0..count.
std::vector<double> stroboscopic_times(double period, int count);

}  // namespace ionsim
