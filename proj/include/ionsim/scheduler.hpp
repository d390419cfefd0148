#pragma once

// Drive synthesis: four tones per hopping term (a blue and a red sideband
// pair), resonance census, stroboscopic periods, shared-tone reduction and the
// gradient Stark correction.

#include <optional>
#include <string>
#include <vector>

#include "ionsim/core.hpp"
#include "ionsim/geometry.hpp"

namespace ionsim {

enum class Sideband { blue, red };

std::string to_string(Sideband s);
Sideband sideband_from_string(const std::string& s);

struct Tone {
  double detuning = 0.0;   // omega - omega_0, rad/s
  double amplitude = 0.0;  // Rabi frequency, rad/s
  double phase = 0.0;      // rad
  Sideband sideband = Sideband::blue;
  int term = -1;           // owning term (-1 for shared tones)
  int phase_sign = 0;      // +1/-1: tone follows +-phi(t)/2 of its term's phase program
};

/// Piecewise-linear extra phase phi(t) - phi(0) for one term.
struct PhaseProgram {
  std::vector<double> times;   // strictly increasing, seconds
  std::vector<double> phases;  // rad
  double operator()(double t) const;
  double max_slope() const;
};

struct TermDrive {
  int n = 1;
  double rate = 0.0;     // requested combined Omega_n
  double phase = 0.0;
  double delta = 0.0;
  double xi = 0.0;
  double epsilon = 0.0;
  double xi_b = 0.0;
  double xi_r = 0.0;
  double omega_blue = 0.0;  // tone Rabi frequency of the blue pair
  double omega_red = 0.0;
  std::optional<PhaseProgram> program;
};

struct StroboscopicPeriod {
  double period = 0.0;
  long m = 0;
  long M_b = 0;
  double residual = 0.0;  // max distance of T*offset/2pi from an integer
};

/// Per-site ground-state Stark shift fitted as offset + slope*s (s 0-based).
struct StarkFit {
  std::vector<double> shifts;
  double offset = 0.0;
  double slope = 0.0;
};

struct DriveSchedule {
  std::vector<Tone> tones;
  std::vector<TermDrive> terms;
  int n_ions = 0;
  double gradient = 0.0;
  int mode = 0;                   // index of the mediating mode
  double mode_frequency = 0.0;
  double eta = 0.0;               // mean Lamb-Dicke factor of the mediating mode
  bool include_red = true;
  double red_phase_offset = 0.0;
  bool shared = false;            // produced by reduce_tones
  std::optional<StroboscopicPeriod> strobe;
  double gradient_offset = 0.0;   // g applied as Delta -> Delta + g in tone splittings
  StarkFit stark;                 // ground-state Stark fit used for the frame correction
  std::vector<int> spacers;

  /// Sideband offset o with w_s = (s+1) Delta - o for site s (mediating mode).
  double tone_offset(const Tone& t) const;
};

struct ScheduleKnobs {
  std::vector<double> xi;              // per term; empty -> automatic layout
  std::optional<double> epsilon;       // empty -> automatic
  double alpha = 20.0;                 // xi = alpha N Delta for the automatic layout
  bool include_red = true;
  double red_phase_offset = 0.0;
  double amplitude_cap = 0.1;          // fraction of the mode frequency
  int mode = 0;
  bool correct_gradient = true;
  bool slow_shift_correction = true;   // include off-resonant hop shifts in the correction
  double margin_ratio = 20.0;
  double pair_clearance = 0.0;          // rad/s; 0 -> 2 N Delta (automatic epsilon only)
  long strobe_bound = 64;
  double strobe_tolerance = 1e-9;
};

/// Builds the drive for the given terms. Throws std::invalid_argument when a rate
/// is unreachable under the amplitude cap or epsilon is below the pair-creation margin.
DriveSchedule schedule(const std::vector<HoppingTerm>& terms, const ChainConfig& chain,
                       const ScheduleKnobs& knobs = {});

/// Tone Rabi frequency giving the per-sideband hop rate (eta^2 Omega^2 / (4 xi)).
double rabi_for_rate(double rate_per_sideband, double eta, double xi);

struct CensusEntry {
  std::string kind;     // "hop" or "pair"
  int tone_a = 0, tone_b = 0;
  int site_a = 0, site_b = 0;
  double distance = 0.0;  // detuning from resonance, rad/s
  double ratio = 0.0;     // distance / max rate of the terms involved
};

struct AdiabaticityReport {
  double alpha = 0.0;
  double beta = 0.0;
  std::vector<double> predicted_rates;         // per term
  std::vector<double> pair_creation_margins;   // per term, 2 eps / (eta^2 Om_r Om_b / xi)
  struct CrossMargin {
    int term_a, term_b, m;
    double margin;
  };
  std::vector<CrossMargin> cross_margins;      // | |xi'-xi| - m Delta | / max(Om, Om')
  std::vector<CensusEntry> census;             // unwanted resonances below threshold
  double worst_census_ratio = 0.0;
  double pair_line_distance = 0.0;             // rad/s, closest blue-red two-excitation line
  std::vector<std::string> flags;
  bool ok() const { return flags.empty(); }
};

AdiabaticityReport validate(const DriveSchedule& sched, const ChainConfig& chain,
                            double margin_ratio = 20.0);

/// Closest approach of a blue-red tone pair to a two-excitation transition of distinct sites.
double pair_line_distance(const DriveSchedule& sched);

/// Smallest unwanted-resonance distance over all tone pairs and site pairs.
std::vector<CensusEntry> resonance_census(const DriveSchedule& sched, double margin_ratio);

/// Smallest T with T Delta = 4 pi m and T o / 2pi integral for every offset o.
/// Throws NumericalError naming the nearest miss when none exists up to m_bound.
StroboscopicPeriod stroboscopic_period(double gradient, const std::vector<double>& offsets,
                                       long m_bound = 64, double tolerance = 1e-9,
                                       std::optional<double> xi_b = std::nullopt);
StroboscopicPeriod stroboscopic_period(const DriveSchedule& sched, long m_bound = 64,
                                       double tolerance = 1e-9);

/// Ground-state (n = 0) Stark shift of each site from all tones, with a linear fit.
StarkFit ground_stark_shifts(const DriveSchedule& sched, const ChainConfig& chain);

/// Slope g of the fitted shifts; the first-order analytic value is eta^2 Omega0^2 Delta / xi_b^2.
double gradient_correction(const DriveSchedule& sched, const ChainConfig& chain);
double gradient_correction_analytic(double eta, double omega0, double xi_b, double gradient);

/// Phonon-vacuum single-excitation Hamiltonian (relative to the spin vacuum) after
/// eliminating the sidebands: `resonant` collects components slower than the window
/// (default Delta/10); `correction` is the second-order shift from the faster ones.
struct SlowSpinModel {
  Mat resonant;
  Mat correction;
};
SlowSpinModel slow_spin_model(const DriveSchedule& sched, const ChainConfig& chain,
                              double resonance_window = 0.0);

/// Diagonal of the slow model (Stark shifts plus off-resonant hop shifts) with a linear fit.
StarkFit single_excitation_shifts(const DriveSchedule& sched, const ChainConfig& chain);

/// Re-emits the tones with splittings n (Delta + g), g the fitted slope of the
/// single-excitation shifts (ground-state Stark shifts only when include_slow_shifts is false).
DriveSchedule apply_gradient_correction(DriveSchedule sched, const ChainConfig& chain,
                                        bool include_slow_shifts = true);

// ---- shared tones ----

struct SharedToneLayout {
  std::vector<int> offsets;           // tone positions in units of Delta, ascending, first = 0
  std::vector<double> amplitudes;     // relative Rabi frequencies
  std::vector<double> phases;
  double residual = 0.0;              // rms complex residual / rms target
};

/// Couplings induced by a tone comb: pair (i,j), i<j, with offset difference d < N
/// adds c * A_i A_j e^{i(theta_j - theta_i)} to range d.
std::vector<std::pair<int, cplx>> induced_couplings(const std::vector<int>& offsets,
                                                    const std::vector<double>& amplitudes,
                                                    const std::vector<double>& phases,
                                                    int n_ions, double c = 1.0);

/// Finds the smallest comb whose differences below N are exactly the requested
/// ranges and solves amplitudes/phases (in units where c = 1).
SharedToneLayout reduce_layout(const std::vector<HoppingTerm>& terms, int n_ions,
                               double tolerance = 1e-6, int max_tones = 5);

/// Full drive (blue comb plus mirrored red comb) realizing the terms with shared tones.
DriveSchedule reduce_tones(const std::vector<HoppingTerm>& terms, const ChainConfig& chain,
                           const ScheduleKnobs& knobs = {}, double tolerance = 1e-6);

/// Explicit shared-tone drive from a layout with absolute blue Rabi frequencies.
DriveSchedule shared_schedule(const std::vector<int>& offsets,
                              const std::vector<double>& rabi,
                              const std::vector<double>& phases, const ChainConfig& chain,
                              double xi, double epsilon, bool include_red = true, int mode = 0);

// ---- scaling ----

struct ScalingDesign {
  int n = 0;
  double gradient = 0.0;
  double xi = 0.0;
  double eta = 0.0;
  double rate = 0.0;        // Omega_n
};

/// At fixed alpha, beta, eta1 and Omega0: Delta = eta1 Omega0 sqrt(beta/(2 alpha)) / N.
ScalingDesign scaling_design(int n, double alpha, double beta, double eta1, double omega0);

/// Combined hop rate implied by a schedule's amplitudes for one term.
double realized_rate(const DriveSchedule& sched, int term);

}  // namespace ionsim
