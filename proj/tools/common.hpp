#pragma once

// Shared plumbing for the command-line front end: unit conversion at the
// boundary, chain options, initial-state parsing and artifact output.

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ionsim/dynamics.hpp"
#include "ionsim/io.hpp"

namespace ionsim::cli {

using json = nlohmann::json;

/// Bad flags or arguments; maps to exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Physical parameters of the chain given inline (Hz) or as a chain file.
struct ChainOptions {
  std::string file;
  double gradient_hz = 1000.0;
  double nu_hz = 1.0e6;
  double eta = 0.1;
  double eta1 = 0.0;   // single-ion Lamb-Dicke factor; overrides eta when positive
  int cutoff = 2;

  void add(CLI::App& app);
  /// Chain for n ions; inline spacers are 0-based.
  ChainConfig build(int n_ions, const std::vector<int>& spacers, io::RunManifest& manifest) const;
  json to_json() const;
};

/// "single:S", "packet:K[:PHI0]", "bits:0101" (site 1 first). Sites 1-based.
/// Phonons: "ground", "fock:N", "thermal:NBAR".
InitialState parse_initial_state(const std::string& spin, const std::string& phonons,
                                 std::uint64_t seed, int n_sites);

/// Sample times: k*every*T for k = 0..periods/every when a period exists,
/// otherwise `samples` + 1 uniform times over [0, t_final].
std::vector<double> sample_times(const DriveSchedule& sched, int periods, int every,
                                 double t_final, int samples);

/// JSON artifact with the manifest embedded under "manifest".
void write_json_artifact(const std::string& path, json doc, io::RunManifest& manifest);
/// CSV artifact plus a sibling <path>.manifest.json carrying the input hashes.
void write_csv_artifact(const std::string& path, const std::string& csv,
                        io::RunManifest& manifest, const json& diagnostics = nullptr);

std::vector<int> to_zero_based(const std::vector<int>& sites, int n_ions);

/// Runs fn(i) for i in [0, count) on up to `threads` workers; rethrows the first error.
void parallel_for(int count, int threads, const std::function<void(int)>& fn);

int default_threads();

/// Experiment recipes; throws UsageError for unknown names.
void run_experiment(const std::string& name, const std::vector<std::string>& args,
                    io::RunManifest& manifest);
std::vector<std::string> experiment_names();

}  // namespace ionsim::cli
