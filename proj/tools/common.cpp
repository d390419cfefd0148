#include "common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

namespace ionsim::cli {

void ChainOptions::add(CLI::App& app) {
  app.add_option("--chain", file, "Chain file (JSON); overrides the inline chain flags")->check(CLI::ExistingFile);
  app.add_option("--gradient-hz", gradient_hz, "Frequency gradient between adjacent ions, Hz")->capture_default_str();
  app.add_option("--nu-hz", nu_hz, "COM mode frequency, Hz")->capture_default_str();
  app.add_option("--eta", eta, "Lamb-Dicke factor of the COM mode per ion")->capture_default_str();
  app.add_option("--eta1", eta1, "Single-ion Lamb-Dicke factor (COM eta = eta1/sqrt(N))");
  app.add_option("--cutoff", cutoff, "Fock cutoff per mode")->capture_default_str();
}

ChainConfig ChainOptions::build(int n_ions, const std::vector<int>& spacers,
                                io::RunManifest& manifest) const {
  ChainConfig c;
  if (!file.empty()) {
    manifest.add_input(file);
    c = io::chain_from_json(io::read_json(file));
    if (c.n_ions != n_ions)
      throw io::SchemaError("chain file has " + std::to_string(c.n_ions) + " ions, terms need " +
                            std::to_string(n_ions));
    for (int s : spacers)
      if (!c.is_spacer(s)) c.spacers.push_back(s);
    std::sort(c.spacers.begin(), c.spacers.end());
  } else {
    if (gradient_hz <= 0 || nu_hz <= 0) throw UsageError("--gradient-hz and --nu-hz must be positive");
    c = eta1 > 0 ? ChainConfig::com_mode_single_ion(n_ions, io::from_hz(gradient_hz), io::from_hz(nu_hz), eta1, cutoff)
                 : ChainConfig::com_mode(n_ions, io::from_hz(gradient_hz), io::from_hz(nu_hz), eta, cutoff);
    c.spacers = spacers;
  }
  c.validate();
  return c;
}

json ChainOptions::to_json() const {
  if (!file.empty()) return {{"chain", file}};
  json j = {{"gradient_hz", gradient_hz}, {"nu_hz", nu_hz}, {"cutoff", cutoff}};
  if (eta1 > 0) j["eta1"] = eta1;
  else j["eta"] = eta;
  return j;
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(const std::string& s, const std::string& what) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw UsageError("cannot parse " + what + " from '" + s + "'");
  }
}

int to_int(const std::string& s, const std::string& what) {
  double v = to_double(s, what);
  if (v != std::floor(v)) throw UsageError(what + " must be an integer");
  return static_cast<int>(v);
}

}  // namespace

InitialState parse_initial_state(const std::string& spin, const std::string& phonons,
                                 std::uint64_t seed, int n_sites) {
  InitialState s;
  s.seed = seed;
  auto parts = split(spin, ':');
  const auto& kind = parts[0];
  if (kind == "single" && parts.size() == 2) {
    s.kind = InitialState::Kind::single_excitation;
    s.site = to_int(parts[1], "site") - 1;
    if (s.site < 0 || s.site >= n_sites) throw UsageError("site out of range in --init");
  } else if (kind == "packet" && (parts.size() == 2 || parts.size() == 3)) {
    s.kind = InitialState::Kind::wave_packet;
    s.k = to_int(parts[1], "packet site") - 1;
    if (s.k < 0 || s.k >= n_sites) throw UsageError("packet site out of range in --init");
    if (parts.size() == 3) s.phi0 = to_double(parts[2], "packet phase");
  } else if (kind == "bits" && parts.size() == 2) {
    s.kind = InitialState::Kind::bitstring;
    if (static_cast<int>(parts[1].size()) != n_sites) throw UsageError("bit string length must equal the ion count");
    for (int i = 0; i < n_sites; ++i) {
      char c = parts[1][i];
      if (c != '0' && c != '1') throw UsageError("bit string may contain only 0 and 1");
      if (c == '1') s.bits |= std::uint64_t{1} << i;
    }
  } else {
    throw UsageError("--init must be single:S, packet:K[:PHI0] or bits:B");
  }

  auto ph = split(phonons, ':');
  if (ph[0] == "ground" && ph.size() == 1) {
    s.phonons = InitialState::Phonons::ground;
  } else if (ph[0] == "fock" && ph.size() == 2) {
    s.phonons = InitialState::Phonons::fock;
    s.fock_n = to_int(ph[1], "Fock number");
    if (s.fock_n < 0) throw UsageError("Fock number must be non-negative");
  } else if (ph[0] == "thermal" && ph.size() == 2) {
    s.phonons = InitialState::Phonons::thermal;
    s.nbar = to_double(ph[1], "mean phonon number");
    if (s.nbar < 0) throw UsageError("mean phonon number must be non-negative");
  } else {
    throw UsageError("--phonons must be ground, fock:N or thermal:NBAR");
  }
  return s;
}

std::vector<double> sample_times(const DriveSchedule& sched, int periods, int every,
                                 double t_final, int samples) {
  if (periods > 0) {
    if (!sched.strobe) throw UsageError("schedule has no stroboscopic period; use --t-final");
    if (every < 1) throw UsageError("--every must be at least 1");
    return stroboscopic_times(sched.strobe->period * every, periods / every);
  }
  if (t_final <= 0 || samples < 1) throw UsageError("give --periods or a positive --t-final and --samples");
  std::vector<double> t(samples + 1);
  for (int i = 0; i <= samples; ++i) t[i] = t_final * i / samples;
  return t;
}

void write_json_artifact(const std::string& path, json doc, io::RunManifest& manifest) {
  manifest.output = path;
  doc["manifest"] = manifest.to_json();
  io::atomic_write(io::output_path(path), doc.dump(2) + "\n");
}

void write_csv_artifact(const std::string& path, const std::string& csv, io::RunManifest& manifest,
                        const json& diagnostics) {
  manifest.output = path;
  io::atomic_write(io::output_path(path), csv);
  json m = manifest.to_json();
  m["output_fnv1a64"] = io::hex64(io::fnv1a64(csv));
  if (!diagnostics.is_null()) m["diagnostics"] = diagnostics;
  io::atomic_write(io::output_path(path + ".manifest.json"), m.dump(2) + "\n");
}

std::vector<int> to_zero_based(const std::vector<int>& sites, int n_ions) {
  std::vector<int> out;
  for (int s : sites) {
    if (s < 1 || s > n_ions) throw UsageError("site label " + std::to_string(s) + " outside 1.." + std::to_string(n_ions));
    out.push_back(s - 1);
  }
  std::sort(out.begin(), out.end());
  return out;
}

void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex lock;
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard g(lock);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

int default_threads() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

}  // namespace ionsim::cli
