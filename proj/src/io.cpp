#include "ionsim/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include <unistd.h>

namespace ionsim::io {

using std::numbers::pi;

double to_hz(double rad_per_s) { return rad_per_s / (2.0 * pi); }
double from_hz(double hz) { return hz * 2.0 * pi; }

namespace {

template <class T>
T req(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw SchemaError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
T opt(const json& j, const char* key, T fallback) {
  if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw SchemaError(std::string("field '") + key + "' has the wrong type");
  }
}

void only_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& what) {
  if (!j.is_object()) throw SchemaError(what + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items())
    if (!ok.count(k)) throw SchemaError("unexpected field '" + k + "' in " + what);
}

std::vector<int> sites_from_json(const json& j, const char* key) {
  std::vector<int> out;
  for (int s : opt<std::vector<int>>(j, key, {})) {
    if (s < 1) throw SchemaError("site labels are 1-based");
    out.push_back(s - 1);
  }
  return out;
}

json sites_to_json(const std::vector<int>& s) {
  json a = json::array();
  for (int v : s) a.push_back(v + 1);
  return a;
}

json term_to_json(const HoppingTerm& t) {
  return {{"n", t.range}, {"omega", to_hz(t.rate)}, {"phi", t.phase}, {"delta", to_hz(t.detuning)}};
}

HoppingTerm term_from_json(const json& j) {
  only_keys(j, {"n", "omega", "phi", "delta"}, "term");
  HoppingTerm t;
  t.range = req<int>(j, "n");
  t.rate = from_hz(req<double>(j, "omega"));
  t.phase = opt<double>(j, "phi", 0.0);
  t.detuning = from_hz(opt<double>(j, "delta", 0.0));
  return t;
}

void check_n(const json& j, int expected, const std::string& what) {
  if (j.contains("n") && req<int>(j, "n") != expected)
    throw SchemaError(what + " needs N = " + std::to_string(expected) + ", got " +
                      std::to_string(req<int>(j, "n")));
}

}  // namespace

GeometrySpec geometry_from_json(const json& j) {
  const auto name = req<std::string>(j, "geometry");
  if (name == "ring") {
    only_keys(j, {"geometry", "n", "loop_flux", "rate_hz"}, "ring");
    return geometry::Ring{req<int>(j, "n"), opt<double>(j, "loop_flux", 0.0),
                          from_hz(opt<double>(j, "rate_hz", 1.0))};
  }
  if (name == "triangular") {
    only_keys(j, {"geometry", "n", "j1_hz", "j2_hz", "j2_over_j1", "phi1", "phi2"}, "triangular");
    geometry::TriangularLadder g;
    g.n = req<int>(j, "n");
    g.j1 = from_hz(opt<double>(j, "j1_hz", 1.0));
    if (j.contains("j2_over_j1") && j.contains("j2_hz"))
      throw SchemaError("give either j2_hz or j2_over_j1");
    g.j2 = j.contains("j2_over_j1") ? g.j1 * req<double>(j, "j2_over_j1")
                                    : from_hz(opt<double>(j, "j2_hz", 1.0));
    g.phi1 = opt<double>(j, "phi1", 0.0);
    g.phi2 = opt<double>(j, "phi2", 0.0);
    return g;
  }
  if (name == "rectangular") {
    only_keys(j, {"geometry", "rows", "cols", "rate_hz", "n"}, "rectangular ladder");
    geometry::RectangularLadder g{opt<int>(j, "rows", 2), req<int>(j, "cols"),
                                  from_hz(opt<double>(j, "rate_hz", 1.0))};
    check_n(j, g.rows * (g.cols + 1) - 1, "rectangular ladder");
    return g;
  }
  if (name == "cylinder") {
    only_keys(j, {"geometry", "rows", "cols", "flux", "rate_hz", "n"}, "cylinder");
    geometry::Cylinder g{req<int>(j, "rows"), req<int>(j, "cols"), opt<double>(j, "flux", 0.0),
                         from_hz(opt<double>(j, "rate_hz", 1.0))};
    check_n(j, g.rows * (g.cols + 1), "cylinder");
    return g;
  }
  if (name == "mobius") {
    only_keys(j, {"geometry", "n", "rate_hz"}, "mobius ladder");
    return geometry::MobiusLadder{req<int>(j, "n"), from_hz(opt<double>(j, "rate_hz", 1.0))};
  }
  if (name == "helix") {
    only_keys(j, {"geometry", "w", "h", "rate_hz", "n"}, "helix");
    geometry::Helix g{req<int>(j, "w"), req<int>(j, "h"), from_hz(opt<double>(j, "rate_hz", 1.0))};
    check_n(j, g.w * g.h, "helix");
    return g;
  }
  if (name == "torus") {
    only_keys(j, {"geometry", "w", "h", "flux1", "flux2", "rate_hz", "n"}, "torus");
    geometry::Torus g{req<int>(j, "w"), req<int>(j, "h"), opt<double>(j, "flux1", 0.0),
                      opt<double>(j, "flux2", 0.0), from_hz(opt<double>(j, "rate_hz", 1.0))};
    check_n(j, g.w * g.h, "torus");
    return g;
  }
  if (name == "custom") {
    only_keys(j, {"geometry", "n", "terms", "spacers"}, "custom geometry");
    geometry::Custom g;
    g.n = req<int>(j, "n");
    for (const auto& t : req<json>(j, "terms")) g.terms.push_back(term_from_json(t));
    g.spacers = sites_from_json(j, "spacers");
    return g;
  }
  throw SchemaError("unknown geometry '" + name + "'");
}

json geometry_to_json(const GeometrySpec& spec) {
  return std::visit(
      [](const auto& g) -> json {
        using G = std::decay_t<decltype(g)>;
        if constexpr (std::is_same_v<G, geometry::Ring>)
          return {{"geometry", "ring"}, {"n", g.n}, {"loop_flux", g.loop_flux}, {"rate_hz", to_hz(g.rate)}};
        else if constexpr (std::is_same_v<G, geometry::TriangularLadder>)
          return {{"geometry", "triangular"}, {"n", g.n},           {"j1_hz", to_hz(g.j1)},
                  {"j2_hz", to_hz(g.j2)},     {"phi1", g.phi1},     {"phi2", g.phi2}};
        else if constexpr (std::is_same_v<G, geometry::RectangularLadder>)
          return {{"geometry", "rectangular"}, {"rows", g.rows}, {"cols", g.cols}, {"rate_hz", to_hz(g.rate)}};
        else if constexpr (std::is_same_v<G, geometry::Cylinder>)
          return {{"geometry", "cylinder"}, {"rows", g.rows}, {"cols", g.cols},
                  {"flux", g.flux},         {"rate_hz", to_hz(g.rate)}};
        else if constexpr (std::is_same_v<G, geometry::MobiusLadder>)
          return {{"geometry", "mobius"}, {"n", g.n}, {"rate_hz", to_hz(g.rate)}};
        else if constexpr (std::is_same_v<G, geometry::Helix>)
          return {{"geometry", "helix"}, {"w", g.w}, {"h", g.h}, {"rate_hz", to_hz(g.rate)}};
        else if constexpr (std::is_same_v<G, geometry::Torus>)
          return {{"geometry", "torus"}, {"w", g.w},         {"h", g.h},
                  {"flux1", g.flux1},    {"flux2", g.flux2}, {"rate_hz", to_hz(g.rate)}};
        else {
          json terms = json::array();
          for (const auto& t : g.terms) terms.push_back(term_to_json(t));
          return {{"geometry", "custom"}, {"n", g.n}, {"terms", terms}, {"spacers", sites_to_json(g.spacers)}};
        }
      },
      spec);
}

json terms_to_json(const CompiledGeometry& g, const std::string& geometry) {
  json terms = json::array();
  for (const auto& t : g.terms) terms.push_back(term_to_json(t));
  json out = {{"schema_version", kSchemaVersion},
              {"kind", "terms"},
              {"geometry", geometry},
              {"n_ions", g.n_ions},
              {"terms", terms},
              {"spacers", sites_to_json(g.spacers)}};
  if (g.loop_flux)
    out["loop_flux"] = {{"radians", *g.loop_flux}, {"flux_quanta", *g.loop_flux / (2.0 * pi)}};
  return out;
}

CompiledGeometry terms_from_json(const json& j) {
  if (opt<std::string>(j, "kind", "terms") != "terms") throw SchemaError("document is not a terms file");
  if (opt<int>(j, "schema_version", kSchemaVersion) != kSchemaVersion)
    throw SchemaError("unsupported schema version");
  CompiledGeometry g;
  g.n_ions = req<int>(j, "n_ions");
  for (const auto& t : req<json>(j, "terms")) g.terms.push_back(term_from_json(t));
  g.spacers = sites_from_json(j, "spacers");
  if (j.contains("loop_flux")) g.loop_flux = req<double>(j.at("loop_flux"), "radians");
  try {
    validate_terms(g.terms, g.n_ions);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return g;
}

json chain_to_json(const ChainConfig& c) {
  json modes = json::array();
  for (const auto& m : c.modes) modes.push_back({{"frequency_hz", to_hz(m.frequency)}, {"lamb_dicke", m.lamb_dicke}});
  return {{"n_ions", c.n_ions},
          {"gradient_hz", to_hz(c.gradient)},
          {"fock_cutoff", c.fock_cutoff},
          {"qubit_splitting_hz", to_hz(c.qubit_splitting)},
          {"spacers", sites_to_json(c.spacers)},
          {"modes", modes}};
}

ChainConfig chain_from_json(const json& j) {
  only_keys(j, {"n_ions", "gradient_hz", "fock_cutoff", "qubit_splitting_hz", "spacers", "modes", "com_mode"},
            "chain");
  ChainConfig c;
  c.n_ions = req<int>(j, "n_ions");
  c.gradient = from_hz(req<double>(j, "gradient_hz"));
  c.fock_cutoff = opt<int>(j, "fock_cutoff", 2);
  c.qubit_splitting = from_hz(opt<double>(j, "qubit_splitting_hz", 0.0));
  c.spacers = sites_from_json(j, "spacers");
  if (j.contains("com_mode") == j.contains("modes")) throw SchemaError("give exactly one of modes and com_mode");
  if (j.contains("com_mode")) {
    const auto& m = j.at("com_mode");
    only_keys(m, {"frequency_hz", "eta", "eta1"}, "com_mode");
    if (m.contains("eta") == m.contains("eta1")) throw SchemaError("com_mode needs exactly one of eta and eta1");
    const double nu = from_hz(req<double>(m, "frequency_hz"));
    auto cfg = m.contains("eta") ? ChainConfig::com_mode(c.n_ions, c.gradient, nu, req<double>(m, "eta"), c.fock_cutoff)
                                 : ChainConfig::com_mode_single_ion(c.n_ions, c.gradient, nu, req<double>(m, "eta1"),
                                                                    c.fock_cutoff);
    c.modes = cfg.modes;
  } else {
    for (const auto& m : j.at("modes")) {
      only_keys(m, {"frequency_hz", "lamb_dicke"}, "mode");
      c.modes.push_back({from_hz(req<double>(m, "frequency_hz")), req<std::vector<double>>(m, "lamb_dicke")});
    }
  }
  try {
    c.validate();
  } catch (const std::invalid_argument& e) {
    throw SchemaError(e.what());
  }
  return c;
}

json report_to_json(const AdiabaticityReport& r) {
  json cross = json::array();
  for (const auto& c : r.cross_margins)
    cross.push_back({{"term_a", c.term_a}, {"term_b", c.term_b}, {"m", c.m}, {"margin", c.margin}});
  json census = json::array();
  for (const auto& c : r.census)
    census.push_back({{"kind", c.kind},
                      {"tone_a", c.tone_a},
                      {"tone_b", c.tone_b},
                      {"site_a", c.site_a + 1},
                      {"site_b", c.site_b + 1},
                      {"distance_hz", to_hz(c.distance)},
                      {"ratio", c.ratio}});
  json rates = json::array();
  for (double v : r.predicted_rates) rates.push_back(to_hz(v));
  return {{"alpha", r.alpha},
          {"beta", r.beta},
          {"predicted_rates_hz", rates},
          {"pair_creation_margins", r.pair_creation_margins},
          {"cross_margins", cross},
          {"census", census},
          {"worst_census_ratio", r.worst_census_ratio},
          {"pair_line_distance_hz", to_hz(r.pair_line_distance)},
          {"flags", r.flags},
          {"ok", r.ok()}};
}

json schedule_to_json(const DriveSchedule& s, const ChainConfig& chain, const AdiabaticityReport* report) {
  json tones = json::array();
  for (const auto& t : s.tones)
    tones.push_back({{"detuning_hz", to_hz(t.detuning)},
                     {"rabi_hz", to_hz(t.amplitude)},
                     {"phase_rad", t.phase},
                     {"sideband", to_string(t.sideband)},
                     {"term", t.term},
                     {"phase_sign", t.phase_sign}});
  json terms = json::array();
  for (const auto& td : s.terms) {
    json t = {{"n", td.n},
              {"omega", to_hz(td.rate)},
              {"phi", td.phase},
              {"delta", to_hz(td.delta)},
              {"xi_hz", to_hz(td.xi)},
              {"epsilon_hz", to_hz(td.epsilon)},
              {"xi_b_hz", to_hz(td.xi_b)},
              {"xi_r_hz", to_hz(td.xi_r)},
              {"rabi_blue_hz", to_hz(td.omega_blue)},
              {"rabi_red_hz", to_hz(td.omega_red)}};
    if (td.program) t["phase_program"] = {{"times_s", td.program->times}, {"phases", td.program->phases}};
    terms.push_back(t);
  }
  json meta = json::object();
  if (s.strobe) {
    meta["T_s"] = s.strobe->period;
    meta["m"] = s.strobe->m;
    meta["M_b"] = s.strobe->M_b;
    meta["strobe_residual"] = s.strobe->residual;
  } else {
    meta["T_s"] = nullptr;
  }
  if (report) {
    meta["alpha"] = report->alpha;
    meta["beta"] = report->beta;
    meta["margins"] = report_to_json(*report);
  }
  std::vector<double> shifts;
  for (double v : s.stark.shifts) shifts.push_back(to_hz(v));
  return {{"schema_version", kSchemaVersion},
          {"kind", "schedule"},
          {"chain", chain_to_json(chain)},
          {"n_ions", s.n_ions},
          {"gradient_hz", to_hz(s.gradient)},
          {"mode", s.mode},
          {"mode_frequency_hz", to_hz(s.mode_frequency)},
          {"eta", s.eta},
          {"include_red", s.include_red},
          {"red_phase_offset", s.red_phase_offset},
          {"shared", s.shared},
          {"gradient_offset_hz", to_hz(s.gradient_offset)},
          {"stark", {{"offset_hz", to_hz(s.stark.offset)}, {"slope_hz", to_hz(s.stark.slope)}, {"shifts_hz", shifts}}},
          {"spacers", sites_to_json(s.spacers)},
          {"terms", terms},
          {"tones", tones},
          {"metadata", meta}};
}

DriveSchedule schedule_from_json(const json& j) {
  if (req<std::string>(j, "kind") != "schedule") throw SchemaError("document is not a schedule");
  if (req<int>(j, "schema_version") != kSchemaVersion) throw SchemaError("unsupported schema version");
  DriveSchedule s;
  s.n_ions = req<int>(j, "n_ions");
  s.gradient = from_hz(req<double>(j, "gradient_hz"));
  s.mode = opt<int>(j, "mode", 0);
  s.mode_frequency = from_hz(req<double>(j, "mode_frequency_hz"));
  s.eta = req<double>(j, "eta");
  s.include_red = opt<bool>(j, "include_red", true);
  s.red_phase_offset = opt<double>(j, "red_phase_offset", 0.0);
  s.shared = opt<bool>(j, "shared", false);
  s.gradient_offset = from_hz(opt<double>(j, "gradient_offset_hz", 0.0));
  s.spacers = sites_from_json(j, "spacers");
  if (j.contains("stark")) {
    const auto& st = j.at("stark");
    s.stark.offset = from_hz(opt<double>(st, "offset_hz", 0.0));
    s.stark.slope = from_hz(opt<double>(st, "slope_hz", 0.0));
    for (double v : opt<std::vector<double>>(st, "shifts_hz", {})) s.stark.shifts.push_back(from_hz(v));
  }
  for (const auto& t : req<json>(j, "terms")) {
    TermDrive td;
    td.n = req<int>(t, "n");
    td.rate = from_hz(req<double>(t, "omega"));
    td.phase = opt<double>(t, "phi", 0.0);
    td.delta = from_hz(opt<double>(t, "delta", 0.0));
    td.xi = from_hz(opt<double>(t, "xi_hz", 0.0));
    td.epsilon = from_hz(opt<double>(t, "epsilon_hz", 0.0));
    td.xi_b = from_hz(opt<double>(t, "xi_b_hz", 0.0));
    td.xi_r = from_hz(opt<double>(t, "xi_r_hz", 0.0));
    td.omega_blue = from_hz(opt<double>(t, "rabi_blue_hz", 0.0));
    td.omega_red = from_hz(opt<double>(t, "rabi_red_hz", 0.0));
    if (t.contains("phase_program")) {
      PhaseProgram p;
      p.times = req<std::vector<double>>(t.at("phase_program"), "times_s");
      p.phases = req<std::vector<double>>(t.at("phase_program"), "phases");
      if (p.times.size() != p.phases.size() || p.times.empty())
        throw SchemaError("phase program needs matching, non-empty times and phases");
      td.program = p;
    }
    s.terms.push_back(td);
  }
  for (const auto& t : req<json>(j, "tones")) {
    Tone tone;
    tone.detuning = from_hz(req<double>(t, "detuning_hz"));
    tone.amplitude = from_hz(req<double>(t, "rabi_hz"));
    tone.phase = opt<double>(t, "phase_rad", 0.0);
    try {
      tone.sideband = sideband_from_string(req<std::string>(t, "sideband"));
    } catch (const std::invalid_argument& e) {
      throw SchemaError(e.what());
    }
    tone.term = opt<int>(t, "term", -1);
    tone.phase_sign = opt<int>(t, "phase_sign", 0);
    if (tone.term >= static_cast<int>(s.terms.size())) throw SchemaError("tone refers to a missing term");
    s.tones.push_back(tone);
  }
  const auto& meta = req<json>(j, "metadata");
  if (meta.contains("T_s") && !meta.at("T_s").is_null()) {
    StroboscopicPeriod p;
    p.period = req<double>(meta, "T_s");
    p.m = opt<long>(meta, "m", 0);
    p.M_b = opt<long>(meta, "M_b", 0);
    p.residual = opt<double>(meta, "strobe_residual", 0.0);
    s.strobe = p;
  }
  return s;
}

ChainConfig schedule_chain(const json& j) { return chain_from_json(req<json>(j, "chain")); }

json magnus_report_to_json(const MagnusReport& r) {
  auto table = [](const std::vector<CoefficientCheck>& rows) {
    json a = json::array();
    for (const auto& c : rows)
      a.push_back({{"coefficient", c.coefficient},
                   {"numeric", {c.numeric.real(), c.numeric.imag()}},
                   {"analytic", {c.analytic.real(), c.analytic.imag()}},
                   {"relative_residual", c.relative_residual}});
    return a;
  };
  return {{"schema_version", kSchemaVersion},
          {"kind", "magnus_report"},
          {"T_s", r.period},
          {"m", r.m},
          {"panels", r.panels},
          {"quadrature_error", r.quadrature_error},
          {"chi1_relative", r.chi1_relative},
          {"hermiticity", r.hermiticity},
          {"closed_form", table(r.closed_form)},
          {"first_order", table(r.first_order)},
          {"max_closed_residual", r.max_closed_residual},
          {"max_first_order_residual", r.max_first_order_residual},
          {"sz_intercept", r.sz_intercept},
          {"sz_slope", r.sz_slope}};
}

std::string trajectory_csv(const Trajectory& t) {
  std::ostringstream out;
  out << std::setprecision(12);
  out << "t";
  for (int s = 1; s <= t.n_sites; ++s) out << ",Pe_" << s;
  out << ",norm,nbar,sector\n";
  for (std::size_t i = 0; i < t.records.size(); ++i) {
    const auto& r = t.records[i];
    out << t.times[i];
    for (double p : r.p_excited) out << ',' << p;
    double nbar = 0.0;
    for (double v : r.mean_phonons) nbar += v;
    out << ',' << r.norm << ',' << nbar << ',' << (i < t.sectors.size() ? t.sectors[i] : -1) << '\n';
  }
  return out.str();
}

json snapshots_to_json(const Trajectory& t) {
  json snaps = json::array();
  for (std::size_t i = 0; i < t.states.size(); ++i) {
    json amps = json::array();
    for (Eigen::Index k = 0; k < t.states[i].size(); ++k) amps.push_back({t.states[i][k].real(), t.states[i][k].imag()});
    snaps.push_back({{"t", t.times[i]}, {"amplitudes", amps}});
  }
  return {{"schema_version", kSchemaVersion}, {"kind", "snapshots"}, {"snapshots", snaps}};
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw SchemaError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const std::filesystem::path& p) {
  try {
    return json::parse(read_file(p));
  } catch (const json::parse_error& e) {
    throw SchemaError(p.string() + ": " + e.what());
  }
}

void atomic_write(const std::filesystem::path& p, std::string_view content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, p);
}

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

std::filesystem::path output_path(const std::string& p) {
  std::filesystem::path path(p);
  if (path.is_absolute()) return path;
  if (const char* root = std::getenv("IONSIM_OUTPUT_ROOT"); root && *root) return std::filesystem::path(root) / path;
  return path;
}

void RunManifest::add_input(const std::string& path) { inputs.emplace_back(path, hex64(fnv1a64(read_file(path)))); }

json RunManifest::to_json() const {
  json in = json::array();
  for (const auto& [p, h] : inputs) in.push_back({{"path", p}, {"fnv1a64", h}});
  return {{"schema_version", schema_version},
          {"kind", "manifest"},
          {"subcommand", subcommand},
          {"argv", argv},
          {"inputs", in},
          {"seed", seed},
          {"output", output},
          {"parameters", parameters}};
}

RunManifest RunManifest::from_json(const json& j) {
  if (req<std::string>(j, "kind") != "manifest") throw SchemaError("document is not a run manifest");
  RunManifest m;
  m.schema_version = req<int>(j, "schema_version");
  if (m.schema_version != kSchemaVersion) throw SchemaError("unsupported manifest schema version");
  m.subcommand = req<std::string>(j, "subcommand");
  m.argv = req<std::vector<std::string>>(j, "argv");
  for (const auto& i : opt<json>(j, "inputs", json::array()))
    m.inputs.emplace_back(req<std::string>(i, "path"), req<std::string>(i, "fnv1a64"));
  m.seed = opt<std::uint64_t>(j, "seed", 0);
  m.output = opt<std::string>(j, "output", "");
  m.parameters = opt<json>(j, "parameters", json::object());
  return m;
}

}  // namespace ionsim::io
