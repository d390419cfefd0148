#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "helpers.hpp"
#include "ionsim/io.hpp"

using namespace ionsim;
using testing::kPi;
namespace fs = std::filesystem;

namespace {

constexpr double kDelta = 2 * kPi * 1000.0;
constexpr double kNu = 2 * kPi * 1.0e6;

fs::path scratch_dir(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("ionsim_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("Hz conversion") {
  CHECK(io::from_hz(1.0) == doctest::Approx(2 * kPi));
  CHECK(io::to_hz(io::from_hz(123.4)) == doctest::Approx(123.4));
}

TEST_CASE("geometry documents round trip") {
  const std::vector<GeometrySpec> specs{
      geometry::Ring{5, 3 * kPi / 4, io::from_hz(25.0)},
      geometry::TriangularLadder{6, io::from_hz(10.0), io::from_hz(7.0), 0.3, -0.2},
      geometry::RectangularLadder{2, 5, io::from_hz(10.0)},
      geometry::Cylinder{3, 2, 1.2, io::from_hz(10.0)},
      geometry::MobiusLadder{8, io::from_hz(10.0)},
      geometry::Helix{3, 4, io::from_hz(10.0)},
      geometry::Torus{3, 4, 0.9, -0.5, io::from_hz(10.0)},
      geometry::Custom{6, {{1, io::from_hz(5.0), 0.1, 0.0}, {3, io::from_hz(2.0), -0.4, io::from_hz(1.0)}}, {2}}};
  for (const auto& spec : specs) {
    const auto j = io::geometry_to_json(spec);
    const auto back = io::geometry_from_json(j);
    CHECK(geometry_name(back) == geometry_name(spec));
    CHECK(io::geometry_to_json(back) == j);
    const auto a = compile(spec), b = compile(back);
    REQUIRE(a.terms.size() == b.terms.size());
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
      CHECK(a.terms[i].range == b.terms[i].range);
      CHECK(a.terms[i].rate == doctest::Approx(b.terms[i].rate));
      CHECK(a.terms[i].phase == doctest::Approx(b.terms[i].phase));
    }
    CHECK(a.spacers == b.spacers);
  }
}

TEST_CASE("geometry documents are strict") {
  using io::json;
  CHECK_THROWS_AS(io::geometry_from_json(json{{"geometry", "ring"}, {"n", 5}, {"flux", 0.1}}), io::SchemaError);
  CHECK_THROWS_AS(io::geometry_from_json(json{{"geometry", "hexagon"}, {"n", 5}}), io::SchemaError);
  CHECK_THROWS_AS(io::geometry_from_json(json{{"geometry", "ring"}}), io::SchemaError);
  CHECK_THROWS_AS(io::geometry_from_json(json{{"geometry", "ring"}, {"n", "five"}}), io::SchemaError);
  CHECK_THROWS_AS(io::geometry_from_json(json{{"geometry", "torus"}, {"w", 3}, {"h", 4}, {"n", 11}}),
                  io::SchemaError);
  CHECK_THROWS_AS(
      io::geometry_from_json(json{{"geometry", "triangular"}, {"n", 6}, {"j2_hz", 1.0}, {"j2_over_j1", 0.5}}),
      io::SchemaError);
  const auto tri = io::geometry_from_json(json{{"geometry", "triangular"}, {"n", 6}, {"j1_hz", 10.0}, {"j2_over_j1", 0.5}});
  CHECK(std::get<geometry::TriangularLadder>(tri).j2 == doctest::Approx(io::from_hz(5.0)));
  CHECK_THROWS_AS(io::geometry_from_json(json{{"geometry", "custom"}, {"n", 4}, {"terms", json::array()}, {"spacers", {0}}}),
                  io::SchemaError);
}

TEST_CASE("terms documents use Hz and 1-based spacers") {
  const auto g = compile(geometry::RectangularLadder{2, 5, io::from_hz(10.0)});
  const auto j = io::terms_to_json(g, "rectangular");
  CHECK(j.at("kind") == "terms");
  CHECK(j.at("n_ions") == 11);
  CHECK(j.at("spacers") == io::json::array({6}));
  CHECK(j.at("terms")[0].at("omega").get<double>() == doctest::Approx(10.0));
  CHECK_FALSE(j.contains("loop_flux"));
  const auto back = io::terms_from_json(j);
  CHECK(back.spacers == g.spacers);
  CHECK(back.n_ions == 11);
  CHECK(back.terms[0].rate == doctest::Approx(g.terms[0].rate));

  const auto ring = compile(geometry::Ring{5, kPi / 2, 1.0});
  const auto rj = io::terms_to_json(ring, "ring");
  CHECK(rj.at("loop_flux").at("flux_quanta").get<double>() == doctest::Approx(0.25));
  CHECK(*io::terms_from_json(rj).loop_flux == doctest::Approx(kPi / 2));

  auto bad = rj;
  bad["terms"][0]["n"] = 5;
  CHECK_THROWS_AS(io::terms_from_json(bad), io::SchemaError);
  bad = rj;
  bad["terms"][0]["extra"] = 1;
  CHECK_THROWS_AS(io::terms_from_json(bad), io::SchemaError);
}

TEST_CASE("chain documents") {
  using io::json;
  const auto chain = ChainConfig::com_mode(4, kDelta, kNu, 0.1, 3);
  const auto j = io::chain_to_json(chain);
  CHECK(j.at("gradient_hz").get<double>() == doctest::Approx(1000.0));
  const auto back = io::chain_from_json(j);
  CHECK(back.n_ions == 4);
  CHECK(back.fock_cutoff == 3);
  CHECK(back.gradient == doctest::Approx(kDelta));
  REQUIRE(back.modes.size() == 1);
  CHECK(back.modes[0].frequency == doctest::Approx(kNu));
  CHECK(back.modes[0].lamb_dicke == chain.modes[0].lamb_dicke);

  const json shorthand{{"n_ions", 4}, {"gradient_hz", 1000.0}, {"com_mode", {{"frequency_hz", 1.0e6}, {"eta1", 0.1}}}};
  const auto s = io::chain_from_json(shorthand);
  CHECK(s.fock_cutoff == 2);
  CHECK(s.modes[0].lamb_dicke[0] == doctest::Approx(0.05));

  auto both = shorthand;
  both["modes"] = j.at("modes");
  CHECK_THROWS_AS(io::chain_from_json(both), io::SchemaError);
  auto neither = shorthand;
  neither.erase("com_mode");
  CHECK_THROWS_AS(io::chain_from_json(neither), io::SchemaError);
  auto two_eta = shorthand;
  two_eta["com_mode"]["eta"] = 0.05;
  CHECK_THROWS_AS(io::chain_from_json(two_eta), io::SchemaError);
  auto extra = shorthand;
  extra["temperature"] = 1.0;
  CHECK_THROWS_AS(io::chain_from_json(extra), io::SchemaError);
}

TEST_CASE("schedule documents round trip") {
  const auto chain = ChainConfig::com_mode(3, kDelta, kNu, 0.1, 2);
  const auto s = schedule({{1, kDelta / 40, 0.4, 0.0}, {2, kDelta / 60, -0.3, 0.0}}, chain, {});
  const auto report = validate(s, chain);
  const auto j = io::schedule_to_json(s, chain, &report);
  CHECK(j.at("kind") == "schedule");
  const auto back = io::schedule_from_json(j);
  REQUIRE(back.tones.size() == s.tones.size());
  for (std::size_t i = 0; i < s.tones.size(); ++i) {
    CHECK(back.tones[i].detuning == doctest::Approx(s.tones[i].detuning));
    CHECK(back.tones[i].amplitude == doctest::Approx(s.tones[i].amplitude));
    CHECK(back.tones[i].phase == doctest::Approx(s.tones[i].phase));
    CHECK(back.tones[i].sideband == s.tones[i].sideband);
    CHECK(back.tones[i].term == s.tones[i].term);
  }
  REQUIRE(back.terms.size() == 2);
  CHECK(back.terms[1].xi == doctest::Approx(s.terms[1].xi));
  CHECK(back.gradient_offset == doctest::Approx(s.gradient_offset));
  REQUIRE(back.strobe.has_value());
  CHECK(back.strobe->period == doctest::Approx(s.strobe->period));
  CHECK(back.strobe->m == s.strobe->m);
  CHECK(io::schedule_chain(j).n_ions == 3);

  auto bad = j;
  bad["tones"][0]["sideband"] = "green";
  CHECK_THROWS_AS(io::schedule_from_json(bad), io::SchemaError);
  bad = j;
  bad["schema_version"] = 99;
  CHECK_THROWS_AS(io::schedule_from_json(bad), io::SchemaError);
}

TEST_CASE("trajectory CSV layout") {
  Trajectory t;
  t.n_sites = 3;
  t.times = {0.0, 0.5};
  t.records = {{0.0, {1.0, 0.0, 0.0}, {0.1, 0.2}, 1.0, -1.0}, {0.5, {0.5, 0.5, 0.0}, {0.0, 0.0}, 0.999, -1.0}};
  t.sectors = {1, -1};
  const auto csv = io::trajectory_csv(t);
  const auto first = csv.substr(0, csv.find('\n'));
  CHECK(first == "t,Pe_1,Pe_2,Pe_3,norm,nbar,sector");
  CHECK(csv.find("0,1,0,0,1,0.3,1\n") != std::string::npos);
  CHECK(csv.find("0.5,0.5,0.5,0,0.999,0,-1\n") != std::string::npos);
}

TEST_CASE("hashing") {
  CHECK(io::fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(io::fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(io::hex64(0xabcULL) == "0000000000000abc");
}

TEST_CASE("output paths and atomic writes") {
  const auto dir = scratch_dir("out");
  ::setenv("IONSIM_OUTPUT_ROOT", dir.c_str(), 1);
  CHECK(io::output_path("a/b.json") == dir / "a/b.json");
  CHECK(io::output_path("/abs/x.json") == fs::path("/abs/x.json"));
  ::unsetenv("IONSIM_OUTPUT_ROOT");
  CHECK(io::output_path("a/b.json") == fs::path("a/b.json"));

  const auto target = dir / "nested" / "file.txt";
  io::atomic_write(target, "first");
  io::atomic_write(target, "second");
  CHECK(io::read_file(target) == "second");
  int entries = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(target.parent_path())) ++entries;
  CHECK(entries == 1);
  CHECK_THROWS_AS(io::read_file(dir / "missing.json"), io::SchemaError);
  io::atomic_write(dir / "broken.json", "{");
  CHECK_THROWS_AS(io::read_json(dir / "broken.json"), io::SchemaError);
  fs::remove_all(dir);
}

TEST_CASE("run manifest round trip") {
  const auto dir = scratch_dir("manifest");
  const auto input = dir / "in.json";
  io::atomic_write(input, "{}");
  io::RunManifest m;
  m.subcommand = "simulate";
  m.argv = {"simulate", "--seed", "7"};
  m.add_input(input.string());
  m.seed = 7;
  m.output = "traj.csv";
  m.parameters = {{"t_final_s", 0.1}};
  const auto j = m.to_json();
  const auto back = io::RunManifest::from_json(j);
  CHECK(back.subcommand == "simulate");
  CHECK(back.argv == m.argv);
  REQUIRE(back.inputs.size() == 1);
  CHECK(back.inputs[0].second == io::hex64(io::fnv1a64("{}")));
  CHECK(back.seed == 7);
  CHECK(back.output == "traj.csv");
  CHECK(back.parameters == m.parameters);
  auto wrong = j;
  wrong["kind"] = "schedule";
  CHECK_THROWS_AS(io::RunManifest::from_json(wrong), io::SchemaError);
  fs::remove_all(dir);
}
