#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ionsim/magnus.hpp"

using namespace ionsim;
using testing::kPi;

namespace {

constexpr double kDelta = 2 * kPi * 1000.0;
constexpr double kNu = 2 * kPi * 1.0e6;

/// chi1 and chi2 by composite Simpson on a uniform grid with a cumulative inner integral.
std::pair<Mat, Mat> brute_magnus(const testing::DenseDrive& v, double period, int intervals) {
  const double h = period / intervals;
  std::vector<Mat> vs;
  for (int i = 0; i <= intervals; ++i) vs.push_back(v(i * h));
  const auto dim = vs[0].rows();
  Mat w = Mat::Zero(dim, dim);
  Mat chi1 = Mat::Zero(dim, dim), chi2 = Mat::Zero(dim, dim);
  std::vector<Mat> comm(intervals + 1);
  comm[0] = Mat::Zero(dim, dim);
  for (int i = 1; i <= intervals; ++i) {
    const Mat mid = v((i - 0.5) * h);
    w += h / 6.0 * (vs[i - 1] + 4.0 * mid + vs[i]);
    comm[i] = vs[i] * w - w * vs[i];
  }
  for (int i = 0; i + 2 <= intervals; i += 2) {
    chi1 += h / 3.0 * (vs[i] + 4.0 * vs[i + 1] + vs[i + 2]);
    chi2 += h / 3.0 * (comm[i] + 4.0 * comm[i + 1] + comm[i + 2]);
  }
  return {chi1, cplx(0.0, -1.0) * chi2};
}

double rel(const Mat& a, const Mat& b) { return (a - b).norm() / std::max(b.norm(), 1e-300); }

DriveSchedule single_term(const ChainConfig& chain, int n, double alpha, double phase, bool red) {
  ScheduleKnobs k;
  k.alpha = alpha;
  k.include_red = red;
  k.correct_gradient = false;
  return schedule({{n, chain.gradient / 40, phase, 0.0}}, chain, k);
}

}  // namespace

TEST_CASE("nested quadrature matches a brute-force oracle") {
  const auto chain = ChainConfig::com_mode(2, kDelta, kNu, 0.1, 2);
  const auto s = single_term(chain, 1, 5.0, 0.6, true);
  REQUIRE(s.strobe.has_value());
  const Basis b(chain);
  const testing::DenseDrive v(s, chain, b);
  SUBCASE("at the stroboscopic period") {
    const auto m = magnus_terms(s, chain, b, s.strobe->period);
    const auto [c1, c2] = brute_magnus(v, s.strobe->period, 40000);
    CHECK(rel(m.chi2, c2) < 1e-6);
    CHECK(m.chi1.norm() < 1e-9 * (0.1 * s.terms[0].omega_blue * s.strobe->period) * b.dimension());
  }
  SUBCASE("at an arbitrary time") {
    const double t = 0.37 * s.strobe->period;
    const auto m = magnus_terms(s, chain, b, t);
    const auto [c1, c2] = brute_magnus(v, t, 20000);
    CHECK(rel(m.chi1, c1) < 1e-7);
    CHECK(rel(m.chi2, c2) < 1e-6);
  }
}

TEST_CASE("first Magnus term has a closed form away from the period") {
  const auto chain = ChainConfig::com_mode(2, kDelta, kNu, 0.1, 2);
  const auto s = single_term(chain, 1, 5.0, 0.2, true);
  const Basis b(chain);
  const double t = 0.61 * s.strobe->period;
  const auto m = magnus_terms(s, chain, b, t);
  const std::vector<int> vac{0}, one{1};
  for (int site = 0; site < 2; ++site) {
    cplx expect{};
    for (const auto& tone : s.tones) {
      if (tone.sideband != Sideband::blue) continue;
      const cplx c = cplx(0.0, 0.05 * tone.amplitude) * std::polar(1.0, -tone.phase);
      const double w = (site + 1) * kDelta + kNu - tone.detuning;
      expect += c * (std::polar(1.0, w * t) - 1.0) / cplx(0.0, w);
    }
    const auto to = b.index(std::uint64_t{1} << site, one);
    const auto from = b.index(0, vac);
    CHECK(std::abs(m.chi1(to, from) - expect) < 1e-9 * std::abs(expect));
  }
}

TEST_CASE("second Magnus term is hermitian") {
  const auto chain = ChainConfig::com_mode(3, kDelta, kNu, 0.1, 2);
  const auto s = single_term(chain, 1, 20.0, 0.9, true);
  const Basis b(chain);
  const auto m = magnus_terms(s, chain, b, s.strobe->period);
  CHECK((m.chi2 - m.chi2.adjoint()).norm() < 1e-12 * m.chi2.norm());
  CHECK((m.chi1 - m.chi1.adjoint()).norm() < 1e-12 * std::max(1.0, m.chi1.norm()));
}

TEST_CASE("closed forms agree with the numeric terms") {
  const auto chain = ChainConfig::com_mode(3, kDelta, kNu, 0.1, 2);
  for (int n : {1, 2}) {
    for (bool red : {false, true}) {
      const auto s = single_term(chain, n, 20.0, 0.5, red);
      const auto r = verify_magnus(s, chain);
      CHECK(r.max_closed_residual < 1e-4);
      CHECK(r.chi1_relative < 1e-8);
      CHECK(r.hermiticity < 1e-12);
      CHECK(r.m == (red ? 1 : 2));
    }
  }
}

TEST_CASE("hop phase and magnitude at the period") {
  const auto chain = ChainConfig::com_mode(3, kDelta, kNu, 0.1, 2);
  const double phi = 0.8;
  const auto s = single_term(chain, 1, 20.0, phi, true);
  const Basis b(chain);
  const double period = s.strobe->period;
  const auto m = magnus_terms(s, chain, b, period);
  for (int k = 0; k + 1 < 3; ++k) {
    const cplx hop = hop_coefficient(m.chi2, b, k, k + 1);
    CHECK(std::abs(hop) / (2 * period) == doctest::Approx(chain.gradient / 40).epsilon(0.02));
    CHECK(std::abs(wrap_phase(std::arg(hop) + phi)) < 0.02);
  }
}

TEST_CASE("red sideband cancels the uniform sz part") {
  const auto chain = ChainConfig::com_mode(3, kDelta, kNu, 0.1, 2);
  const auto blue = verify_magnus(single_term(chain, 1, 20.0, 0.0, false), chain);
  const auto both = verify_magnus(single_term(chain, 1, 20.0, 0.0, true), chain);
  CHECK(std::abs(blue.sz_intercept) > 1e3 * std::abs(both.sz_intercept));
  CHECK(std::abs(blue.sz_intercept) / (2 * blue.period) == doctest::Approx(2 * chain.gradient / 40).epsilon(0.1));
}

TEST_CASE("first-order residual shrinks with alpha") {
  const auto chain = ChainConfig::com_mode(3, kDelta, kNu, 0.1, 2);
  double last = 1e300;
  for (double alpha : {5.0, 10.0, 20.0}) {
    const auto r = verify_magnus(single_term(chain, 1, alpha, 0.3, true), chain);
    CHECK(r.max_first_order_residual < last);
    last = r.max_first_order_residual;
  }
  CHECK(last < 0.05);
}

TEST_CASE("pair terms appear only between stroboscopic times") {
  const auto chain = ChainConfig::com_mode(3, kDelta, kNu, 0.1, 2);
  const auto s = single_term(chain, 2, 20.0, 0.3, false);
  const Basis b(chain);
  const auto m = magnus_terms(s, chain, b, s.strobe->period);
  CHECK(excitation_commutator(m.chi2, b) < 1e-12);
  const auto both = single_term(chain, 2, 20.0, 0.3, true);
  const auto at_period = magnus_terms(both, chain, b, both.strobe->period);
  CHECK(excitation_commutator(at_period.chi2, b) < 1e-10);
  const auto off_period = magnus_terms(both, chain, b, 0.37 * both.strobe->period);
  CHECK(excitation_commutator(off_period.chi2, b) > 1e-6);
}

TEST_CASE("mode-pair split of the second term") {
  ChainConfig chain = ChainConfig::com_mode(2, kDelta, kNu, 0.1, 1);
  chain.modes.push_back({kNu * 1.01, {0.05, -0.05}});
  const auto s = single_term(chain, 1, 5.0, 0.2, false);
  const Basis b(chain);
  const double t = s.strobe->period;
  MagnusOptions all, same, cross;
  same.pairs = ModePairs::same_mode;
  cross.pairs = ModePairs::cross_mode;
  const auto a = magnus_terms(s, chain, b, t, all);
  const auto p = magnus_terms(s, chain, b, t, same);
  const auto q = magnus_terms(s, chain, b, t, cross);
  CHECK((a.chi2 - p.chi2 - q.chi2).norm() < 1e-10 * a.chi2.norm());
  CHECK(q.chi2.norm() > 0.0);

  const auto single = ChainConfig::com_mode(2, kDelta, kNu, 0.1, 1);
  const Basis b1(single);
  const auto z = magnus_terms(single_term(single, 1, 5.0, 0.2, false), single, b1, t, cross);
  CHECK(z.chi2.norm() == 0.0);
}

TEST_CASE("multimode coupling matrix") {
  ChainConfig chain = ChainConfig::com_mode(3, kDelta, kNu, 0.1, 1);
  chain.modes.push_back({0.98 * kNu, {0.08, 0.0, -0.08}});
  const double wb = 1.02 * kNu;
  const auto m = multimode_b_matrix(chain, wb);
  REQUIRE(m.xi.size() == 2);
  CHECK(m.xi[0] == doctest::Approx(0.02 * kNu));
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) {
      double expect = 0.0;
      for (const auto& mode : chain.modes) expect += mode.lamb_dicke[i] * mode.lamb_dicke[k] / (2 * (wb - mode.frequency));
      CHECK(m.b(i, k) == doctest::Approx(expect));
      CHECK(m.b(i, k) == doctest::Approx(m.b(k, i)));
    }
  CHECK_THROWS_AS(multimode_b_matrix(chain, kNu), std::invalid_argument);
}

TEST_CASE("closed forms need a static single term") {
  const auto chain = ChainConfig::com_mode(3, kDelta, kNu, 0.1, 2);
  ScheduleKnobs k;
  const auto corrected = schedule({{1, kDelta / 40, 0.0, 0.0}}, chain, k);
  CHECK_THROWS_AS(closed_form(corrected, 1.0), std::invalid_argument);
  k.correct_gradient = false;
  const auto two = schedule({{1, kDelta / 40, 0.0, 0.0}, {2, kDelta / 40, 0.0, 0.0}}, chain, k);
  CHECK_THROWS_AS(verify_magnus(two, chain), std::invalid_argument);
}
