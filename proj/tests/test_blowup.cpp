#include <catch_amalgamated.hpp>

#include <cmath>

#include "bandlab/blowup.hpp"
#include "bandlab/errors.hpp"

using namespace bandlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected bandlab::Error");
  return ErrorCode::InvalidArgument;
}

BlowupSpec spec(int m, double p, int msmooth = -1) {
  BlowupSpec s;
  s.m = m;
  s.p = p;
  if (msmooth >= 0) s.msmooth = msmooth;
  return s;
}

}  // namespace

TEST_CASE("quadratic region and tail") {
  const BlowupFunction g(spec(1, 1.5));
  CHECK(g(0.5) == 0.25);
  CHECK(g(0.3) == 0.09);
  CHECK(g(-0.4) == g(0.4));
  CHECK(g(1.5) == 2.25);
  CHECK(g.derivative(0.5, 1) == 1.0);
  const double x = 0.9;
  CHECK_THAT(g(x), WithinRel(g.tail_constant() * std::pow(1.0 - x, -1.5), 1e-14));
}

TEST_CASE("junctions match to the requested order") {
  // Independent check with centred differences on either side of each junction.
  for (int msmooth : {1, 2, 6}) {
    const BlowupFunction g(spec(1, 1.5, msmooth));
    const double a = g.spec().a;
    for (double x0 : {0.5, a}) {
      // Second-order one-sided differences from each side.
      const double h = 1e-5;
      const double left = (3 * g(x0) - 4 * g(x0 - h) + g(x0 - 2 * h)) / (2 * h);
      const double right = (-3 * g(x0) + 4 * g(x0 + h) - g(x0 + 2 * h)) / (2 * h);
      CHECK_THAT(left, WithinRel(right, 1e-5));
      CHECK_THAT(g(x0 - 1e-12), WithinRel(g(x0 + 1e-12), 1e-9));
    }
    CHECK(g.validation().max_junction_mismatch < 1e-8);
  }
}

TEST_CASE("analytic derivatives agree with finite differences") {
  const BlowupFunction g(spec(2, 2.5, 6));
  for (double x : {0.55, 0.62, 0.7, 0.8, 0.95, -0.62}) {
    for (int order = 1; order <= 2; ++order) {
      const double h = 1e-4;
      const double fd = order == 1 ? (g(x + h) - g(x - h)) / (2 * h)
                                   : (g(x + h) - 2 * g(x) + g(x - h)) / (h * h);
      CHECK_THAT(g.derivative(x, order), WithinRel(fd, 1e-4));
    }
  }
}

TEST_CASE("dominates x^2 on (1/2, 1)") {
  for (double p : {0.2, 0.5, 1.5, 2.5, 4.0}) {
    const int m = static_cast<int>(std::ceil(p)) - 1;
    const BlowupFunction g(spec(m, p, 6));
    for (int i = 1; i < 2000; ++i) {
      const double x = 0.5 + 0.5 * i / 2000.0;
      CHECK(g(x) >= x * x - 1e-13);
    }
    CHECK(g.validation().min_domination_margin >= -1e-14);
  }
}

TEST_CASE("default tail constant is the smallest power of two that works") {
  const BlowupFunction g(spec(1, 1.5));
  REQUIRE(g.spec().c);
  CHECK(g.tail_constant() == 1.0);

  // A junction close to 1/2 with a weak singularity needs a larger C.
  BlowupSpec s = spec(0, 0.2);
  s.a = 0.55;
  const BlowupFunction g2(s);
  CHECK(g2.tail_constant() >= 1.0);
  CHECK(std::log2(g2.tail_constant()) == std::floor(std::log2(g2.tail_constant())));
}

TEST_CASE("ill-posed specifications") {
  CHECK(code_of([] { BlowupFunction g(spec(1, 0.5)); }) == ErrorCode::IllPosedSpec);
  CHECK(code_of([] { BlowupFunction g(spec(2, 2.0)); }) == ErrorCode::IllPosedSpec);
  CHECK(code_of([] { BlowupFunction g(spec(2, 2.5, 1)); }) == ErrorCode::IllPosedSpec);
  BlowupSpec s = spec(1, 1.5);
  s.a = 1.0;
  CHECK(code_of([&] { BlowupFunction g(s); }) == ErrorCode::IllPosedSpec);
  s.a = 0.75;
  s.c = -1.0;
  CHECK(code_of([&] { BlowupFunction g(s); }) == ErrorCode::IllPosedSpec);
}

TEST_CASE("a too-small tail constant fails domination") {
  BlowupSpec s = spec(1, 1.5, 6);
  s.c = 1e-3;
  CHECK(code_of([&] { BlowupFunction g(s); }) == ErrorCode::DominationViolated);
}

TEST_CASE("singular point and derivative order") {
  const BlowupFunction g(spec(1, 1.5));
  CHECK(code_of([&] { g(1.0); }) == ErrorCode::SingularArgument);
  CHECK(code_of([&] { g(-1.0); }) == ErrorCode::SingularArgument);
  CHECK(code_of([&] { g.derivative(0.7, 2); }) == ErrorCode::OrderTooHigh);
  CHECK(std::isfinite(g(1.0 - 1e-9)));
  // Odd derivatives flip sign under the even extension.
  CHECK(g.derivative(-0.7, 1) == -g.derivative(0.7, 1));
}

TEST_CASE("spec JSON round trip") {
  BlowupSpec s = spec(2, 2.5, 6);
  s.c = 2.0;
  s.a = 0.8;
  const auto back = blowup_spec_from_json(blowup_spec_to_json(s));
  CHECK(back.m == 2);
  CHECK(back.p == 2.5);
  CHECK(back.c == 2.0);
  CHECK(back.a == 0.8);
  CHECK(back.smoothness() == 6);
  CHECK(code_of([] { blowup_spec_from_json(nlohmann::json{{"m", "x"}}); }) == ErrorCode::ParseError);
}
