#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "bandlab/errors.hpp"
#include "bandlab/potential.hpp"

using namespace bandlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

Vec vec1(double x) {
  Vec v(1);
  v[0] = x;
  return v;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected bandlab::Error");
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("cosine potential evaluates to 2 cos(2 pi x)") {
  const auto lat = Lattice::chain(1.0);
  const std::vector<std::pair<GIndex, Complex>> e{{GIndex(1), 1.0}, {GIndex(-1), 1.0}};
  const auto v = potential_from_coeffs(lat, e);
  for (double x : {0.0, 0.1, 0.25, 0.4, -0.33}) {
    const Complex val = evaluate(v, vec1(x));
    CHECK_THAT(val.real(), WithinAbs(2.0 * std::cos(2.0 * kPi * x), 1e-14));
    CHECK(val.imag() == 0.0);
  }
  CHECK(v.sup_norm_proxy() == 2.0);
}

TEST_CASE("Sobolev norm of the cosine potential") {
  const auto lat = Lattice::chain(1.0);
  const std::vector<std::pair<GIndex, Complex>> e{{GIndex(1), 1.0}, {GIndex(-1), 1.0}};
  const auto v = potential_from_coeffs(lat, e);
  for (double s : {0.0, 1.0, 2.5}) {
    const double expect = std::sqrt(2.0 * std::pow(1.0 + 4.0 * kPi * kPi, s));
    CHECK_THAT(sobolev_norm(v, s).norm, WithinRel(expect, 1e-14));
  }
}

TEST_CASE("broken Hermitian pairing is reported with the offending G") {
  const auto lat = Lattice::chain(1.0);
  const std::vector<std::pair<GIndex, Complex>> e{{GIndex(1), Complex(1.0, 0.5)},
                                                  {GIndex(-1), Complex(1.0, 0.5)}};
  CHECK(code_of([&] { potential_from_coeffs(lat, e); }) == ErrorCode::BrokenHermitianSymmetry);
  try {
    potential_from_coeffs(lat, e);
  } catch (const Error& err) {
    CHECK(std::string(err.what()).find("(1)") != std::string::npos);
  }

  const std::vector<std::pair<GIndex, Complex>> unpaired{{GIndex(-3), 0.2}};
  CHECK(code_of([&] { potential_from_coeffs(lat, unpaired); }) ==
        ErrorCode::BrokenHermitianSymmetry);

  const std::vector<std::pair<GIndex, Complex>> complex_zero{{GIndex(0), Complex(0.0, 1.0)}};
  CHECK(code_of([&] { potential_from_coeffs(lat, complex_zero); }) ==
        ErrorCode::BrokenHermitianSymmetry);

  // Complex-valued potentials skip the check.
  CHECK_NOTHROW(potential_from_coeffs(lat, e, false));
}

TEST_CASE("rounding-level pairing defects are repaired exactly") {
  const auto lat = Lattice::chain(1.0);
  const Complex c(0.3, 0.7);
  const std::vector<std::pair<GIndex, Complex>> e{{GIndex(2), c},
                                                  {GIndex(-2), std::conj(c) + Complex(1e-15, 0)}};
  const auto v = potential_from_coeffs(lat, e);
  CHECK(v.coefficient(GIndex(-2)) == std::conj(v.coefficient(GIndex(2))));
}

TEST_CASE("duplicate entries are summed, absent keys are zero") {
  const auto lat = Lattice::chain(1.0);
  const std::vector<std::pair<GIndex, Complex>> e{
      {GIndex(1), 0.5}, {GIndex(1), 0.25}, {GIndex(-1), 0.75}};
  const auto v = potential_from_coeffs(lat, e);
  CHECK(v.coefficient(GIndex(1)) == Complex(0.75, 0.0));
  CHECK(v.coefficient(GIndex(5)) == Complex(0.0, 0.0));
}

TEST_CASE("non-finite or out-of-dimension coefficients are rejected") {
  const auto lat = Lattice::chain(1.0);
  const std::vector<std::pair<GIndex, Complex>> nan{{GIndex(0), std::nan("")}};
  CHECK(code_of([&] { potential_from_coeffs(lat, nan); }) == ErrorCode::InvalidArgument);
  const std::vector<std::pair<GIndex, Complex>> dim{{GIndex(0, 1), 1.0}, {GIndex(0, -1), 1.0}};
  CHECK(code_of([&] { potential_from_coeffs(lat, dim); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("synthetic power-law potential") {
  const auto lat = Lattice::hexagonal(2.0);
  const auto v = synth_power_law(lat, 2.1, 4, 7);

  SECTION("shape") {
    // (2 gmax + 1)^2 - 1 nonzero coefficients, no constant term.
    CHECK(v.coeffs().size() == 80);
    CHECK(v.coefficient(GIndex()) == Complex(0.0, 0.0));
    for (const auto& [g, c] : v.coeffs()) {
      CHECK(g.shell() <= 4);
      CHECK_THAT(std::abs(c), WithinRel(std::pow(lat.g_vector(g).norm(), -2.1), 1e-12));
      CHECK(v.coefficient(-g) == std::conj(c));
    }
  }
  SECTION("real in real space") {
    Vec x(2);
    x << 0.3, -0.8;
    const Complex direct = [&] {
      Complex s{};
      for (const auto& [g, c] : v.coeffs()) s += c * std::exp(Complex(0, lat.g_vector(g).dot(x)));
      return s;
    }();
    CHECK(std::abs(direct.imag()) < 1e-13);
    CHECK_THAT(evaluate(v, x).real(), WithinAbs(direct.real(), 1e-13));
  }
  SECTION("deterministic in the seed") {
    const auto same = synth_power_law(lat, 2.1, 4, 7);
    const auto other = synth_power_law(lat, 2.1, 4, 8);
    CHECK(same.coeffs() == v.coeffs());
    CHECK(other.coeffs() != v.coeffs());
  }
  SECTION("exponent must exceed d/2") {
    CHECK(code_of([&] { synth_power_law(lat, 1.0, 4, 7); }) == ErrorCode::InvalidArgument);
  }
}

TEST_CASE("potential JSON round trip") {
  const auto lat = Lattice::chain(1.0);
  const auto v = synth_power_law(lat, 1.6, 16, 3);
  const auto back = potential_from_json(potential_to_json(v));
  CHECK(back.coeffs() == v.coeffs());
  CHECK(back.real_valued());
  CHECK(code_of([&] { potential_from_json(nlohmann::json{{"coeffs", 3}}); }) == ErrorCode::ParseError);
}
