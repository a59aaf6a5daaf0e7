#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "bandlab/errors.hpp"
#include "bandlab/fiber.hpp"
#include "bandlab/spectra.hpp"

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

FourierPotential cosine(const Lattice& lat, double amp = 1.0) {
  const std::vector<std::pair<GIndex, Complex>> e{{GIndex(1), amp}, {GIndex(-1), amp}};
  return potential_from_coeffs(lat, e);
}

bool bit_hermitian(const Eigen::MatrixXcd& h) {
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    if (h(i, i).imag() != 0.0) return false;
    for (Eigen::Index j = 0; j < h.cols(); ++j) {
      if (h(i, j) != std::conj(h(j, i))) return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("free electrons at k = 0") {
  const auto lat = Lattice::chain(1.0);
  const auto h = assemble(lat, zero_potential(lat), vec1(0.0), 25.0, Scheme::kdependent());
  REQUIRE(h.dim() == 3);
  Eigen::VectorXd diag = h.entries.diagonal().real();
  CHECK(diag[0] == 0.0);
  CHECK_THAT(diag[1], WithinRel(2 * kPi * kPi, 1e-15));
  CHECK_THAT(diag[2], WithinRel(2 * kPi * kPi, 1e-15));
  CHECK((h.entries - Eigen::MatrixXcd(h.entries.diagonal().asDiagonal())).norm() == 0.0);
}

TEST_CASE("convolution indexing of the cosine coupling") {
  const auto lat = Lattice::chain(1.0);
  const auto h = assemble(lat, cosine(lat), vec1(0.0), 25.0, Scheme::kdependent());
  REQUIRE(h.dim() == 3);
  // Basis {0, -1, +1}: (0,+-1) couple with 1, (+1,-1) differ by 2 and do not.
  CHECK(h.entries(0, 1) == Complex(1.0, 0.0));
  CHECK(h.entries(0, 2) == Complex(1.0, 0.0));
  CHECK(h.entries(1, 2) == Complex(0.0, 0.0));
}

TEST_CASE("scatter and gather assembly agree") {
  // A potential with more coefficients than matrix entries takes the gather path.
  const auto lat = Lattice::chain(1.0);
  const auto dense = synth_power_law(lat, 1.6, 256, 5);
  const Vec k = vec1(0.4);
  const auto h = assemble(lat, dense, k, 300.0, Scheme::kdependent());
  for (Eigen::Index i = 0; i < h.dim(); ++i) {
    for (Eigen::Index j = 0; j < h.dim(); ++j) {
      Complex expect = dense.coefficient(h.basis[i] - h.basis[j]);
      if (i == j) expect += 0.5 * (k + lat.g_vector(h.basis[i])).squaredNorm();
      CHECK(std::abs(h.entries(i, j) - expect) <= 1e-13 * std::max(1.0, std::abs(expect)));
    }
  }
  const auto sparse = synth_power_law(lat, 1.6, 3, 5);
  const auto h2 = assemble(lat, sparse, k, 300.0, Scheme::kdependent());
  CHECK(h2.entries(0, 0).real() == 0.5 * (k + lat.g_vector(h2.basis[0])).squaredNorm());
}

TEST_CASE("Hermitian bit for bit and real diagonal") {
  const auto lat = Lattice::hexagonal(2.0);
  const auto v = synth_power_law(lat, 2.1, 5, 3);
  Vec k(2);
  k << 0.37, -0.21;
  for (const auto& s : {Scheme::uniform(), Scheme::kdependent(), Scheme::modified(BlowupSpec{})}) {
    const auto h = assemble(lat, v, k, 40.0, s);
    CHECK(bit_hermitian(h.entries));
  }
}

TEST_CASE("modified kinetic term") {
  const auto g = Scheme::modified(BlowupSpec{});
  const double ec = 25.0;
  SECTION("quadratic region is the plain kinetic energy") {
    for (double q2 : {0.0, 1.0, 12.0, 12.5}) CHECK(kinetic(g, q2, ec) == 0.5 * q2);
  }
  SECTION("dominates and blows up at the cutoff") {
    for (double q2 : {26.0, 30.0, 40.0, 49.0, 49.999}) CHECK(kinetic(g, q2, ec) >= 0.5 * q2);
    CHECK(kinetic(g, 49.99999, ec) > 1e6);
  }
}

TEST_CASE("modified equals k-dependent on waves in the quadratic region") {
  const auto lat = Lattice::chain(1.0);
  const auto v = cosine(lat);
  const double ec = 200.0;
  const Vec k = vec1(0.45);
  const auto a = assemble(lat, v, k, ec, Scheme::kdependent());
  const auto b = assemble(lat, v, k, ec, Scheme::modified(BlowupSpec{}));
  REQUIRE(a.basis == b.basis);
  int inner = 0;
  for (Eigen::Index i = 0; i < a.dim(); ++i) {
    const double kin = 0.5 * (k + lat.g_vector(a.basis[i])).squaredNorm();
    if (kin <= ec / 4) {
      ++inner;
      CHECK(a.entries(i, i) == b.entries(i, i));
    } else {
      CHECK(b.entries(i, i).real() > a.entries(i, i).real());
    }
  }
  CHECK(inner >= 2);
}

TEST_CASE("modified diagonal dominates the k-dependent diagonal") {
  const auto lat = Lattice::chain(1.0);
  const auto v = synth_power_law(lat, 2.1, 64, 7);
  for (double k : {-3.0, -1.0, 0.0, 0.5, 2.9}) {
    const auto a = assemble(lat, v, vec1(k), 400.0, Scheme::kdependent());
    const auto b = assemble(lat, v, vec1(k), 400.0, Scheme::modified(BlowupSpec{}));
    REQUIRE(a.basis == b.basis);
    for (Eigen::Index i = 0; i < a.dim(); ++i) CHECK(b.entries(i, i).real() >= a.entries(i, i).real());
    const Eigen::MatrixXcd off_a = a.entries - Eigen::MatrixXcd(a.entries.diagonal().asDiagonal());
    const Eigen::MatrixXcd off_b = b.entries - Eigen::MatrixXcd(b.entries.diagonal().asDiagonal());
    CHECK((off_a - off_b).norm() == 0.0);
  }
}

TEST_CASE("projection identity") {
  const auto lat = Lattice::chain(1.0);
  CHECK(project_modified_identity_check(lat, zero_potential(lat), vec1(0.3), 25.0) == 0.0);
  CHECK(project_modified_identity_check(lat, cosine(lat), vec1(0.3), 25.0) <= 1e-13 * 25.0);

  const auto hex = Lattice::hexagonal(2.0);
  const auto v = synth_power_law(hex, 2.1, 6, 1);
  Vec k(2);
  k << -0.3, 0.8;
  BlowupSpec s;
  s.m = 2;
  s.p = 2.5;
  CHECK(project_modified_identity_check(hex, v, k, 30.0, s) <= 1e-13 * 30.0);
}

TEST_CASE("k-dependent spectrum is periodic in k, uniform is not") {
  const auto lat = Lattice::chain(1.0);
  const auto v = cosine(lat);
  const Vec k = vec1(0.7);
  const Vec k_shift = vec1(0.7 + 2 * kPi);
  const auto ea = eigh(assemble(lat, v, k, 25.0, Scheme::kdependent())).values;
  const auto eb = eigh(assemble(lat, v, k_shift, 25.0, Scheme::kdependent())).values;
  REQUIRE(ea.size() == eb.size());
  for (std::size_t i = 0; i < ea.size(); ++i) CHECK_THAT(ea[i], WithinAbs(eb[i], 1e-10));

  double worst = 0.0;
  for (int s = 0; s < 40; ++s) {
    const double kk = -kPi + 2 * kPi * s / 40.0;
    const auto ua = eigh(assemble(lat, v, vec1(kk), 25.0, Scheme::uniform()), 1).values;
    const auto ub = eigh(assemble(lat, v, vec1(kk + 2 * kPi), 25.0, Scheme::uniform()), 1).values;
    worst = std::max(worst, std::abs(ua[0] - ub[0]));
  }
  CHECK(worst > 1e-3);
}

TEST_CASE("matrix dimension equals the basis size") {
  const auto lat = Lattice::fcc(4.0);
  const auto v = synth_power_law(lat, 2.0, 2, 9);
  Vec k(3);
  k << 0.1, -0.2, 0.05;
  const auto h = assemble(lat, v, k, 6.0, Scheme::kdependent());
  CHECK(static_cast<std::size_t>(h.dim()) == basis_size(lat, k, 6.0, BasisMode::KDependent));
}

TEST_CASE("assembly preconditions") {
  const auto lat = Lattice::chain(1.0);
  try {
    assemble(lat, cosine(lat), vec1(kPi), 1.0, Scheme::kdependent());
    FAIL("expected EmptyBasis");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyBasis);
  }
  const std::vector<std::pair<GIndex, Complex>> e{{GIndex(1), Complex(0, 1)}};
  const auto complex_v = potential_from_coeffs(lat, e, false);
  CHECK_THROWS_AS(assemble(lat, complex_v, vec1(0.0), 25.0, Scheme::kdependent()), Error);
  CHECK_THROWS_AS(Scheme::modified(std::shared_ptr<const BlowupFunction>{}), Error);
  CHECK(scheme_kind_from_string("modified") == SchemeKind::Modified);
  CHECK_THROWS_AS(scheme_kind_from_string("spline"), Error);
}

TEST_CASE("matrix dump") {
  const auto lat = Lattice::chain(1.0);
  const auto h = assemble(lat, cosine(lat), vec1(0.0), 25.0, Scheme::kdependent());
  const auto j = fiber_to_json(h);
  CHECK(j["basis"].size() == 3);
  CHECK(j["re"].size() == 9);
  CHECK(j["re"][1].get<double>() == 1.0);
  CHECK(j["scheme"] == "kdep");
}
