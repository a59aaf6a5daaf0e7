#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <set>

#include "bandlab/errors.hpp"
#include "bandlab/lattice.hpp"

using namespace bandlab;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

Vec vec(std::initializer_list<double> xs) {
  Vec v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v[i++] = x;
  return v;
}

// Direct count over a generous box, independent of the library's bounds.
std::set<GIndex> brute_force_basis(const Lattice& lat, const Vec& k, double ec, BasisMode mode,
                                   int box) {
  std::set<GIndex> out;
  const int d = lat.dim();
  for (int i = -box; i <= box; ++i) {
    for (int j = (d > 1 ? -box : 0); j <= (d > 1 ? box : 0); ++j) {
      for (int l = (d > 2 ? -box : 0); l <= (d > 2 ? box : 0); ++l) {
        const GIndex g(i, j, l);
        Vec q = lat.g_vector(g);
        if (mode == BasisMode::KDependent) q += k;
        if (0.5 * q.squaredNorm() < ec) out.insert(g);
      }
    }
  }
  return out;
}

}  // namespace

TEST_CASE("reciprocal vectors are dual to the primitive vectors") {
  for (const auto& lat : {Lattice::chain(1.3), Lattice::hexagonal(2.0), Lattice::cubic(1.5),
                          Lattice::fcc(3.0)}) {
    const Mat prod = lat.primitive().transpose() * lat.reciprocal();
    const Mat expect = 2.0 * kPi * Mat::Identity(lat.dim(), lat.dim());
    CHECK((prod - expect).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THAT(lat.cell_volume() * lat.bz_volume(), WithinRel(std::pow(2.0 * kPi, lat.dim()), 1e-12));
  }
}

TEST_CASE("cell volumes of the standard lattices") {
  CHECK_THAT(Lattice::chain(1.0).cell_volume(), WithinAbs(1.0, 1e-15));
  CHECK_THAT(Lattice::hexagonal(2.0).cell_volume(), WithinRel(2.0 * std::sqrt(3.0), 1e-14));
  CHECK_THAT(Lattice::fcc(4.0).cell_volume(), WithinRel(16.0, 1e-14));
}

TEST_CASE("singular primitive matrices are rejected") {
  Mat m(2, 2);
  m << 1.0, 2.0, 2.0, 4.0;
  CHECK_THROWS_AS(Lattice(m), Error);
  try {
    Lattice bad(m);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularLattice);
  }
}

TEST_CASE("fractional round trip") {
  const auto lat = Lattice::hexagonal(2.0);
  const Vec f = vec({0.25, -0.375});
  CHECK((lat.k_to_fractional(lat.k_from_fractional(f)) - f).norm() < 1e-14);
}

TEST_CASE("1D free-electron basis at Ec = 25 is {0, +1, -1}") {
  const auto lat = Lattice::chain(1.0);
  const auto basis = enumerate_basis(lat, vec({0.0}), 25.0, BasisMode::KDependent);
  REQUIRE(basis.size() == 3);
  CHECK(basis[0] == GIndex(0));
  // Equal kinetic values are ordered by index.
  CHECK(basis[1] == GIndex(-1));
  CHECK(basis[2] == GIndex(1));
}

TEST_CASE("enumerate_basis matches a brute-force count") {
  struct Case {
    Lattice lat;
    Vec k;
    double ec;
  };
  const std::vector<Case> cases{
      {Lattice::chain(1.0), vec({0.3}), 200.0},
      {Lattice::chain(2.5), vec({-1.1}), 17.0},
      {Lattice::hexagonal(2.0), vec({0.4, -0.2}), 30.0},
      {Lattice::fcc(4.0), vec({0.1, 0.2, -0.3}), 8.0},
  };
  for (const auto& c : cases) {
    for (auto mode : {BasisMode::Uniform, BasisMode::KDependent}) {
      const auto got = enumerate_basis(c.lat, c.k, c.ec, mode);
      const auto expect = brute_force_basis(c.lat, c.k, c.ec, mode, 40);
      CHECK(std::set<GIndex>(got.begin(), got.end()) == expect);
      CHECK(got.size() == expect.size());
      CHECK(basis_size(c.lat, c.k, c.ec, mode) == expect.size());
      for (std::size_t i = 1; i < got.size(); ++i) {
        const Vec shift = mode == BasisMode::KDependent ? c.k : Vec(Vec::Zero(c.lat.dim()));
        const double a = (shift + c.lat.g_vector(got[i - 1])).squaredNorm();
        const double b = (shift + c.lat.g_vector(got[i])).squaredNorm();
        CHECK(a <= b);
      }
    }
  }
}

TEST_CASE("strict cutoff inequality") {
  // |G|^2/2 = 2 pi^2 exactly at the first shell; that shell is excluded at Ec = 2 pi^2.
  const auto lat = Lattice::chain(1.0);
  const double first_shell = 0.5 * lat.g_vector(GIndex(1)).squaredNorm();
  CHECK(basis_size(lat, vec({0.0}), first_shell, BasisMode::Uniform) == 1);
  CHECK(basis_size(lat, vec({0.0}), std::nextafter(first_shell, 1e9), BasisMode::Uniform) == 3);
}

TEST_CASE("empty basis is an error") {
  const auto lat = Lattice::chain(1.0);
  CHECK_THROWS_AS(enumerate_basis(lat, vec({kPi}), 1.0, BasisMode::KDependent), Error);
  CHECK(basis_size(lat, vec({kPi}), 1.0, BasisMode::KDependent) == 0);
}

TEST_CASE("k-dependent basis is shifted by reciprocal translations") {
  const auto lat = Lattice::hexagonal(2.0);
  const Vec k = vec({0.31, 0.17});
  const GIndex g0(2, -1);
  const auto a = enumerate_basis(lat, k, 20.0, BasisMode::KDependent);
  const auto b = enumerate_basis(lat, k + lat.g_vector(g0), 20.0, BasisMode::KDependent);
  REQUIRE(a.size() == b.size());
  std::set<GIndex> shifted;
  for (const auto& g : b) shifted.insert(g + g0);
  CHECK(shifted == std::set<GIndex>(a.begin(), a.end()));
}

TEST_CASE("cardinality bounds bracket every probe") {
  const auto lat = Lattice::chain(1.0);
  const auto grid = uniform_grid(lat, 64);
  const auto b = basis_cardinality_bounds(lat, 100.0, grid);
  CHECK(b.minus <= b.plus);
  for (const auto& k : grid.points) {
    const auto m = basis_size(lat, k, 100.0, BasisMode::KDependent);
    CHECK(m >= b.minus);
    CHECK(m <= b.plus);
  }
  // The ball of radius sqrt(200) holds 2 sqrt(200)/(2 pi) ~ 4.5 lattice points.
  CHECK(b.minus == 4);
  CHECK(b.plus == 5);
}

TEST_CASE("uniform grid layout") {
  const auto lat = Lattice::hexagonal(2.0);
  const auto grid = uniform_grid(lat, 4);
  REQUIRE(grid.size() == 16);
  CHECK(grid.kind == KSetKind::UniformGrid);
  const Vec f0 = lat.k_to_fractional(grid.points[0]);
  CHECK((f0 - vec({-0.5, -0.5})).norm() < 1e-14);
  const Vec f1 = lat.k_to_fractional(grid.points[1]);
  CHECK((f1 - vec({-0.5, -0.25})).norm() < 1e-14);
  REQUIRE(grid.mesh_width);
  CHECK_THAT(*grid.mesh_width, WithinRel(lat.reciprocal().col(0).norm() / 4, 1e-14));
}

TEST_CASE("k-path sampling") {
  const auto lat = Lattice::chain(1.0);
  const auto path = kpath(lat, {{"L", vec({-kPi})}, {"R", vec({kPi})}}, 100);
  REQUIRE(path.size() == 101);
  CHECK(path.kind == KSetKind::Path);
  CHECK(path.labels.at(0) == "L");
  CHECK(path.labels.at(100) == "R");
  REQUIRE(path.mesh_width);
  CHECK_THAT(*path.mesh_width, WithinRel(2 * kPi / 100, 1e-14));

  const auto uneven = kpath(lat, {{"A", vec({0.0})}, {"B", vec({1.0})}, {"C", vec({3.0})}}, 10);
  CHECK_FALSE(uneven.mesh_width);
}

TEST_CASE("lattice and k-point JSON round trip") {
  const auto lat = Lattice::fcc(3.5);
  const auto back = lattice_from_json(lattice_to_json(lat));
  CHECK((back.primitive() - lat.primitive()).norm() == 0.0);

  const auto grid = uniform_grid(lat, 3);
  const auto ks = kpoints_from_json(lat, kpoints_to_json(lat, grid));
  REQUIRE(ks.size() == grid.size());
  for (std::size_t i = 0; i < ks.size(); ++i) CHECK((ks.points[i] - grid.points[i]).norm() < 1e-13);
  CHECK(ks.kind == KSetKind::UniformGrid);
  CHECK(ks.grid_n == 3);

  CHECK_THROWS_AS(lattice_from_json(nlohmann::json{{"dim", 2}, {"primitive", {1.0}}}), Error);
  CHECK_THROWS_AS(lattice_from_json(nlohmann::json::parse("{\"dim\": \"x\"}")), Error);
}

TEST_CASE("GIndex algebra and shells") {
  const GIndex a(1, -2, 3);
  CHECK((a + (-a)).is_zero());
  CHECK(a.shell() == 3);
  CHECK((a - a) == GIndex());
  GIndexHash h;
  CHECK(h(a) == h(GIndex(1, -2, 3)));
}
