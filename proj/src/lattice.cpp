#include "bandlab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bandlab/errors.hpp"

namespace bandlab {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double kinetic_value(const Vec& q) { return 0.5 * q.squaredNorm(); }

}  // namespace

int GIndex::shell() const {
  return std::max({std::abs(n[0]), std::abs(n[1]), std::abs(n[2])});
}

std::size_t GIndexHash::operator()(const GIndex& g) const noexcept {
  std::size_t h = 1469598103934665603ULL;
  for (int c : g.n) {
    h ^= static_cast<std::size_t>(static_cast<unsigned int>(c));
    h *= 1099511628211ULL;
  }
  return h;
}

Lattice::Lattice(Mat primitive) : primitive_(std::move(primitive)) {
  const auto d = primitive_.rows();
  if (d < 1 || d > 3 || primitive_.cols() != d) {
    throw Error(ErrorCode::InvalidArgument,
                "primitive matrix must be square with dimension 1, 2 or 3");
  }
  if (!primitive_.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "primitive matrix is not finite");
  }
  double scale = 1.0;
  for (Eigen::Index i = 0; i < d; ++i) scale *= primitive_.col(i).norm();
  const double det = primitive_.determinant();
  if (!(std::abs(det) > 1e-14 * scale)) {
    throw Error(ErrorCode::SingularLattice,
                "primitive vectors are linearly dependent (|det| = " +
                    std::to_string(std::abs(det)) + ")");
  }
  reciprocal_ = kTwoPi * primitive_.transpose().inverse();
  reciprocal_inverse_ = primitive_.transpose() / kTwoPi;
  cell_volume_ = std::abs(det);
  bz_volume_ = std::pow(kTwoPi, static_cast<double>(d)) / cell_volume_;
}

Vec Lattice::g_vector(const GIndex& g) const {
  Vec out = Vec::Zero(dim());
  for (int i = 0; i < dim(); ++i) out += g[i] * reciprocal_.col(i);
  return out;
}

Vec Lattice::k_from_fractional(const Vec& frac) const {
  return reciprocal_ * frac;
}

Vec Lattice::k_to_fractional(const Vec& k) const {
  return reciprocal_inverse_ * k;
}

Lattice Lattice::chain(double a) {
  Mat m(1, 1);
  m(0, 0) = a;
  return Lattice(m);
}

Lattice Lattice::hexagonal(double a) {
  Mat m(2, 2);
  m << a, -0.5 * a, 0.0, 0.5 * std::sqrt(3.0) * a;
  return Lattice(m);
}

Lattice Lattice::cubic(double a) { return Lattice(Mat::Identity(3, 3) * a); }

Lattice Lattice::fcc(double a) {
  Mat m(3, 3);
  m << 0.0, 0.5, 0.5,  //
      0.5, 0.0, 0.5,   //
      0.5, 0.5, 0.0;
  return Lattice(m * a);
}

Lattice new_lattice(const Mat& primitive) { return Lattice(primitive); }

namespace {

template <typename Visit>
void scan_box(const Lattice& lat, const Vec& k, double ec, BasisMode mode,
              Visit&& visit) {
  if (!(ec > 0.0) || !std::isfinite(ec)) {
    throw Error(ErrorCode::InvalidArgument, "cutoff must be positive");
  }
  const int d = lat.dim();
  if (k.size() != d) {
    throw Error(ErrorCode::InvalidArgument, "k has wrong dimension");
  }
  const Vec shift = mode == BasisMode::KDependent ? k : Vec(Vec::Zero(d));
  // |n_i| <= |row_i(B^{-1})| |G| and |G| < sqrt(2 Ec) + |k|.
  const Mat binv = lat.reciprocal().inverse();
  const double radius = std::sqrt(2.0 * ec) + shift.norm();
  std::array<int, 3> lim{0, 0, 0};
  for (int i = 0; i < d; ++i) {
    lim[i] = static_cast<int>(std::ceil(radius * binv.row(i).norm()));
  }
  GIndex g;
  for (int i0 = -lim[0]; i0 <= lim[0]; ++i0) {
    for (int i1 = -lim[1]; i1 <= lim[1]; ++i1) {
      for (int i2 = -lim[2]; i2 <= lim[2]; ++i2) {
        g = GIndex(i0, i1, i2);
        const double kin = kinetic_value(shift + lat.g_vector(g));
        if (kin < ec) visit(g, kin);
      }
    }
  }
}

}  // namespace

std::vector<GIndex> enumerate_basis(const Lattice& lat, const Vec& k, double ec,
                                    BasisMode mode) {
  std::vector<std::pair<double, GIndex>> found;
  scan_box(lat, k, ec, mode,
           [&](const GIndex& g, double kin) { found.emplace_back(kin, g); });
  if (found.empty()) {
    throw Error(ErrorCode::EmptyBasis,
                "no plane wave below cutoff " + std::to_string(ec));
  }
  std::sort(found.begin(), found.end());
  std::vector<GIndex> out;
  out.reserve(found.size());
  for (const auto& [kin, g] : found) out.push_back(g);
  return out;
}

std::size_t basis_size(const Lattice& lat, const Vec& k, double ec,
                       BasisMode mode) {
  std::size_t count = 0;
  scan_box(lat, k, ec, mode, [&](const GIndex&, double) { ++count; });
  return count;
}

CardinalityBounds basis_cardinality_bounds(const Lattice& lat, double ec,
                                           const KPointSet& probe) {
  if (probe.points.empty()) {
    throw Error(ErrorCode::InvalidArgument, "probe set is empty");
  }
  CardinalityBounds b{std::numeric_limits<std::size_t>::max(), 0};
  for (const auto& k : probe.points) {
    const auto m = basis_size(lat, k, ec, BasisMode::KDependent);
    b.minus = std::min(b.minus, m);
    b.plus = std::max(b.plus, m);
  }
  return b;
}

KPointSet kpath(const Lattice& lat, const std::vector<PathNode>& nodes,
                int samples_per_segment) {
  if (nodes.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "a path needs at least two nodes");
  }
  if (samples_per_segment < 1) {
    throw Error(ErrorCode::InvalidArgument, "samples_per_segment must be >= 1");
  }
  for (const auto& node : nodes) {
    if (node.k.size() != lat.dim()) {
      throw Error(ErrorCode::InvalidArgument,
                  "path node '" + node.label + "' has wrong dimension");
    }
  }
  KPointSet ks;
  ks.kind = KSetKind::Path;
  std::vector<double> steps;
  for (std::size_t s = 0; s + 1 < nodes.size(); ++s) {
    const Vec& from = nodes[s].k;
    const Vec& to = nodes[s + 1].k;
    ks.labels[ks.points.size()] = nodes[s].label;
    for (int j = 0; j < samples_per_segment; ++j) {
      const double t = static_cast<double>(j) / samples_per_segment;
      ks.points.push_back(from + t * (to - from));
    }
    steps.push_back((to - from).norm() / samples_per_segment);
  }
  ks.labels[ks.points.size()] = nodes.back().label;
  ks.points.push_back(nodes.back().k);

  const auto [lo, hi] = std::minmax_element(steps.begin(), steps.end());
  if (*hi > 0.0 && *hi - *lo <= 1e-12 * *hi) ks.mesh_width = *hi;
  return ks;
}

KPointSet uniform_grid(const Lattice& lat, int n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "grid size must be >= 1");
  const int d = lat.dim();
  KPointSet ks;
  ks.kind = KSetKind::UniformGrid;
  ks.grid_n = n;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= static_cast<std::size_t>(n);
  ks.points.reserve(total);
  Vec frac(d);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (int i = d - 1; i >= 0; --i) {
      const int j = static_cast<int>(rest % static_cast<std::size_t>(n));
      rest /= static_cast<std::size_t>(n);
      frac[i] = static_cast<double>(j - n / 2) / n;
    }
    ks.points.push_back(lat.k_from_fractional(frac));
  }
  double width = std::numeric_limits<double>::infinity();
  for (int i = 0; i < d; ++i) {
    width = std::min(width, lat.reciprocal().col(i).norm() / n);
  }
  ks.mesh_width = width;
  return ks;
}

nlohmann::json lattice_to_json(const Lattice& lat) {
  const int d = lat.dim();
  std::vector<double> rows;
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) rows.push_back(lat.primitive()(r, c));
  }
  return {{"dim", d}, {"primitive", rows}};
}

Lattice lattice_from_json(const nlohmann::json& j) {
  try {
    const int d = j.at("dim").get<int>();
    const auto rows = j.at("primitive").get<std::vector<double>>();
    if (d < 1 || d > 3 || rows.size() != static_cast<std::size_t>(d * d)) {
      throw Error(ErrorCode::ParseError,
                  "lattice needs dim in 1..3 and dim*dim primitive entries");
    }
    Mat m(d, d);
    for (int r = 0; r < d; ++r) {
      for (int c = 0; c < d; ++c) m(r, c) = rows[static_cast<std::size_t>(r * d + c)];
    }
    return Lattice(m);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("lattice: ") + e.what());
  }
}

nlohmann::json kpoints_to_json(const Lattice& lat, const KPointSet& ks) {
  nlohmann::json frac = nlohmann::json::array();
  for (const auto& k : ks.points) {
    const Vec f = lat.k_to_fractional(k);
    frac.push_back(std::vector<double>(f.data(), f.data() + f.size()));
  }
  nlohmann::json labels = nlohmann::json::object();
  for (const auto& [idx, name] : ks.labels) labels[std::to_string(idx)] = name;
  nlohmann::json out{
      {"kind", ks.kind == KSetKind::Path ? "path" : "grid"},
      {"frac", frac},
      {"labels", labels},
  };
  if (ks.mesh_width) out["mesh_width"] = *ks.mesh_width;
  if (ks.kind == KSetKind::UniformGrid) out["grid_n"] = ks.grid_n;
  return out;
}

KPointSet kpoints_from_json(const Lattice& lat, const nlohmann::json& j) {
  try {
    KPointSet ks;
    ks.kind = j.at("kind").get<std::string>() == "grid" ? KSetKind::UniformGrid
                                                       : KSetKind::Path;
    for (const auto& row : j.at("frac")) {
      const auto f = row.get<std::vector<double>>();
      if (f.size() != static_cast<std::size_t>(lat.dim())) {
        throw Error(ErrorCode::ParseError, "k-point has wrong dimension");
      }
      ks.points.push_back(
          lat.k_from_fractional(Eigen::Map<const Vec>(f.data(), lat.dim())));
    }
    if (j.contains("labels")) {
      for (const auto& [key, name] : j.at("labels").items()) {
        ks.labels[std::stoul(key)] = name.get<std::string>();
      }
    }
    if (j.contains("mesh_width")) ks.mesh_width = j.at("mesh_width").get<double>();
    if (j.contains("grid_n")) ks.grid_n = j.at("grid_n").get<int>();
    return ks;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("k-points: ") + e.what());
  }
}

}  // namespace bandlab
