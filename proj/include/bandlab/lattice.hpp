#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

namespace bandlab {

/// Real d-vector, d <= 3, stored inline.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, 3, 1>;
/// Real d x d matrix, d <= 3, stored inline.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3>;

/// Integer coordinates of a reciprocal lattice vector G = sum_i n_i b_i.
/// Unused trailing coordinates stay zero, so ordering and hashing do not
/// depend on the dimension.
struct GIndex {
  std::array<int, 3> n{0, 0, 0};

  GIndex() = default;
  GIndex(int n0, int n1 = 0, int n2 = 0) : n{n0, n1, n2} {}

  int operator[](std::size_t i) const { return n[i]; }
  int& operator[](std::size_t i) { return n[i]; }

  auto operator<=>(const GIndex&) const = default;

  GIndex operator+(const GIndex& o) const {
    return {n[0] + o.n[0], n[1] + o.n[1], n[2] + o.n[2]};
  }
  GIndex operator-(const GIndex& o) const {
    return {n[0] - o.n[0], n[1] - o.n[1], n[2] - o.n[2]};
  }
  GIndex operator-() const { return {-n[0], -n[1], -n[2]}; }

  bool is_zero() const { return n[0] == 0 && n[1] == 0 && n[2] == 0; }
  /// max_i |n_i|
  int shell() const;
};

struct GIndexHash {
  std::size_t operator()(const GIndex& g) const noexcept;
};

/// Bravais lattice in dimension 1..3. The columns of `primitive` are the
/// lattice vectors a_i, the columns of `reciprocal` are b_i with
/// a_i . b_j = 2 pi delta_ij.
class Lattice {
 public:
  explicit Lattice(Mat primitive);

  int dim() const { return static_cast<int>(primitive_.cols()); }
  const Mat& primitive() const { return primitive_; }
  const Mat& reciprocal() const { return reciprocal_; }
  double cell_volume() const { return cell_volume_; }
  double bz_volume() const { return bz_volume_; }

  /// Cartesian G for integer coordinates.
  Vec g_vector(const GIndex& g) const;
  Vec k_from_fractional(const Vec& frac) const;
  Vec k_to_fractional(const Vec& k) const;

  static Lattice chain(double a);
  static Lattice hexagonal(double a);
  static Lattice cubic(double a);
  static Lattice fcc(double a);

 private:
  Mat primitive_;
  Mat reciprocal_;
  Mat reciprocal_inverse_;
  double cell_volume_ = 0.0;
  double bz_volume_ = 0.0;
};

Lattice new_lattice(const Mat& primitive);

enum class BasisMode { Uniform, KDependent };

/// Plane waves with kinetic value strictly below `ec`: {G : |G|^2/2 < ec} in
/// Uniform mode, {G : |k+G|^2/2 < ec} in KDependent mode. Sorted by kinetic
/// value, ties broken lexicographically. Throws EmptyBasis.
std::vector<GIndex> enumerate_basis(const Lattice& lat, const Vec& k, double ec,
                                    BasisMode mode);

/// Same set as enumerate_basis but returns its size and never throws on an
/// empty result.
std::size_t basis_size(const Lattice& lat, const Vec& k, double ec,
                       BasisMode mode);

enum class KSetKind { Path, UniformGrid };

struct KPointSet {
  std::vector<Vec> points;  // Cartesian, inverse-length units
  KSetKind kind = KSetKind::Path;
  std::map<std::size_t, std::string> labels;
  std::optional<double> mesh_width;
  int grid_n = 0;  // points per dimension for UniformGrid

  std::size_t size() const { return points.size(); }
};

struct CardinalityBounds {
  std::size_t minus = 0;
  std::size_t plus = 0;
};

/// Min and max of M_Ec(k) over the probe set. An estimate of the optimal
/// constants, exact only in the limit of a dense probe set.
CardinalityBounds basis_cardinality_bounds(const Lattice& lat, double ec,
                                           const KPointSet& probe);

struct PathNode {
  std::string label;
  Vec k;  // Cartesian
};

KPointSet kpath(const Lattice& lat, const std::vector<PathNode>& nodes,
                int samples_per_segment);

/// Gamma-centred grid k = sum_i (m_i/n) b_i, fractional coordinates wrapped
/// into [-1/2, 1/2).
KPointSet uniform_grid(const Lattice& lat, int n_per_dim);

nlohmann::json lattice_to_json(const Lattice& lat);
Lattice lattice_from_json(const nlohmann::json& j);
nlohmann::json kpoints_to_json(const Lattice& lat, const KPointSet& ks);
KPointSet kpoints_from_json(const Lattice& lat, const nlohmann::json& j);

}  // namespace bandlab
