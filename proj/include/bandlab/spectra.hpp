#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "bandlab/fiber.hpp"

namespace bandlab {

enum class SolverKind {
  Auto,            ///< Jacobi for modified or small matrices, Householder otherwise
  Householder,     ///< Eigen's tridiagonal QR
  Jacobi,          ///< cyclic Jacobi in double
  JacobiExtended,  ///< cyclic Jacobi in long double
};

struct EigenSolution {
  std::vector<double> values;              // ascending, with multiplicity
  std::optional<Eigen::MatrixXcd> vectors;  // columns match values
  /// max_i ||H v_i - l_i v_i|| when vectors were computed, otherwise an a
  /// priori bound from the solver.
  double residual_bound = 0.0;
  SolverKind solver = SolverKind::Auto;
};

/// Lowest `n_lowest` eigenpairs (all when empty). Throws InvalidArgument
/// for n_lowest > dim, SolverFailure if the iteration does not converge.
EigenSolution eigh(const Eigen::MatrixXcd& h, std::optional<int> n_lowest = {},
                   bool want_vectors = false, SolverKind solver = SolverKind::Auto,
                   bool graded = false);
EigenSolution eigh(const FiberMatrix& h, std::optional<int> n_lowest = {},
                   bool want_vectors = false, SolverKind solver = SolverKind::Auto);

struct BandStructure {
  KPointSet kset;
  int n_bands = 0;
  Eigen::MatrixXd energies;  // |kset| x n_bands, rows ascending
  Scheme scheme;
  double ec = 0.0;
  std::uint64_t potential_digest = 0;
  std::uint64_t lattice_digest = 0;
};

/// Calls body(i) for i in [0, n) on up to `threads` workers. Exceptions are
/// rethrown on the caller after all workers stop; the lowest index wins.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

/// Per-k assembly and solve. Throws BandCountExceedsBasis naming the first
/// offending k.
BandStructure compute_bands(const Lattice& lat, const FourierPotential& v,
                            const KPointSet& kset, double ec, const Scheme& scheme,
                            int n_bands, int threads = 1,
                            SolverKind solver = SolverKind::Auto);

/// FNV-1a over a canonical JSON dump.
std::uint64_t digest(const nlohmann::json& j);

/// Header k_frac_1..k_frac_d,band_1..band_n; 17 significant digits.
std::string bands_to_csv(const Lattice& lat, const BandStructure& bands);

}  // namespace bandlab
