#include "bandlab/spectra.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "bandlab/errors.hpp"
#include "bandlab/jacobi.hpp"

namespace bandlab {

namespace {

constexpr Eigen::Index kJacobiMaxDim = 160;

template <typename Real>
EigenSolution solve_jacobi(const Eigen::MatrixXcd& h, bool want_vectors) {
  using J = HermitianJacobi<Real>;
  HermitianJacobi<Real> jac(h.template cast<typename J::Scalar>(), want_vectors);
  if (!jac.converged()) {
    throw Error(ErrorCode::SolverFailure,
                fmt::format("Jacobi did not converge in {} sweeps (dim {})", jac.sweeps(),
                            h.rows()));
  }
  EigenSolution out;
  for (Real x : jac.eigenvalues()) out.values.push_back(static_cast<double>(x));
  if (want_vectors) out.vectors = jac.eigenvectors().template cast<std::complex<double>>();
  out.residual_bound = static_cast<double>(jac.offdiagonal_bound());
  return out;
}

EigenSolution solve_householder(const Eigen::MatrixXcd& h, bool want_vectors) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
      h, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::SolverFailure,
                fmt::format("Hermitian QR did not converge (dim {})", h.rows()));
  }
  EigenSolution out;
  out.values.assign(es.eigenvalues().data(), es.eigenvalues().data() + h.rows());
  if (want_vectors) out.vectors = es.eigenvectors();
  out.residual_bound = std::numeric_limits<double>::epsilon() * h.cwiseAbs().rowwise().sum().maxCoeff();
  return out;
}

}  // namespace

EigenSolution eigh(const Eigen::MatrixXcd& h, std::optional<int> n_lowest,
                   bool want_vectors, SolverKind solver, bool graded) {
  if (h.rows() != h.cols()) throw Error(ErrorCode::InvalidArgument, "matrix is not square");
  const Eigen::Index dim = h.rows();
  if (n_lowest && (*n_lowest < 0 || *n_lowest > dim)) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("requested {} eigenvalues of a {}x{} matrix", *n_lowest, dim, dim));
  }
  SolverKind used = solver;
  if (used == SolverKind::Auto) {
    used = (graded || dim <= kJacobiMaxDim) ? SolverKind::Jacobi : SolverKind::Householder;
  }

  EigenSolution out;
  switch (used) {
    case SolverKind::Householder: out = solve_householder(h, want_vectors); break;
    case SolverKind::JacobiExtended: out = solve_jacobi<long double>(h, want_vectors); break;
    default: out = solve_jacobi<double>(h, want_vectors); break;
  }
  out.solver = used;

  const Eigen::Index keep = n_lowest ? *n_lowest : dim;
  out.values.resize(static_cast<std::size_t>(keep));
  if (out.vectors) {
    Eigen::MatrixXcd v = out.vectors->leftCols(keep);
    double worst = 0.0;
    for (Eigen::Index i = 0; i < keep; ++i) {
      worst = std::max(worst, (h * v.col(i) - out.values[i] * v.col(i)).norm());
    }
    out.vectors = std::move(v);
    out.residual_bound = worst;
  }
  return out;
}

EigenSolution eigh(const FiberMatrix& h, std::optional<int> n_lowest, bool want_vectors,
                   SolverKind solver) {
  return eigh(h.entries, n_lowest, want_vectors, solver,
              h.scheme.kind == SchemeKind::Modified);
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(threads, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> stop{false};
  std::mutex mu;
  std::size_t failed_at = n;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i; !stop && (i = next++) < n;) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(mu);
        if (i < failed_at) {
          failed_at = i;
          failure = std::current_exception();
        }
        stop = true;
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

BandStructure compute_bands(const Lattice& lat, const FourierPotential& v,
                            const KPointSet& kset, double ec, const Scheme& scheme,
                            int n_bands, int threads, SolverKind solver) {
  if (n_bands < 1) throw Error(ErrorCode::InvalidArgument, "n_bands must be >= 1");
  if (kset.size() == 0) throw Error(ErrorCode::InvalidArgument, "empty k-point set");

  // Check every k before doing any work so the error names the first one.
  for (const auto& k : kset.points) {
    const auto m = basis_size(lat, k, ec, scheme.basis_mode());
    if (m < static_cast<std::size_t>(n_bands)) {
      const Vec f = lat.k_to_fractional(k);
      std::string where;
      for (Eigen::Index i = 0; i < f.size(); ++i) {
        where += fmt::format("{}{:.6g}", i ? ", " : "", f[i]);
      }
      throw Error(ErrorCode::BandCountExceedsBasis,
                  fmt::format("{} bands requested but only {} plane waves at k_frac = ({})",
                              n_bands, m, where));
    }
  }

  BandStructure out;
  out.kset = kset;
  out.n_bands = n_bands;
  out.scheme = scheme;
  out.ec = ec;
  out.energies.resize(static_cast<Eigen::Index>(kset.size()), n_bands);
  out.potential_digest = digest(potential_to_json(v));
  out.lattice_digest = digest(lattice_to_json(lat));

  parallel_for(kset.size(), threads, [&](std::size_t i) {
    const auto h = assemble(lat, v, kset.points[i], ec, scheme);
    const auto sol = eigh(h, n_bands, false, solver);
    for (int n = 0; n < n_bands; ++n) out.energies(static_cast<Eigen::Index>(i), n) = sol.values[n];
  });
  return out;
}

std::uint64_t digest(const nlohmann::json& j) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : j.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string bands_to_csv(const Lattice& lat, const BandStructure& bands) {
  const int d = lat.dim();
  std::string out;
  for (int i = 1; i <= d; ++i) out += fmt::format("{}k_frac_{}", i > 1 ? "," : "", i);
  for (int n = 1; n <= bands.n_bands; ++n) out += fmt::format(",band_{}", n);
  out += '\n';
  for (std::size_t r = 0; r < bands.kset.size(); ++r) {
    Vec f = lat.k_to_fractional(bands.kset.points[r]);
    // Grid coordinates are exact multiples of 1/n; drop the round-trip noise.
    if (bands.kset.kind == KSetKind::UniformGrid && bands.kset.grid_n > 0) {
      const double n = bands.kset.grid_n;
      for (int i = 0; i < d; ++i) f[i] = std::round(f[i] * n) / n;
    }
    for (int i = 0; i < d; ++i) out += fmt::format("{}{:.17g}", i ? "," : "", f[i]);
    for (int n = 0; n < bands.n_bands; ++n) {
      out += fmt::format(",{:.17g}", bands.energies(static_cast<Eigen::Index>(r), n));
    }
    out += '\n';
  }
  return out;
}

}  // namespace bandlab
