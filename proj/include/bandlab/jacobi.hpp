#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace bandlab {

/// Cyclic two-sided Jacobi for complex Hermitian matrices.
///
/// Each rotation touches one (p, q) pair, so a row with a huge diagonal entry
/// never mixes its magnitude into the small entries. That keeps absolute
/// eigenvalue errors at the scale of the entries that actually couple to the
/// eigenvector, which Householder tridiagonalization does not do for graded
/// matrices. Rotations are skipped once |a_pq| <= eps sqrt(|a_pp a_qq|).
template <typename Real>
class HermitianJacobi {
 public:
  using Scalar = std::complex<Real>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  HermitianJacobi(Matrix a, bool want_vectors, int max_sweeps = 100)
      : a_(std::move(a)) {
    const Eigen::Index n = a_.rows();
    if (want_vectors) vectors_ = Matrix::Identity(n, n);
    const Real eps = std::numeric_limits<Real>::epsilon();

    Real off = 0;
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index i = 0; i < n; ++i) {
        if (i != j) off += std::norm(a_(i, j));
      }
    }
    const Real floor = eps * eps * std::sqrt(off);

    for (sweeps_ = 0; sweeps_ < max_sweeps; ++sweeps_) {
      int rotations = 0;
      for (Eigen::Index p = 0; p + 1 < n; ++p) {
        for (Eigen::Index q = p + 1; q < n; ++q) {
          const Real mag = std::abs(a_(p, q));
          if (mag <= floor) continue;
          const Real app = std::real(a_(p, p));
          const Real aqq = std::real(a_(q, q));
          if (mag <= eps * std::sqrt(std::abs(app * aqq))) continue;
          rotate(p, q, mag, app, aqq);
          ++rotations;
        }
      }
      if (rotations == 0) {
        converged_ = true;
        break;
      }
    }

    order_.resize(static_cast<std::size_t>(n));
    std::iota(order_.begin(), order_.end(), Eigen::Index{0});
    std::stable_sort(order_.begin(), order_.end(), [&](Eigen::Index i, Eigen::Index j) {
      return std::real(a_(i, i)) < std::real(a_(j, j));
    });
  }

  bool converged() const { return converged_; }
  int sweeps() const { return sweeps_; }

  /// Ascending eigenvalues.
  std::vector<Real> eigenvalues() const {
    std::vector<Real> out;
    out.reserve(order_.size());
    for (auto i : order_) out.push_back(std::real(a_(i, i)));
    return out;
  }

  /// Columns ordered like eigenvalues(); empty unless requested.
  Matrix eigenvectors() const {
    if (!vectors_) return {};
    Matrix out(vectors_->rows(), vectors_->cols());
    for (std::size_t c = 0; c < order_.size(); ++c) {
      out.col(static_cast<Eigen::Index>(c)) = vectors_->col(order_[c]);
    }
    return out;
  }

  /// Largest Gershgorin radius of the final iterate.
  Real offdiagonal_bound() const {
    Real worst = 0;
    for (Eigen::Index i = 0; i < a_.rows(); ++i) {
      Real r = 0;
      for (Eigen::Index j = 0; j < a_.cols(); ++j) {
        if (i != j) r += std::abs(a_(i, j));
      }
      worst = std::max(worst, r);
    }
    return worst;
  }

 private:
  void rotate(Eigen::Index p, Eigen::Index q, Real mag, Real app, Real aqq) {
    const Scalar phase = a_(p, q) / mag;  // a_pq = mag e^{i phi}
    const Real theta = (aqq - app) / (2 * mag);
    const Real t = (theta >= 0 ? Real(1) : Real(-1)) /
                   (std::abs(theta) + std::hypot(theta, Real(1)));
    const Real c = 1 / std::hypot(t, Real(1));
    const Real s = t * c;
    const Scalar sp = s * phase;              // s e^{i phi}
    const Scalar sc = s * std::conj(phase);   // s e^{-i phi}

    for (Eigen::Index k = 0; k < a_.rows(); ++k) {
      if (k == p || k == q) continue;
      const Scalar akp = a_(k, p);
      const Scalar akq = a_(k, q);
      const Scalar nkp = c * akp - sc * akq;
      const Scalar nkq = sp * akp + c * akq;
      a_(k, p) = nkp;
      a_(k, q) = nkq;
      a_(p, k) = std::conj(nkp);
      a_(q, k) = std::conj(nkq);
    }
    a_(p, p) = app - t * mag;
    a_(q, q) = aqq + t * mag;
    a_(p, q) = 0;
    a_(q, p) = 0;

    if (vectors_) {
      auto& v = *vectors_;
      for (Eigen::Index k = 0; k < v.rows(); ++k) {
        const Scalar vkp = v(k, p);
        const Scalar vkq = v(k, q);
        v(k, p) = c * vkp - sc * vkq;
        v(k, q) = sp * vkp + c * vkq;
      }
    }
  }

  Matrix a_;
  std::optional<Matrix> vectors_;
  std::vector<Eigen::Index> order_;
  int sweeps_ = 0;
  bool converged_ = false;
};

}  // namespace bandlab
