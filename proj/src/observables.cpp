#include "bandlab/observables.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "bandlab/errors.hpp"

namespace bandlab {

namespace {

void require_grid(const BandStructure& bands) {
  if (bands.kset.kind != KSetKind::UniformGrid) {
    throw Error(ErrorCode::InvalidArgument,
                "Brillouin-zone averages need a uniform k-grid, not a path");
  }
  if (bands.energies.size() == 0) throw Error(ErrorCode::InvalidArgument, "no band data");
}

double heaviside(double x) { return x > 0.0 ? 1.0 : (x == 0.0 ? 0.5 : 0.0); }

template <typename Weight>
QuadratureValue grid_average(const BandStructure& bands, double mu, Weight weight) {
  require_grid(bands);
  const auto& e = bands.energies;
  double acc = 0.0;
  for (Eigen::Index r = 0; r < e.rows(); ++r) {
    for (Eigen::Index n = 0; n < e.cols(); ++n) acc += weight(e(r, n)) * heaviside(mu - e(r, n));
  }
  const bool warn = e.col(e.cols() - 1).minCoeff() <= mu;
  return {acc / static_cast<double>(e.rows()), warn};
}

}  // namespace

QuadratureValue idos(const BandStructure& bands, double mu) {
  return grid_average(bands, mu, [](double) { return 1.0; });
}

QuadratureValue idoe(const BandStructure& bands, double mu) {
  return grid_average(bands, mu, [](double x) { return x; });
}

FermiLevel fermi_level(const BandStructure& bands, double n_electrons) {
  require_grid(bands);
  if (!(n_electrons > 0.0) || !std::isfinite(n_electrons)) {
    throw Error(ErrorCode::InvalidArgument, "electron count must be positive");
  }
  std::vector<double> v(bands.energies.data(), bands.energies.data() + bands.energies.size());
  std::sort(v.begin(), v.end());
  const auto n_k = static_cast<double>(bands.energies.rows());
  const double target = n_electrons * n_k;  // states to fill over the whole grid
  const double total = static_cast<double>(v.size());
  const double rounded = std::round(target);
  const bool integral = rounded >= 1.0 && std::abs(target - rounded) <= 1e-9 * std::max(1.0, target);
  if ((integral ? rounded : target) > total) {
    throw Error(ErrorCode::UnreachableFilling,
                fmt::format("N = {} needs more than the {} computed bands", n_electrons,
                            bands.n_bands));
  }

  FermiLevel out;
  if (integral) {
    const auto c = static_cast<std::size_t>(rounded);
    if (c < v.size() && v[c - 1] < v[c]) {
      // Any mu strictly between the two levels gives exactly N; on a finite
      // grid metals have such intervals too, so only a spectral gap between
      // whole bands is reported as one.
      out.mu = 0.5 * (v[c - 1] + v[c]);
      out.bracket_lo = v[c - 1];
      out.bracket_hi = v[c];
      const double per_k = rounded / n_k;
      const auto m = static_cast<int>(std::lround(per_k));
      if (std::abs(per_k - m) <= 1e-12 && m < bands.n_bands &&
          bands.energies.col(m - 1).maxCoeff() < bands.energies.col(m).minCoeff()) {
        out.gap = GapInfo{v[c - 1], v[c]};
      }
    } else {
      out.mu = out.bracket_lo = out.bracket_hi = v[c - 1];
    }
  } else {
    const auto c = static_cast<std::size_t>(std::ceil(target));
    out.mu = out.bracket_lo = out.bracket_hi = v[c - 1];
  }
  out.truncation_warning = bands.energies.col(bands.n_bands - 1).minCoeff() <= out.mu;
  return out;
}

}  // namespace bandlab
