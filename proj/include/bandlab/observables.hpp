#pragma once

#include <optional>

#include "bandlab/spectra.hpp"

namespace bandlab {

/// Grid averages use the Heaviside convention H(0) = 1/2: a state exactly at
/// mu counts as half occupied. On symmetric grids this keeps zone-boundary
/// degeneracies from biasing the count by a whole state.
struct QuadratureValue {
  double value = 0.0;
  /// The top computed band reaches mu somewhere, so bands that were not
  /// computed could contribute.
  bool truncation_warning = false;
};

/// N(mu) = sum_n mean_k H(mu - e_n(k)). Requires a uniform grid.
QuadratureValue idos(const BandStructure& bands, double mu);
/// E(mu) = sum_n mean_k e_n(k) H(mu - e_n(k)).
QuadratureValue idoe(const BandStructure& bands, double mu);

struct GapInfo {
  double lower = 0.0;  // highest occupied level
  double upper = 0.0;  // lowest empty level
  double width() const { return upper - lower; }
};

struct FermiLevel {
  double mu = 0.0;
  std::optional<GapInfo> gap;  // set when N fills whole bands below a band gap
  /// Interval of mu on which idos equals N; mu is its midpoint.
  double bracket_lo = 0.0;
  double bracket_hi = 0.0;
  bool truncation_warning = false;
};

/// Solves N(mu) = n_electrons exactly on the sorted list of grid energies.
/// When the filling falls in a gap, mu is the gap midpoint. Throws
/// UnreachableFilling if fewer than n_electrons states were computed.
FermiLevel fermi_level(const BandStructure& bands, double n_electrons);

}  // namespace bandlab
