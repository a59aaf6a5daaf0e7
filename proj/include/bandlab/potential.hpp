#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bandlab/lattice.hpp"

namespace bandlab {

using Complex = std::complex<double>;

/// L-periodic potential held as a truncated Fourier series.
///
/// The stored coefficient for G is the plane-wave matrix element
/// <e_{G'}, V e_G> for G' - G = G, i.e. |Omega|^{-1/2} times the Fourier
/// coefficient of V in the normalized basis e_G = |Omega|^{-1/2} exp(iG.x).
/// With that convention V(x) = sum_G c_G exp(i G.x), and the Hamiltonian
/// assembly reads the stored values directly. Absent keys are zero.
class FourierPotential {
 public:
  using CoeffMap = std::map<GIndex, Complex>;

  /// Validates finiteness and, when `real_valued`, the pairing
  /// c_{-G} = conj(c_G). Pairs that agree to rounding are made exactly
  /// conjugate; anything else throws BrokenHermitianSymmetry.
  FourierPotential(Lattice lattice, CoeffMap coeffs, bool real_valued);

  const Lattice& lattice() const { return lattice_; }
  const CoeffMap& coeffs() const { return coeffs_; }
  bool real_valued() const { return real_valued_; }
  bool empty() const { return coeffs_.empty(); }

  Complex coefficient(const GIndex& g) const;
  /// sum_G |c_G|, a bound on sup |V|.
  double sup_norm_proxy() const { return sup_norm_proxy_; }

 private:
  Lattice lattice_;
  CoeffMap coeffs_;
  bool real_valued_;
  double sup_norm_proxy_ = 0.0;
};

FourierPotential zero_potential(const Lattice& lat);

/// Builds a potential from (G, value) entries; duplicate keys are summed.
FourierPotential potential_from_coeffs(
    const Lattice& lat, std::span<const std::pair<GIndex, Complex>> entries,
    bool real_valued = true);

/// c_G = |G|^{-t} exp(i theta_G) for 0 < shell(G) <= gmax, theta_G drawn from
/// a seeded mt19937_64, c_{-G} = conj(c_G), c_0 = 0. The result lies in
/// H^s_per for every s < t - d/2.
FourierPotential synth_power_law(const Lattice& lat, double t, int gmax,
                                 std::uint64_t seed);

/// V(x) = sum_G c_G exp(i G.x).
Complex evaluate(const FourierPotential& v, const Vec& x);

struct SobolevReport {
  double s = 0.0;
  double norm = 0.0;
};

/// sqrt(sum_G (1 + |G|^2)^s |c_G|^2) with physical |G|.
SobolevReport sobolev_norm(const FourierPotential& v, double s);

nlohmann::json potential_to_json(const FourierPotential& v);
FourierPotential potential_from_json(const nlohmann::json& j);

}  // namespace bandlab
