#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <json.hpp>

#include "bandlab/observables.hpp"
#include "bandlab/spectra.hpp"

namespace bandlab {

/// Large-cutoff uniform-basis solve on a fixed k-set, plus its Fermi level
/// when the set is a grid.
struct Reference {
  BandStructure bands;
  std::optional<FermiLevel> fermi;
};

Reference make_reference(const Lattice& lat, const FourierPotential& v, const KPointSet& kset,
                         double ec, int n_bands, std::optional<double> n_electrons = {},
                         int threads = 1);

/// mean_k |(e_n^ref - mu_ref) - (e_n - mu)| on the reference grid, with
/// both Fermi levels taken at the same filling. `band` is 1-based. Throws
/// GridMismatch if the reference does not carry a Fermi level.
double fermi_adjusted_band_error(const Lattice& lat, const FourierPotential& v, double ec,
                                 const Scheme& scheme, const Reference& ref,
                                 double n_electrons, int band = 1, int threads = 1);

struct ConvergenceStudy {
  std::vector<double> ec_ladder;
  std::vector<double> errors;  // mean_k |e_n^Ec - e_n^ref|, clamped below at 1e-16
  std::vector<bool> clamped;
  bool any_clamped = false;
  double fitted_rate = 0.0;    ///< -slope of log error vs log Ec, upper half of the ladder
  double full_fit_rate = 0.0;  ///< same over the whole ladder
  double r_potential = 0.0;
  double predicted_rate = 0.0;  ///< r + 1 - d/4
  int band = 1;
};

/// Errors are taken on the reference's k-set. Pre: ladder strictly
/// ascending with max <= ref cutoff / 8. Throws InvalidArgument.
ConvergenceStudy convergence_study(const Lattice& lat, const FourierPotential& v, int band,
                                   const std::vector<double>& ec_ladder, const Scheme& scheme,
                                   const Reference& ref, double r_potential, int threads = 1);

/// Sobolev order of synth_power_law(t): V lies in H^s for all s < t - d/2.
double synth_sobolev_order(double t, int dim);

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Finite-difference derivative of a band along a uniformly spaced path,
/// second-order everywhere (one-sided at the ends). Throws TooFewPoints
/// below 5 samples and InvalidArgument for uneven spacing.
std::vector<double> band_derivative_trace(const BandStructure& bands, int band, int order);

enum class RegularityVerdict { Bounded, Unbounded };

struct RegularityProbe {
  int band = 1;
  int order = 1;
  std::vector<double> mesh_widths;
  std::vector<double> peak_magnitudes;      // of the split-off singular part
  std::vector<double> raw_peak_magnitudes;  // of the band itself
  RegularityVerdict verdict = RegularityVerdict::Bounded;
  double change_point = 0.0;  // line parameter of the probed basis change
  double window = 0.0;
};

struct ProbeLine {
  Vec origin;     // Cartesian; empty means the zone centre
  Vec direction;  // empty means b_1
  double t_lo = 0.0, t_hi = 0.0;  // equal means one reciprocal period around the origin
  double window = 0.04;
};

/// Line parameters t where |origin + t u + G|^2 = 2 Ec for some G, sorted.
std::vector<double> basis_change_points(const Lattice& lat, double ec, const ProbeLine& line);

/// Samples the modified band at t* + (j + 1/2) Delta, |j| Delta < window,
/// around the most isolated basis change t*. The band is split as
/// e~_n = e^_n + delta, where e^_n uses the fixed basis on which no plane
/// wave enters or leaves; e^_n is smooth through t*, so the peaks of the
/// finite-difference derivative of delta track the singular behaviour
/// alone. Both parts are solved in extended precision. Verdict is
/// Unbounded iff the peaks rise strictly over the three finest meshes by a
/// cumulative factor of at least 1.5. Throws NoBasisChangeOnPath.
RegularityProbe regularity_probe(const Lattice& lat, const FourierPotential& v, double ec,
                                 const BlowupSpec& spec, int band, int order,
                                 const std::vector<double>& mesh_widths,
                                 const ProbeLine& line = {});

struct PeriodicityRow {
  SchemeKind scheme = SchemeKind::KDependent;
  double max_violation = 0.0;
  Vec worst_k;
  GIndex worst_shift;
};

/// max over samples, shifts and the lowest n_bands of |e_n(k) - e_n(k+G)|.
std::vector<PeriodicityRow> periodicity_report(const Lattice& lat, const FourierPotential& v,
                                               double ec, const std::vector<Scheme>& schemes,
                                               const std::vector<Vec>& k_samples,
                                               const std::vector<GIndex>& shifts,
                                               int n_bands = 1);

struct CellScanColumn {
  SchemeKind scheme = SchemeKind::KDependent;
  std::vector<double> energy_per_volume;  // E(mu_F) / |Omega|
  std::vector<double> fermi_level;
  double max_second_difference = 0.0;
};

struct CellScan {
  std::vector<double> a_ladder;
  std::vector<CellScanColumn> columns;
  /// Per interval [a_i, a_{i+1}]: some M_Ec(k) on the grid differs.
  std::vector<bool> cardinality_changes;
};

/// Total band energy per unit volume as a function of the lattice parameter,
/// on a uniform grid with fixed fractional coordinates.
CellScan energy_vs_cell_parameter(const std::function<Lattice(double)>& lat_family,
                                  const std::function<FourierPotential(const Lattice&)>& v_family,
                                  double ec, const std::vector<Scheme>& schemes,
                                  const std::vector<double>& a_ladder, double n_electrons,
                                  int grid_n, int n_bands, int threads = 1);

/// max_i |y_{i+1} - 2 y_i + y_{i-1}|.
double max_second_difference(const std::vector<double>& y);

nlohmann::json to_json(const ConvergenceStudy& s);
nlohmann::json to_json(const RegularityProbe& p);
nlohmann::json to_json(const CellScan& s);

}  // namespace bandlab
