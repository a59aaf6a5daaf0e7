#include "bandlab/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "bandlab/errors.hpp"
#include "bandlab/jacobi.hpp"

namespace bandlab {

namespace {

constexpr double kErrorFloor = 1e-16;

double mean_abs_band_difference(const BandStructure& a, const BandStructure& b, int band,
                                double shift_a = 0.0, double shift_b = 0.0) {
  double acc = 0.0;
  const Eigen::Index n = band - 1;
  for (Eigen::Index r = 0; r < a.energies.rows(); ++r) {
    acc += std::abs((a.energies(r, n) - shift_a) - (b.energies(r, n) - shift_b));
  }
  return acc / static_cast<double>(a.energies.rows());
}

double upper_half_rate(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t skip = x.size() / 2;
  const std::vector<double> xs(x.begin() + static_cast<std::ptrdiff_t>(skip), x.end());
  const std::vector<double> ys(y.begin() + static_cast<std::ptrdiff_t>(skip), y.end());
  return -loglog_slope(xs, ys);
}

std::vector<double> finite_difference(const std::vector<long double>& y, double h, int order) {
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    const long double d = order == 1 ? (y[i + 1] - y[i - 1]) / (2.0L * h)
                                     : (y[i + 1] - 2.0L * y[i] + y[i - 1]) / (1.0L * h * h);
    out.push_back(static_cast<double>(d));
  }
  return out;
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

long double lowest_extended(const FiberMatrix& h, int band) {
  using J = HermitianJacobi<long double>;
  J jac(h.entries.cast<J::Scalar>(), false);
  if (!jac.converged()) {
    throw Error(ErrorCode::SolverFailure, "extended-precision Jacobi did not converge");
  }
  const auto values = jac.eigenvalues();
  if (static_cast<std::size_t>(band) > values.size()) {
    throw Error(ErrorCode::BandCountExceedsBasis,
                fmt::format("band {} exceeds basis size {}", band, values.size()));
  }
  return values[static_cast<std::size_t>(band - 1)];
}

}  // namespace

Reference make_reference(const Lattice& lat, const FourierPotential& v, const KPointSet& kset,
                         double ec, int n_bands, std::optional<double> n_electrons,
                         int threads) {
  Reference ref{compute_bands(lat, v, kset, ec, Scheme::uniform(), n_bands, threads), {}};
  if (n_electrons) ref.fermi = fermi_level(ref.bands, *n_electrons);
  return ref;
}

double fermi_adjusted_band_error(const Lattice& lat, const FourierPotential& v, double ec,
                                 const Scheme& scheme, const Reference& ref,
                                 double n_electrons, int band, int threads) {
  if (!ref.fermi) throw Error(ErrorCode::GridMismatch, "reference has no Fermi level");
  if (band < 1 || band > ref.bands.n_bands) {
    throw Error(ErrorCode::InvalidArgument, "band index outside the reference bands");
  }
  const auto bands =
      compute_bands(lat, v, ref.bands.kset, ec, scheme, ref.bands.n_bands, threads);
  const auto mu = fermi_level(bands, n_electrons).mu;
  return mean_abs_band_difference(ref.bands, bands, band, ref.fermi->mu, mu);
}

double synth_sobolev_order(double t, int dim) { return t - 0.5 * dim; }

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw Error(ErrorCode::InvalidArgument, "slope fit needs at least two points");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ConvergenceStudy convergence_study(const Lattice& lat, const FourierPotential& v, int band,
                                   const std::vector<double>& ec_ladder, const Scheme& scheme,
                                   const Reference& ref, double r_potential, int threads) {
  if (ec_ladder.size() < 2) throw Error(ErrorCode::InvalidArgument, "ladder needs two cutoffs");
  for (std::size_t i = 1; i < ec_ladder.size(); ++i) {
    if (!(ec_ladder[i] > ec_ladder[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "cutoff ladder must be strictly ascending");
    }
  }
  if (ec_ladder.front() <= 0.0) throw Error(ErrorCode::InvalidArgument, "cutoffs must be positive");
  if (ec_ladder.back() > ref.bands.ec / 8.0) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("largest cutoff {} exceeds reference cutoff {} / 8", ec_ladder.back(),
                            ref.bands.ec));
  }
  if (band < 1 || band > ref.bands.n_bands) {
    throw Error(ErrorCode::InvalidArgument, "band index outside the reference bands");
  }

  ConvergenceStudy s;
  s.ec_ladder = ec_ladder;
  s.band = band;
  s.r_potential = r_potential;
  s.predicted_rate = r_potential + 1.0 - 0.25 * lat.dim();
  for (double ec : ec_ladder) {
    const auto bands = compute_bands(lat, v, ref.bands.kset, ec, scheme, band, threads);
    const double err = mean_abs_band_difference(bands, ref.bands, band);
    const bool clamp = !(err > kErrorFloor);
    s.errors.push_back(clamp ? kErrorFloor : err);
    s.clamped.push_back(clamp);
    s.any_clamped = s.any_clamped || clamp;
  }
  s.fitted_rate = upper_half_rate(s.ec_ladder, s.errors);
  s.full_fit_rate = -loglog_slope(s.ec_ladder, s.errors);
  return s;
}

std::vector<double> band_derivative_trace(const BandStructure& bands, int band, int order) {
  if (order != 1 && order != 2) throw Error(ErrorCode::InvalidArgument, "order must be 1 or 2");
  if (band < 1 || band > bands.n_bands) throw Error(ErrorCode::InvalidArgument, "band out of range");
  const auto& pts = bands.kset.points;
  const std::size_t n = pts.size();
  if (n < 5) throw Error(ErrorCode::TooFewPoints, fmt::format("{} points, need 5", n));
  const double h = (pts[1] - pts[0]).norm();
  for (std::size_t i = 1; i < n; ++i) {
    if (std::abs((pts[i] - pts[i - 1]).norm() - h) > 1e-9 * h) {
      throw Error(ErrorCode::InvalidArgument, "path spacing is not uniform");
    }
  }
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = bands.energies(static_cast<Eigen::Index>(i), band - 1);

  std::vector<double> d(n);
  if (order == 1) {
    d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
    d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  } else {
    const double h2 = h * h;
    d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / h2;
    d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / h2;
    for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / h2;
  }
  return d;
}

namespace {

struct ResolvedLine {
  Vec origin;
  Vec u;
  double t_lo, t_hi, window;
};

ResolvedLine resolve(const Lattice& lat, const ProbeLine& line) {
  const int d = lat.dim();
  ResolvedLine r;
  r.origin = line.origin.size() ? line.origin : Vec(Vec::Zero(d));
  r.u = line.direction.size() ? line.direction : Vec(lat.reciprocal().col(0));
  if (r.origin.size() != d || r.u.size() != d || r.u.norm() == 0.0) {
    throw Error(ErrorCode::InvalidArgument, "probe line has wrong dimension or zero direction");
  }
  r.u.normalize();
  r.t_lo = line.t_lo;
  r.t_hi = line.t_hi;
  if (r.t_lo == r.t_hi) {
    const double half = 0.5 * lat.reciprocal().col(0).norm();
    r.t_lo = -half;
    r.t_hi = half;
  }
  r.window = line.window;
  return r;
}

std::vector<double> change_points(const Lattice& lat, double ec, const ResolvedLine& line) {
  const double mid = 0.5 * (line.t_lo + line.t_hi);
  const double half = 0.5 * (line.t_hi - line.t_lo);
  const Vec centre = line.origin + mid * line.u;
  const double reach = std::sqrt(2.0 * ec) + half;
  const auto candidates =
      enumerate_basis(lat, centre, 0.5 * reach * reach + 1.0, BasisMode::KDependent);
  std::vector<double> out;
  for (const auto& g : candidates) {
    const Vec w = line.origin + lat.g_vector(g);
    const double b = line.u.dot(w);
    const double disc = b * b - (w.squaredNorm() - 2.0 * ec);
    if (disc < 0.0) continue;
    for (double t : {-b - std::sqrt(disc), -b + std::sqrt(disc)}) {
      if (t >= line.t_lo && t < line.t_hi) out.push_back(t);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end(),
                        [](double x, double y) { return std::abs(x - y) <= 1e-12 * (1 + std::abs(x)); }),
            out.end());
  return out;
}

}  // namespace

std::vector<double> basis_change_points(const Lattice& lat, double ec, const ProbeLine& line) {
  return change_points(lat, ec, resolve(lat, line));
}

RegularityProbe regularity_probe(const Lattice& lat, const FourierPotential& v, double ec,
                                 const BlowupSpec& spec, int band, int order,
                                 const std::vector<double>& mesh_widths,
                                 const ProbeLine& line_spec) {
  if (order != 1 && order != 2) throw Error(ErrorCode::InvalidArgument, "order must be 1 or 2");
  if (band < 1) throw Error(ErrorCode::InvalidArgument, "band index is 1-based");
  if (mesh_widths.size() < 3) throw Error(ErrorCode::InvalidArgument, "need at least 3 mesh widths");
  for (std::size_t i = 0; i < mesh_widths.size(); ++i) {
    if (!(mesh_widths[i] > 0.0)) throw Error(ErrorCode::InvalidArgument, "mesh widths must be positive");
    if (i > 0 && mesh_widths[i - 1] < 2.0 * mesh_widths[i] * (1.0 - 1e-12)) {
      throw Error(ErrorCode::InvalidArgument, "mesh widths must descend by a factor >= 2");
    }
  }

  const ResolvedLine line = resolve(lat, line_spec);
  const auto cps = change_points(lat, ec, line);
  if (cps.empty()) {
    throw Error(ErrorCode::NoBasisChangeOnPath,
                fmt::format("no plane wave crosses |k+G|^2 = 2 Ec = {} on the probe line", 2 * ec));
  }
  // Most isolated change point, so the window sees exactly one basis change.
  double t_star = cps.front();
  double clearance = std::numeric_limits<double>::infinity();
  if (cps.size() > 1) {
    clearance = -1.0;
    for (std::size_t i = 0; i < cps.size(); ++i) {
      double c = std::numeric_limits<double>::infinity();
      if (i > 0) c = std::min(c, cps[i] - cps[i - 1]);
      if (i + 1 < cps.size()) c = std::min(c, cps[i + 1] - cps[i]);
      if (c > clearance) {
        clearance = c;
        t_star = cps[i];
      }
    }
  }
  const double window = std::min(line.window, 0.45 * clearance);
  if (window < 2.0 * mesh_widths.front()) {
    throw Error(ErrorCode::InvalidArgument,
                fmt::format("probe window {:.3g} too small for mesh width {:.3g}", window,
                            mesh_widths.front()));
  }

  const Scheme scheme = Scheme::modified(spec);
  const auto k_at = [&](double t) -> Vec { return line.origin + t * line.u; };
  const double eta = 1e-9 * std::max(1.0, std::abs(t_star));
  const auto before = enumerate_basis(lat, k_at(t_star - eta), ec, BasisMode::KDependent);
  const auto after = enumerate_basis(lat, k_at(t_star + eta), ec, BasisMode::KDependent);
  std::vector<GIndex> frozen;
  for (const auto& g : before) {
    if (std::find(after.begin(), after.end(), g) != after.end()) frozen.push_back(g);
  }

  RegularityProbe probe;
  probe.band = band;
  probe.order = order;
  probe.mesh_widths = mesh_widths;
  probe.change_point = t_star;
  probe.window = window;
  for (double h : mesh_widths) {
    const int n = static_cast<int>(std::lround(window / h));
    std::vector<long double> full, split;
    for (int j = -n; j < n; ++j) {
      const Vec k = k_at(t_star + (j + 0.5) * h);
      const long double e = lowest_extended(assemble(lat, v, k, ec, scheme), band);
      const long double e_frozen =
          lowest_extended(assemble_on_basis(lat, v, k, ec, scheme, frozen), band);
      full.push_back(e);
      split.push_back(e - e_frozen);
    }
    probe.peak_magnitudes.push_back(max_abs(finite_difference(split, h, order)));
    probe.raw_peak_magnitudes.push_back(max_abs(finite_difference(full, h, order)));
  }

  const auto& p = probe.peak_magnitudes;
  const std::size_t m = p.size();
  const bool rising = p[m - 3] < p[m - 2] && p[m - 2] < p[m - 1] && p[m - 1] >= 1.5 * p[m - 3];
  probe.verdict = rising ? RegularityVerdict::Unbounded : RegularityVerdict::Bounded;
  return probe;
}

std::vector<PeriodicityRow> periodicity_report(const Lattice& lat, const FourierPotential& v,
                                               double ec, const std::vector<Scheme>& schemes,
                                               const std::vector<Vec>& k_samples,
                                               const std::vector<GIndex>& shifts, int n_bands) {
  std::vector<PeriodicityRow> rows;
  for (const auto& scheme : schemes) {
    PeriodicityRow row;
    row.scheme = scheme.kind;
    for (const auto& k : k_samples) {
      const auto base = eigh(assemble(lat, v, k, ec, scheme), n_bands).values;
      for (const auto& g : shifts) {
        const Vec ks = k + lat.g_vector(g);
        const auto moved = eigh(assemble(lat, v, ks, ec, scheme), n_bands).values;
        for (int n = 0; n < n_bands; ++n) {
          const double dev = std::abs(base[n] - moved[n]);
          if (dev > row.max_violation || row.worst_k.size() == 0) {
            row.max_violation = std::max(row.max_violation, dev);
            row.worst_k = k;
            row.worst_shift = g;
          }
        }
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

double max_second_difference(const std::vector<double>& y) {
  double m = 0.0;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    m = std::max(m, std::abs(y[i + 1] - 2.0 * y[i] + y[i - 1]));
  }
  return m;
}

CellScan energy_vs_cell_parameter(const std::function<Lattice(double)>& lat_family,
                                  const std::function<FourierPotential(const Lattice&)>& v_family,
                                  double ec, const std::vector<Scheme>& schemes,
                                  const std::vector<double>& a_ladder, double n_electrons,
                                  int grid_n, int n_bands, int threads) {
  CellScan scan;
  scan.a_ladder = a_ladder;
  for (const auto& s : schemes) scan.columns.push_back({s.kind, {}, {}, 0.0});
  std::vector<std::size_t> previous;
  for (double a : a_ladder) {
    const Lattice lat = lat_family(a);
    const FourierPotential v = v_family(lat);
    const KPointSet grid = uniform_grid(lat, grid_n);

    std::vector<std::size_t> sizes;
    for (const auto& k : grid.points) sizes.push_back(basis_size(lat, k, ec, BasisMode::KDependent));
    if (!previous.empty()) scan.cardinality_changes.push_back(sizes != previous);
    previous = std::move(sizes);

    for (std::size_t c = 0; c < schemes.size(); ++c) {
      const auto bands = compute_bands(lat, v, grid, ec, schemes[c], n_bands, threads);
      const auto fermi = fermi_level(bands, n_electrons);
      scan.columns[c].fermi_level.push_back(fermi.mu);
      scan.columns[c].energy_per_volume.push_back(idoe(bands, fermi.mu).value /
                                                  lat.cell_volume());
    }
  }
  for (auto& col : scan.columns) col.max_second_difference = max_second_difference(col.energy_per_volume);
  return scan;
}

nlohmann::json to_json(const ConvergenceStudy& s) {
  return {{"band", s.band},
          {"ec_ladder", s.ec_ladder},
          {"errors", s.errors},
          {"clamped", s.clamped},
          {"any_clamped", s.any_clamped},
          {"fitted_rate", s.fitted_rate},
          {"full_fit_rate", s.full_fit_rate},
          {"r_potential", s.r_potential},
          {"predicted_rate", s.predicted_rate}};
}

nlohmann::json to_json(const RegularityProbe& p) {
  return {{"band", p.band},
          {"derivative_order", p.order},
          {"mesh_widths", p.mesh_widths},
          {"peak_magnitudes", p.peak_magnitudes},
          {"raw_peak_magnitudes", p.raw_peak_magnitudes},
          {"verdict", p.verdict == RegularityVerdict::Bounded ? "BoundedDerivative"
                                                              : "UnboundedDerivative"},
          {"change_point", p.change_point},
          {"window", p.window}};
}

nlohmann::json to_json(const CellScan& s) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : s.columns) {
    cols.push_back({{"scheme", to_string(c.scheme)},
                    {"energy_per_volume", c.energy_per_volume},
                    {"fermi_level", c.fermi_level},
                    {"max_second_difference", c.max_second_difference}});
  }
  return {{"a_ladder", s.a_ladder}, {"columns", cols}, {"cardinality_changes", s.cardinality_changes}};
}

}  // namespace bandlab
