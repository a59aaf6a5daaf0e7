#include "bandlab/potential.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "bandlab/errors.hpp"

namespace bandlab {

namespace {

std::string format_g(const GIndex& g, int d) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < d; ++i) os << (i ? "," : "") << g[i];
  os << ')';
  return os.str();
}

}  // namespace

FourierPotential::FourierPotential(Lattice lattice, CoeffMap coeffs,
                                   bool real_valued)
    : lattice_(std::move(lattice)),
      coeffs_(std::move(coeffs)),
      real_valued_(real_valued) {
  const int d = lattice_.dim();
  for (const auto& [g, c] : coeffs_) {
    for (int i = d; i < 3; ++i) {
      if (g[i] != 0) {
        throw Error(ErrorCode::InvalidArgument,
                    "coefficient index exceeds lattice dimension");
      }
    }
    if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
      throw Error(ErrorCode::InvalidArgument,
                  "non-finite coefficient at G=" + format_g(g, d));
    }
  }
  if (real_valued_) {
    double scale = 0.0;
    for (const auto& [g, c] : coeffs_) scale = std::max(scale, std::abs(c));
    const double tol = 1e-12 * scale;
    std::vector<GIndex> offending;
    std::vector<GIndex> negligible;
    for (auto& [g, c] : coeffs_) {
      const auto partner = coeffs_.find(-g);
      if (partner == coeffs_.end()) {
        (std::abs(c) > tol ? offending : negligible).push_back(g);
        continue;
      }
      if (g < -g) continue;  // the positive member of the pair decides
      if (std::abs(partner->second - std::conj(c)) > tol) {
        offending.push_back(g);
      } else if (g.is_zero()) {
        c = Complex(c.real(), 0.0);
      } else {
        partner->second = std::conj(c);
      }
    }
    for (const auto& g : negligible) coeffs_.erase(g);
    if (!offending.empty()) {
      std::string list;
      for (const auto& g : offending) {
        list += (list.empty() ? "" : " ") + format_g(g, d);
      }
      throw Error(ErrorCode::BrokenHermitianSymmetry,
                  "c(-G) != conj(c(G)) for G in {" + list + "}");
    }
  }
  for (const auto& [g, c] : coeffs_) sup_norm_proxy_ += std::abs(c);
}

Complex FourierPotential::coefficient(const GIndex& g) const {
  const auto it = coeffs_.find(g);
  return it == coeffs_.end() ? Complex{} : it->second;
}

FourierPotential zero_potential(const Lattice& lat) {
  return FourierPotential(lat, {}, true);
}

FourierPotential potential_from_coeffs(
    const Lattice& lat, std::span<const std::pair<GIndex, Complex>> entries,
    bool real_valued) {
  FourierPotential::CoeffMap coeffs;
  for (const auto& [g, c] : entries) coeffs[g] += c;
  return FourierPotential(lat, std::move(coeffs), real_valued);
}

FourierPotential synth_power_law(const Lattice& lat, double t, int gmax,
                                 std::uint64_t seed) {
  const int d = lat.dim();
  if (!(t > 0.5 * d)) {
    throw Error(ErrorCode::InvalidArgument,
                "power-law exponent t must exceed d/2 for a bounded potential");
  }
  if (gmax < 0) throw Error(ErrorCode::InvalidArgument, "gmax must be >= 0");

  std::mt19937_64 engine(seed);
  FourierPotential::CoeffMap coeffs;
  std::array<int, 3> lim{0, 0, 0};
  for (int i = 0; i < d; ++i) lim[i] = gmax;
  // Lexicographic sweep; each +G draws one phase and fixes its -G partner.
  for (int i0 = -lim[0]; i0 <= lim[0]; ++i0) {
    for (int i1 = -lim[1]; i1 <= lim[1]; ++i1) {
      for (int i2 = -lim[2]; i2 <= lim[2]; ++i2) {
        const GIndex g(i0, i1, i2);
        if (!(-g < g)) continue;
        const double u = static_cast<double>(engine() >> 11) * 0x1.0p-53;
        const double theta = 2.0 * std::numbers::pi * u;
        const double amplitude = std::pow(lat.g_vector(g).norm(), -t);
        const Complex c = std::polar(amplitude, theta);
        coeffs[g] = c;
        coeffs[-g] = std::conj(c);
      }
    }
  }
  return FourierPotential(lat, std::move(coeffs), true);
}

Complex evaluate(const FourierPotential& v, const Vec& x) {
  const auto& lat = v.lattice();
  if (x.size() != lat.dim()) {
    throw Error(ErrorCode::InvalidArgument, "x has wrong dimension");
  }
  Complex sum{};
  for (const auto& [g, c] : v.coeffs()) {
    sum += c * std::polar(1.0, lat.g_vector(g).dot(x));
  }
  if (v.real_valued()) return {sum.real(), 0.0};
  return sum;
}

SobolevReport sobolev_norm(const FourierPotential& v, double s) {
  double acc = 0.0;
  for (const auto& [g, c] : v.coeffs()) {
    const double g2 = v.lattice().g_vector(g).squaredNorm();
    acc += std::pow(1.0 + g2, s) * std::norm(c);
  }
  return {s, std::sqrt(acc)};
}

nlohmann::json potential_to_json(const FourierPotential& v) {
  const int d = v.lattice().dim();
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto& [g, c] : v.coeffs()) {
    coeffs.push_back({{"g", std::vector<int>(g.n.begin(), g.n.begin() + d)},
                      {"re", c.real()},
                      {"im", c.imag()}});
  }
  return {{"lattice", lattice_to_json(v.lattice())},
          {"real_valued", v.real_valued()},
          {"coeffs", coeffs}};
}

FourierPotential potential_from_json(const nlohmann::json& j) {
  try {
    const Lattice lat = lattice_from_json(j.at("lattice"));
    const bool real_valued = j.value("real_valued", true);
    std::vector<std::pair<GIndex, Complex>> entries;
    for (const auto& e : j.at("coeffs")) {
      const auto coords = e.at("g").get<std::vector<int>>();
      if (coords.size() != static_cast<std::size_t>(lat.dim())) {
        throw Error(ErrorCode::ParseError, "coefficient index has wrong dimension");
      }
      GIndex g;
      for (std::size_t i = 0; i < coords.size(); ++i) g[i] = coords[i];
      entries.emplace_back(g, Complex(e.at("re").get<double>(),
                                      e.value("im", 0.0)));
    }
    return potential_from_coeffs(lat, entries, real_valued);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("potential: ") + e.what());
  }
}

}  // namespace bandlab
