#include "bandlab/fiber.hpp"

#include <unordered_map>

#include "bandlab/errors.hpp"

namespace bandlab {

std::string_view to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::Uniform: return "uniform";
    case SchemeKind::KDependent: return "kdep";
    case SchemeKind::Modified: return "modified";
  }
  return "?";
}

SchemeKind scheme_kind_from_string(std::string_view name) {
  if (name == "uniform") return SchemeKind::Uniform;
  if (name == "kdep") return SchemeKind::KDependent;
  if (name == "modified") return SchemeKind::Modified;
  throw Error(ErrorCode::InvalidArgument,
              "unknown scheme '" + std::string(name) + "' (uniform, kdep, modified)");
}

Scheme Scheme::modified(const BlowupSpec& spec) {
  return modified(std::make_shared<const BlowupFunction>(spec));
}

Scheme Scheme::modified(std::shared_ptr<const BlowupFunction> g) {
  if (!g) throw Error(ErrorCode::InvalidArgument, "modified scheme needs a blow-up function");
  return {SchemeKind::Modified, std::move(g)};
}

double kinetic(const Scheme& scheme, double q2, double ec) {
  if (scheme.kind != SchemeKind::Modified) return 0.5 * q2;
  const double x2 = q2 / (2.0 * ec);
  if (x2 <= 0.25) return 0.5 * q2;
  return ec * (*scheme.blowup)(std::sqrt(x2));
}

FiberMatrix assemble_on_basis(const Lattice& lat, const FourierPotential& v,
                              const Vec& k, double ec, const Scheme& scheme,
                              std::vector<GIndex> basis) {
  if (basis.empty()) throw Error(ErrorCode::EmptyBasis, "empty plane-wave basis");
  if (!v.real_valued()) {
    throw Error(ErrorCode::InvalidArgument,
                "fiber assembly needs a real-valued potential (Hermitian pairing)");
  }
  if (scheme.kind == SchemeKind::Modified && !scheme.blowup) {
    throw Error(ErrorCode::InvalidArgument, "modified scheme without blow-up function");
  }
  const auto m = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m, m);

  // Only the lower triangle is filled; the upper one is mirrored at the end.
  const auto n_coeffs = v.coeffs().size();
  if (n_coeffs <= basis.size() * basis.size() / 2) {
    std::unordered_map<GIndex, Eigen::Index, GIndexHash> where;
    where.reserve(basis.size());
    for (Eigen::Index i = 0; i < m; ++i) where.emplace(basis[i], i);
    for (const auto& [r, c] : v.coeffs()) {
      for (Eigen::Index j = 0; j < m; ++j) {
        const auto it = where.find(basis[j] + r);
        if (it != where.end() && it->second >= j) h(it->second, j) = c;
      }
    }
  } else {
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index i = j; i < m; ++i) h(i, j) = v.coefficient(basis[i] - basis[j]);
    }
  }

  for (Eigen::Index i = 0; i < m; ++i) {
    const double q2 = (k + lat.g_vector(basis[i])).squaredNorm();
    h(i, i) = h(i, i).real() + kinetic(scheme, q2, ec);
    for (Eigen::Index j = i + 1; j < m; ++j) h(i, j) = std::conj(h(j, i));
  }
  return {k, ec, std::move(basis), std::move(h), scheme};
}

FiberMatrix assemble(const Lattice& lat, const FourierPotential& v, const Vec& k,
                     double ec, const Scheme& scheme) {
  auto basis = enumerate_basis(lat, k, ec, scheme.basis_mode());
  return assemble_on_basis(lat, v, k, ec, scheme, std::move(basis));
}

double project_modified_identity_check(const Lattice& lat, const FourierPotential& v,
                                       const Vec& k, double ec,
                                       const BlowupSpec& spec) {
  const FiberMatrix big = assemble(lat, v, k, 4.0 * ec, Scheme::modified(spec));
  const FiberMatrix small = assemble(lat, v, k, ec, Scheme::kdependent());

  std::unordered_map<GIndex, Eigen::Index, GIndexHash> where;
  for (Eigen::Index i = 0; i < big.dim(); ++i) where.emplace(big.basis[i], i);
  std::vector<Eigen::Index> rows;
  rows.reserve(small.basis.size());
  for (const auto& g : small.basis) rows.push_back(where.at(g));

  double worst = 0.0;
  for (Eigen::Index j = 0; j < small.dim(); ++j) {
    for (Eigen::Index i = 0; i < small.dim(); ++i) {
      worst = std::max(worst, std::abs(big.entries(rows[i], rows[j]) - small.entries(i, j)));
    }
  }
  return worst;
}

nlohmann::json fiber_to_json(const FiberMatrix& h) {
  const int d = static_cast<int>(h.k.size());
  nlohmann::json basis = nlohmann::json::array();
  for (const auto& g : h.basis) basis.push_back(std::vector<int>(g.n.begin(), g.n.begin() + d));
  nlohmann::json re = nlohmann::json::array();
  nlohmann::json im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < h.dim(); ++i) {
    for (Eigen::Index j = 0; j < h.dim(); ++j) {
      re.push_back(h.entries(i, j).real());
      im.push_back(h.entries(i, j).imag());
    }
  }
  return {{"k", std::vector<double>(h.k.data(), h.k.data() + d)},
          {"ec", h.ec},
          {"scheme", to_string(h.scheme.kind)},
          {"basis", basis},
          {"re", re},
          {"im", im}};
}

}  // namespace bandlab
