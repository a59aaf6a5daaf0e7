#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "bandlab/blowup.hpp"
#include "bandlab/lattice.hpp"
#include "bandlab/potential.hpp"

namespace bandlab {

enum class SchemeKind { Uniform, KDependent, Modified };

std::string_view to_string(SchemeKind kind);
/// Accepts "uniform", "kdep", "modified". Throws InvalidArgument.
SchemeKind scheme_kind_from_string(std::string_view name);

struct Scheme {
  SchemeKind kind = SchemeKind::KDependent;
  std::shared_ptr<const BlowupFunction> blowup;  // set iff kind == Modified

  static Scheme uniform() { return {SchemeKind::Uniform, nullptr}; }
  static Scheme kdependent() { return {SchemeKind::KDependent, nullptr}; }
  static Scheme modified(const BlowupSpec& spec);
  static Scheme modified(std::shared_ptr<const BlowupFunction> g);

  BasisMode basis_mode() const {
    return kind == SchemeKind::Uniform ? BasisMode::Uniform : BasisMode::KDependent;
  }
};

struct FiberMatrix {
  Vec k;
  double ec = 0.0;
  std::vector<GIndex> basis;
  Eigen::MatrixXcd entries;
  Scheme scheme;

  Eigen::Index dim() const { return entries.rows(); }
};

/// Diagonal kinetic value for a plane wave with |k+G|^2 = q2. Modified uses
/// Ec G(|k+G| / sqrt(2 Ec)); inside the quadratic region that is returned
/// as q2/2 directly so both schemes agree bit for bit there.
double kinetic(const Scheme& scheme, double q2, double ec);

/// Fiber Hamiltonian on the scheme's plane-wave basis. Throws EmptyBasis,
/// and InvalidArgument for potentials not declared real-valued.
FiberMatrix assemble(const Lattice& lat, const FourierPotential& v, const Vec& k,
                     double ec, const Scheme& scheme);

/// Same entries on a caller-chosen basis. `ec` only enters the kinetic term.
FiberMatrix assemble_on_basis(const Lattice& lat, const FourierPotential& v,
                              const Vec& k, double ec, const Scheme& scheme,
                              std::vector<GIndex> basis);

/// Modified matrix at 4 Ec restricted to {G : |k+G|^2/2 < Ec}, minus the
/// k-dependent matrix at Ec. Returns the largest absolute entry of the
/// difference; the two agree exactly in exact arithmetic.
double project_modified_identity_check(const Lattice& lat, const FourierPotential& v,
                                       const Vec& k, double ec,
                                       const BlowupSpec& spec = {});

/// Basis list plus row-major entries, for debugging.
nlohmann::json fiber_to_json(const FiberMatrix& h);

}  // namespace bandlab
