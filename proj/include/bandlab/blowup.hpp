#pragma once

#include <optional>
#include <span>
#include <vector>

#include <json.hpp>

namespace bandlab {

/// Parameters of a blow-up function: x^2 on [0, 1/2] and [1, inf), a
/// polynomial bridge on [1/2, a], and the tail C (1 - x)^{-p} on [a, 1).
struct BlowupSpec {
  int m = 1;            ///< target regularity class, requires p > m
  double p = 1.5;       ///< singularity order of the tail
  std::optional<double> c;  ///< tail constant; unset picks the smallest of 1, 2, 4, ... that dominates x^2
  double a = 0.75;      ///< bridge/tail junction, in (1/2, 1)
  std::optional<int> msmooth;  ///< derivative matching order at 1/2 and a, >= m (defaults to m)

  int smoothness() const { return msmooth.value_or(m); }
};

struct BlowupValidation {
  int samples = 0;
  double min_domination_margin = 0.0;  ///< min over samples of G(x) - x^2 on (1/2, 1)
  double max_junction_mismatch = 0.0;  ///< relative, over orders 0..msmooth at 1/2 and a
};

class BlowupFunction {
 public:
  /// Builds and validates; throws IllPosedSpec or DominationViolated.
  explicit BlowupFunction(const BlowupSpec& spec);

  /// Throws SingularArgument at |x| = 1.
  double operator()(double x) const;
  /// Analytic derivative of the active piece. At the junctions the pieces
  /// agree up to order msmooth, so either side is returned. Throws
  /// OrderTooHigh for order > msmooth.
  double derivative(double x, int order) const;

  /// Spec with the tail constant resolved.
  const BlowupSpec& spec() const { return spec_; }
  double tail_constant() const { return *spec_.c; }
  /// Bridge coefficients in the variable t = (x - 1/2) / (a - 1/2).
  std::span<const double> bridge_coefficients() const { return bridge_; }
  const BlowupValidation& validation() const { return validation_; }

 private:
  double bridge_derivative(double x, int order) const;
  double tail_derivative(double x, int order) const;
  double piece_derivative(double ax, int order) const;

  BlowupSpec spec_;
  std::vector<double> bridge_;
  BlowupValidation validation_;
};

BlowupFunction build_blowup(const BlowupSpec& spec);

nlohmann::json blowup_spec_to_json(const BlowupSpec& spec);
BlowupSpec blowup_spec_from_json(const nlohmann::json& j);

}  // namespace bandlab
