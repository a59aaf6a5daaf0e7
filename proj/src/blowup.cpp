#include "bandlab/blowup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "bandlab/errors.hpp"

namespace bandlab {

namespace {

constexpr int kMaxSmoothness = 10;
constexpr int kDominationSamples = 10000;
// G(x) - x^2 is O((x - 1/2)^{msmooth+1}) next to 1/2, so only rounding-level
// negatives are tolerated there.
constexpr double kDominationSlack = 1e-14;

double falling_factorial(int i, int j) {
  double r = 1.0;
  for (int s = 0; s < j; ++s) r *= i - s;
  return r;
}

double quadratic_derivative(double x, int order) {
  switch (order) {
    case 0: return x * x;
    case 1: return 2.0 * x;
    case 2: return 2.0;
    default: return 0.0;
  }
}

void check_spec(const BlowupSpec& s) {
  if (s.m < 0) throw Error(ErrorCode::IllPosedSpec, "m must be >= 0");
  if (!(s.p > s.m)) {
    throw Error(ErrorCode::IllPosedSpec,
                "singularity order p = " + std::to_string(s.p) +
                    " must exceed m = " + std::to_string(s.m));
  }
  if (!(s.a > 0.5 && s.a < 1.0)) {
    throw Error(ErrorCode::IllPosedSpec, "junction a must lie in (1/2, 1)");
  }
  if (s.c && !(*s.c > 0.0 && std::isfinite(*s.c))) {
    throw Error(ErrorCode::IllPosedSpec, "tail constant C must be positive");
  }
  if (s.smoothness() < s.m || s.smoothness() > kMaxSmoothness) {
    throw Error(ErrorCode::IllPosedSpec,
                "msmooth must lie in [m, " + std::to_string(kMaxSmoothness) + "]");
  }
}

}  // namespace

BlowupFunction::BlowupFunction(const BlowupSpec& spec) : spec_(spec) {
  check_spec(spec_);
  const int q = spec_.smoothness();
  const int n = 2 * q + 2;
  const double h = spec_.a - 0.5;

  auto try_constant = [&](double c) -> bool {
    spec_.c = c;
    // Hermite conditions in t = (x - 1/2)/h on [0, 1]; the j-th t-derivative
    // carries a factor h^j.
    using LMat = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    using LVec = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
    LMat sys = LMat::Zero(n, n);
    LVec rhs(n);
    for (int j = 0; j <= q; ++j) {
      sys(j, j) = falling_factorial(j, j);
      rhs(j) = quadratic_derivative(0.5, j) * std::pow(h, j);
      for (int i = j; i < n; ++i) sys(q + 1 + j, i) = falling_factorial(i, j);
      rhs(q + 1 + j) = tail_derivative(spec_.a, j) * std::pow(h, j);
    }
    const LVec sol = sys.fullPivLu().solve(rhs);
    bridge_.assign(n, 0.0);
    for (int i = 0; i < n; ++i) bridge_[i] = static_cast<double>(sol(i));

    validation_ = {};
    validation_.samples = kDominationSamples;
    validation_.min_domination_margin = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= kDominationSamples; ++i) {
      const double x = 0.5 + 0.5 * i / (kDominationSamples + 1.0);
      const double margin = (*this)(x)-x * x;
      validation_.min_domination_margin =
          std::min(validation_.min_domination_margin, margin);
    }
    return validation_.min_domination_margin >= -kDominationSlack;
  };

  bool ok = false;
  if (spec.c) {
    ok = try_constant(*spec.c);
  } else {
    for (int e = 0; e <= 30 && !ok; ++e) ok = try_constant(std::ldexp(1.0, e));
  }
  if (!ok) {
    throw Error(ErrorCode::DominationViolated,
                "bridge dips below x^2 (margin " +
                    std::to_string(validation_.min_domination_margin) +
                    "); raise C or move a");
  }

  for (int j = 0; j <= q; ++j) {
    const double at_half[2] = {quadratic_derivative(0.5, j), bridge_derivative(0.5, j)};
    const double at_a[2] = {bridge_derivative(spec_.a, j), tail_derivative(spec_.a, j)};
    for (const auto* pair : {at_half, at_a}) {
      const double scale = std::max({1.0, std::abs(pair[0]), std::abs(pair[1])});
      validation_.max_junction_mismatch = std::max(
          validation_.max_junction_mismatch, std::abs(pair[0] - pair[1]) / scale);
    }
  }
  if (validation_.max_junction_mismatch > 1e-6) {
    throw Error(ErrorCode::IllPosedSpec,
                "bridge interpolation is ill-conditioned for this spec");
  }
}

double BlowupFunction::bridge_derivative(double x, int order) const {
  const double h = spec_.a - 0.5;
  const double t = (x - 0.5) / h;
  const int n = static_cast<int>(bridge_.size());
  double acc = 0.0;
  for (int i = n - 1; i >= order; --i) {
    acc = acc * t + falling_factorial(i, order) * bridge_[i];
  }
  return acc / std::pow(h, order);
}

double BlowupFunction::tail_derivative(double x, int order) const {
  double coeff = *spec_.c;
  for (int s = 0; s < order; ++s) coeff *= spec_.p + s;
  return coeff * std::pow(1.0 - x, -spec_.p - order);
}

double BlowupFunction::piece_derivative(double ax, int order) const {
  if (ax <= 0.5 || ax > 1.0) return quadratic_derivative(ax, order);
  if (ax < spec_.a) return bridge_derivative(ax, order);
  return tail_derivative(ax, order);
}

double BlowupFunction::operator()(double x) const {
  const double ax = std::abs(x);
  if (ax == 1.0) {
    throw Error(ErrorCode::SingularArgument, "blow-up function is singular at |x| = 1");
  }
  return piece_derivative(ax, 0);
}

double BlowupFunction::derivative(double x, int order) const {
  if (order < 0) throw Error(ErrorCode::InvalidArgument, "negative derivative order");
  if (order > spec_.smoothness()) {
    throw Error(ErrorCode::OrderTooHigh,
                "derivative order " + std::to_string(order) + " exceeds smoothness " +
                    std::to_string(spec_.smoothness()));
  }
  const double ax = std::abs(x);
  if (ax == 1.0) {
    throw Error(ErrorCode::SingularArgument, "blow-up function is singular at |x| = 1");
  }
  const double value = piece_derivative(ax, order);
  return (x < 0.0 && order % 2 == 1) ? -value : value;
}

BlowupFunction build_blowup(const BlowupSpec& spec) { return BlowupFunction(spec); }

nlohmann::json blowup_spec_to_json(const BlowupSpec& spec) {
  nlohmann::json j{{"m", spec.m}, {"p", spec.p}, {"a", spec.a},
                   {"msmooth", spec.smoothness()}};
  if (spec.c) j["C"] = *spec.c;
  return j;
}

BlowupSpec blowup_spec_from_json(const nlohmann::json& j) {
  try {
    BlowupSpec s;
    s.m = j.value("m", s.m);
    s.p = j.value("p", s.p);
    s.a = j.value("a", s.a);
    if (j.contains("C") && !j.at("C").is_null()) s.c = j.at("C").get<double>();
    if (j.contains("msmooth") && !j.at("msmooth").is_null()) {
      s.msmooth = j.at("msmooth").get<int>();
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("blowup spec: ") + e.what());
  }
}

}  // namespace bandlab
