#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace lpgnn {

// Shaping function applied element-wise to the state residual x_v - f_a(v).
// Every variant satisfies G(0) = 0, so a satisfied constraint contributes
// nothing regardless of the multipliers.
//
//   lin       r
//   lin-eps   max(r, eps) - max(-r, eps)       bilateral, dead zone [-eps, eps]
//   abs       |r|                              unilateral
//   abs-eps   max(|r| - eps, 0)                unilateral, dead zone
//   squared   r^2                              unilateral, smooth
enum class GVariant { Lin, LinEps, Abs, AbsEps, Squared };

GVariant g_variant_from_string(std::string_view name);  // throws on unknown
std::string_view to_string(GVariant v);

struct ConstraintFunction {
  GVariant variant = GVariant::Abs;
  double epsilon = 0.0;  // tolerance band half-width; ignored by lin/abs/squared

  ConstraintFunction() = default;
  ConstraintFunction(GVariant v, double eps);

  double value(double r) const;

  // Element-wise first derivative with subgradient 0 at the kinks
  // (r = 0 for abs, |r| = eps for the eps-insensitive variants).
  double derivative(double r) const;

  void value(std::span<const double> r, std::span<double> out) const;
  void derivative(std::span<const double> r, std::span<double> out) const;

  bool unilateral() const {
    return variant == GVariant::Abs || variant == GVariant::AbsEps ||
           variant == GVariant::Squared;
  }
  bool eps_insensitive() const {
    return variant == GVariant::LinEps || variant == GVariant::AbsEps;
  }
};

}  // namespace lpgnn
