#include "lpgnn/constraint.hpp"

#include <algorithm>
#include <cmath>

namespace lpgnn {

GVariant g_variant_from_string(std::string_view name) {
  if (name == "lin") return GVariant::Lin;
  if (name == "lin-eps") return GVariant::LinEps;
  if (name == "abs") return GVariant::Abs;
  if (name == "abs-eps") return GVariant::AbsEps;
  if (name == "squared") return GVariant::Squared;
  throw std::invalid_argument("unknown constraint variant: " + std::string(name));
}

std::string_view to_string(GVariant v) {
  switch (v) {
    case GVariant::Lin: return "lin";
    case GVariant::LinEps: return "lin-eps";
    case GVariant::Abs: return "abs";
    case GVariant::AbsEps: return "abs-eps";
    case GVariant::Squared: return "squared";
  }
  return "?";
}

ConstraintFunction::ConstraintFunction(GVariant v, double eps)
    : variant(v), epsilon(eps) {
  if (!(eps >= 0.0)) {
    throw std::invalid_argument("constraint epsilon must be >= 0");
  }
}

double ConstraintFunction::value(double r) const {
  switch (variant) {
    case GVariant::Lin:
      return r;
    case GVariant::LinEps:
      return std::max(r, epsilon) - std::max(-r, epsilon);
    case GVariant::Abs:
      return std::abs(r);
    case GVariant::AbsEps:
      return std::max(std::abs(r) - epsilon, 0.0);
    case GVariant::Squared:
      return r * r;
  }
  return 0.0;
}

double ConstraintFunction::derivative(double r) const {
  switch (variant) {
    case GVariant::Lin:
      return 1.0;
    case GVariant::LinEps:
      return std::abs(r) > epsilon ? 1.0 : 0.0;
    case GVariant::Abs:
      if (r > 0.0) return 1.0;
      if (r < 0.0) return -1.0;
      return 0.0;  // subgradient at the kink
    case GVariant::AbsEps:
      if (r > epsilon) return 1.0;
      if (r < -epsilon) return -1.0;
      return 0.0;
    case GVariant::Squared:
      return 2.0 * r;
  }
  return 0.0;
}

void ConstraintFunction::value(std::span<const double> r,
                               std::span<double> out) const {
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = value(r[i]);
}

void ConstraintFunction::derivative(std::span<const double> r,
                                    std::span<double> out) const {
  for (std::size_t i = 0; i < r.size(); ++i) out[i] = derivative(r[i]);
}

}  // namespace lpgnn
