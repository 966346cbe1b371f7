#pragma once

#include <Eigen/Core>

namespace wavecal {

enum class QuadratureKind {
  /// Integrates f(u) * phi(u) du over the real line, phi the N(0,1) density.
  GaussHermiteStandardNormal,
  /// Integrates f(x) dx over [-1, 1]; map with map_to_interval for other ranges.
  GaussLegendreInterval,
};

/// Fixed node set. For the standard-normal kind the weights sum to one.
struct QuadratureSpec {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
  QuadratureKind kind = QuadratureKind::GaussLegendreInterval;

  Eigen::Index size() const { return nodes.size(); }
};

/// Golub-Welsch nodes followed by Newton polishing on the orthonormal
/// recurrence; weights from the Christoffel function.
QuadratureSpec gauss_hermite_normal(int n);
QuadratureSpec gauss_legendre(int n);

/// Gauss-Legendre rule rescaled to [lo, hi] (nodes and weights).
QuadratureSpec map_to_interval(const QuadratureSpec& reference, double lo, double hi);

/// Shared default rules (64 Hermite nodes, 128 Legendre nodes), built once.
const QuadratureSpec& default_hermite();
const QuadratureSpec& default_legendre();

}  // namespace wavecal
