#include "wavecal/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "wavecal/errors.hpp"

namespace wavecal {
namespace {

// Three-term recurrence of the orthonormal family for a symmetric measure:
//   b_{k+1} p_{k+1}(x) = x p_k(x) - b_k p_{k-1}(x).
// Returns p_n(x) and p_n'(x), and accumulates sum_{k<n} p_k(x)^2.
struct RecurrenceValue {
  double value;
  double derivative;
  double christoffel_sum;
};

template <typename OffDiagonal>
RecurrenceValue evaluate(int n, double x, double p0, OffDiagonal off) {
  double prev = 0.0;
  double cur = p0;
  double dprev = 0.0;
  double dcur = 0.0;
  double sum = 0.0;
  for (int k = 0; k < n; ++k) {
    sum += cur * cur;
    const double b_next = off(k + 1);
    const double b_cur = k == 0 ? 0.0 : off(k);
    const double next = (x * cur - b_cur * prev) / b_next;
    const double dnext = (cur + x * dcur - b_cur * dprev) / b_next;
    prev = cur;
    cur = next;
    dprev = dcur;
    dcur = dnext;
  }
  return {cur, dcur, sum};
}

template <typename OffDiagonal>
QuadratureSpec golub_welsch(int n, double p0, OffDiagonal off, QuadratureKind kind) {
  if (n < 1) {
    throw DomainError("quadrature needs at least one node, got " + std::to_string(n));
  }
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    jacobi(k - 1, k) = jacobi(k, k - 1) = off(k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi, Eigen::EigenvaluesOnly);

  QuadratureSpec rule;
  rule.kind = kind;
  rule.nodes = solver.eigenvalues();
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = rule.nodes[i];
    for (int iter = 0; iter < 3; ++iter) {
      const auto r = evaluate(n, x, p0, off);
      if (r.derivative == 0.0) break;
      x -= r.value / r.derivative;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / evaluate(n, x, p0, off).christoffel_sum;
  }
  // Symmetrize so that mirrored integrands cancel exactly.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[j] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[i] + rule.weights[j]);
    rule.nodes[i] = -x;
    rule.nodes[j] = x;
    rule.weights[i] = rule.weights[j] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

}  // namespace

QuadratureSpec gauss_hermite_normal(int n) {
  // Orthonormal probabilists' Hermite polynomials: b_k = sqrt(k), p_0 = 1.
  QuadratureSpec rule = golub_welsch(
      n, 1.0, [](int k) { return std::sqrt(static_cast<double>(k)); },
      QuadratureKind::GaussHermiteStandardNormal);
  rule.weights /= rule.weights.sum();
  return rule;
}

QuadratureSpec gauss_legendre(int n) {
  // Orthonormal Legendre polynomials on [-1, 1] w.r.t. dx: b_k = k / sqrt(4k^2 - 1).
  return golub_welsch(
      n, 1.0 / std::sqrt(2.0),
      [](int k) {
        const double kk = k;
        return kk / std::sqrt(4.0 * kk * kk - 1.0);
      },
      QuadratureKind::GaussLegendreInterval);
}

QuadratureSpec map_to_interval(const QuadratureSpec& reference, double lo, double hi) {
  if (reference.kind != QuadratureKind::GaussLegendreInterval) {
    throw DomainError("only interval rules can be mapped to [lo, hi]");
  }
  const double half = 0.5 * (hi - lo);
  const double mid = 0.5 * (hi + lo);
  QuadratureSpec rule;
  rule.kind = reference.kind;
  rule.nodes = (reference.nodes.array() * half + mid).matrix();
  rule.weights = reference.weights * half;
  return rule;
}

const QuadratureSpec& default_hermite() {
  static const QuadratureSpec rule = gauss_hermite_normal(64);
  return rule;
}

const QuadratureSpec& default_legendre() {
  static const QuadratureSpec rule = gauss_legendre(128);
  return rule;
}

}  // namespace wavecal
