#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "wavecal/errors.hpp"
#include "wavecal/quadrature.hpp"

namespace wavecal {
namespace {

TEST(GaussHermite, IntegratesNormalMoments) {
  const auto& rule = default_hermite();
  ASSERT_EQ(rule.size(), 64);
  EXPECT_NEAR(rule.weights.sum(), 1.0, 1e-10);
  EXPECT_TRUE((rule.weights.array() > 0.0).all());
  // E[u^2k] = (2k-1)!!
  double double_factorial = 1.0;
  for (int k = 1; k <= 8; ++k) {
    double_factorial *= 2 * k - 1;
    const double moment = (rule.weights.array() * rule.nodes.array().pow(2 * k)).sum();
    EXPECT_NEAR(moment / double_factorial, 1.0, 1e-10) << "k=" << k;
    const double odd = (rule.weights.array() * rule.nodes.array().pow(2 * k - 1)).sum();
    EXPECT_NEAR(odd, 0.0, 1e-9 * double_factorial);
  }
  // E[cos(u)] = exp(-1/2)
  EXPECT_NEAR((rule.weights.array() * rule.nodes.array().cos()).sum(), std::exp(-0.5), 1e-13);
}

TEST(GaussHermite, NodesAreSymmetric) {
  const auto rule = gauss_hermite_normal(17);
  for (Eigen::Index i = 0; i < rule.size(); ++i) {
    EXPECT_EQ(rule.nodes[i], -rule.nodes[rule.size() - 1 - i]);
    EXPECT_EQ(rule.weights[i], rule.weights[rule.size() - 1 - i]);
  }
  EXPECT_EQ(rule.nodes[8], 0.0);
}

TEST(GaussLegendre, ExactForPolynomialsAndMaps) {
  const auto& rule = default_legendre();
  ASSERT_EQ(rule.size(), 128);
  EXPECT_NEAR(rule.weights.sum(), 2.0, 1e-13);
  for (int p = 0; p <= 20; p += 2) {
    const double integral = (rule.weights.array() * rule.nodes.array().pow(p)).sum();
    EXPECT_NEAR(integral, 2.0 / (p + 1), 1e-13) << "p=" << p;
  }
  const auto mapped = map_to_interval(rule, 0.0, std::numbers::pi);
  EXPECT_NEAR((mapped.weights.array() * mapped.nodes.array().sin()).sum(), 2.0, 1e-13);
  EXPECT_THROW(map_to_interval(default_hermite(), 0.0, 1.0), DomainError);
  EXPECT_THROW(gauss_legendre(0), DomainError);
}

}  // namespace
}  // namespace wavecal
