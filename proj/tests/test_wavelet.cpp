#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "wavecal/wavelet.hpp"

namespace wavecal {
namespace {

Eigen::VectorXd random_signal(Eigen::Index n, std::mt19937_64& gen) {
  std::normal_distribution<double> dist;
  Eigen::VectorXd x(n);
  for (auto& v : x) v = dist(gen);
  return x;
}

TEST(MakeFilter, HaarIsForced) {
  const auto f = make_filter(WaveletFamily::Daubechies, 1);
  ASSERT_EQ(f.length(), 2);
  EXPECT_DOUBLE_EQ(f.low_pass[0], 1.0 / std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(f.low_pass[1], 1.0 / std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(f.high_pass[0], f.low_pass[1]);
  EXPECT_DOUBLE_EQ(f.high_pass[1], -f.low_pass[0]);
}

TEST(MakeFilter, TabulatedDaubechiesSatisfyInvariants) {
  for (int v = 1; v <= 10; ++v) {
    const auto f = make_filter(WaveletFamily::Daubechies, v);
    ASSERT_EQ(f.length(), 2 * v);
    EXPECT_NEAR(f.low_pass.sum(), std::sqrt(2.0), 1e-12) << "V=" << v;
    for (Eigen::Index shift = 0; 2 * shift < f.length(); ++shift) {
      double dot = 0.0;
      for (Eigen::Index n = 0; n + 2 * shift < f.length(); ++n) {
        dot += f.low_pass[n] * f.low_pass[n + 2 * shift];
      }
      EXPECT_NEAR(dot, shift == 0 ? 1.0 : 0.0, 1e-12) << "V=" << v << " k=" << shift;
    }
    // High-pass annihilates polynomials of degree < V.
    for (int p = 0; p < v; ++p) {
      double moment = 0.0;
      double scale = 0.0;
      for (Eigen::Index n = 0; n < f.length(); ++n) {
        const double t = std::pow(static_cast<double>(n), p);
        moment += f.high_pass[n] * t;
        scale += std::abs(f.high_pass[n]) * t;
      }
      EXPECT_LT(std::abs(moment), 1e-12 * scale) << "V=" << v << " p=" << p;
    }
  }
}

TEST(MakeFilter, Daubechies10MatchesPublishedLeadingTap) {
  const auto f = make_filter(WaveletFamily::Daubechies, 10);
  ASSERT_EQ(f.length(), 20);
  EXPECT_NEAR(f.low_pass[0], 0.026670057900555553, 1e-15);
  EXPECT_NEAR(f.low_pass[19], -0.000013264202894521244, 1e-18);
  EXPECT_NEAR(f.low_pass.sum(), std::sqrt(2.0), 1e-12);
}

TEST(MakeFilter, RejectsUnsupportedMomentCounts) {
  EXPECT_THROW(make_filter(WaveletFamily::Daubechies, 11), UnsupportedFilterError);
  EXPECT_THROW(make_filter(WaveletFamily::Daubechies, 0), UnsupportedFilterError);
}

TEST(Dwt, ConstantSignalHasOnlyCoarseEnergy) {
  for (int v : {1, 2, 4, 10}) {
    const auto f = make_filter(WaveletFamily::Daubechies, v);
    const double c = 2.5;
    const Eigen::VectorXd x = Eigen::VectorXd::Constant(64, c);
    const auto pyr = dwt(x, f, 0);
    ASSERT_EQ(pyr.coarse().size(), 1);
    EXPECT_NEAR(pyr.coarse()[0], c * std::sqrt(64.0), 1e-10);
    EXPECT_LT(pyr.details().cwiseAbs().maxCoeff(), 1e-10) << "V=" << v;
  }
}

TEST(Dwt, RoundTripAndParseval) {
  std::mt19937_64 gen(7);
  for (int v : {1, 3, 10}) {
    const auto f = make_filter(WaveletFamily::Daubechies, v);
    for (Eigen::Index n : {2, 16, 64, 512}) {
      for (int j0 = 0; j0 < dyadic_depth(n); j0 += 2) {
        const Eigen::VectorXd x = random_signal(n, gen);
        const auto pyr = dwt(x, f, j0);
        EXPECT_NEAR(pyr.flat().norm(), x.norm(), 1e-8 * x.norm());
        EXPECT_LT((idwt(pyr, f) - x).cwiseAbs().maxCoeff(), 1e-8);
      }
    }
  }
}

TEST(Idwt, ZeroAndConstantPyramids) {
  const auto f = make_filter(WaveletFamily::Daubechies, 4);
  Pyramid<double> zero(8, 3);
  EXPECT_EQ(idwt(zero, f).cwiseAbs().maxCoeff(), 0.0);

  Pyramid<double> level(8, 0);
  level.coarse()[0] = std::sqrt(256.0) * -1.5;
  const Eigen::VectorXd x = idwt(level, f);
  EXPECT_LT((x.array() + 1.5).abs().maxCoeff(), 1e-10);
}

TEST(Idwt, RandomPyramidIsTwoSidedInverse) {
  std::mt19937_64 gen(11);
  const auto f = make_filter(WaveletFamily::Daubechies, 10);
  const Pyramid<double> p(random_signal(1024, gen), 3);
  const auto back = dwt(idwt(p, f), f, 3);
  EXPECT_LT((back.flat() - p.flat()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Dwt, RejectsNonDyadicLengthAndBadLevels) {
  const auto f = make_filter(WaveletFamily::Daubechies, 2);
  EXPECT_THROW(dwt(Eigen::VectorXd::Ones(48), f, 2), DimensionError);
  EXPECT_THROW(dwt(Eigen::VectorXd::Ones(16), f, 4), DimensionError);
  EXPECT_THROW(dwt(Eigen::VectorXd::Ones(16), f, -1), DimensionError);
  EXPECT_THROW(Pyramid<double>(Eigen::VectorXd::Ones(12), 1), DimensionError);
  WaveletFilter<double> broken = f;
  broken.low_pass.resize(3);
  broken.high_pass.resize(3);
  EXPECT_THROW(idwt(Pyramid<double>(4, 1), broken), DimensionError);
}

TEST(Pyramid, LayoutMatchesLevels) {
  Pyramid<double> p(6, 2);
  EXPECT_EQ(p.size(), 64);
  EXPECT_EQ(p.coarse().size(), 4);
  for (int j = 2; j < 6; ++j) EXPECT_EQ(p.detail(j).size(), Eigen::Index{1} << j);
  EXPECT_EQ(p.details().size(), 60);
  EXPECT_EQ(p.finest().size(), 32);
  EXPECT_THROW(p.detail(1), DomainError);
  EXPECT_THROW(p.detail(6), DomainError);
}

TEST(Dwt, HaarMatchesScalarButterfly) {
  std::mt19937_64 gen(3);
  const auto f = make_filter(WaveletFamily::Daubechies, 1);
  for (int j0 : {0, 2, 5}) {
    const Eigen::VectorXd x = random_signal(128, gen);
    const auto expected = oracle::haar_dwt(std::vector<double>(x.data(), x.data() + x.size()), j0);
    const auto got = dwt(x, f, j0);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      EXPECT_NEAR(got.flat()[i], expected[static_cast<std::size_t>(i)], 1e-12);
    }
  }
}

TEST(Dwt, Linearity) {
  std::mt19937_64 gen(5);
  const auto f = make_filter(WaveletFamily::Daubechies, 6);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::VectorXd x = random_signal(256, gen);
    const Eigen::VectorXd z = random_signal(256, gen);
    const double a = 1.7;
    const double b = -0.3;
    const Eigen::VectorXd lhs = dwt((a * x + b * z).eval(), f, 3).flat();
    const Eigen::VectorXd rhs = a * dwt(x, f, 3).flat() + b * dwt(z, f, 3).flat();
    EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Dwt, VanishingMomentsKillInteriorPolynomialDetails) {
  const Eigen::Index n = 512;
  for (int v : {2, 4, 10}) {
    const auto f = make_filter(WaveletFamily::Daubechies, v);
    for (int degree = 0; degree < v; ++degree) {
      Eigen::VectorXd x(n);
      for (Eigen::Index m = 0; m < n; ++m) {
        x[m] = std::pow(static_cast<double>(m + 1) / static_cast<double>(n), degree);
      }
      const auto pyr = dwt(x, f, 3);
      // Only the finest level: its coefficients k with 2k + 2V - 1 < n use
      // unwrapped samples.
      const auto finest = pyr.finest();
      for (Eigen::Index k = 0; 2 * k + f.length() - 1 < n; ++k) {
        EXPECT_LT(std::abs(finest[k]), 1e-6) << "V=" << v << " degree=" << degree << " k=" << k;
      }
    }
  }
}

TEST(TransformColumns, MatchesPerColumnTransforms) {
  std::mt19937_64 gen(9);
  const auto f = make_filter(WaveletFamily::Daubechies, 10);
  Eigen::MatrixXd a(256, 5);
  for (Eigen::Index c = 0; c < a.cols(); ++c) a.col(c) = random_signal(256, gen);

  const Eigen::MatrixXd d = transform_columns(a, f, 3, Direction::Forward);
  for (Eigen::Index c = 0; c < a.cols(); ++c) {
    EXPECT_EQ(d.col(c), dwt(a.col(c), f, 3).flat());
  }
  EXPECT_NEAR(d.norm(), a.norm(), 1e-8 * a.norm());
  const Eigen::MatrixXd back = transform_columns(d, f, 3, Direction::Inverse);
  EXPECT_LT((back - a).cwiseAbs().maxCoeff(), 1e-8);

  const Eigen::MatrixXd single = transform_columns(a.col(0), f, 3, Direction::Forward);
  EXPECT_EQ(single.col(0), d.col(0));
  EXPECT_THROW(transform_columns(Eigen::MatrixXd::Ones(100, 2), f, 3, Direction::Forward),
               DimensionError);
}

TEST(Dwt, LongDoubleInstantiation) {
  const auto f = make_filter<long double>(WaveletFamily::Daubechies, 4);
  Eigen::Matrix<long double, Eigen::Dynamic, 1> x(32);
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = std::sin(static_cast<long double>(i));
  const auto p = dwt(x, f, 1);
  EXPECT_LT(static_cast<double>((idwt(p, f) - x).cwiseAbs().maxCoeff()), 1e-12);
}

}  // namespace
}  // namespace wavecal
