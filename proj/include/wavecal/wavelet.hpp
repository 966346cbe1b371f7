#pragma once

// Periodized orthonormal discrete wavelet transform (Mallat pyramid).
//
// Coefficients of a length 2^J signal are stored in one flat vector:
//
//   [ coarse (2^J0) | d_J0 (2^J0) | d_{J0+1} (2^{J0+1}) | ... | d_{J-1} (2^{J-1}) ]
//
// so the detail block of level j starts at offset 2^j. With this layout the
// forward transform is multiplication by an orthogonal matrix W, and the
// inverse is multiplication by W^t.

#include <bit>
#include <cstddef>
#include <string>
#include <utility>

#include <Eigen/Core>

#include "wavecal/detail/daubechies_taps.hpp"
#include "wavecal/errors.hpp"

namespace wavecal {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

enum class WaveletFamily { Daubechies };

enum class Direction { Forward, Inverse };

/// Quadrature-mirror filter pair. The high-pass taps are g[n] = (-1)^n h[2V-1-n].
template <typename Scalar = double>
struct WaveletFilter {
  VectorX<Scalar> low_pass;
  VectorX<Scalar> high_pass;
  int vanishing_moments = 0;

  Eigen::Index length() const { return low_pass.size(); }
};

template <typename Scalar = double>
WaveletFilter<Scalar> make_filter(WaveletFamily family, int vanishing_moments) {
  if (family != WaveletFamily::Daubechies) {
    throw UnsupportedFilterError("unsupported filter: unknown wavelet family");
  }
  const auto taps = detail::daubechies_taps(vanishing_moments);
  if (taps.empty()) {
    throw UnsupportedFilterError("unsupported filter: Daubechies with " +
                                 std::to_string(vanishing_moments) +
                                 " vanishing moments (supported: 1..10)");
  }
  const auto n = static_cast<Eigen::Index>(taps.size());
  WaveletFilter<Scalar> filter;
  filter.vanishing_moments = vanishing_moments;
  filter.low_pass.resize(n);
  filter.high_pass.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    filter.low_pass[i] = static_cast<Scalar>(taps[static_cast<std::size_t>(i)]);
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar sign = (i % 2 == 0) ? Scalar(1) : Scalar(-1);
    filter.high_pass[i] = sign * filter.low_pass[n - 1 - i];
  }
  return filter;
}

/// Returns J such that n == 2^J, or throws DimensionError.
inline int dyadic_depth(Eigen::Index n) {
  if (n < 1 || !std::has_single_bit(static_cast<unsigned long long>(n))) {
    throw DimensionError("length " + std::to_string(n) + " is not a power of two");
  }
  return std::countr_zero(static_cast<unsigned long long>(n));
}

/// Multilevel coefficients of one signal in the flat layout described above.
template <typename Scalar = double>
class Pyramid {
 public:
  using Vector = VectorX<Scalar>;

  Pyramid(int depth, int primary_level)
      : Pyramid(Vector::Zero(Eigen::Index{1} << check_levels(depth, primary_level)),
                primary_level) {}

  Pyramid(Vector flat, int primary_level)
      : coeffs_(std::move(flat)), depth_(dyadic_depth(coeffs_.size())), primary_(primary_level) {
    check_levels(depth_, primary_);
  }

  int depth() const noexcept { return depth_; }
  int primary_level() const noexcept { return primary_; }
  Eigen::Index size() const noexcept { return coeffs_.size(); }

  auto coarse() { return coeffs_.head(Eigen::Index{1} << primary_); }
  auto coarse() const { return coeffs_.head(Eigen::Index{1} << primary_); }

  auto detail(int level) { return coeffs_.segment(level_offset(level), level_offset(level)); }
  auto detail(int level) const {
    return coeffs_.segment(level_offset(level), level_offset(level));
  }

  /// All detail coefficients, levels J0..J-1 back to back.
  auto details() { return coeffs_.tail(coeffs_.size() - (Eigen::Index{1} << primary_)); }
  auto details() const { return coeffs_.tail(coeffs_.size() - (Eigen::Index{1} << primary_)); }

  auto finest() const { return detail(depth_ - 1); }

  const Vector& flat() const noexcept { return coeffs_; }
  Vector& flat() noexcept { return coeffs_; }

 private:
  static int check_levels(int depth, int primary) {
    if (depth < 1 || primary < 0 || primary >= depth) {
      throw DimensionError("primary level " + std::to_string(primary) +
                           " incompatible with depth " + std::to_string(depth));
    }
    return depth;
  }

  Eigen::Index level_offset(int level) const {
    if (level < primary_ || level >= depth_) {
      throw DomainError("detail level " + std::to_string(level) + " outside [" +
                        std::to_string(primary_) + ", " + std::to_string(depth_ - 1) + "]");
    }
    return Eigen::Index{1} << level;
  }

  Vector coeffs_;
  int depth_;
  int primary_;
};

namespace detail {

// One analysis step on the first n entries of `work`: approximation goes to
// [0, n/2), details to [n/2, n). `scratch` must hold n entries.
template <typename Scalar>
void analysis_step(VectorX<Scalar>& work, VectorX<Scalar>& scratch, Eigen::Index n,
                   const WaveletFilter<Scalar>& filter) {
  const Eigen::Index half = n / 2;
  const Eigen::Index taps = filter.length();
  for (Eigen::Index k = 0; k < half; ++k) {
    Scalar approx(0);
    Scalar detail(0);
    for (Eigen::Index t = 0; t < taps; ++t) {
      const Scalar x = work[(2 * k + t) % n];
      approx += filter.low_pass[t] * x;
      detail += filter.high_pass[t] * x;
    }
    scratch[k] = approx;
    scratch[half + k] = detail;
  }
  work.head(n) = scratch.head(n);
}

// Inverse of analysis_step.
template <typename Scalar>
void synthesis_step(VectorX<Scalar>& work, VectorX<Scalar>& scratch, Eigen::Index n,
                    const WaveletFilter<Scalar>& filter) {
  const Eigen::Index half = n / 2;
  const Eigen::Index taps = filter.length();
  scratch.head(n).setZero();
  for (Eigen::Index k = 0; k < half; ++k) {
    const Scalar approx = work[k];
    const Scalar detail = work[half + k];
    for (Eigen::Index t = 0; t < taps; ++t) {
      scratch[(2 * k + t) % n] += filter.low_pass[t] * approx + filter.high_pass[t] * detail;
    }
  }
  work.head(n) = scratch.head(n);
}

}  // namespace detail

/// Forward transform of a length 2^J signal down to primary level J0.
template <typename Derived>
Pyramid<typename Derived::Scalar> dwt(const Eigen::MatrixBase<Derived>& signal,
                                      const WaveletFilter<typename Derived::Scalar>& filter,
                                      int primary_level) {
  using Scalar = typename Derived::Scalar;
  const int depth = dyadic_depth(signal.size());
  if (primary_level < 0 || primary_level >= depth) {
    throw DimensionError("primary level " + std::to_string(primary_level) +
                         " incompatible with depth " + std::to_string(depth));
  }
  VectorX<Scalar> work = signal;
  VectorX<Scalar> scratch(work.size());
  for (Eigen::Index n = work.size(); n > (Eigen::Index{1} << primary_level); n /= 2) {
    detail::analysis_step(work, scratch, n, filter);
  }
  return Pyramid<Scalar>(std::move(work), primary_level);
}

/// Inverse transform; exact inverse of dwt up to round-off.
template <typename Scalar>
VectorX<Scalar> idwt(const Pyramid<Scalar>& pyramid, const WaveletFilter<Scalar>& filter) {
  if (filter.length() < 2 || filter.length() % 2 != 0) {
    throw DimensionError("filter length " + std::to_string(filter.length()) +
                         " is not a positive even number");
  }
  VectorX<Scalar> work = pyramid.flat();
  VectorX<Scalar> scratch(work.size());
  for (Eigen::Index n = Eigen::Index{2} << pyramid.primary_level(); n <= work.size(); n *= 2) {
    detail::synthesis_step(work, scratch, n, filter);
  }
  return work;
}

/// Applies dwt (flattened) or idwt to every column independently.
template <typename Derived>
MatrixX<typename Derived::Scalar> transform_columns(
    const Eigen::MatrixBase<Derived>& matrix,
    const WaveletFilter<typename Derived::Scalar>& filter, int primary_level,
    Direction direction) {
  using Scalar = typename Derived::Scalar;
  dyadic_depth(matrix.rows());
  MatrixX<Scalar> out(matrix.rows(), matrix.cols());
  for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
    if (direction == Direction::Forward) {
      out.col(c) = dwt(matrix.col(c), filter, primary_level).flat();
    } else {
      Pyramid<Scalar> pyramid(VectorX<Scalar>(matrix.col(c)), primary_level);
      out.col(c) = idwt(pyramid, filter);
    }
  }
  return out;
}

}  // namespace wavecal
