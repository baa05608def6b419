#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Core>

namespace reachplan {

/// Symmetric positive definite matrix with lower bandwidth `bandwidth`,
/// stored by diagonals: band(d, j) = A(j + d, j).
template <typename Scalar>
class BandedSpdMatrix {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  BandedSpdMatrix(Eigen::Index n, Eigen::Index bandwidth)
      : n_(n), bw_(std::min(bandwidth, std::max<Eigen::Index>(n - 1, 0))),
        band_(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(bw_ + 1, n)) {}

  Eigen::Index size() const { return n_; }
  Eigen::Index bandwidth() const { return bw_; }

  /// Adds v to A(i, j) and A(j, i); entries outside the band are dropped.
  void add(Eigen::Index i, Eigen::Index j, Scalar v) {
    if (i < j) std::swap(i, j);
    if (i - j <= bw_) band_(i - j, j) += v;
  }

  Scalar operator()(Eigen::Index i, Eigen::Index j) const {
    if (i < j) std::swap(i, j);
    return i - j <= bw_ ? band_(i - j, j) : Scalar(0);
  }

  void add_diagonal(Scalar v) { band_.row(0).array() += v; }

  /// In-place Cholesky factorization; false if A is not positive definite.
  bool factorize() {
    for (Eigen::Index j = 0; j < n_; ++j) {
      Scalar diag = band_(0, j);
      for (Eigen::Index k = std::max<Eigen::Index>(0, j - bw_); k < j; ++k) {
        const Scalar l = band_(j - k, k);
        diag -= l * l;
      }
      if (!(diag > Scalar(0))) return false;
      const Scalar root = std::sqrt(diag);
      band_(0, j) = root;
      const Eigen::Index last = std::min(n_ - 1, j + bw_);
      for (Eigen::Index i = j + 1; i <= last; ++i) {
        Scalar v = band_(i - j, j);
        for (Eigen::Index k = std::max<Eigen::Index>(0, i - bw_); k < j; ++k)
          v -= band_(i - k, k) * band_(j - k, k);
        band_(i - j, j) = v / root;
      }
    }
    factored_ = true;
    return true;
  }

  /// Solves A x = b after factorize().
  Vector solve(const Vector& b) const {
    Vector x = b;
    for (Eigen::Index i = 0; i < n_; ++i) {
      Scalar v = x[i];
      for (Eigen::Index k = std::max<Eigen::Index>(0, i - bw_); k < i; ++k)
        v -= band_(i - k, k) * x[k];
      x[i] = v / band_(0, i);
    }
    for (Eigen::Index i = n_ - 1; i >= 0; --i) {
      Scalar v = x[i];
      const Eigen::Index last = std::min(n_ - 1, i + bw_);
      for (Eigen::Index k = i + 1; k <= last; ++k) v -= band_(k - i, i) * x[k];
      x[i] = v / band_(0, i);
    }
    return x;
  }

  bool factored() const { return factored_; }

 private:
  Eigen::Index n_;
  Eigen::Index bw_;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> band_;
  bool factored_ = false;
};

}  // namespace reachplan
