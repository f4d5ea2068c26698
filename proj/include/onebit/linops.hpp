#pragma once

// Dense vector primitives: the sign convention sgn(0) = +1, top-k and
// index-subset hard thresholding, and the sphere/Hamming distances.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace onebit {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;
using IndexSet = std::vector<Index>;  // sorted, duplicate-free

/// sgn(a) = -1 if a < 0, +1 if a >= 0. Note sgn(0) = +1.
inline double sign_scalar(double a) {
  if (!std::isfinite(a)) throw std::invalid_argument("sign_scalar: non-finite input");
  return a < 0.0 ? -1.0 : 1.0;
}

inline Vector sign_vector(const Vector& v) {
  Vector out(v.size());
  for (Index i = 0; i < v.size(); ++i) out[i] = sign_scalar(v[i]);
  return out;
}

/// Keep the l largest-magnitude entries, zero the rest. Ties break toward the
/// lowest index so traces are reproducible.
inline Vector top_k_threshold(const Vector& v, Index l) {
  if (l < 1 || l > v.size())
    throw std::invalid_argument("top_k_threshold: need 1 <= l <= dim");
  std::vector<Index> order(static_cast<std::size_t>(v.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::nth_element(order.begin(), order.begin() + (l - 1), order.end(),
                   [&v](Index a, Index b) {
                     const double ma = std::abs(v[a]);
                     const double mb = std::abs(v[b]);
                     return ma != mb ? ma > mb : a < b;
                   });
  Vector out = Vector::Zero(v.size());
  for (Index i = 0; i < l; ++i) {
    const Index j = order[static_cast<std::size_t>(i)];
    out[j] = v[j];
  }
  return out;
}

/// Keep entries indexed by J, zero the rest.
inline Vector subset_threshold(const Vector& v, const IndexSet& J) {
  Vector out = Vector::Zero(v.size());
  for (Index j : J) {
    if (j < 0 || j >= v.size())
      throw std::invalid_argument("subset_threshold: index out of range");
    out[j] = v[j];
  }
  return out;
}

/// Distance between the unit-sphere projections of u and v. By convention 0
/// when both are zero and 1 when exactly one is zero. Range [0, 2].
inline double sphere_distance(const Vector& u, const Vector& v) {
  if (u.size() != v.size())
    throw std::invalid_argument("sphere_distance: dimension mismatch");
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 && nv == 0.0) return 0.0;
  if (nu == 0.0 || nv == 0.0) return 1.0;
  return (u / nu - v / nv).norm();
}

/// A vector over {-1, +1}. Entries are stored as doubles so they can enter
/// matrix arithmetic directly.
class SignVector {
 public:
  explicit SignVector(Vector bits) : bits_(std::move(bits)) {
    for (Index i = 0; i < bits_.size(); ++i)
      if (bits_[i] != 1.0 && bits_[i] != -1.0)
        throw std::invalid_argument("SignVector: entries must be exactly -1 or +1");
  }

  const Vector& values() const { return bits_; }
  Index size() const { return bits_.size(); }
  double operator[](Index i) const { return bits_[i]; }

  /// Returns a copy with the given positions negated.
  SignVector flipped(const IndexSet& positions) const {
    Vector out = bits_;
    for (Index i : positions) {
      if (i < 0 || i >= out.size())
        throw std::invalid_argument("SignVector::flipped: index out of range");
      out[i] = -out[i];
    }
    return SignVector(std::move(out));
  }

  friend bool operator==(const SignVector& a, const SignVector& b) {
    return a.bits_.size() == b.bits_.size() &&
           (a.bits_.array() == b.bits_.array()).all();
  }

 private:
  Vector bits_;
};

inline Index hamming_distance(const SignVector& a, const SignVector& b) {
  if (a.size() != b.size())
    throw std::invalid_argument("hamming_distance: length mismatch");
  Index count = 0;
  for (Index i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) ++count;
  return count;
}

/// A k-sparse unit vector. Stores the dense form together with its support so
/// support-union sets stay O(k).
class SparseUnitVector {
 public:
  static constexpr double kNormTol = 1e-12;

  explicit SparseUnitVector(Vector dense) : dense_(std::move(dense)) {
    if (dense_.size() == 0)
      throw std::invalid_argument("SparseUnitVector: empty vector");
    if (std::abs(dense_.norm() - 1.0) > kNormTol)
      throw std::invalid_argument("SparseUnitVector: l2 norm must equal 1");
    for (Index i = 0; i < dense_.size(); ++i)
      if (dense_[i] != 0.0) support_.push_back(i);
  }

  SparseUnitVector(Index n, const IndexSet& support, const std::vector<double>& values)
      : dense_(Vector::Zero(n)) {
    if (support.size() != values.size())
      throw std::invalid_argument("SparseUnitVector: support/value size mismatch");
    Index prev = -1;
    for (std::size_t i = 0; i < support.size(); ++i) {
      const Index j = support[i];
      if (j <= prev || j >= n)
        throw std::invalid_argument("SparseUnitVector: support must be strictly increasing and < n");
      prev = j;
      dense_[j] = values[i];
    }
    if (std::abs(dense_.norm() - 1.0) > kNormTol)
      throw std::invalid_argument("SparseUnitVector: l2 norm must equal 1");
    for (Index i = 0; i < dense_.size(); ++i)
      if (dense_[i] != 0.0) support_.push_back(i);
  }

  const Vector& dense() const { return dense_; }
  const IndexSet& support() const { return support_; }
  Index dim() const { return dense_.size(); }
  Index nnz() const { return static_cast<Index>(support_.size()); }

  friend bool operator==(const SparseUnitVector& a, const SparseUnitVector& b) {
    return a.dense_.size() == b.dense_.size() &&
           (a.dense_.array() == b.dense_.array()).all();
  }

 private:
  Vector dense_;
  IndexSet support_;
};

inline IndexSet support_of(const Vector& v) {
  IndexSet out;
  for (Index i = 0; i < v.size(); ++i)
    if (v[i] != 0.0) out.push_back(i);
  return out;
}

inline IndexSet set_union(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

inline IndexSet set_difference(const IndexSet& a, const IndexSet& b) {
  IndexSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

}  // namespace onebit
