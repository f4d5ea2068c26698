#pragma once

// The correction maps h and h_f, their support-restricted versions, and the
// normalized BIHT iteration with trace capture.
//
//   h(u, v)    = (sqrt(2 pi) / m) A^T (sgn(Au) - sgn(Av)) / 2
//   h_f(y, v)  = (sqrt(2 pi) / m) A^T (y - sgn(Av)) / 2
//
// The restricted versions zero every coordinate outside
// supp(u) u supp(v) u J.

#include "onebit/ensemble.hpp"
#include "onebit/linops.hpp"

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <vector>

namespace onebit {

inline Vector h_map(const Matrix& A, const Vector& u, const Vector& v) {
  if (u.size() != A.cols() || v.size() != A.cols())
    throw std::invalid_argument("h_map: dimension mismatch");
  const double scale = std::sqrt(2.0 * std::numbers::pi) / static_cast<double>(A.rows());
  const Vector coeff = 0.5 * (sign_vector(A * u) - sign_vector(A * v));
  return scale * (A.transpose() * coeff);
}

inline Vector h_f_map(const Matrix& A, const SignVector& y, const Vector& v) {
  if (y.size() != A.rows() || v.size() != A.cols())
    throw std::invalid_argument("h_f_map: dimension mismatch");
  const double scale = std::sqrt(2.0 * std::numbers::pi) / static_cast<double>(A.rows());
  const Vector coeff = 0.5 * (y.values() - sign_vector(A * v));
  return scale * (A.transpose() * coeff);
}

inline IndexSet restriction_set(const Vector& u, const Vector& v, const IndexSet& J) {
  return set_union(set_union(support_of(u), support_of(v)), J);
}

/// h_J(u, v): the h map restricted onto supp(u) u supp(v) u J.
inline Vector h_restricted(const Matrix& A, const Vector& u, const Vector& v,
                           const IndexSet& J) {
  return subset_threshold(h_map(A, u, v), restriction_set(u, v, J));
}

/// h_fJ(u, v): u enters through its support and through the corrupted
/// responses y = f(u).
inline Vector h_f_restricted(const Matrix& A, const SignVector& y, const Vector& u,
                             const Vector& v, const IndexSet& J) {
  return subset_threshold(h_f_map(A, y, v), restriction_set(u, v, J));
}

/// Thrown when the thresholded update T_k(x~) is identically zero. Measure
/// zero under Gaussian measurements but reachable with adversarial files.
struct DegenerateStep : std::runtime_error {
  DegenerateStep() : std::runtime_error("biht_step: T_k of the update is zero") {}
};

/// One normalized BIHT step: x~ = x_prev + h_f(y, x_prev), then project to
/// the k largest entries and renormalize. When y already matches
/// sgn(A x_prev) the previous iterate is returned unchanged, making fixed
/// points exact.
inline SparseUnitVector biht_step(const Matrix& A, const SignVector& y,
                                  const SparseUnitVector& prev, Index k) {
  if (k < 1 || k > A.cols()) throw std::invalid_argument("biht_step: need 1 <= k <= n");
  if (y.size() != A.rows() || prev.dim() != A.cols())
    throw std::invalid_argument("biht_step: dimension mismatch");
  const Vector signs = sign_vector(A * prev.dense());
  if ((signs.array() == y.values().array()).all()) return prev;
  const double scale = std::sqrt(2.0 * std::numbers::pi) / static_cast<double>(A.rows());
  const Vector update = prev.dense() + scale * (A.transpose() * (0.5 * (y.values() - signs)));
  Vector projected = top_k_threshold(update, k);
  const double norm = projected.norm();
  if (norm == 0.0) throw DegenerateStep();
  projected /= norm;
  return SparseUnitVector(std::move(projected));
}

struct RecoveryTrace {
  std::vector<SparseUnitVector> iterates;  // T+1 entries
  std::vector<double> errors;              // present iff ground truth supplied
  std::optional<int> fixed_point_at;
  std::optional<int> degenerate_at;
};

/// Runs T BIHT steps from init. On a degenerate step the previous iterate is
/// held for the rest of the run and degenerate_at records the first such t.
/// fixed_point_at records the first t with x^(t) exactly equal to x^(t-1).
inline RecoveryTrace biht_run(const Matrix& A, const SignVector& y, Index k, int T,
                              const SparseUnitVector& init,
                              const SparseUnitVector* truth = nullptr) {
  if (T < 0) throw std::invalid_argument("biht_run: T must be >= 0");
  RecoveryTrace trace;
  trace.iterates.reserve(static_cast<std::size_t>(T) + 1);
  trace.iterates.push_back(init);
  if (truth) trace.errors.push_back(sphere_distance(truth->dense(), init.dense()));
  bool stuck = false;
  for (int t = 1; t <= T; ++t) {
    const SparseUnitVector& prev = trace.iterates.back();
    SparseUnitVector next = prev;
    if (!stuck) {
      try {
        next = biht_step(A, y, prev, k);
      } catch (const DegenerateStep&) {
        trace.degenerate_at = t;
        stuck = true;
      }
      if (!stuck && !trace.fixed_point_at && next == prev) trace.fixed_point_at = t;
    }
    trace.iterates.push_back(std::move(next));
    if (truth)
      trace.errors.push_back(sphere_distance(truth->dense(), trace.iterates.back().dense()));
  }
  return trace;
}

}  // namespace onebit
