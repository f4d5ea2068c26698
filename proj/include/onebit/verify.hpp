#pragma once

// Executable checks of the deterministic identities and inequalities behind
// the convergence analysis, an empirical audit of the restricted approximate
// invertibility bound, the finite-image enumeration, and Monte-Carlo
// concentration checks.

#include "onebit/adversary.hpp"
#include "onebit/ensemble.hpp"
#include "onebit/linops.hpp"
#include "onebit/recovery.hpp"
#include "onebit/rng.hpp"
#include "onebit/theory.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <thread>
#include <vector>

namespace onebit {

/// Max-abs residual of the exact decomposition
///   h_fJ(x, y_vec) - h_J(x, y_vec) - h_fJ(x, x) = 0,
/// with all three maps restricted onto the shared set
/// supp(x) u supp(y_vec) u J (the restriction under which the mismatch terms
/// cancel exactly). Anything above float roundoff is a bug.
inline double check_decomposition_identity(const MeasurementMatrix& A,
                                           const SparseUnitVector& x, const Vector& y_vec,
                                           const SignVector& y_signs, const IndexSet& J) {
  if (y_vec.size() != A.n() || x.dim() != A.n() || y_signs.size() != A.m())
    throw std::invalid_argument("check_decomposition_identity: dimension mismatch");
  const IndexSet shared = set_union(set_union(x.support(), support_of(y_vec)), J);
  const Vector h_f_xy = subset_threshold(h_f_map(A.rows, y_signs, y_vec), shared);
  const Vector h_xy = subset_threshold(h_map(A.rows, x.dense(), y_vec), shared);
  const Vector h_f_xx = subset_threshold(h_f_map(A.rows, y_signs, x.dense()), shared);
  return (h_f_xy - h_xy - h_f_xx).cwiseAbs().maxCoeff();
}

struct ThresholdingCheck {
  double lhs;
  double rhs;
  bool ok;
};

/// The factor-4 deterministic bound: with u = T_k(v+w) / ||T_k(v+w)||,
///   ||z - u|| <= 4 ||(z - v) - T_{supp(z) u supp(u) u supp(v)}(w)||.
/// Requires ||v+w||_0 >= k; callers resample degenerate draws.
inline ThresholdingCheck check_thresholding_lemma(const SparseUnitVector& z,
                                                  const SparseUnitVector& v, const Vector& w,
                                                  Index k) {
  if (z.dim() != v.dim() || w.size() != v.dim())
    throw std::invalid_argument("check_thresholding_lemma: dimension mismatch");
  const Vector sum = v.dense() + w;
  if (static_cast<Index>(support_of(sum).size()) < k)
    throw std::invalid_argument("check_thresholding_lemma: ||v+w||_0 < k");
  Vector projected = top_k_threshold(sum, k);
  const double norm = projected.norm();
  if (norm == 0.0) throw DegenerateStep();
  projected /= norm;
  const SparseUnitVector u{std::move(projected)};
  const IndexSet S = set_union(set_union(z.support(), u.support()), v.support());
  ThresholdingCheck out{};
  out.lhs = (z.dense() - u.dense()).norm();
  out.rhs = 4.0 * (z.dense() - v.dense() - subset_threshold(w, S)).norm();
  // The inequality is exact in real arithmetic; 1e-12 absorbs normalization
  // roundoff when the right side is ~0 (exact-recovery instances).
  out.ok = out.lhs <= out.rhs + 1e-12;
  return out;
}

struct AuditWorstCase {
  std::uint64_t pair_seed = 0;
  double lhs = 0.0;
  double rhs = 0.0;
  double ratio = 0.0;
  double d_s = 0.0;
  IndexSet J;
  IndexSet pattern;
};

struct AuditReport {
  int samples = 0;
  double max_ratio = 0.0;
  int violations = 0;
  AuditWorstCase worst;
};

namespace detail {

inline AuditWorstCase audit_one_pair(const MeasurementMatrix& A, Index k, double tau,
                                     double delta, std::optional<AdversaryStrategy> strategy,
                                     const CorruptionBudget& budget, std::uint64_t pair_seed,
                                     int pair_index) {
  const Index n = A.n();
  const SparseUnitVector x = sample_sparse_unit(n, k, derive_seed(pair_seed, 1));

  SparseUnitVector y = x;
  switch (pair_index % 4) {
    case 0:
      y = sample_sparse_unit(n, k, derive_seed(pair_seed, 2));
      break;
    default: {
      const double sigma = (pair_index % 4 == 1) ? 0.01 : (pair_index % 4 == 2) ? 0.1 : 0.5;
      GaussianStream stream(derive_seed(pair_seed, 2));
      Vector perturbed = x.dense();
      for (Index j : x.support()) perturbed[j] += sigma * stream.normal();
      const double norm = perturbed.norm();
      if (norm == 0.0) {
        y = sample_sparse_unit(n, k, derive_seed(pair_seed, 5));
      } else {
        y = SparseUnitVector(perturbed / norm);
      }
      break;
    }
  }

  Xoshiro256PlusPlus jgen(derive_seed(pair_seed, 3));
  const IndexSet J = sample_subset(n, k, jgen);

  SignVector responses = clean_responses(A, x);
  IndexSet pattern;
  if (strategy) {
    AdversaryContext ctx{&A, &x, &y, k};
    auto [corrupted, pat] =
        corrupt(responses, budget, *strategy, ctx, derive_seed(pair_seed, 4));
    responses = std::move(corrupted);
    pattern = std::move(pat.flipped);
  }

  const Vector h = h_f_restricted(A.rows, responses, x.dense(), y.dense(), J);
  const double lhs = (x.dense() - y.dense() - h).norm();
  // d_S of unit vectors is at most 2; rounding can overshoot by an ulp
  const double d = std::min(2.0, sphere_distance(x.dense(), y.dense()));
  const double rhs = raic_rhs(delta, d, tau);
  return AuditWorstCase{pair_seed, lhs, rhs, lhs / rhs, d, J, std::move(pattern)};
}

}  // namespace detail

/// Samples pairs (x, y) of k-sparse units (three of every four pairs are
/// geodesic perturbations y ~ x + sigma g on supp(x), sigma in
/// {0.01, 0.1, 0.5}, to probe the small-distance regime), corrupts the
/// responses of x at the tau budget, and compares
///   ||(x - y) - h_fJ(x, y)||   against   raic_rhs(delta, d_S(x,y), tau).
/// J is a uniform subset of size exactly k. strategy == nullopt leaves the
/// responses clean (the adversarial term stays in the right-hand side).
/// Samples run concurrently on per-sample derived seeds; the report comes
/// from a deterministic reduction over the sample index.
inline AuditReport audit_raic(const MeasurementMatrix& A, Index k, double tau, double delta,
                              int num_pairs, std::optional<AdversaryStrategy> strategy,
                              std::uint64_t seed) {
  if (num_pairs < 1) throw std::invalid_argument("audit_raic: num_pairs must be >= 1");
  if (strategy && *strategy == AdversaryStrategy::exhaustive)
    throw std::invalid_argument("audit_raic: exhaustive strategy is not supported here");
  const CorruptionBudget budget = CorruptionBudget::from(tau, A.m());

  std::vector<AuditWorstCase> cases(static_cast<std::size_t>(num_pairs));
  auto run_range = [&](int begin, int end) {
    for (int p = begin; p < end; ++p)
      cases[static_cast<std::size_t>(p)] = detail::audit_one_pair(
          A, k, tau, delta, strategy, budget, derive_seed(seed, static_cast<std::uint64_t>(p)),
          p);
  };
  const unsigned workers = std::min<unsigned>(
      std::max(1u, std::thread::hardware_concurrency()), static_cast<unsigned>(num_pairs));
  if (workers <= 1) {
    run_range(0, num_pairs);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    const int chunk = 8;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const int begin = next.fetch_add(chunk);
          if (begin >= num_pairs) return;
          run_range(begin, std::min(begin + chunk, num_pairs));
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  AuditReport report;
  report.samples = num_pairs;
  for (const AuditWorstCase& c : cases) {
    if (c.lhs > c.rhs) ++report.violations;
    if (c.ratio > report.max_ratio) {
      report.max_ratio = c.ratio;
      report.worst = c;
    }
  }
  return report;
}

struct ImageEnumeration {
  std::uint64_t image_count = 0;
  double max_norm = 0.0;
};

/// Enumerates the distinct values of h_fJ(u, u) over all flip patterns of
/// size 1..budget applied to the clean responses of each supplied point.
/// budget == 0 degenerates to the single zero image.
inline ImageEnumeration enumerate_adversary_images(const MeasurementMatrix& A,
                                                   const std::vector<SparseUnitVector>& x_points,
                                                   const IndexSet& J, Index budget) {
  const Index m = A.m();
  if (budget < 0 || budget > m)
    throw std::invalid_argument("enumerate_adversary_images: need 0 <= budget <= m");
  if (budget == 0) return ImageEnumeration{1, 0.0};
  detail::subset_count_with_guard(m, budget, kExhaustiveGuard);
  const double scale = std::sqrt(2.0 * std::numbers::pi) / static_cast<double>(m);

  std::set<std::vector<double>> images;
  double max_norm = 0.0;
  for (const SparseUnitVector& u : x_points) {
    const IndexSet S = set_union(u.support(), J);
    const Vector margins = A.rows * u.dense();
    const Vector signs = sign_vector(margins);
    // Restricted rows scaled by -sgn(<a_i, u>), summed over each pattern.
    Matrix terms(m, u.dim());
    for (Index i = 0; i < m; ++i) {
      Vector row = Vector::Zero(u.dim());
      for (Index j : S) row[j] = A.rows(i, j);
      terms.row(i) = (-scale * signs[i]) * row.transpose();
    }
    IndexSet subset;
    for (Index l = 1; l <= budget; ++l) {
      subset.assign(static_cast<std::size_t>(l), 0);
      std::iota(subset.begin(), subset.end(), Index{0});
      for (;;) {
        Vector image = Vector::Zero(u.dim());
        for (Index i : subset) image += terms.row(i).transpose();
        max_norm = std::max(max_norm, image.norm());
        images.insert(std::vector<double>(image.data(), image.data() + image.size()));
        Index i = l - 1;
        while (i >= 0 && subset[static_cast<std::size_t>(i)] == m - l + i) --i;
        if (i < 0) break;
        ++subset[static_cast<std::size_t>(i)];
        for (Index j = i + 1; j < l; ++j)
          subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j) - 1] + 1;
      }
    }
  }
  return ImageEnumeration{images.size(), max_norm};
}

struct HalfNormalCheck {
  double mean_estimate = 0.0;      // mean of |N(0,1)| over N draws
  double max_identity_gap = 0.0;   // max |<u, T_S(a)>| vs |<u, a>| gap
};

/// Monte-Carlo mean of the half-normal distribution (expected sqrt(2/pi))
/// plus the exact identity <u, T_{supp(u) u J}(a)> = <u, a> checked on 100
/// random (u, J, a) triples.
inline HalfNormalCheck mc_halfnormal_mean(std::int64_t N, std::uint64_t seed, Index n = 12,
                                          Index k = 3) {
  if (N < 10'000) throw std::invalid_argument("mc_halfnormal_mean: need N >= 10^4");
  HalfNormalCheck out;
  GaussianStream stream(derive_seed(seed, 1));
  double sum = 0.0;
  for (std::int64_t i = 0; i < N; ++i) sum += std::abs(stream.normal());
  out.mean_estimate = sum / static_cast<double>(N);

  for (int rep = 0; rep < 100; ++rep) {
    const std::uint64_t s = derive_seed(seed, 1000 + static_cast<std::uint64_t>(rep));
    const SparseUnitVector u = sample_sparse_unit(n, k, derive_seed(s, 1));
    Xoshiro256PlusPlus jgen(derive_seed(s, 2));
    const IndexSet J = sample_subset(n, k, jgen);
    GaussianStream gs(derive_seed(s, 3));
    Vector a(n);
    for (Index j = 0; j < n; ++j) a[j] = gs.normal();
    const IndexSet S = set_union(u.support(), J);
    const double via_threshold = std::abs(u.dense().dot(subset_threshold(a, S)));
    const double direct = std::abs(u.dense().dot(a));
    out.max_identity_gap = std::max(out.max_identity_gap, std::abs(via_threshold - direct));
  }
  return out;
}

/// E[chi_d] = sqrt(2) Gamma((d+1)/2) / Gamma(d/2).
inline double chi_mean(Index d) {
  if (d < 1) throw std::invalid_argument("chi_mean: d must be >= 1");
  const double dd = static_cast<double>(d);
  return std::sqrt(2.0) * std::exp(std::lgamma((dd + 1.0) / 2.0) - std::lgamma(dd / 2.0));
}

struct ProjectedNormReport {
  Index k_prime = 0;               // |supp(u) u J|
  double mean_estimate = 0.0;      // MC mean of ||Y_u||
  double chi_reference = 0.0;      // sqrt(ell) E[chi_{k'-1}]
  std::vector<double> thresholds_t;
  std::vector<double> exceed_rate;  // empirical P(||Y_u|| > sqrt((k'-1) ell / 2) + ell t)
  std::vector<double> tail_bound;   // e^{-ell t^2 / 2}
};

/// Simulates Y_u = sum_{i<=ell} (T_S(a_i) sgn(<u, T_S(a_i)>) -
/// <u, T_S(a_i)> sgn(<u, T_S(a_i)>) u) whose norm is distributed as a
/// sqrt(ell)-scaled chi with k'-1 degrees of freedom, and measures the
/// sub-Gaussian tail at each requested t.
inline ProjectedNormReport mc_projected_norm(Index n, Index k, const IndexSet& J, Index ell,
                                             std::int64_t N, std::uint64_t seed,
                                             const std::vector<double>& ts = {0.5, 1.0, 2.0}) {
  if (ell < 1) throw std::invalid_argument("mc_projected_norm: ell must be >= 1");
  if (N < 1) throw std::invalid_argument("mc_projected_norm: N must be >= 1");
  const SparseUnitVector u = sample_sparse_unit(n, k, derive_seed(seed, 1));
  const IndexSet S = set_union(u.support(), J);
  const Index k_prime = static_cast<Index>(S.size());
  if (k_prime < 2) throw std::invalid_argument("mc_projected_norm: need |supp(u) u J| >= 2");

  ProjectedNormReport out;
  out.k_prime = k_prime;
  out.thresholds_t = ts;
  out.chi_reference = std::sqrt(static_cast<double>(ell)) * chi_mean(k_prime - 1);
  std::vector<std::int64_t> exceed(ts.size(), 0);
  const double ell_d = static_cast<double>(ell);

  GaussianStream stream(derive_seed(seed, 2));
  double sum = 0.0;
  Vector restricted(n);
  for (std::int64_t rep = 0; rep < N; ++rep) {
    Vector y = Vector::Zero(n);
    for (Index i = 0; i < ell; ++i) {
      restricted.setZero();
      for (Index j : S) restricted[j] = stream.normal();
      const double margin = u.dense().dot(restricted);
      const double s = sign_scalar(margin);
      y += s * restricted - (margin * s) * u.dense();
    }
    const double norm = y.norm();
    sum += norm;
    for (std::size_t ti = 0; ti < ts.size(); ++ti)
      if (norm > std::sqrt((static_cast<double>(k_prime) - 1.0) * ell_d / 2.0) + ell_d * ts[ti])
        ++exceed[ti];
  }
  out.mean_estimate = sum / static_cast<double>(N);
  for (std::size_t ti = 0; ti < ts.size(); ++ti) {
    out.exceed_rate.push_back(static_cast<double>(exceed[ti]) / static_cast<double>(N));
    out.tail_bound.push_back(std::exp(-0.5 * ell_d * ts[ti] * ts[ti]));
  }
  return out;
}

struct D1Check {
  double lhs = 0.0;          // |<u, h_fJ(u,u)>|
  double bound = 0.0;        // 2 l / m + sqrt(2 pi) l t_u / m
  bool ok = false;
  bool inner_nonnegative = false;  // <u, -h_fJ(u,u)> >= 0, exact sign algebra
};

/// Evaluates the projection bound for a concrete mismatch pattern. t_u is the
/// union-bound deviation level from the analysis:
///   t_u = sqrt((2/l) log(2 * 2^l C(m,l) C(n,k) * 3 tau m / rho)).
inline D1Check check_d1_bound(const MeasurementMatrix& A, const SparseUnitVector& u,
                              const IndexSet& J, const IndexSet& pattern, double tau,
                              double rho) {
  const Index m = A.m();
  const Index n = A.n();
  const Index l = static_cast<Index>(pattern.size());
  const SignVector y = clean_responses(A, u).flipped(pattern);
  const Vector h = h_f_restricted(A.rows, y, u.dense(), u.dense(), J);
  D1Check out;
  out.lhs = std::abs(u.dense().dot(h));
  out.inner_nonnegative = u.dense().dot(-h) >= 0.0;
  if (l == 0) {
    out.bound = 0.0;
    out.ok = out.lhs == 0.0;
    return out;
  }
  const double ld = static_cast<double>(l);
  const double md = static_cast<double>(m);
  const double log_arg = std::log(2.0) + ld * std::log(2.0) +
                         log_binomial(md, ld) +
                         log_binomial(static_cast<double>(n), static_cast<double>(u.nnz())) +
                         std::log(3.0 * tau * md / rho);
  const double t_u = std::sqrt(2.0 / ld * log_arg);
  out.bound = 2.0 * ld / md + std::sqrt(2.0 * std::numbers::pi) * ld * t_u / md;
  out.ok = out.lhs <= out.bound;
  return out;
}

}  // namespace onebit
