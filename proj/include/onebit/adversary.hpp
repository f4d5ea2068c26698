#pragma once

// Bounded-budget sign-flip adversaries: random, min-margin (attacks the
// smallest |<a_i, x>| first), estimate-aligned (flips responses that agree
// with the current estimate's signs at the smallest margin), and an
// exhaustive worst-case oracle for tiny m.

#include "onebit/ensemble.hpp"
#include "onebit/linops.hpp"
#include "onebit/recovery.hpp"
#include "onebit/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace onebit {

struct CorruptionBudget {
  double tau = 0.0;
  Index m = 0;
  Index budget = 0;  // ceil(tau * m)

  static CorruptionBudget from(double tau, Index m) {
    if (!(tau > 0.0 && tau <= 1.0))
      throw std::invalid_argument("CorruptionBudget: tau must be in (0,1]");
    if (m < 1) throw std::invalid_argument("CorruptionBudget: m must be >= 1");
    CorruptionBudget b;
    b.tau = tau;
    b.m = m;
    // Nudged ceiling so tau*m that is an integer up to roundoff stays exact.
    b.budget = static_cast<Index>(std::ceil(tau * static_cast<double>(m) - 1e-9));
    if (b.budget < 1) b.budget = 1;
    if (b.budget > m) b.budget = m;
    return b;
  }
};

struct CorruptionPattern {
  IndexSet flipped;  // sorted subset of [m]
};

enum class AdversaryStrategy { random, min_margin, estimate_aligned, exhaustive };

inline const char* to_string(AdversaryStrategy s) {
  switch (s) {
    case AdversaryStrategy::random: return "random";
    case AdversaryStrategy::min_margin: return "min-margin";
    case AdversaryStrategy::estimate_aligned: return "estimate-aligned";
    case AdversaryStrategy::exhaustive: return "exhaustive";
  }
  return "?";
}

inline AdversaryStrategy adversary_from_string(const std::string& s) {
  if (s == "random") return AdversaryStrategy::random;
  if (s == "min-margin" || s == "min_margin") return AdversaryStrategy::min_margin;
  if (s == "estimate-aligned" || s == "estimate_aligned")
    return AdversaryStrategy::estimate_aligned;
  if (s == "exhaustive") return AdversaryStrategy::exhaustive;
  throw std::invalid_argument("unknown adversary strategy: " + s);
}

/// Context fields required per strategy: min_margin needs (A, x);
/// estimate_aligned needs (A, prev); exhaustive needs (A, x, prev, k).
struct AdversaryContext {
  const MeasurementMatrix* A = nullptr;
  const SparseUnitVector* x = nullptr;
  const SparseUnitVector* prev = nullptr;
  Index k = 0;
};

namespace detail {

// Indices ordered by ascending |margins|, ties toward the lowest index.
inline IndexSet by_smallest_margin(const Vector& margins, Index count) {
  IndexSet order(static_cast<std::size_t>(margins.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&margins](Index a, Index b) {
    const double ma = std::abs(margins[a]);
    const double mb = std::abs(margins[b]);
    return ma != mb ? ma < mb : a < b;
  });
  order.resize(static_cast<std::size_t>(std::min<Index>(count, margins.size())));
  std::sort(order.begin(), order.end());
  return order;
}

inline std::uint64_t subset_count_with_guard(Index m, Index budget, std::uint64_t limit) {
  std::uint64_t total = 0;
  double binom = 1.0;
  for (Index l = 1; l <= budget; ++l) {
    binom *= static_cast<double>(m - l + 1) / static_cast<double>(l);
    total += static_cast<std::uint64_t>(binom + 0.5);
    if (total > limit)
      throw std::length_error("exhaustive_worst_case: subset count exceeds guard");
  }
  return total;
}

}  // namespace detail

inline constexpr std::uint64_t kExhaustiveGuard = 1'000'000ULL;

/// Worst single flip pattern of size 1..budget: maximizes the one-step error
/// d_S(x, biht_step(A, y_pattern, prev, k)). Ties break toward the
/// lexicographically smallest flipped set. Guarded enumeration.
inline CorruptionPattern exhaustive_worst_case(const MeasurementMatrix& A,
                                               const SparseUnitVector& x,
                                               const SparseUnitVector& prev, Index k,
                                               Index budget) {
  const Index m = A.m();
  if (budget < 1 || budget > m)
    throw std::invalid_argument("exhaustive_worst_case: need 1 <= budget <= m");
  detail::subset_count_with_guard(m, budget, kExhaustiveGuard);

  const SignVector clean = clean_responses(A, x);
  double best_error = -1.0;
  IndexSet best;

  IndexSet subset;
  auto evaluate = [&] {
    const SignVector y = clean.flipped(subset);
    double err;
    try {
      err = sphere_distance(x.dense(), biht_step(A.rows, y, prev, k).dense());
    } catch (const DegenerateStep&) {
      err = sphere_distance(x.dense(), prev.dense());
    }
    if (err > best_error ||
        (err == best_error && std::lexicographical_compare(subset.begin(), subset.end(),
                                                           best.begin(), best.end()))) {
      best_error = err;
      best = subset;
    }
  };

  // Enumerate subsets of each size l in lexicographic order.
  for (Index l = 1; l <= budget; ++l) {
    subset.assign(static_cast<std::size_t>(l), 0);
    std::iota(subset.begin(), subset.end(), Index{0});
    for (;;) {
      evaluate();
      // Advance to the next l-combination of [m].
      Index i = l - 1;
      while (i >= 0 && subset[static_cast<std::size_t>(i)] == m - l + i) --i;
      if (i < 0) break;
      ++subset[static_cast<std::size_t>(i)];
      for (Index j = i + 1; j < l; ++j)
        subset[static_cast<std::size_t>(j)] = subset[static_cast<std::size_t>(j) - 1] + 1;
    }
  }
  return CorruptionPattern{std::move(best)};
}

/// Corrupts clean responses under the given strategy. The returned vector
/// differs from `clean` exactly on the returned pattern, which never exceeds
/// the budget.
inline std::pair<SignVector, CorruptionPattern> corrupt(const SignVector& clean,
                                                        const CorruptionBudget& budget,
                                                        AdversaryStrategy strategy,
                                                        const AdversaryContext& ctx,
                                                        std::uint64_t seed) {
  if (clean.size() != budget.m)
    throw std::invalid_argument("corrupt: clean responses do not match budget.m");
  IndexSet flips;
  switch (strategy) {
    case AdversaryStrategy::random: {
      Xoshiro256PlusPlus gen(seed);
      flips = sample_subset(budget.m, budget.budget, gen);
      break;
    }
    case AdversaryStrategy::min_margin: {
      if (!ctx.A || !ctx.x)
        throw std::invalid_argument("corrupt: min_margin needs context {A, x}");
      flips = detail::by_smallest_margin(ctx.A->rows * ctx.x->dense(), budget.budget);
      break;
    }
    case AdversaryStrategy::estimate_aligned: {
      if (!ctx.A || !ctx.prev)
        throw std::invalid_argument("corrupt: estimate_aligned needs context {A, prev}");
      const Vector margins = ctx.A->rows * ctx.prev->dense();
      const Vector est_signs = sign_vector(margins);
      IndexSet agreeing;
      for (Index i = 0; i < clean.size(); ++i)
        if (clean[i] == est_signs[i]) agreeing.push_back(i);
      Vector sub(static_cast<Index>(agreeing.size()));
      for (std::size_t i = 0; i < agreeing.size(); ++i) sub[static_cast<Index>(i)] = margins[agreeing[i]];
      const IndexSet picked = detail::by_smallest_margin(sub, budget.budget);
      for (Index p : picked) flips.push_back(agreeing[static_cast<std::size_t>(p)]);
      std::sort(flips.begin(), flips.end());
      break;
    }
    case AdversaryStrategy::exhaustive: {
      if (!ctx.A || !ctx.x || !ctx.prev || ctx.k < 1)
        throw std::invalid_argument("corrupt: exhaustive needs context {A, x, prev, k}");
      flips = exhaustive_worst_case(*ctx.A, *ctx.x, *ctx.prev, ctx.k, budget.budget).flipped;
      break;
    }
  }
  return {clean.flipped(flips), CorruptionPattern{std::move(flips)}};
}

/// Experimental variant of the model: the responses are re-corrupted from
/// the current iterate before every step, so strategies that depend on the
/// estimate re-aim each iteration. The budget still applies against the
/// clean responses of x.
inline RecoveryTrace biht_run_recorrupting(const MeasurementMatrix& A,
                                           const SparseUnitVector& x,
                                           const CorruptionBudget& budget,
                                           AdversaryStrategy strategy, Index k, int T,
                                           const SparseUnitVector& init,
                                           std::uint64_t seed) {
  if (T < 0) throw std::invalid_argument("biht_run_recorrupting: T must be >= 0");
  const SignVector clean = clean_responses(A, x);
  RecoveryTrace trace;
  trace.iterates.push_back(init);
  trace.errors.push_back(sphere_distance(x.dense(), init.dense()));
  bool stuck = false;
  for (int t = 1; t <= T; ++t) {
    const SparseUnitVector& prev = trace.iterates.back();
    SparseUnitVector next = prev;
    if (!stuck) {
      AdversaryContext ctx{&A, &x, &prev, k};
      const auto [y, pattern] =
          corrupt(clean, budget, strategy, ctx, derive_seed(seed, static_cast<std::uint64_t>(t)));
      try {
        next = biht_step(A.rows, y, prev, k);
      } catch (const DegenerateStep&) {
        trace.degenerate_at = t;
        stuck = true;
      }
      if (!stuck && !trace.fixed_point_at && next == prev) trace.fixed_point_at = t;
    }
    trace.iterates.push_back(std::move(next));
    trace.errors.push_back(sphere_distance(x.dense(), trace.iterates.back().dense()));
  }
  return trace;
}

}  // namespace onebit
