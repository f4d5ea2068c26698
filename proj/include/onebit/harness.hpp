#pragma once

// Monte-Carlo experiment harness: seeded trials of BIHT recovery under a
// configurable adversary, sweeps over (tau, m, k), and summary curves
// against the theory envelope. Records are a pure function of the config.

#include "onebit/adversary.hpp"
#include "onebit/ensemble.hpp"
#include "onebit/linops.hpp"
#include "onebit/recovery.hpp"
#include "onebit/rng.hpp"
#include "onebit/theory.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace onebit {

using ordered_json = nlohmann::ordered_json;

struct ExperimentConfig {
  int schema = 1;
  Index n = 0;
  Index k = 0;
  // m is either explicit or ceil(m0_factor * m0(epsilon_target / c, n, k, rho)).
  bool m_scaled_from_m0 = false;
  Index m = 0;
  double m0_factor = 0.001;
  double rho = 0.1;
  double tau = 0.0;  // 0 disables corruption
  AdversaryStrategy strategy = AdversaryStrategy::random;
  int trials = 1;
  int iterations = 10;
  std::uint64_t master_seed = 0;
  double epsilon_target = 0.5;

  void validate() const {
    if (schema != 1) throw std::invalid_argument("config: unsupported schema (expected 1)");
    if (k < 1) throw std::invalid_argument("config: field k must be >= 1");
    if (n < 2 * k) throw std::invalid_argument("config: field n must satisfy n >= 2k");
    if (!m_scaled_from_m0 && m < 1) throw std::invalid_argument("config: field m must be >= 1");
    if (m_scaled_from_m0 && !(m0_factor > 0.0))
      throw std::invalid_argument("config: field m0_factor must be > 0");
    if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("config: field tau must be in [0,1]");
    if (trials < 1) throw std::invalid_argument("config: field trials must be >= 1");
    if (iterations < 1) throw std::invalid_argument("config: field iterations must be >= 1");
    if (!(epsilon_target > 0.0 && epsilon_target <= 1.0))
      throw std::invalid_argument("config: field epsilon_target must be in (0,1]");
  }

  Index resolved_m() const {
    if (!m_scaled_from_m0) return m;
    const double base = m0(epsilon_target / constants().c, n, k, rho);
    return static_cast<Index>(std::ceil(m0_factor * base));
  }
};

struct ExperimentRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  std::vector<double> errors;  // d_S(x, x^(t)) for t = 0..T
  double final_error = 0.0;
  Index flips_used = 0;
  bool degenerate = false;
  double wall_time_s = 0.0;
};

namespace detail {

inline ExperimentRecord run_trial(const ExperimentConfig& cfg, Index m, int trial) {
  const auto start = std::chrono::steady_clock::now();
  const std::uint64_t seed = derive_seed(cfg.master_seed, static_cast<std::uint64_t>(trial));
  const MeasurementMatrix A = sample_gaussian_matrix(m, cfg.n, derive_seed(seed, 1));
  const SparseUnitVector x = sample_sparse_unit(cfg.n, cfg.k, derive_seed(seed, 2));
  const SparseUnitVector init = sample_sparse_unit(cfg.n, cfg.k, derive_seed(seed, 3));

  SignVector y = clean_responses(A, x);
  Index flips = 0;
  if (cfg.tau > 0.0) {
    const CorruptionBudget budget = CorruptionBudget::from(cfg.tau, m);
    AdversaryContext ctx{&A, &x, &init, cfg.k};
    auto [corrupted, pattern] = corrupt(y, budget, cfg.strategy, ctx, derive_seed(seed, 4));
    y = std::move(corrupted);
    flips = static_cast<Index>(pattern.flipped.size());
  }

  const RecoveryTrace trace = biht_run(A.rows, y, cfg.k, cfg.iterations, init, &x);
  ExperimentRecord rec;
  rec.trial = trial;
  rec.seed = seed;
  rec.errors = trace.errors;
  rec.final_error = trace.errors.back();
  rec.flips_used = flips;
  rec.degenerate = trace.degenerate_at.has_value();
  rec.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

}  // namespace detail

/// One record per trial, ordered by trial id. Trials run concurrently with
/// per-trial derived seeds, so the result does not depend on scheduling.
inline std::vector<ExperimentRecord> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const Index m = cfg.resolved_m();
  std::vector<ExperimentRecord> records(static_cast<std::size_t>(cfg.trials));
  const unsigned workers =
      std::min<unsigned>(std::max(1u, std::thread::hardware_concurrency()),
                         static_cast<unsigned>(cfg.trials));
  if (workers <= 1) {
    for (int t = 0; t < cfg.trials; ++t)
      records[static_cast<std::size_t>(t)] = detail::run_trial(cfg, m, t);
    return records;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        const int t = next.fetch_add(1);
        if (t >= cfg.trials) return;
        records[static_cast<std::size_t>(t)] = detail::run_trial(cfg, m, t);
      }
    });
  }
  for (auto& th : pool) th.join();
  return records;
}

struct SweepGrid {
  std::vector<double> taus;
  std::vector<Index> ms;
  std::vector<Index> ks;
};

struct SweepCell {
  double tau = 0.0;
  Index m = 0;
  Index k = 0;
  std::vector<ExperimentRecord> records;
};

/// Cross product of the grid (empty axes inherit the base config). Cells
/// share the base master seed: every cell is a pure function of its own
/// config, and common random numbers pair the cells for monotonicity
/// comparisons. A one-cell sweep therefore equals run_experiment.
inline std::vector<SweepCell> sweep(const ExperimentConfig& base, const SweepGrid& grid) {
  const std::vector<double> taus = grid.taus.empty() ? std::vector<double>{base.tau} : grid.taus;
  const std::vector<Index> ms =
      grid.ms.empty() ? std::vector<Index>{base.resolved_m()} : grid.ms;
  const std::vector<Index> ks = grid.ks.empty() ? std::vector<Index>{base.k} : grid.ks;
  if (taus.empty() || ms.empty() || ks.empty())
    throw std::invalid_argument("sweep: grid must be nonempty");
  std::vector<SweepCell> cells;
  for (double tau : taus) {
    for (Index m : ms) {
      for (Index k : ks) {
        ExperimentConfig cfg = base;
        cfg.tau = tau;
        cfg.m_scaled_from_m0 = false;
        cfg.m = m;
        cfg.k = k;
        SweepCell cell{tau, m, k, run_experiment(cfg)};
        cells.push_back(std::move(cell));
      }
    }
  }
  return cells;
}

/// Quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= values.size()) return values.back();
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

struct PlotRow {
  int t = 0;
  double median = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
  double theory = 0.0;  // closed_form_bound(epsilon0(epsilon, tau), t)
};

/// Per-iteration summary rows with the theory envelope attached. epsilon is
/// the user-chosen target; the curve uses epsilon0 = epsilon + r(epsilon, tau).
inline std::vector<PlotRow> emit_plot_data(const std::vector<ExperimentRecord>& records,
                                           double tau, double epsilon) {
  if (records.empty()) throw std::invalid_argument("emit_plot_data: empty dataset");
  const std::size_t T1 = records.front().errors.size();
  const double eps0 = epsilon0(epsilon, tau);
  std::vector<PlotRow> rows;
  rows.reserve(T1);
  for (std::size_t t = 0; t < T1; ++t) {
    std::vector<double> col;
    col.reserve(records.size());
    for (const auto& rec : records) {
      if (rec.errors.size() != T1)
        throw std::invalid_argument("emit_plot_data: ragged records");
      col.push_back(rec.errors[t]);
    }
    PlotRow row;
    row.t = static_cast<int>(t);
    row.median = quantile(col, 0.5);
    row.q10 = quantile(col, 0.1);
    row.q90 = quantile(col, 0.9);
    row.theory = closed_form_bound(eps0, static_cast<int>(t));
    rows.push_back(row);
  }
  return rows;
}

// --- serialization ---

inline void write_dataset_csv(const std::vector<ExperimentRecord>& records, std::ostream& os) {
  os << "trial,seed,t,d_s,flips,degenerate\n";
  for (const auto& rec : records) {
    for (std::size_t t = 0; t < rec.errors.size(); ++t) {
      os << rec.trial << ',' << rec.seed << ',' << t << ',' << format_double(rec.errors[t])
         << ',' << rec.flips_used << ',' << (rec.degenerate ? 1 : 0) << '\n';
    }
  }
}

inline void write_sweep_csv(const std::vector<SweepCell>& cells, std::ostream& os) {
  os << "tau,m,k,trial,seed,t,d_s,flips,degenerate\n";
  for (const auto& cell : cells) {
    for (const auto& rec : cell.records) {
      for (std::size_t t = 0; t < rec.errors.size(); ++t) {
        os << format_double(cell.tau) << ',' << cell.m << ',' << cell.k << ',' << rec.trial
           << ',' << rec.seed << ',' << t << ',' << format_double(rec.errors[t]) << ','
           << rec.flips_used << ',' << (rec.degenerate ? 1 : 0) << '\n';
      }
    }
  }
}

inline void write_summary_csv(const std::vector<PlotRow>& rows, std::ostream& os) {
  os << "t,median,q10,q90,theory\n";
  for (const auto& row : rows) {
    os << row.t << ',' << format_double(row.median) << ',' << format_double(row.q10) << ','
       << format_double(row.q90) << ',' << format_double(row.theory) << '\n';
  }
}

inline ordered_json config_to_json(const ExperimentConfig& cfg) {
  ordered_json j;
  j["schema"] = cfg.schema;
  j["n"] = cfg.n;
  j["k"] = cfg.k;
  if (cfg.m_scaled_from_m0) {
    j["m_mode"] = "scaled-m0";
    j["m0_factor"] = cfg.m0_factor;
    j["rho"] = cfg.rho;
  } else {
    j["m_mode"] = "explicit";
    j["m"] = cfg.m;
  }
  j["tau"] = cfg.tau;
  j["adversary"] = to_string(cfg.strategy);
  j["trials"] = cfg.trials;
  j["iterations"] = cfg.iterations;
  j["master_seed"] = cfg.master_seed;
  j["epsilon_target"] = cfg.epsilon_target;
  return j;
}

inline ExperimentConfig config_from_json(const ordered_json& j) {
  ExperimentConfig cfg;
  try {
    cfg.schema = j.at("schema").get<int>();
    cfg.n = j.at("n").get<Index>();
    cfg.k = j.at("k").get<Index>();
    const std::string mode = j.value("m_mode", std::string("explicit"));
    if (mode == "scaled-m0") {
      cfg.m_scaled_from_m0 = true;
      cfg.m0_factor = j.value("m0_factor", cfg.m0_factor);
      cfg.rho = j.value("rho", cfg.rho);
    } else if (mode == "explicit") {
      cfg.m = j.at("m").get<Index>();
    } else {
      throw std::invalid_argument("config: field m_mode must be explicit or scaled-m0");
    }
    cfg.tau = j.value("tau", 0.0);
    cfg.strategy = adversary_from_string(j.value("adversary", std::string("random")));
    cfg.trials = j.value("trials", 1);
    cfg.iterations = j.value("iterations", 10);
    cfg.master_seed = j.value("master_seed", std::uint64_t{0});
    cfg.epsilon_target = j.value("epsilon_target", 0.5);
  } catch (const ordered_json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

}  // namespace onebit
