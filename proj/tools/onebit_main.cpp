// Command-line front end: recovery runs, Monte-Carlo experiments, the RAIC
// audit, the exhaustive adversary oracle, and the constants table.
//
// Exit codes: 0 ok, 1 input error, 2 degenerate-terminated run, 64 usage.

#include "onebit/adversary.hpp"
#include "onebit/ensemble.hpp"
#include "onebit/harness.hpp"
#include "onebit/recovery.hpp"
#include "onebit/serialize.hpp"
#include "onebit/theory.hpp"
#include "onebit/verify.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitDegenerate = 2;
constexpr int kExitUsage = 64;

struct RecoverOptions {
  onebit::Index n = 0, k = 0, m = 0;
  double tau = 0.0;
  std::string adversary = "random";
  int iterations = 10;
  std::uint64_t seed = 0;
  std::string matrix_file;
  std::string responses_file;
  bool recorrupt = false;
};

int run_recover(const RecoverOptions& opt) {
  using namespace onebit;
  RecoveryTrace trace;
  if (!opt.matrix_file.empty() || !opt.responses_file.empty()) {
    if (opt.matrix_file.empty() || opt.responses_file.empty()) {
      std::cerr << "recover: --matrix and --responses must be given together\n";
      return kExitInput;
    }
    std::ifstream ms(opt.matrix_file);
    if (!ms) {
      std::cerr << "recover: cannot open " << opt.matrix_file << "\n";
      return kExitInput;
    }
    const Matrix A = matrix_from_csv(ms);
    std::ifstream rs(opt.responses_file);
    if (!rs) {
      std::cerr << "recover: cannot open " << opt.responses_file << "\n";
      return kExitInput;
    }
    const Matrix raw = matrix_from_csv(rs);
    Vector bits(raw.size());
    Index pos = 0;
    for (Index i = 0; i < raw.rows(); ++i)
      for (Index j = 0; j < raw.cols(); ++j) bits[pos++] = raw(i, j);
    if (bits.size() != A.rows()) {
      std::cerr << "recover: responses length != m\n";
      return kExitInput;
    }
    const SignVector y{bits};
    if (opt.k < 1 || opt.k > A.cols()) {
      std::cerr << "recover: need 1 <= k <= n\n";
      return kExitInput;
    }
    const SparseUnitVector init =
        sample_sparse_unit(A.cols(), opt.k, derive_seed(opt.seed, 3));
    trace = biht_run(A, y, opt.k, opt.iterations, init);
  } else {
    if (opt.n < 1 || opt.k < 1 || opt.m < 1) {
      std::cerr << "recover: synthetic mode needs --n, --k and --m\n";
      return kExitInput;
    }
    const MeasurementMatrix A = sample_gaussian_matrix(opt.m, opt.n, derive_seed(opt.seed, 1));
    const SparseUnitVector x = sample_sparse_unit(opt.n, opt.k, derive_seed(opt.seed, 2));
    const SparseUnitVector init = sample_sparse_unit(opt.n, opt.k, derive_seed(opt.seed, 3));
    const AdversaryStrategy strategy = adversary_from_string(opt.adversary);
    if (opt.recorrupt && opt.tau > 0.0) {
      trace = biht_run_recorrupting(A, x, CorruptionBudget::from(opt.tau, opt.m), strategy,
                                    opt.k, opt.iterations, init, derive_seed(opt.seed, 4));
    } else {
      SignVector y = clean_responses(A, x);
      if (opt.tau > 0.0) {
        AdversaryContext ctx{&A, &x, &init, opt.k};
        y = corrupt(y, CorruptionBudget::from(opt.tau, opt.m), strategy, ctx,
                    derive_seed(opt.seed, 4))
                .first;
      }
      trace = biht_run(A.rows, y, opt.k, opt.iterations, init, &x);
    }
  }
  std::cout << onebit::trace_to_json(trace).dump(2) << "\n";
  return trace.degenerate_at ? kExitDegenerate : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normalized binary iterative hard thresholding for 1-bit compressed sensing"};
  app.require_subcommand(1);

  // recover
  RecoverOptions rec;
  auto* recover = app.add_subcommand("recover", "Run BIHT recovery and print the trace as JSON");
  recover->add_option("--n", rec.n, "signal dimension (synthetic mode)");
  recover->add_option("--k", rec.k, "sparsity")->required();
  recover->add_option("--m", rec.m, "number of measurements (synthetic mode)");
  recover->add_option("--tau", rec.tau, "adversarial flip fraction in [0,1]");
  recover->add_option("--adversary", rec.adversary,
                      "one of random|min-margin|estimate-aligned|exhaustive");
  recover->add_option("--T,--iterations", rec.iterations, "iteration count");
  recover->add_option("--seed", rec.seed, "master seed");
  recover->add_option("--matrix", rec.matrix_file, "measurement matrix CSV (file mode)");
  recover->add_option("--responses", rec.responses_file, "responses CSV (file mode)");
  recover->add_flag("--recorrupt", rec.recorrupt,
                    "experimental: re-corrupt responses from the current iterate each step");

  // experiment
  std::string config_file;
  onebit::ExperimentConfig cfg;
  std::string cfg_adversary = "random";
  std::string out_dataset, out_summary, format = "csv";
  bool use_m0 = false;
  auto* experiment =
      app.add_subcommand("experiment", "Monte-Carlo recovery experiment; dataset CSV on stdout");
  experiment->add_option("--config", config_file, "JSON config file (overrides flags)");
  experiment->add_option("--n", cfg.n, "signal dimension");
  experiment->add_option("--k", cfg.k, "sparsity");
  experiment->add_option("--m", cfg.m, "measurements (explicit m mode)");
  experiment->add_flag("--scaled-m0", use_m0, "derive m from the sample-complexity map");
  experiment->add_option("--m0-factor", cfg.m0_factor, "factor for --scaled-m0");
  experiment->add_option("--rho", cfg.rho, "failure budget for --scaled-m0");
  experiment->add_option("--tau", cfg.tau, "adversarial flip fraction (0 = noiseless)");
  experiment->add_option("--adversary", cfg_adversary,
                         "one of random|min-margin|estimate-aligned|exhaustive");
  experiment->add_option("--trials", cfg.trials, "number of trials");
  experiment->add_option("--T,--iterations", cfg.iterations, "iterations per trial");
  experiment->add_option("--seed", cfg.master_seed, "master seed");
  experiment->add_option("--epsilon", cfg.epsilon_target, "target epsilon for the theory curve");
  experiment->add_option("--out-dataset", out_dataset, "write per-trial CSV here");
  experiment->add_option("--out-summary", out_summary, "write summary CSV here");
  experiment->add_option("--format", format, "stdout format: csv|json")
      ->check(CLI::IsMember({"csv", "json"}));

  // audit-raic
  onebit::Index au_n = 50, au_k = 3, au_m = 500;
  double au_tau = 0.05, au_delta = 0.25;
  int au_pairs = 100;
  std::uint64_t au_seed = 0;
  std::string au_adversary = "min-margin";
  auto* audit = app.add_subcommand("audit-raic",
                                   "Empirical restricted-invertibility audit; JSON report");
  audit->add_option("--n", au_n, "signal dimension");
  audit->add_option("--k", au_k, "sparsity");
  audit->add_option("--m", au_m, "measurements");
  audit->add_option("--tau", au_tau, "flip fraction");
  audit->add_option("--delta", au_delta, "RAIC delta");
  audit->add_option("--pairs", au_pairs, "number of sampled pairs");
  audit->add_option("--seed", au_seed, "master seed");
  audit->add_option("--adversary", au_adversary,
                    "one of none|random|min-margin|estimate-aligned");

  // oracle
  onebit::Index or_n = 8, or_k = 2, or_m = 6, or_budget = 1;
  std::uint64_t or_seed = 0;
  auto* oracle = app.add_subcommand(
      "oracle", "Exhaustive worst-case flip pattern on a sampled instance; JSON");
  oracle->add_option("--n", or_n, "signal dimension");
  oracle->add_option("--k", or_k, "sparsity");
  oracle->add_option("--m", or_m, "measurements");
  oracle->add_option("--budget", or_budget, "max flips")->required();
  oracle->add_option("--seed", or_seed, "master seed");

  // constants
  std::uint64_t consts_seed = 0;
  auto* consts = app.add_subcommand("constants", "Print the universal constants as JSON");
  consts->add_option("--seed", consts_seed, "accepted for uniformity; the output is constant");

  if (argc <= 1) {
    std::cerr << app.help();
    return kExitUsage;
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (recover->parsed()) return run_recover(rec);

    if (experiment->parsed()) {
      using namespace onebit;
      if (!config_file.empty()) {
        std::ifstream in(config_file);
        if (!in) {
          std::cerr << "experiment: cannot open " << config_file << "\n";
          return kExitInput;
        }
        ordered_json j = ordered_json::parse(in, nullptr, true);
        cfg = config_from_json(j);
      } else {
        cfg.m_scaled_from_m0 = use_m0;
        cfg.strategy = adversary_from_string(cfg_adversary);
        cfg.validate();
      }
      const auto records = run_experiment(cfg);
      const auto rows = emit_plot_data(records, cfg.tau, cfg.epsilon_target);
      if (!out_dataset.empty()) {
        std::ofstream os(out_dataset);
        write_dataset_csv(records, os);
      }
      if (!out_summary.empty()) {
        std::ofstream os(out_summary);
        write_summary_csv(rows, os);
      }
      if (format == "json") {
        ordered_json j;
        j["config"] = config_to_json(cfg);
        j["records"] = records_to_json(records);
        std::cout << j.dump(2) << "\n";
      } else {
        std::ostringstream buffer;
        write_dataset_csv(records, buffer);
        std::cout << buffer.str();
      }
      return kExitOk;
    }

    if (audit->parsed()) {
      using namespace onebit;
      const MeasurementMatrix A = sample_gaussian_matrix(au_m, au_n, derive_seed(au_seed, 1));
      std::optional<AdversaryStrategy> strategy;
      if (au_adversary != "none") strategy = adversary_from_string(au_adversary);
      const AuditReport report =
          audit_raic(A, au_k, au_tau, au_delta, au_pairs, strategy, derive_seed(au_seed, 2));
      std::cout << audit_report_to_json(report).dump(2) << "\n";
      return kExitOk;
    }

    if (oracle->parsed()) {
      using namespace onebit;
      const MeasurementMatrix A = sample_gaussian_matrix(or_m, or_n, derive_seed(or_seed, 1));
      const SparseUnitVector x = sample_sparse_unit(or_n, or_k, derive_seed(or_seed, 2));
      const SparseUnitVector prev = sample_sparse_unit(or_n, or_k, derive_seed(or_seed, 3));
      const CorruptionPattern pattern = exhaustive_worst_case(A, x, prev, or_k, or_budget);
      const SignVector y = clean_responses(A, x).flipped(pattern.flipped);
      double err;
      try {
        err = sphere_distance(x.dense(), biht_step(A.rows, y, prev, or_k).dense());
      } catch (const DegenerateStep&) {
        err = sphere_distance(x.dense(), prev.dense());
      }
      ordered_json j;
      j["pattern"] = pattern.flipped;
      j["max_error"] = err;
      std::cout << j.dump(2) << "\n";
      return kExitOk;
    }

    if (consts->parsed()) {
      std::cout << onebit::constants_to_json().dump(2) << "\n";
      return kExitOk;
    }
  } catch (const onebit::CsvError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::domain_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::length_error& e) {
    std::cerr << "resource error: " << e.what() << "\n";
    return kExitInput;
  } catch (const onebit::ordered_json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitUsage;
}
