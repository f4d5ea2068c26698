#include "onebit/adversary.hpp"
#include "onebit/ensemble.hpp"
#include "onebit/recovery.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <json.hpp>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

namespace {

struct CommandResult {
  int exit_code;
  std::string stdout_text;
};

std::string cli_path() {
  const char* env = std::getenv("ONEBIT_CLI");
  REQUIRE(env != nullptr);
  return env;
}

CommandResult run(const std::string& args) {
  const std::string cmd = cli_path() + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  std::array<char, 4096> buf;
  std::size_t got;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), got);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

}  // namespace

TEST_CASE("no arguments prints usage and exits 64") {
  CHECK(run("").exit_code == 64);
}

TEST_CASE("unknown subcommand exits 64") {
  CHECK(run("frobnicate").exit_code == 64);
  CHECK(run("recover --definitely-not-a-flag 3 --k 1").exit_code == 64);
}

TEST_CASE("help is available on every subcommand") {
  for (const char* sub : {"recover", "experiment", "audit-raic", "oracle", "constants"}) {
    const CommandResult res = run(std::string(sub) + " --help");
    CHECK(res.exit_code == 0);
    CHECK(!res.stdout_text.empty());
  }
}

TEST_CASE("constants emits the full JSON table") {
  const CommandResult res = run("constants");
  REQUIRE(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.stdout_text);
  for (const char* key : {"a", "b", "c1", "c2", "c3", "c4", "c"}) CHECK(j.contains(key));
  CHECK(j["checks"]["c"]["ok"].get<bool>());
  CHECK(j["c1"].get<double>() > 1.3469);
}

TEST_CASE("recover emits a trace with T+1 iterates") {
  const CommandResult res =
      run("recover --n 100 --k 3 --m 800 --tau 0.02 --T 10 --seed 7");
  REQUIRE(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.stdout_text);
  REQUIRE(j["trace"].size() == 11);
  CHECK(j["trace"][0].contains("support"));
  CHECK(j["trace"][0].contains("values"));
  CHECK(j["trace"][0].contains("d_s"));
}

TEST_CASE("identical invocations give byte-identical stdout") {
  const std::string cmd = "recover --n 80 --k 3 --m 400 --tau 0.05 --adversary min-margin "
                          "--T 6 --seed 42";
  const CommandResult a = run(cmd);
  const CommandResult b = run(cmd);
  CHECK(a.exit_code == b.exit_code);
  CHECK(a.stdout_text == b.stdout_text);
  CHECK(!a.stdout_text.empty());

  const CommandResult e1 = run("experiment --n 60 --k 3 --m 300 --tau 0.05 --trials 4 --T 5 "
                               "--seed 9 --adversary random");
  const CommandResult e2 = run("experiment --n 60 --k 3 --m 300 --tau 0.05 --trials 4 --T 5 "
                               "--seed 9 --adversary random");
  CHECK(e1.exit_code == 0);
  CHECK(e1.stdout_text == e2.stdout_text);

  // the exhaustive adversary is wired through the same path
  const std::string ex =
      "recover --n 8 --k 2 --m 10 --tau 0.2 --adversary exhaustive --T 4 --seed 6";
  const CommandResult x1 = run(ex);
  const CommandResult x2 = run(ex);
  CHECK(x1.exit_code == 0);
  CHECK(x1.stdout_text == x2.stdout_text);
}

TEST_CASE("file-mode recover validates the responses length") {
  const std::string dir = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp");
  const std::string matrix_path = dir + "/onebit_cli_matrix.csv";
  const std::string responses_path = dir + "/onebit_cli_responses.csv";
  {
    std::ofstream m(matrix_path);
    m << "1.0,0.0\n0.0,1.0\n-1.0,0.5\n";
    std::ofstream r(responses_path);
    r << "1\n-1\n";  // wrong length: m = 3
  }
  const CommandResult res =
      run("recover --k 1 --T 3 --matrix " + matrix_path + " --responses " + responses_path);
  CHECK(res.exit_code == 1);

  {
    std::ofstream r(responses_path);
    r << "1\n-1\n1\n";
  }
  const CommandResult ok =
      run("recover --k 1 --T 3 --seed 5 --matrix " + matrix_path + " --responses " +
          responses_path);
  CHECK(ok.exit_code == 0);
  const auto j = nlohmann::json::parse(ok.stdout_text);
  CHECK(j["trace"].size() == 4);
  // no ground truth in file mode: no d_s field
  CHECK(!j["trace"][0].contains("d_s"));

  // malformed CSV exits 1
  {
    std::ofstream m(matrix_path);
    m << "1.0,oops\n";
  }
  CHECK(run("recover --k 1 --T 3 --matrix " + matrix_path + " --responses " + responses_path)
            .exit_code == 1);
}

TEST_CASE("degenerate-terminated run exits 2") {
  // Crafted matrix whose correction cancels the +e2 init exactly (seed 2
  // draws that init): T_1 of the update is zero, the run holds the iterate
  // and reports the degenerate step.
  const std::string dir = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp");
  const std::string matrix_path = dir + "/onebit_cli_degenerate_matrix.csv";
  const std::string responses_path = dir + "/onebit_cli_degenerate_responses.csv";
  {
    std::ofstream m(matrix_path);
    m << "0,-0.3989422804014327\n0,-0.3989422804014327\n";
    std::ofstream r(responses_path);
    r << "1\n1\n";
  }
  const CommandResult res = run("recover --k 1 --T 2 --seed 2 --matrix " + matrix_path +
                                " --responses " + responses_path);
  CHECK(res.exit_code == 2);
  const auto j = nlohmann::json::parse(res.stdout_text);
  CHECK(j["degenerate_at"] == 1);
}

TEST_CASE("synthetic recover matches a library reconstruction") {
  using namespace onebit;
  const std::uint64_t seed = 31;
  const CommandResult res =
      run("recover --n 40 --k 2 --m 200 --tau 0.05 --adversary min-margin --T 6 --seed 31");
  REQUIRE(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.stdout_text);

  const MeasurementMatrix A = sample_gaussian_matrix(200, 40, derive_seed(seed, 1));
  const SparseUnitVector x = sample_sparse_unit(40, 2, derive_seed(seed, 2));
  const SparseUnitVector init = sample_sparse_unit(40, 2, derive_seed(seed, 3));
  AdversaryContext ctx{&A, &x, &init, 2};
  const SignVector y = corrupt(clean_responses(A, x), CorruptionBudget::from(0.05, 200),
                               AdversaryStrategy::min_margin, ctx, derive_seed(seed, 4))
                           .first;
  const RecoveryTrace trace = biht_run(A.rows, y, 2, 6, init, &x);

  REQUIRE(j["trace"].size() == trace.iterates.size());
  for (std::size_t t = 0; t < trace.iterates.size(); ++t) {
    CHECK(j["trace"][t]["d_s"].get<double>() == trace.errors[t]);
    const auto support = j["trace"][t]["support"].get<std::vector<Index>>();
    CHECK(support == trace.iterates[t].support());
  }
}

TEST_CASE("oracle subcommand reports pattern and error") {
  const CommandResult res = run("oracle --n 8 --k 2 --m 6 --budget 2 --seed 3");
  REQUIRE(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.stdout_text);
  CHECK(j.contains("pattern"));
  CHECK(j["pattern"].size() >= 1);
  CHECK(j["pattern"].size() <= 2);
  CHECK(j["max_error"].get<double>() >= 0.0);
}

TEST_CASE("audit subcommand emits a report") {
  const CommandResult res =
      run("audit-raic --n 30 --k 2 --m 200 --tau 0.05 --delta 0.3 --pairs 20 --seed 11 "
          "--adversary min-margin");
  REQUIRE(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.stdout_text);
  CHECK(j["samples"] == 20);
  CHECK(j.contains("max_ratio"));
  CHECK(j.contains("violations"));
}

TEST_CASE("experiment writes dataset and summary files and reads configs") {
  const std::string dir = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp");
  const std::string dataset = dir + "/onebit_cli_dataset.csv";
  const std::string summary = dir + "/onebit_cli_summary.csv";
  const std::string config = dir + "/onebit_cli_config.json";

  const CommandResult direct =
      run("experiment --n 60 --k 3 --m 240 --tau 0.05 --adversary random --trials 4 --T 5 "
          "--seed 13 --out-dataset " + dataset + " --out-summary " + summary);
  REQUIRE(direct.exit_code == 0);

  std::ifstream ds(dataset);
  REQUIRE(ds.good());
  std::string header;
  std::getline(ds, header);
  CHECK(header == "trial,seed,t,d_s,flips,degenerate");
  std::ifstream sm(summary);
  REQUIRE(sm.good());
  std::getline(sm, header);
  CHECK(header == "t,median,q10,q90,theory");

  {
    std::ofstream cf(config);
    cf << R"({"schema":1,"n":60,"k":3,"m_mode":"explicit","m":240,"tau":0.05,)"
       << R"("adversary":"random","trials":4,"iterations":5,"master_seed":13,)"
       << R"("epsilon_target":0.5})";
  }
  const CommandResult via_config = run("experiment --config " + config);
  REQUIRE(via_config.exit_code == 0);
  CHECK(via_config.stdout_text == direct.stdout_text);

  // schema mismatch is an input error
  {
    std::ofstream cf(config);
    cf << R"({"schema":2,"n":60,"k":3,"m":240})";
  }
  CHECK(run("experiment --config " + config).exit_code == 1);
}

TEST_CASE("experiment json format includes config echo") {
  const CommandResult res = run(
      "experiment --n 60 --k 3 --m 240 --tau 0 --trials 3 --T 4 --seed 2 --format json");
  REQUIRE(res.exit_code == 0);
  const auto j = nlohmann::json::parse(res.stdout_text);
  CHECK(j["config"]["schema"] == 1);
  CHECK(j["records"].size() == 3);
}
