#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ckdist/ckdist.hpp"

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / "ckdist_cli_tests";
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

CliResult run_cli(const std::string& args, const std::string& env_prefix = "") {
  static int counter = 0;
  const auto dir = scratch_dir();
  const auto out_path = dir / ("out" + std::to_string(counter) + ".txt");
  const auto err_path = dir / ("err" + std::to_string(counter) + ".txt");
  ++counter;
  const std::string command = env_prefix + " " CKDIST_CLI_PATH " " + args + " > " +
                              out_path.string() + " 2> " + err_path.string();
  const int status = std::system(command.c_str());
  CliResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

const std::string kOnegin = CKDIST_DATA_DIR "/onegin.json";

fs::path write_file(const char* name, const std::string& body) {
  const auto path = scratch_dir() / name;
  std::ofstream out(path);
  out << body;
  return path;
}

}  // namespace

TEST_CASE("validate: exit codes follow the contract") {
  CHECK(run_cli("validate " + kOnegin).exit_code == 0);

  const auto bad_row = write_file("bad_row.json",
                                  R"({"labels":["V","C"],
      "states":[{"name":"v","label":"V"},{"name":"c","label":"C"}],
      "initial":[0.5,0.5],"transitions":[[0.128,0.872],[0.563,0.337]]})");
  const auto invalid = run_cli("validate " + bad_row.string());
  CHECK(invalid.exit_code == 2);
  CHECK(invalid.err.find("NonStochasticRow") != std::string::npos);

  const auto missing = run_cli("validate /nonexistent/chain.json");
  CHECK(missing.exit_code == 1);
}

TEST_CASE("ck: self distance at horizon 15") {
  const auto result = run_cli("ck " + kOnegin + " " + kOnegin + " --horizon 15");
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("s_k = 0\n") != std::string::npos);
  CHECK(result.out.find("error_bound = 3.0517578125e-05") != std::string::npos);
  CHECK(result.out.find("certified = true") != std::string::npos);
}

TEST_CASE("ck: precision 3.1e-5 selects horizon 15") {
  const auto biased = scratch_dir() / "biased01.json";
  ckdist::save_chain(ckdist::bias_onegin(0.1), biased);
  const auto result =
      run_cli("ck " + kOnegin + " " + biased.string() + " --precision 3.1e-5");
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("horizon = 15") != std::string::npos);
}

TEST_CASE("ck: exactly one of horizon and precision") {
  const auto none = run_cli("ck " + kOnegin + " " + kOnegin);
  CHECK(none.exit_code == 1);
  const auto both =
      run_cli("ck " + kOnegin + " " + kOnegin + " --horizon 3 --precision 0.1");
  CHECK(both.exit_code != 0);
}

TEST_CASE("ck: alphabet mismatch is a validation failure") {
  const auto three = write_file("three_labels.json",
                                R"({"labels":["a","b","c"],
      "states":[{"name":"x","label":"a"},{"name":"y","label":"b"},{"name":"z","label":"c"}],
      "initial":[1.0,0.0,0.0],
      "transitions":[[0.4,0.3,0.3],[0.4,0.3,0.3],[0.4,0.3,0.3]]})");
  const auto result =
      run_cli("ck " + kOnegin + " " + three.string() + " --horizon 3");
  CHECK(result.exit_code == 2);
  CHECK(result.err.find("AlphabetMismatch") != std::string::npos);
}

TEST_CASE("ck: node budget can be tightened from the environment") {
  const auto biased = scratch_dir() / "biased_budget.json";
  ckdist::save_chain(ckdist::bias_onegin(0.1), biased);
  const auto result = run_cli("ck " + kOnegin + " " + biased.string() + " --horizon 15",
                              "CKDIST_NODE_BUDGET=8");
  CHECK(result.exit_code == 3);
  CHECK(result.err.find("NodeBudgetExceeded") != std::string::npos);
}

TEST_CASE("tv: identical and disjoint chains") {
  const auto same = run_cli("tv " + kOnegin + " " + kOnegin + " --horizon 4");
  CHECK(same.exit_code == 0);
  CHECK(same.out.find("tv_halfsum = 0\n") != std::string::npos);

  const auto left = write_file("single_v.json",
                               R"({"labels":["V","C"],"states":[{"name":"x","label":"V"}],
      "initial":[1.0],"transitions":[[1.0]]})");
  const auto right = write_file("single_c.json",
                                R"({"labels":["V","C"],"states":[{"name":"x","label":"C"}],
      "initial":[1.0],"transitions":[[1.0]]})");
  const auto disjoint =
      run_cli("tv " + left.string() + " " + right.string() + " --horizon 1");
  CHECK(disjoint.exit_code == 0);
  CHECK(disjoint.out.find("tv = 1\n") != std::string::npos);
}

TEST_CASE("tv: onegin level-2 value") {
  const auto biased = scratch_dir() / "biased_tv.json";
  ckdist::save_chain(ckdist::bias_onegin(0.1), biased);
  const auto result = run_cli("tv " + kOnegin + " " + biased.string() + " --horizon 2");
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("tv = 0.1\n") != std::string::npos);
}

TEST_CASE("bound: the three dispatches") {
  const auto bound = run_cli("bound --delta 0.5 --m 2");
  CHECK(bound.exit_code == 0);
  CHECK(bound.out.find("ck_upper_bound = 0.666666666667") != std::string::npos);

  const auto threshold = run_cli("bound --d-lower 1 --m 2");
  CHECK(threshold.exit_code == 0);
  CHECK(threshold.out.find("bisim_impossibility_threshold = 1\n") != std::string::npos);

  const auto horizon = run_cli("bound --d-upper 0.001 --eps 0.1 --m 2");
  CHECK(horizon.exit_code == 0);
  CHECK(horizon.out.find("max_safe_horizon = 7") != std::string::npos);

  const auto tv_bound = run_cli("bound --d-upper 0.001 --k 5 --m 2");
  CHECK(tv_bound.exit_code == 0);
  CHECK(tv_bound.out.find("tv_from_ck_bound = 0.016") != std::string::npos);

  const auto tv_bisim = run_cli("bound --delta 0.5 --k 2 --m 2");
  CHECK(tv_bisim.exit_code == 0);
  CHECK(tv_bisim.out.find("tv_bisim_bound = 0.75") != std::string::npos);

  CHECK(run_cli("bound --m 2").exit_code == 1);
  CHECK(run_cli("bound --delta 0.5 --d-lower 0.5 --m 2").exit_code == 1);
}

TEST_CASE("bisim: verdicts and minimal epsilon") {
  const auto biased = scratch_dir() / "biased_bisim.json";
  ckdist::save_chain(ckdist::bias_onegin(0.01), biased);
  const std::string relation = CKDIST_DATA_DIR "/identity_relation.json";

  const auto reject = run_cli("bisim " + kOnegin + " " + biased.string() + " " +
                              relation + " --epsilon 0.005");
  CHECK(reject.exit_code == 0);
  CHECK(reject.out.find("verdict = reject") != std::string::npos);
  CHECK(reject.out.find("witness_gap = 0.01\n") != std::string::npos);

  const auto accept = run_cli("bisim " + kOnegin + " " + biased.string() + " " +
                              relation + " --epsilon 0.011");
  CHECK(accept.exit_code == 0);
  CHECK(accept.out.find("verdict = accept") != std::string::npos);

  const auto minimal =
      run_cli("bisim " + kOnegin + " " + kOnegin + " " + relation);
  CHECK(minimal.exit_code == 0);
  CHECK(minimal.out.find("minimal_epsilon = 0\n") != std::string::npos);
  CHECK(minimal.out.find("exact_bisimulation = true") != std::string::npos);
}

TEST_CASE("encode-product writes a loadable chain") {
  const auto out = scratch_dir() / "encoder.json";
  const auto encode = run_cli("encode-product --params 0.3,0.9 --out " + out.string());
  CHECK(encode.exit_code == 0);
  CHECK(run_cli("validate " + out.string()).exit_code == 0);

  const auto self_tv = run_cli("tv " + out.string() + " " + out.string() +
                               " --horizon 2");
  CHECK(self_tv.out.find("tv = 0\n") != std::string::npos);

  const auto chain = ckdist::load_chain(out);
  CHECK(chain.num_states() == 4);

  CHECK(run_cli("encode-product --params 0.3,oops --out " + out.string()).exit_code ==
        1);
}

TEST_CASE("sweep: figures, determinism and the usage error") {
  const auto fig2 = scratch_dir() / "fig2.csv";
  const auto fig2_again = scratch_dir() / "fig2_again.csv";
  CHECK(run_cli("sweep --figure 2 --out " + fig2.string()).exit_code == 0);
  CHECK(run_cli("sweep --figure 2 --out " + fig2_again.string()).exit_code == 0);
  const auto body = slurp(fig2);
  CHECK(body == slurp(fig2_again));
  CHECK(body.substr(0, 14) == "m,delta,bound\n");
  // 9 alphabet sizes x 200 grid points + header
  CHECK(std::count(body.begin(), body.end(), '\n') == 9 * 200 + 1);

  // Within each m block the bound is strictly increasing in delta.
  {
    std::istringstream lines(body);
    std::string line;
    std::getline(lines, line);
    int previous_m = 0;
    double previous_bound = 0.0;
    while (std::getline(lines, line)) {
      const auto first = line.find(',');
      const auto second = line.find(',', first + 1);
      const int m = std::atoi(line.substr(0, first).c_str());
      const double bound = std::strtod(line.c_str() + second + 1, nullptr);
      if (m == previous_m) CHECK(bound > previous_bound);
      previous_m = m;
      previous_bound = bound;
    }
  }

  const auto fig3 = scratch_dir() / "fig3.csv";
  CHECK(run_cli("sweep --figure 3 --out " + fig3.string()).exit_code == 0);
  const auto body3 = slurp(fig3);
  CHECK(body3.substr(0, 20) == "epsilon,k,s_k,bound\n");
  CHECK(std::count(body3.begin(), body3.end(), '\n') == 4 * 15 + 1);

  CHECK(run_cli("sweep --figure 9 --out " + fig3.string()).exit_code == 1);
}

TEST_CASE("identical invocations produce byte-identical stdout") {
  const auto biased = scratch_dir() / "biased_det.json";
  ckdist::save_chain(ckdist::bias_onegin(0.1), biased);
  const std::string args = "ck " + kOnegin + " " + biased.string() + " --horizon 12";
  const auto first = run_cli(args);
  const auto second = run_cli(args);
  CHECK(first.exit_code == 0);
  CHECK(first.out == second.out);
  CHECK(!first.out.empty());
}
