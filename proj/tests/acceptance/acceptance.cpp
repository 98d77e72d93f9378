// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "gwcpp/gwcpp.hpp"

namespace {

namespace fs = std::filesystem;
using clock_type = std::chrono::steady_clock;

const std::string cli = GWCPP_CLI;
const std::string envs = GWCPP_SAMPLE_ENVS;

struct outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(clock_type::time_point start) {
  return std::chrono::duration<double>(clock_type::now() - start).count();
}

std::string fmt(double x) {
  std::ostringstream out;
  out.precision(3);
  out << x;
  return out.str();
}

gwcpp::parsed_environment load(const std::string& name) { return gwcpp::load_environment(envs + "/" + name + ".json"); }

// Tree law vs chain law on three environments.
outcome criterion1() {
  const auto start = clock_type::now();
  outcome o{true, ""};
  for (const char* name : {"constant_binary", "varying", "lf_critical"}) {
    const auto r = gwcpp::check_tree_vs_chain(load(name));
    o.pass = o.pass && r.pass;
    o.detail += std::string(name) + " tv=" + fmt(r.metric) + (r.detail.empty() ? "" : " [" + r.detail + "]") + "; ";
  }
  const double elapsed = seconds_since(start);
  o.pass = o.pass && elapsed < 60.0;
  o.detail += fmt(elapsed) + " s";
  return o;
}

outcome criterion2() {
  outcome o{true, ""};
  for (const char* name : {"constant_binary", "varying", "lf_critical"}) {
    const auto parsed = load(name);
    for (int n = 1; n <= parsed.env.horizon(); ++n) {
      gwcpp::parsed_environment cut{gwcpp::override_horizon(parsed.env, n), std::nullopt};
      if (parsed.exact) cut.exact = gwcpp::override_horizon(*parsed.exact, n);
      const auto r = gwcpp::check_a1_identities(cut);
      o.pass = o.pass && r.pass;
      if (!r.pass) o.detail += std::string(name) + " N=" + std::to_string(n) + " gap " + fmt(r.metric) + "; ";
    }
  }
  const auto mc = gwcpp::check_a1_monte_carlo(load("mixed_n6").env, 100000, 2026);
  o.pass = o.pass && mc.pass;
  o.detail += "identities N<=3 on 3 envs; N=6 Monte Carlo worst z=" + fmt(mc.metric);
  return o;
}

outcome criterion3() {
  const gwcpp::environment env(
      std::vector<gwcpp::offspring_law>(6, gwcpp::offspring_law::linear_fractional_law(0.5, 0.5)));
  const auto r = gwcpp::check_lf_closed_forms(env, 50, 1e-10);
  double worst = 0.0;
  for (int n = 1; n <= 6; ++n) {
    const double expected = 1.0 / (n + 1);
    worst = std::max({worst, std::abs(gwcpp::lf_a1_tail(env, n) - expected),
                      std::abs(gwcpp::a1_tail_product(env, n) - expected)});
  }
  return {r.pass && worst < 1e-12, "1/(n+1) gap " + fmt(worst) + "; eta gap " + fmt(r.metric)};
}

outcome criterion4() {
  const auto lf = gwcpp::lf_iid_check(load("lf_critical").env);
  const gwcpp::environment control(
      std::vector<gwcpp::offspring_law>(2, gwcpp::offspring_law::finite({0.25, 0.5, 0.25})));
  const auto c = gwcpp::independence_control(control);
  return {lf.pass && c.pass, "LF tv=" + fmt(lf.metric) + " (bound " + fmt(lf.threshold) + "), control tv=" + fmt(c.metric)};
}

outcome criterion5() {
  const auto start = clock_type::now();
  const auto report = gwcpp::figure1_consistency();
  const double elapsed = seconds_since(start);
  std::string detail = fmt(elapsed * 1000) + " ms";
  for (const auto& m : report.mismatches) detail += "; " + m;
  return {report.pass && elapsed < 1.0, detail};
}

outcome criterion6() {
  const auto start = clock_type::now();
  gwcpp::witness_check_options options;
  options.samples = 1'000'000;
  options.seed = 7;
  const auto r = gwcpp::check_witness(load("witness").env, options);
  const double elapsed = seconds_since(start);
  std::string detail = r.inconclusive ? "inconclusive: " + r.detail : "tv=" + fmt(r.metric) + " " + r.detail;
  return {r.pass && elapsed < 300.0, detail + "; " + fmt(elapsed) + " s"};
}

outcome criterion7() {
  outcome o{true, ""};
  double worst = 0.0;
  for (const char* name : {"constant_binary", "varying", "lf_critical", "lf_varying", "binary_dirac", "witness", "mixed_n6"}) {
    const auto r = gwcpp::check_numerical_hygiene(load(name).env);
    o.pass = o.pass && r.pass;
    worst = std::max(worst, r.metric);
    if (!r.pass) o.detail += std::string(name) + ": " + r.detail + "; ";
  }
  o.detail += "worst relative error " + fmt(worst);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

outcome criterion8() {
  const fs::path dir = fs::temp_directory_path() / ("gwcpp_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const std::vector<std::string> commands{
      "simulate --env " + envs + "/mixed_n6.json --samples 2000 --seed 11",
      "simulate --env " + envs + "/varying.json --samples 500 --seed 3 --format json",
      "chain --process b --trace --env " + envs + "/varying.json --samples 500 --seed 4",
      "chain --process d --env " + envs + "/mixed_n6.json --samples 500 --seed 4 --max-individuals 20",
      "chain --process lf --env " + envs + "/lf_varying.json --samples 500 --seed 4 --format json",
      "eta --env " + envs + "/varying.json",
      "tail --env " + envs + "/lf_critical.json",
      "verify --witness --env " + envs + "/witness.json --samples 20000 --seed 5",
  };
  outcome o{true, ""};
  int index = 0;
  for (const auto& command : commands) {
    std::vector<std::string> outputs;
    for (int threads : {1, 4, 1, 4}) {
      const fs::path out = dir / ("run" + std::to_string(index) + "_" + std::to_string(outputs.size()) + ".out");
      const std::string line =
          cli + " " + command + " --threads " + std::to_string(threads) + " --out " + out.string() + " 2>/dev/null";
      const int status = std::system(line.c_str());
      if (!WIFEXITED(status) || WEXITSTATUS(status) != 0) {
        o.pass = false;
        o.detail += "exit " + std::to_string(WEXITSTATUS(status)) + " for '" + command + "'; ";
      }
      outputs.push_back(slurp(out));
    }
    for (const auto& text : outputs)
      if (text != outputs.front() || text.empty()) {
        o.pass = false;
        o.detail += "output differs for '" + command + "'; ";
        break;
      }
    ++index;
  }
  fs::remove_all(dir);
  o.detail += std::to_string(commands.size()) + " commands x threads {1,4} x 2 repeats";
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<outcome()>>> criteria{
      {"1 tree law equals chain law", criterion1},
      {"2 A_1 law identities", criterion2},
      {"3 linear-fractional closed forms", criterion3},
      {"4 linear-fractional independence", criterion4},
      {"5 worked example", criterion5},
      {"6 point-measure witness", criterion6},
      {"7 numerical hygiene", criterion7},
      {"8 determinism", criterion8},
  };
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << o.detail << ")" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
