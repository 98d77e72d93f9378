// Command-line front end: simulation campaigns, backward chains, exact
// verification suites and eta/tail tables.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gwcpp/gwcpp.hpp"

namespace {

enum exit_code : int { ok = 0, check_failed = 1, config_error = 2, degenerate = 3, guard = 4 };

struct run_config {
  std::string env_path;
  std::uint64_t seed = 1;
  std::uint64_t samples = 1000;
  int horizon = 0;
  int threads = 1;
  std::string out;
  std::string format = "csv";
};

struct chain_config {
  std::string process = "b";
  int max_individuals = 0;
  bool trace = false;
  bool validate = false;
};

struct verify_config {
  bool figure1 = false;
  bool witness = false;
  int lf_max_individuals = 6;
  double witness_threshold = 0.01;
};

void add_common(CLI::App* cmd, run_config& cfg, bool env_required) {
  auto* env = cmd->add_option("--env", cfg.env_path, "Environment JSON file");
  if (env_required) env->required();
  cmd->add_option("--seed", cfg.seed, "Base seed (64-bit)");
  cmd->add_option("--samples", cfg.samples, "Number of runs")->check(CLI::PositiveNumber);
  cmd->add_option("--horizon", cfg.horizon, "Keep only the most recent N generations")->check(CLI::PositiveNumber);
  cmd->add_option("--threads", cfg.threads, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
  cmd->add_option("--out", cfg.out, "Output file (stdout if omitted)");
  cmd->add_option("--format", cfg.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
}

gwcpp::parsed_environment load(const run_config& cfg) {
  auto parsed = gwcpp::load_environment(cfg.env_path);
  if (cfg.horizon > 0) {
    parsed.env = gwcpp::override_horizon(parsed.env, cfg.horizon);
    if (parsed.exact) parsed.exact = gwcpp::override_horizon(*parsed.exact, cfg.horizon);
  }
  return parsed;
}

void emit(const run_config& cfg, const std::string& text) {
  if (cfg.out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(cfg.out, std::ios::binary);
  if (!file) throw gwcpp::validation_error("cannot write '" + cfg.out + "'");
  file << text;
}

std::string join(const std::vector<int>& values, char sep) {
  std::string out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (k) out += sep;
    out += std::to_string(values[k]);
  }
  return out;
}

std::string number(double x) {
  std::ostringstream out;
  out << std::setprecision(17) << x;
  return out.str();
}

/// Empirical summary on stderr so the output file stays a pure table.
void summarize(const std::vector<std::pair<int, std::vector<int>>>& runs, int horizon, bool complete) {
  double mean_k = 0.0;
  for (const auto& [k, a] : runs) mean_k += k;
  mean_k /= static_cast<double>(runs.size());
  std::cerr << (complete ? "mean K = " : "mean K (capped runs count at the cap) = ") << mean_k << "\nP(A_1 > n):";
  for (int n = 1; n <= horizon; ++n) {
    std::size_t hits = 0;
    for (const auto& [k, a] : runs) hits += a.empty() || a.front() > n;
    std::cerr << ' ' << n << ':' << static_cast<double>(hits) / static_cast<double>(runs.size());
  }
  std::cerr << '\n';
}

int cmd_simulate(const run_config& cfg, const std::string& tree_out) {
  const auto parsed = load(cfg);
  const auto& env = parsed.env;
  if (!(gwcpp::survival_prob(env, env.horizon()) > 0.0))
    throw gwcpp::degenerate_error("the founder cannot leave present-day descendants");
  const gwcpp::environment_sampler sampler(env);
  struct result {
    gwcpp::coalescent_point_process cpp;
    std::string dump;
  };
  const bool dump = !tree_out.empty();
  const auto runs = gwcpp::parallel_runs(cfg.samples, cfg.threads, [&](std::uint64_t run) {
    gwcpp::engine gen = gwcpp::make_engine(cfg.seed, run);
    const auto t = gwcpp::condition_on_survival(sampler, gen, 1'000'000).tree;
    result r{gwcpp::coalescent_times(t), {}};
    if (dump) {
      std::ostringstream out;
      gwcpp::dump_tree(t, out);
      r.dump = out.str();
    }
    return r;
  });
  std::ostringstream out;
  if (cfg.format == "csv") {
    out << "run_id,K,A\n";
    for (std::size_t i = 0; i < runs.size(); ++i)
      out << i << ',' << runs[i].cpp.survivors << ',' << join(runs[i].cpp.times, ';') << '\n';
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < runs.size(); ++i)
      rows.push_back({{"run_id", i}, {"K", runs[i].cpp.survivors}, {"A", runs[i].cpp.times}});
    out << nlohmann::json{{"env_digest", gwcpp::environment_digest(env)}, {"seed", cfg.seed}, {"runs", rows}}.dump(1)
        << '\n';
  }
  emit(cfg, out.str());
  if (dump) {
    std::ofstream file(tree_out, std::ios::binary);
    if (!file) throw gwcpp::validation_error("cannot write '" + tree_out + "'");
    for (std::size_t i = 0; i < runs.size(); ++i) file << "# run " << i << '\n' << runs[i].dump;
  }
  std::vector<std::pair<int, std::vector<int>>> summary;
  for (const auto& r : runs) summary.emplace_back(r.cpp.survivors, r.cpp.times);
  summarize(summary, env.horizon(), true);
  return ok;
}

int cmd_chain(const run_config& cfg, const chain_config& chain) {
  const auto parsed = load(cfg);
  const auto& env = parsed.env;
  if (chain.process == "lf" && !env.is_linear_fractional())
    throw gwcpp::validation_error("--process lf needs every law to be linear fractional");
  if (chain.max_individuals == 1) throw gwcpp::validation_error("--max-individuals must be 0 or at least 2");
  std::optional<gwcpp::backward_kernel> kernel;
  std::optional<gwcpp::lf_cpp_sampler> lf;
  if (chain.process == "lf") {
    lf.emplace(env);
  } else {
    kernel.emplace(env);
  }
  const auto runs = gwcpp::parallel_runs(cfg.samples, cfg.threads, [&](std::uint64_t run) {
    gwcpp::engine gen = gwcpp::make_engine(cfg.seed, run);
    if (chain.process == "b") return gwcpp::b_run(*kernel, gen, chain.max_individuals);
    if (chain.process == "d") return gwcpp::d_run(*kernel, gen, chain.max_individuals);
    return gwcpp::lf_run(*lf, gen, chain.max_individuals);
  });
  int status = ok;
  if (chain.validate && chain.process != "lf") {
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const auto problem = gwcpp::validate_prefix_invariants(runs[i], chain.process == "b");
      if (!problem.empty()) {
        std::cerr << "run " << i << ": " << problem << '\n';
        status = check_failed;
      }
    }
    if (status == ok) std::cerr << "prefix invariants hold on all " << runs.size() << " runs\n";
  }
  auto k_field = [](const gwcpp::chain_run& r) {
    return r.terminated ? std::to_string(r.survivors()) : ">=" + std::to_string(r.survivors());
  };
  std::ostringstream out;
  if (cfg.format == "csv") {
    if (chain.trace) {
      out << "run_id,step,l,A,b_entries\n";
      for (std::size_t i = 0; i < runs.size(); ++i) gwcpp::write_trace_csv(out, i, runs[i]);
    } else {
      out << "run_id,K,A\n";
      for (std::size_t i = 0; i < runs.size(); ++i)
        out << i << ',' << k_field(runs[i]) << ',' << join(runs[i].coalescence_times(), ';') << '\n';
    }
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < runs.size(); ++i) {
      nlohmann::json row{{"run_id", i}, {"K", k_field(runs[i])}, {"A", runs[i].coalescence_times()}};
      if (chain.trace) {
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& s : runs[i].steps) steps.push_back({{"l", s.length}, {"A", s.coalescence}, {"b", s.entries}});
        row["steps"] = steps;
      }
      rows.push_back(row);
    }
    out << nlohmann::json{{"env_digest", gwcpp::environment_digest(env)},
                          {"process", chain.process},
                          {"seed", cfg.seed},
                          {"runs", rows}}
               .dump(1)
        << '\n';
  }
  emit(cfg, out.str());
  std::vector<std::pair<int, std::vector<int>>> summary;
  bool complete = true;
  for (const auto& r : runs) {
    summary.emplace_back(r.survivors(), r.coalescence_times());
    complete = complete && r.terminated;
  }
  summarize(summary, env.horizon(), complete);
  return status;
}

int cmd_verify(const run_config& cfg, const verify_config& v, bool samples_given) {
  std::vector<gwcpp::check_result> results;
  results.push_back(gwcpp::check_figure1());
  if (!v.figure1) {
    if (cfg.env_path.empty()) throw gwcpp::validation_error("verify needs --env unless --figure1 is given");
    const auto parsed = load(cfg);
    const auto& env = parsed.env;
    gwcpp::law_check_options options;
    options.lf_max_individuals = v.lf_max_individuals;
    if (env.horizon() <= 3) {
      results.push_back(gwcpp::check_tree_vs_chain(parsed, options));
      results.push_back(gwcpp::check_a1_identities(parsed, options));
      if (env.max_offspring()) results.push_back(gwcpp::check_prefix_laws(parsed, 4));
    }
    results.push_back(gwcpp::check_numerical_hygiene(env));
    if (env.is_linear_fractional()) {
      results.push_back(gwcpp::check_lf_closed_forms(env));
      if (env.horizon() <= 3) {
        results.push_back(gwcpp::lf_iid_check(env));
        results.push_back(gwcpp::check_geometric_d_exact(env, 3));
      }
    }
    if (v.witness) {
      gwcpp::witness_check_options w;
      w.search.threshold = v.witness_threshold;
      w.samples = samples_given ? cfg.samples : 1'000'000;
      w.seed = cfg.seed;
      w.threads = cfg.threads;
      results.push_back(gwcpp::check_witness(env, w));
    }
  }
  std::ostringstream out;
  bool all_pass = true;
  if (cfg.format == "json") {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : results) rows.push_back(gwcpp::to_json(r));
    out << rows.dump(1) << '\n';
  } else {
    out << "name,env_digest,metric,threshold,status\n";
    for (const auto& r : results)
      out << r.name << ',' << r.env_digest << ',' << number(r.metric) << ',' << number(r.threshold) << ','
          << (r.inconclusive ? "inconclusive" : (r.pass ? "pass" : "fail")) << '\n';
  }
  for (const auto& r : results) {
    all_pass = all_pass && r.pass;
    std::cerr << (r.inconclusive ? "INCONCLUSIVE " : (r.pass ? "PASS " : "FAIL ")) << r.name;
    if (!r.detail.empty()) std::cerr << " (" << r.detail << ')';
    std::cerr << '\n';
  }
  emit(cfg, out.str());
  return all_pass ? ok : check_failed;
}

int cmd_eta(const run_config& cfg) {
  const auto parsed = load(cfg);
  const auto laws = gwcpp::backward_eta_laws(parsed.env);
  std::ostringstream out;
  if (cfg.format == "csv") {
    out << "depth,k,prob\n";
    for (std::size_t m = 0; m < laws.size(); ++m) {
      const auto table = laws[m].materialize();
      for (std::size_t k = 0; k < table.size(); ++k) out << m + 1 << ',' << k << ',' << number(table[k]) << '\n';
    }
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t m = 0; m < laws.size(); ++m) {
      nlohmann::json row{{"depth", m + 1}, {"pmf", laws[m].materialize()}};
      if (laws[m].is_geometric()) row["geometric_success"] = laws[m].success();
      rows.push_back(row);
    }
    out << nlohmann::json{{"env_digest", gwcpp::environment_digest(parsed.env)}, {"eta", rows}}.dump(1) << '\n';
  }
  emit(cfg, out.str());
  return ok;
}

int cmd_tail(const run_config& cfg) {
  const auto parsed = load(cfg);
  const auto& env = parsed.env;
  const bool lf = env.is_linear_fractional();
  std::ostringstream out;
  if (cfg.format == "csv") {
    out << "n,a1_tail,eta_product" << (lf ? ",lf_closed_form" : "") << '\n';
    for (int n = 1; n <= env.horizon(); ++n) {
      out << n << ',' << number(gwcpp::a1_tail(env, n)) << ',' << number(gwcpp::a1_tail_product(env, n));
      if (lf) out << ',' << number(gwcpp::lf_a1_tail(env, n));
      out << '\n';
    }
  } else {
    nlohmann::json rows = nlohmann::json::array();
    for (int n = 1; n <= env.horizon(); ++n) {
      nlohmann::json row{{"n", n}, {"a1_tail", gwcpp::a1_tail(env, n)}, {"eta_product", gwcpp::a1_tail_product(env, n)}};
      if (lf) row["lf_closed_form"] = gwcpp::lf_a1_tail(env, n);
      rows.push_back(row);
    }
    out << nlohmann::json{{"env_digest", gwcpp::environment_digest(env)}, {"tail", rows}}.dump(1) << '\n';
  }
  emit(cfg, out.str());
  return ok;
}

constexpr const char* schemas = R"(Output schemas
  simulate csv : run_id,K,A            A = A_1;...;A_{K-1} (empty when K = 1)
  chain csv    : run_id,K,A            K is ">=C" when the run stopped at --max-individuals
  chain --trace: run_id,step,l,A,b_entries   b entries joined by ';'
  verify csv   : name,env_digest,metric,threshold,status
  eta csv      : depth,k,prob          eta^{(-depth)}; geometric laws cut at tail 1e-12
  tail csv     : n,a1_tail,eta_product[,lf_closed_form]
  json         : the same fields as objects; verify adds "pass" and "detail"
Run r draws from its own generator seeded by splitmix64(seed ^ splitmix64(r)),
so --threads never changes any output.
Exit codes: 0 ok, 1 check failure, 2 config error, 3 degenerate environment,
4 enumeration guard.)";

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galton-Watson trees in varying environment: genealogies and backward chains"};
  app.footer(schemas);
  app.require_subcommand(1);

  run_config cfg;
  chain_config chain;
  verify_config verify;
  std::string tree_out;

  auto* simulate = app.add_subcommand("simulate", "Simulate trees conditioned on survival and write their coalescence times");
  add_common(simulate, cfg, true);
  simulate->add_option("--tree-out", tree_out, "Also dump every tree (label child_count survives)");

  auto* chain_cmd = app.add_subcommand("chain", "Sample the backward chains");
  add_common(chain_cmd, cfg, true);
  chain_cmd->add_option("--process", chain.process, "b, d or lf")->check(CLI::IsMember({"b", "d", "lf"}));
  chain_cmd->add_option("--max-individuals", chain.max_individuals, "Stop once K reaches this (0 = never)")
      ->check(CLI::NonNegativeNumber);
  chain_cmd->add_flag("--trace", chain.trace, "Write every chain state");
  chain_cmd->add_flag("--validate", chain.validate, "Check the prefix invariants on every path");

  auto* verify_cmd = app.add_subcommand("verify", "Run the exact and Monte Carlo verification suites");
  add_common(verify_cmd, cfg, false);
  verify_cmd->add_flag("--figure1", verify.figure1, "Only the embedded worked example (no --env needed)");
  verify_cmd->add_flag("--witness", verify.witness, "Search for a history dependence of the point-measure process");
  verify_cmd->add_option("--witness-threshold", verify.witness_threshold, "Minimal TV for a witness");
  verify_cmd->add_option("--lf-cap", verify.lf_max_individuals, "K cap for unbounded laws")->check(CLI::Range(2, 12));

  auto* eta_cmd = app.add_subcommand("eta", "Dump the laws of eta at every depth");
  add_common(eta_cmd, cfg, true);
  auto* tail_cmd = app.add_subcommand("tail", "Dump P(A_1 > n) for n = 1..N");
  add_common(tail_cmd, cfg, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return config_error;
  }

  try {
    if (*simulate) return cmd_simulate(cfg, tree_out);
    if (*chain_cmd) return cmd_chain(cfg, chain);
    if (*verify_cmd) return cmd_verify(cfg, verify, verify_cmd->count("--samples") > 0);
    if (*eta_cmd) return cmd_eta(cfg);
    if (*tail_cmd) return cmd_tail(cfg);
  } catch (const gwcpp::validation_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const gwcpp::not_linear_fractional& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const gwcpp::degenerate_error& e) {
    std::cerr << "degenerate environment: " << e.what() << '\n';
    return degenerate;
  } catch (const gwcpp::enumeration_guard& e) {
    std::cerr << "enumeration guard: " << e.what() << '\n';
    return guard;
  } catch (const gwcpp::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return check_failed;
  }
  return ok;
}
