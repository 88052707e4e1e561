#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sabpi/dfa.hpp"
#include "sabpi/eval.hpp"
#include "sabpi/ltlf.hpp"
#include "sabpi/planner.hpp"
#include "sabpi/policy.hpp"
#include "sabpi/scenario.hpp"

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

int cmd_compile_dfa(const std::string& formula, const std::vector<std::string>& ap,
                    const std::string& out_path, const std::string& dot_path) {
  sabpi::LtlfFormula f;
  try {
    f = sabpi::parse_ltlf(formula, ap);
  } catch (const sabpi::LtlfParseError& e) {
    std::cerr << "parse error at offset " << e.offset << ": " << e.what() << "\n";
    return 2;
  }
  sabpi::Dfa dfa = sabpi::compile_dfa(f, static_cast<int>(ap.size()));
  nlohmann::json j = sabpi::dfa_to_json(dfa, ap);
  if (out_path.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_text(out_path, j.dump(2) + "\n");
  if (!dot_path.empty()) write_text(dot_path, sabpi::dfa_to_dot(dfa, ap));
  std::cerr << "states: " << dfa.num_states << "\n";
  return 0;
}

int cmd_plan(const std::string& scenario_path, const sabpi::PlannerConfig& cfg,
             const std::string& out_path, const std::string& report_path) {
  sabpi::Scenario s = sabpi::load_scenario_file(scenario_path);
  sabpi::PlanResult res = sabpi::plan(s, cfg);
  if (!out_path.empty()) sabpi::save_policy(res.policy, out_path);
  nlohmann::json rj = sabpi::report_to_json(res.report);
  if (report_path.empty())
    std::cout << rj.dump(2) << "\n";
  else
    write_text(report_path, rj.dump(2) + "\n");
  std::cerr << "value " << res.report.root_value << " after " << res.report.iterations
            << " iterations, " << res.report.node_count << " nodes, " << res.report.wall_time
            << " s\n";
  return 0;
}

int cmd_evaluate(const std::string& scenario_path, const std::string& policy_path, int trials,
                 std::uint64_t seed, const std::string& traces_path) {
  sabpi::Scenario s = sabpi::load_scenario_file(scenario_path);
  sabpi::PolicyArtifact policy = sabpi::load_policy_file(policy_path);
  std::vector<sabpi::TrialTrace> traces;
  sabpi::EvalReport rep =
      sabpi::execute_policy(s, policy, trials, seed, traces_path.empty() ? nullptr : &traces);
  nlohmann::json j;
  j["scenario"] = s.name;
  j["trials"] = rep.trials;
  j["successes"] = rep.successes;
  j["rate"] = rep.rate;
  j["ci_low"] = rep.ci_low;
  j["ci_high"] = rep.ci_high;
  j["stored_value"] = policy.root_value;
  j["exact_value"] = sabpi::policy_success_exact(policy);
  std::cout << j.dump(2) << "\n";
  if (!traces_path.empty()) {
    std::ostringstream out;
    for (const auto& t : traces) {
      nlohmann::json tj;
      tj["hypothesis"] = t.hypothesis;
      tj["success"] = t.success;
      nlohmann::json ev = nlohmann::json::array();
      for (const auto& e : t.events)
        ev.push_back({{"type", e.type}, {"region", e.region}, {"obs", e.obs}, {"t", e.t}});
      tj["events"] = std::move(ev);
      out << tj.dump() << "\n";
    }
    write_text(traces_path, out.str());
  }
  return 0;
}

int cmd_benchmark(const std::vector<std::string>& suite, const std::vector<std::string>& algos,
                  int seeds, sabpi::PlannerConfig base, const std::string& out_path) {
  std::vector<sabpi::PlanReport> reports;
  for (const auto& path : suite) {
    sabpi::Scenario s = sabpi::load_scenario_file(path);
    for (const auto& algo : algos) {
      for (int seed = 0; seed < seeds; ++seed) {
        sabpi::PlannerConfig cfg = base;
        cfg.algorithm = sabpi::algorithm_from_string(algo);
        cfg.seed = static_cast<std::uint64_t>(seed);
        sabpi::PlanResult res = sabpi::plan(s, cfg);
        std::cerr << s.name << " " << algo << " seed " << seed << ": value "
                  << res.report.root_value << " (" << res.report.node_count << " nodes)\n";
        reports.push_back(std::move(res.report));
      }
    }
  }
  std::string csv = sabpi::convergence_report(reports);
  if (out_path.empty())
    std::cout << csv;
  else
    write_text(out_path, csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anytime LTLf task-and-motion planning under semantic uncertainty"};
  app.require_subcommand(1);

  std::string formula, out_path, dot_path, scenario_path, policy_path, report_path, traces_path;
  std::vector<std::string> ap;
  auto* compile = app.add_subcommand("compile-dfa", "translate an LTLf formula to a DFA");
  compile->add_option("--formula", formula, "LTLf formula text")->required();
  compile->add_option("--ap", ap, "atomic proposition names, in label-bit order")->required();
  compile->add_option("--out", out_path, "output JSON path (default: stdout)");
  compile->add_option("--dot", dot_path, "also write a Graphviz rendering here");

  sabpi::PlannerConfig cfg;
  std::string algo = "sabpi";
  auto* plan = app.add_subcommand("plan", "plan a policy for a scenario");
  plan->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  plan->add_option("--algorithm", algo, "sabpi, rrt, or mcts-pw");
  plan->add_option("--time-limit", cfg.time_limit, "planning budget in seconds");
  plan->add_option("--k", cfg.k, "expansions per subtree selection");
  plan->add_option("--c", cfg.c, "exploration constant");
  plan->add_option("--seed", cfg.seed, "random seed");
  plan->add_option("--success-threshold", cfg.success_threshold, "stop once the value reaches this");
  plan->add_option("--max-nodes", cfg.max_nodes, "search tree size cap");
  plan->add_option("--max-iterations", cfg.max_iterations, "iteration cap, -1 for none");
  plan->add_flag("--voronoi,!--uniform", cfg.voronoi_select,
                 "bias expansion toward sparse regions (default) or pick uniformly");
  plan->add_option("--out", out_path, "policy output path");
  plan->add_option("--report", report_path, "report output path (default: stdout)");

  int trials = 10000;
  std::uint64_t eval_seed = 0;
  auto* evaluate = app.add_subcommand("evaluate", "Monte-Carlo execution of a saved policy");
  evaluate->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  evaluate->add_option("--policy", policy_path, "policy JSON file")->required();
  evaluate->add_option("--trials", trials, "number of simulated executions");
  evaluate->add_option("--seed", eval_seed, "random seed");
  evaluate->add_option("--traces", traces_path, "write per-trial traces as JSON lines");

  std::vector<std::string> suite, algos{"sabpi", "rrt", "mcts-pw"};
  int seeds = 5;
  auto* benchmark = app.add_subcommand("benchmark", "compare planners across scenarios and seeds");
  benchmark->add_option("--suite", suite, "scenario JSON files")->required();
  benchmark->add_option("--algorithms", algos, "planners to run");
  benchmark->add_option("--seeds", seeds, "seeds 0..N-1 per configuration");
  benchmark->add_option("--time-limit", cfg.time_limit, "budget per run in seconds");
  benchmark->add_option("--max-nodes", cfg.max_nodes, "search tree size cap");
  benchmark->add_option("--out", out_path, "CSV output path (default: stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (compile->parsed()) return cmd_compile_dfa(formula, ap, out_path, dot_path);
    if (plan->parsed()) {
      cfg.algorithm = sabpi::algorithm_from_string(algo);
      return cmd_plan(scenario_path, cfg, out_path, report_path);
    }
    if (evaluate->parsed())
      return cmd_evaluate(scenario_path, policy_path, trials, eval_seed, traces_path);
    if (benchmark->parsed()) return cmd_benchmark(suite, algos, seeds, cfg, out_path);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
