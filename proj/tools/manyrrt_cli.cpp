// Command-line front end: seed databases, single queries and benchmarks.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>

#include "manyrrt/bench.hpp"
#include "manyrrt/error.hpp"
#include "manyrrt/io.hpp"
#include "manyrrt/many_rrt.hpp"
#include "manyrrt/planners.hpp"

namespace fs = std::filesystem;
using namespace manyrrt;

namespace {

struct WorldArgs {
  std::string chain = "generic6";
  std::string env = "empty";
  std::uint64_t env_seed = 0;
  int obstacles = 20;
  bool planar = false;
  std::string world_file;

  void add(CLI::App* app) {
    app->add_option("--chain", chain, "built-in chain (planar2, generic6, generic7) or chain file");
    app->add_option("--env", env, "empty, table, wall, passage, random or bifurcated");
    app->add_option("--env-seed", env_seed, "seed of the random environment");
    app->add_option("--obstacles", obstacles, "sphere count of the random environment");
    app->add_flag("--planar", planar, "keep random obstacles in the z = 0 plane");
    app->add_option("--world", world_file, "world file; overrides --env");
  }

  World make(const SerialChain& c) const {
    if (!world_file.empty()) return load_world(world_file);
    return make_environment(env_kind_from_string(env), c.reach(), env_seed, {obstacles, planar});
  }
};

JointConfig to_config(const std::vector<double>& v, const SerialChain& chain, const char* what) {
  if (static_cast<int>(v.size()) != chain.dof()) {
    throw std::invalid_argument(std::string(what) + " needs " + std::to_string(chain.dof()) + " values");
  }
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

void summarize_dir(const std::string& dir, const std::string& format, std::ostream& out) {
  const fs::path file = fs::path(dir) / "results.csv";
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  const auto rows = summarize(read_results_csv(in, file.string()));
  if (format == "csv") {
    write_summary_csv(out, rows);
  } else if (format == "json") {
    write_summary_json(out, rows);
  } else {
    write_summary_markdown(out, rows);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Many-goal RRT* motion planning toolkit"};
  app.require_subcommand(1);

  // build-seeds
  WorldArgs seeds_world;
  std::size_t seed_count = 100000;
  std::uint64_t seeds_seed = 1;
  std::string seeds_out;
  auto* build = app.add_subcommand("build-seeds", "sample a collision-free seed database");
  seeds_world.add(build);
  build->add_option("--count", seed_count, "number of configurations");
  build->add_option("--seed", seeds_seed, "rng seed");
  build->add_option("--out", seeds_out, "output file")->required();

  // plan
  WorldArgs plan_world;
  std::vector<std::string> start_arg;
  std::vector<double> goal_pose;
  std::string planner = "many";
  std::size_t k = 10;
  long max_iters = 3000;
  double timeout_ms = 3000.0;
  long nodes_max = 0;
  std::uint64_t plan_seed = 1;
  std::string seeds_in, path_out, trace_out;
  bool parallel = false;
  auto* plan = app.add_subcommand("plan", "solve one query");
  plan_world.add(plan);
  plan->add_option("--start", start_arg, "start configuration or 'random'")->required();
  plan->add_option("--goal-pose", goal_pose, "x y z qw qx qy qz")->required()->expected(7);
  plan->add_option("--planner", planner, "rrtstar, connect or many")
      ->check(CLI::IsMember({"rrtstar", "connect", "many"}));
  plan->add_option("--k", k, "IK seeds for many");
  plan->add_option("--max-iters", max_iters, "iteration budget");
  plan->add_option("--timeout-ms", timeout_ms, "runtime budget");
  plan->add_option("--nodes-max", nodes_max, "node budget (default: max-iters)");
  plan->add_option("--seed", plan_seed, "rng seed");
  plan->add_option("--seeds", seeds_in, "seed database file (built on the fly otherwise)");
  plan->add_flag("--parallel", parallel, "grow goal trees on worker threads");
  plan->add_option("--out", path_out, "path output file");
  plan->add_option("--trace", trace_out, "best-cost trace CSV");

  // bench
  std::string suite_file, out_dir;
  auto* bench = app.add_subcommand("bench", "run a benchmark suite");
  bench->add_option("--suite", suite_file, "suite JSON")->required()->check(CLI::ExistingFile);
  bench->add_option("--out-dir", out_dir, "output directory")->required();

  // summarize
  std::string in_dir, format = "md";
  auto* summ = app.add_subcommand("summarize", "summarise a bench output directory");
  summ->add_option("--in", in_dir, "bench output directory")->required()->check(CLI::ExistingDirectory);
  summ->add_option("--format", format, "csv, json or md")->check(CLI::IsMember({"csv", "json", "md"}));

  // make-suite
  SuiteOptions suite;
  std::vector<std::string> env_names{"random", "wall", "passage"};
  std::string suite_out;
  long suite_iters = 3000;
  double suite_timeout = 3000.0;
  auto* make = app.add_subcommand("make-suite", "generate feasible benchmark queries");
  make->add_option("--chain", suite.chain, "chain");
  make->add_option("--envs", env_names, "environments")->delimiter(',');
  make->add_option("--trials", suite.trials, "queries per environment");
  make->add_option("--seed", suite.seed, "suite seed");
  make->add_option("--obstacles", suite.random_obstacles, "random environment sphere count");
  make->add_flag("--planar", suite.planar, "planar random obstacles");
  make->add_option("--max-iters", suite_iters, "iteration budget per trial");
  make->add_option("--timeout-ms", suite_timeout, "runtime budget per trial");
  make->add_option("--out", suite_out, "suite JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*build) {
      const SerialChain chain = chain_by_name_or_path(seeds_world.chain);
      const World world = seeds_world.make(chain);
      const auto model = RobotSphereModel::for_chain(chain);
      SeedDatabase::build(chain, model, world, seed_count, seeds_seed).save(seeds_out);
      std::cout << "wrote " << seed_count << " seeds to " << seeds_out << "\n";
    } else if (*plan) {
      const SerialChain chain = chain_by_name_or_path(plan_world.chain);
      const World world = plan_world.make(chain);
      const auto model = RobotSphereModel::for_chain(chain);
      ManyConfig cfg = ManyConfig::defaults_for(chain);
      cfg.base.max_iterations = max_iters;
      cfg.base.max_runtime_ms = timeout_ms;
      cfg.base.nodes_max = nodes_max > 0 ? nodes_max : max_iters;
      cfg.base.seed = plan_seed;
      cfg.k = k;
      cfg.parallel = parallel;
      const CollisionContext ctx{chain, model, world, cfg.base.edge_resolution};

      JointConfig start;
      if (start_arg.size() == 1 && start_arg[0] == "random") {
        std::mt19937_64 rng(plan_seed);
        for (int i = 0; i < 100000 && start.size() == 0; ++i) {
          JointConfig q = uniform_config(chain, rng);
          if (ctx.is_free(q)) start = q;
        }
        if (start.size() == 0) throw PlanningError(ErrorCode::kInfeasibleWorld, "no free start found");
      } else {
        std::vector<double> v;
        for (const auto& s : start_arg) v.push_back(std::stod(s));
        start = to_config(v, chain, "--start");
      }
      const Pose target = pose_from_values(goal_pose);

      PlanResult result;
      if (planner == "many") {
        const SeedDatabase db = seeds_in.empty() ? SeedDatabase::build(chain, model, world, 100000, 1)
                                                 : SeedDatabase::load(seeds_in);
        result = plan_many(ctx, start, target, db, cfg).plan;
      } else {
        auto goal = solve_ik_sqp(chain, target, start, cfg.ik);
        if (!goal) throw PlanningError(ErrorCode::kNoReachableGoal, "IK seeded at the start failed");
        result = planner == "rrtstar" ? plan_rrt_star(ctx, start, *goal, cfg.base)
                                      : plan_rrt_star_connect(ctx, start, *goal, cfg.base);
      }
      if (!path_out.empty() && result.success) save_path(result.path, path_out);
      if (!trace_out.empty()) save_trace_csv(result.trace, trace_out);
      std::cout << (result.success ? "success" : "failure") << " cost=" << render_cost(result.success ? result.path.cost : kInfinity)
                << " first_iteration=" << result.first_iteration << " iterations=" << result.iterations
                << " nodes=" << result.nodes << " goals=" << result.goal_count
                << " search_ms=" << result.timing.search_ms() << " stop=" << result.stop_reason << "\n";
      return result.success ? 0 : 2;
    } else if (*bench) {
      const auto specs = load_suite(suite_file);
      const auto results = run_suite(specs, out_dir);
      const auto rows = summarize(results);
      std::ofstream json_out(fs::path(out_dir) / "summary.json");
      write_summary_json(json_out, rows);
      std::ofstream md_out(fs::path(out_dir) / "summary.md");
      write_summary_markdown(md_out, rows);
      write_summary_markdown(std::cout, rows);
    } else if (*summ) {
      summarize_dir(in_dir, format, std::cout);
    } else if (*make) {
      const SerialChain chain = chain_by_name_or_path(suite.chain);
      suite.config = ManyConfig::defaults_for(chain);
      suite.config.base.max_iterations = suite_iters;
      suite.config.base.max_runtime_ms = suite_timeout;
      suite.config.base.nodes_max = suite_iters;
      suite.envs.clear();
      for (const auto& e : env_names) suite.envs.push_back(env_kind_from_string(e));
      SeedDbCache cache;
      const auto specs = make_suite(suite, cache);
      std::ofstream out(suite_out);
      if (!out) throw std::runtime_error("cannot write " + suite_out);
      write_suite(out, specs);
      std::cout << "wrote " << specs.size() << " trials to " << suite_out << "\n";
    }
  } catch (const PlanningError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
