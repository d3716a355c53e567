#include "manyrrt/bench.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "manyrrt/error.hpp"
#include "manyrrt/io.hpp"

namespace manyrrt {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string to_string(PlannerKind kind) {
  switch (kind) {
    case PlannerKind::RrtStar: return "rrtstar";
    case PlannerKind::Connect: return "connect";
    case PlannerKind::Many: return "many";
  }
  return "unknown";
}

PlannerKind planner_kind_from_string(const std::string& name) {
  if (name == "rrtstar") return PlannerKind::RrtStar;
  if (name == "connect") return PlannerKind::Connect;
  if (name == "many") return PlannerKind::Many;
  throw std::invalid_argument("unknown planner '" + name + "'");
}

const SeedDatabase& SeedDbCache::get(const SerialChain& chain, const RobotSphereModel& model,
                                     const World& world, std::size_t size, std::uint64_t seed) {
  auto key = std::make_tuple(chain.hash(), world.hash(), size, seed);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    // Suites visit worlds in order, so evicting the oldest entry rarely costs a rebuild.
    if (order_.size() >= capacity_) {
      cache_.erase(order_.front());
      order_.pop_front();
    }
    it = cache_.emplace(key, std::make_unique<SeedDatabase>(SeedDatabase::build(chain, model, world, size, seed)))
             .first;
    order_.push_back(key);
  }
  return *it->second;
}

// ---------------------------------------------------------------- trials

namespace {

void copy_plan(const PlanResult& plan, TrialResult& r) {
  r.success = plan.success;
  r.first_iteration = plan.first_iteration;
  r.first_ms = plan.first_ms;
  r.first_cost = plan.first_cost;
  r.final_iteration = plan.final_iteration;
  r.final_ms = plan.final_ms;
  r.final_cost = plan.success ? plan.path.cost : kInfinity;
  r.search_ms = plan.timing.search_ms();
  r.init_ms = plan.timing.init_ms();
  r.ik_ms = plan.ik_ms;
  r.nodes = plan.nodes;
  r.goal_count = plan.goal_count;
  r.goal_index = plan.goal_index;
  r.iterations = plan.iterations;
  r.stop_reason = plan.stop_reason;
  r.trace = plan.trace;
  r.path = plan.path;
}

}  // namespace

TrialResult run_trial(const TrialSpec& spec, SeedDbCache& cache) {
  TrialResult r;
  r.id = spec.id;
  r.chain = spec.chain;
  r.env = to_string(spec.env.kind);
  r.planner = to_string(spec.planner);
  r.max_iterations = spec.config.base.max_iterations;
  try {
    const SerialChain chain = chain_by_name_or_path(spec.chain);
    const RobotSphereModel model = RobotSphereModel::for_chain(chain);
    const World world = make_environment(spec.env.kind, chain.reach(), spec.env.seed, spec.env.options);
    const CollisionContext ctx{chain, model, world, spec.config.base.edge_resolution};
    if (spec.start.size() != chain.dof()) throw std::invalid_argument("start has the wrong dimension");

    if (spec.planner == PlannerKind::Many) {
      const SeedDatabase& db = cache.get(chain, model, world, spec.seed_db_size, spec.seed_db_seed);
      ManyResult m = plan_many(ctx, spec.start, spec.goal_pose, db, spec.config);
      copy_plan(m.plan, r);
      return r;
    }
    JointConfig goal;
    const auto t0 = Clock::now();
    if (spec.baseline_goal) {
      goal = *spec.baseline_goal;
    } else if (auto q = solve_ik_sqp(chain, spec.goal_pose, spec.start, spec.config.ik)) {
      goal = *q;
    } else {
      r.error = "ik from start configuration failed";
      return r;
    }
    const double ik_ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    PlanResult plan = spec.planner == PlannerKind::RrtStar ? plan_rrt_star(ctx, spec.start, goal, spec.config.base)
                                                           : plan_rrt_star_connect(ctx, spec.start, goal, spec.config.base);
    plan.ik_ms = ik_ms;
    copy_plan(plan, r);
  } catch (const std::exception& e) {
    r.success = false;
    r.error = e.what();
  }
  return r;
}

std::vector<TrialResult> run_suite(const std::vector<TrialSpec>& specs, const std::string& out_dir,
                                   SeedDbCache* cache) {
  SeedDbCache local;
  SeedDbCache& c = cache ? *cache : local;
  std::ofstream csv;
  if (!out_dir.empty()) {
    fs::create_directories(fs::path(out_dir) / "traces");
    csv.open(fs::path(out_dir) / "results.csv");
    if (!csv) throw std::runtime_error("cannot write results to " + out_dir);
    write_results_csv(csv, {});
  }
  std::vector<TrialResult> results;
  results.reserve(specs.size());
  for (const TrialSpec& spec : specs) {
    results.push_back(run_trial(spec, c));
    if (!out_dir.empty()) {
      write_result_row(csv, results.back());
      csv.flush();
      save_trace_csv(results.back().trace, (fs::path(out_dir) / "traces" / (spec.id + ".csv")).string());
    }
  }
  return results;
}

// ---------------------------------------------------------------- summary

namespace {

template <typename T>
T nearest_rank_impl(std::vector<T> values, double p) {
  if (values.empty()) throw std::invalid_argument("nearest_rank of an empty set");
  if (!(p > 0.0 && p <= 100.0)) throw std::invalid_argument("percentile must be in (0, 100]");
  std::sort(values.begin(), values.end());
  auto rank = static_cast<std::size_t>(std::ceil(p / 100.0 * static_cast<double>(values.size()) - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, values.size());
  return values[rank - 1];
}

double median_or_inf(std::vector<double> v) {
  return v.empty() ? kInfinity : nearest_rank_impl(std::move(v), 50.0);
}

double mean_or_inf(const std::vector<double>& v) {
  if (v.empty()) return kInfinity;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

long nearest_rank(std::vector<long> values, double p) { return nearest_rank_impl(std::move(values), p); }
double nearest_rank(std::vector<double> values, double p) { return nearest_rank_impl(std::move(values), p); }

std::vector<SummaryRow> summarize(const std::vector<TrialResult>& results) {
  std::map<std::pair<std::string, std::string>, std::vector<const TrialResult*>> groups;
  for (const TrialResult& r : results) groups[{r.env, r.planner}].push_back(&r);
  std::vector<SummaryRow> rows;
  for (const auto& [key, group] : groups) {
    SummaryRow row;
    row.env = key.first;
    row.planner = key.second;
    row.trials = group.size();
    for (const TrialResult* r : group) row.max_iterations = std::max(row.max_iterations, r->max_iterations);
    std::vector<long> first_iter;
    std::vector<double> first_cost, final_cost, first_ms, final_ms;
    double search_sum = 0.0;
    for (const TrialResult* r : group) {
      search_sum += r->search_ms;
      if (r->success) {
        ++row.successes;
        first_iter.push_back(r->first_iteration);
        first_cost.push_back(r->first_cost);
        final_cost.push_back(r->final_cost);
        first_ms.push_back(r->first_ms);
        final_ms.push_back(r->final_ms);
      } else {
        first_iter.push_back(row.max_iterations + 1);
      }
    }
    row.success_rate = static_cast<double>(row.successes) / static_cast<double>(row.trials);
    row.p10_first_iteration = nearest_rank(first_iter, 10.0);
    row.p50_first_iteration = nearest_rank(first_iter, 50.0);
    row.p90_first_iteration = nearest_rank(first_iter, 90.0);
    row.median_first_cost = median_or_inf(first_cost);
    row.median_final_cost = median_or_inf(final_cost);
    row.mean_first_ms = mean_or_inf(first_ms);
    row.mean_final_ms = mean_or_inf(final_ms);
    row.mean_search_ms = search_sum / static_cast<double>(row.trials);
    rows.push_back(row);
  }
  return rows;
}

std::string render_iteration(long value, long max_iterations) {
  return value > max_iterations ? ">" + std::to_string(max_iterations) : std::to_string(value);
}

std::string render_cost(double value) {
  if (!std::isfinite(value)) return "inf";
  std::ostringstream ss;
  ss << std::fixed << std::setprecision(3) << value;
  return ss.str();
}

// ---------------------------------------------------------------- csv

namespace {

const char* kResultHeader =
    "id,chain,env,planner,success,first_iteration,first_ms,first_cost,final_iteration,final_ms,final_cost,"
    "search_ms,init_ms,ik_ms,nodes,goal_count,goal_index,iterations,max_iterations,stop_reason,error";

std::string number_cell(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream ss;
  ss << std::setprecision(17) << v;
  return ss.str();
}

// Quoted as in RFC 4180 when the text holds a comma or quote; newlines become spaces.
std::string text_cell(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch != '"') {
        cells.back() += ch;
      } else if (i + 1 < line.size() && line[i + 1] == '"') {
        cells.back() += '"';
        ++i;
      } else {
        quoted = false;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.emplace_back();
    } else {
      cells.back() += ch;
    }
  }
  return cells;
}

double parse_double(const std::string& s, const std::string& where) {
  if (s == "inf") return kInfinity;
  if (s == "-inf") return -kInfinity;
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used == s.size()) return v;
  } catch (const std::exception&) {
  }
  throw PlanningError(ErrorCode::kFormat, where + ": not a number: '" + s + "'");
}

}  // namespace

void write_result_row(std::ostream& out, const TrialResult& r) {
  out << text_cell(r.id) << ',' << text_cell(r.chain) << ',' << r.env << ',' << r.planner << ','
      << (r.success ? 1 : 0) << ',' << r.first_iteration << ',' << number_cell(r.first_ms) << ','
      << number_cell(r.first_cost) << ',' << r.final_iteration << ',' << number_cell(r.final_ms) << ','
      << number_cell(r.final_cost) << ',' << number_cell(r.search_ms) << ',' << number_cell(r.init_ms) << ','
      << number_cell(r.ik_ms) << ',' << r.nodes << ',' << r.goal_count << ',' << r.goal_index << ','
      << r.iterations << ',' << r.max_iterations << ',' << text_cell(r.stop_reason) << ','
      << text_cell(r.error) << '\n';
}

void write_results_csv(std::ostream& out, const std::vector<TrialResult>& results) {
  out << kResultHeader << '\n';
  for (const TrialResult& r : results) write_result_row(out, r);
}

std::vector<TrialResult> read_results_csv(std::istream& in, const std::string& source) {
  std::vector<TrialResult> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (number == 1) {
      if (line != kResultHeader) throw PlanningError(ErrorCode::kFormat, source + ":1: unexpected header");
      continue;
    }
    if (line.empty()) continue;
    const std::vector<std::string> c = split_csv(line);
    const std::string where = source + ":" + std::to_string(number);
    if (c.size() != 21) throw PlanningError(ErrorCode::kFormat, where + ": expected 21 columns");
    auto as_long = [&](const std::string& s) { return static_cast<long>(parse_double(s, where)); };
    TrialResult r;
    r.id = c[0];
    r.chain = c[1];
    r.env = c[2];
    r.planner = c[3];
    r.success = c[4] == "1";
    r.first_iteration = as_long(c[5]);
    r.first_ms = parse_double(c[6], where);
    r.first_cost = parse_double(c[7], where);
    r.final_iteration = as_long(c[8]);
    r.final_ms = parse_double(c[9], where);
    r.final_cost = parse_double(c[10], where);
    r.search_ms = parse_double(c[11], where);
    r.init_ms = parse_double(c[12], where);
    r.ik_ms = parse_double(c[13], where);
    r.nodes = static_cast<std::size_t>(as_long(c[14]));
    r.goal_count = static_cast<std::size_t>(as_long(c[15]));
    r.goal_index = static_cast<int>(as_long(c[16]));
    r.iterations = as_long(c[17]);
    r.max_iterations = as_long(c[18]);
    r.stop_reason = c[19];
    r.error = c[20];
    out.push_back(std::move(r));
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "env,planner,trials,successes,success_rate,p10_first_iteration,p50_first_iteration,"
         "p90_first_iteration,median_first_cost,median_final_cost,mean_first_ms,mean_final_ms,mean_search_ms\n";
  for (const SummaryRow& r : rows) {
    out << r.env << ',' << r.planner << ',' << r.trials << ',' << r.successes << ',' << number_cell(r.success_rate)
        << ',' << render_iteration(r.p10_first_iteration, r.max_iterations) << ','
        << render_iteration(r.p50_first_iteration, r.max_iterations) << ','
        << render_iteration(r.p90_first_iteration, r.max_iterations) << ',' << number_cell(r.median_first_cost)
        << ',' << number_cell(r.median_final_cost) << ',' << number_cell(r.mean_first_ms) << ','
        << number_cell(r.mean_final_ms) << ',' << number_cell(r.mean_search_ms) << '\n';
  }
}

void write_summary_json(std::ostream& out, const std::vector<SummaryRow>& rows) {
  // JSON has no infinity; infinite values become null next to a rendered string.
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json arr = json::array();
  for (const SummaryRow& r : rows) {
    arr.push_back({
        {"env", r.env},
        {"planner", r.planner},
        {"trials", r.trials},
        {"successes", r.successes},
        {"success_rate", r.success_rate},
        {"max_iterations", r.max_iterations},
        {"first_iteration_percentiles",
         {{"p10", r.p10_first_iteration}, {"p50", r.p50_first_iteration}, {"p90", r.p90_first_iteration}}},
        {"first_iteration_rendered",
         {{"p10", render_iteration(r.p10_first_iteration, r.max_iterations)},
          {"p50", render_iteration(r.p50_first_iteration, r.max_iterations)},
          {"p90", render_iteration(r.p90_first_iteration, r.max_iterations)}}},
        {"median_first_cost", num(r.median_first_cost)},
        {"median_final_cost", num(r.median_final_cost)},
        {"median_cost_rendered", {{"first", render_cost(r.median_first_cost)}, {"final", render_cost(r.median_final_cost)}}},
        {"mean_first_ms", num(r.mean_first_ms)},
        {"mean_final_ms", num(r.mean_final_ms)},
        {"mean_search_ms", r.mean_search_ms},
    });
  }
  out << json{{"rows", arr}}.dump(2) << '\n';
}

void write_summary_markdown(std::ostream& out, const std::vector<SummaryRow>& rows) {
  out << "| env | planner | success | iter p10 | iter p50 | iter p90 | median first cost | median final cost "
         "| mean ms to first | mean ms to final | mean search ms |\n";
  out << "|---|---|---|---|---|---|---|---|---|---|---|\n";
  auto ms = [](double v) {
    if (!std::isfinite(v)) return std::string("inf");
    std::ostringstream ss;
    ss << std::fixed << std::setprecision(1) << v;
    return ss.str();
  };
  for (const SummaryRow& r : rows) {
    std::ostringstream rate;
    rate << std::fixed << std::setprecision(1) << 100.0 * r.success_rate << "%";
    out << "| " << r.env << " | " << r.planner << " | " << rate.str() << " | "
        << render_iteration(r.p10_first_iteration, r.max_iterations) << " | "
        << render_iteration(r.p50_first_iteration, r.max_iterations) << " | "
        << render_iteration(r.p90_first_iteration, r.max_iterations) << " | " << render_cost(r.median_first_cost)
        << " | " << render_cost(r.median_final_cost) << " | " << ms(r.mean_first_ms) << " | "
        << ms(r.mean_final_ms) << " | " << ms(r.mean_search_ms) << " |\n";
  }
}

// ---------------------------------------------------------------- suite json

namespace {

json vec_json(const JointConfig& q) { return std::vector<double>(q.data(), q.data() + q.size()); }

JointConfig vec_from(const json& j) {
  const auto v = j.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json config_json(const ManyConfig& c) {
  return {
      {"extend_step", c.base.extend_step},
      {"max_iterations", c.base.max_iterations},
      {"max_runtime_ms", c.base.max_runtime_ms},
      {"nodes_max", c.base.nodes_max},
      {"goal_bias", c.base.goal_bias},
      {"rewire_radius_scale", c.base.rewire_radius_scale},
      {"edge_resolution", c.base.edge_resolution},
      {"k", c.k},
      {"gamma0", c.gamma0},
      {"goal_tree_bias", c.goal_tree_bias},
      {"connect_tolerance", c.connect_tolerance},
      {"parallel", c.parallel},
      {"greedy_exploit", c.greedy_exploit},
      {"bridge_fresh", c.bridge_fresh},
      {"dedup_eps", c.dedup_eps},
  };
}

// Fields absent from the file keep the chain's defaults.
ManyConfig config_from(const json& j, const SerialChain& chain) {
  ManyConfig c = ManyConfig::defaults_for(chain);
  c.base.extend_step = j.value("extend_step", c.base.extend_step);
  c.base.max_iterations = j.value("max_iterations", c.base.max_iterations);
  c.base.max_runtime_ms = j.value("max_runtime_ms", c.base.max_runtime_ms);
  c.base.nodes_max = j.value("nodes_max", c.base.nodes_max);
  c.base.goal_bias = j.value("goal_bias", c.base.goal_bias);
  c.base.rewire_radius_scale = j.value("rewire_radius_scale", c.base.rewire_radius_scale);
  c.base.edge_resolution = j.value("edge_resolution", c.base.edge_resolution);
  c.k = j.value("k", c.k);
  c.gamma0 = j.value("gamma0", c.gamma0);
  c.goal_tree_bias = j.value("goal_tree_bias", c.goal_tree_bias);
  c.connect_tolerance = j.value("connect_tolerance", c.connect_tolerance);
  c.parallel = j.value("parallel", c.parallel);
  c.greedy_exploit = j.value("greedy_exploit", c.greedy_exploit);
  c.bridge_fresh = j.value("bridge_fresh", c.bridge_fresh);
  c.dedup_eps = j.value("dedup_eps", c.dedup_eps);
  return c;
}

}  // namespace

std::vector<TrialSpec> parse_suite(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw PlanningError(ErrorCode::kFormat, std::string("suite: ") + e.what());
  }
  std::vector<TrialSpec> specs;
  try {
    std::size_t index = 0;
    for (const json& t : doc.at("trials")) {
      TrialSpec s;
      s.id = t.value("id", "trial-" + std::to_string(index));
      s.chain = t.value("chain", s.chain);
      const SerialChain chain = chain_by_name_or_path(s.chain);
      const json& env = t.at("env");
      s.env.kind = env_kind_from_string(env.at("kind").get<std::string>());
      s.env.seed = env.value("seed", std::uint64_t{0});
      s.env.options.random_obstacles = env.value("obstacles", s.env.options.random_obstacles);
      s.env.options.planar = env.value("planar", s.env.options.planar);
      s.start = vec_from(t.at("start"));
      s.goal_pose = pose_from_values(t.at("goal_pose").get<std::vector<double>>());
      s.planner = planner_kind_from_string(t.at("planner").get<std::string>());
      if (t.contains("baseline_goal")) s.baseline_goal = vec_from(t.at("baseline_goal"));
      s.config = config_from(t.value("config", json::object()), chain);
      s.config.base.seed = t.value("seed", s.config.base.seed);
      s.seed_db_size = t.value("seed_db_size", s.seed_db_size);
      s.seed_db_seed = t.value("seed_db_seed", s.seed_db_seed);
      specs.push_back(std::move(s));
      ++index;
    }
  } catch (const json::exception& e) {
    throw PlanningError(ErrorCode::kFormat, std::string("suite: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw PlanningError(ErrorCode::kFormat, std::string("suite: ") + e.what());
  }
  return specs;
}

std::vector<TrialSpec> load_suite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PlanningError(ErrorCode::kFormat, "cannot open " + path);
  return parse_suite(in);
}

void write_suite(std::ostream& out, const std::vector<TrialSpec>& specs) {
  json trials = json::array();
  for (const TrialSpec& s : specs) {
    json t = {
        {"id", s.id},
        {"chain", s.chain},
        {"env",
         {{"kind", to_string(s.env.kind)},
          {"seed", s.env.seed},
          {"obstacles", s.env.options.random_obstacles},
          {"planar", s.env.options.planar}}},
        {"start", vec_json(s.start)},
        {"goal_pose", pose_values(s.goal_pose)},
        {"planner", to_string(s.planner)},
        {"config", config_json(s.config)},
        {"seed", s.config.base.seed},
        {"seed_db_size", s.seed_db_size},
        {"seed_db_seed", s.seed_db_seed},
    };
    if (s.baseline_goal) t["baseline_goal"] = vec_json(*s.baseline_goal);
    trials.push_back(std::move(t));
  }
  out << std::setprecision(17) << json{{"trials", trials}}.dump(1) << '\n';
}

// ---------------------------------------------------------------- suite generation

namespace {

std::optional<JointConfig> random_free(const CollisionContext& ctx, std::mt19937_64& rng, int tries = 10000) {
  for (int i = 0; i < tries; ++i) {
    JointConfig q = uniform_config(ctx.chain, rng);
    if (ctx.is_free(q)) return q;
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::pair<JointConfig, Pose>> wall_query(const CollisionContext& ctx, std::mt19937_64& rng,
                                                       int tries) {
  const double l = ctx.chain.reach();
  auto in_region = [&](const JointConfig& q, double side) {
    const Eigen::Vector3d p = forward_kinematics(ctx.chain, q).position;
    return p.x() >= 0.4 * l && p.x() <= 0.8 * l && side * p.y() >= 0.2 * l && side * p.y() <= 0.45 * l &&
           p.z() >= 0.2 * l && p.z() <= 0.6 * l;
  };
  std::optional<JointConfig> start, goal;
  for (int i = 0; i < tries && !(start && goal); ++i) {
    JointConfig q = uniform_config(ctx.chain, rng);
    const bool want_start = !start && in_region(q, 1.0);
    const bool want_goal = !goal && in_region(q, -1.0);
    if (!(want_start || want_goal) || !ctx.is_free(q)) continue;
    (want_start ? start : goal) = std::move(q);
  }
  if (!start || !goal) return std::nullopt;
  return std::make_pair(*start, forward_kinematics(ctx.chain, *goal));
}

std::vector<TrialSpec> make_suite(const SuiteOptions& options, SeedDbCache& cache) {
  const SerialChain chain = chain_by_name_or_path(options.chain);
  const RobotSphereModel model = RobotSphereModel::for_chain(chain);
  std::vector<TrialSpec> specs;

  for (std::size_t e = 0; e < options.envs.size(); ++e) {
    const EnvKind kind = options.envs[e];
    for (std::size_t t = 0; t < options.trials; ++t) {
      bool accepted = false;
      for (std::uint64_t attempt = 0; attempt < 1000 && !accepted; ++attempt) {
        const std::uint64_t qseed = derive_seed(options.seed, (e << 40) | (t << 12) | attempt);
        EnvSpec env{kind, kind == EnvKind::Random ? qseed : 0, {options.random_obstacles, options.planar}};
        const World world = make_environment(kind, chain.reach(), env.seed, env.options);
        const CollisionContext ctx{chain, model, world, options.config.base.edge_resolution};
        std::mt19937_64 rng(qseed);

        JointConfig start;
        Pose goal_pose;
        if (kind == EnvKind::Wall || kind == EnvKind::Passage) {
          auto query = wall_query(ctx, rng);
          if (!query) continue;
          std::tie(start, goal_pose) = *query;
        } else {
          auto s = random_free(ctx, rng);
          auto g = random_free(ctx, rng);
          if (!s || !g) continue;
          start = *s;
          goal_pose = forward_kinematics(chain, *g);
        }

        // A feasible plan must exist before any benchmarked planner runs.
        auto feasible = [&] {
          GoalSet goals;
          try {
            goals = sample_goal_set(chain, model, world, cache.get(chain, model, world, options.seed_db_size, 1),
                                    goal_pose, options.config.ik, {options.config.k, options.config.dedup_eps, false});
          } catch (const PlanningError&) {
            return false;
          }
          PlannerConfig check = options.config.base;
          check.max_iterations = options.feasibility_iterations;
          check.nodes_max = 2 * options.feasibility_iterations;
          check.max_runtime_ms = options.feasibility_ms;
          check.seed = qseed;
          for (const JointConfig& g : goals.configs) {
            if (plan_rrt_star_connect(ctx, start, g, check).success) return true;
          }
          return false;
        };
        accepted = feasible();
        if (!accepted) continue;

        for (PlannerKind p : options.planners) {
          TrialSpec s;
          std::ostringstream id;
          id << to_string(kind) << '-' << std::setw(3) << std::setfill('0') << t << '-' << to_string(p);
          s.id = id.str();
          s.chain = options.chain;
          s.env = env;
          s.start = start;
          s.goal_pose = goal_pose;
          s.planner = p;
          s.config = options.config;
          s.config.base.seed = derive_seed(options.seed, 1000000 + t);
          s.seed_db_size = options.seed_db_size;
          specs.push_back(std::move(s));
        }
      }
      if (!accepted) {
        throw PlanningError(ErrorCode::kInfeasibleWorld,
                            "no feasible query for " + to_string(kind) + " trial " + std::to_string(t));
      }
    }
  }
  return specs;
}

}  // namespace manyrrt
