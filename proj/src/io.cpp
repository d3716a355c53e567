#include "manyrrt/io.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "manyrrt/error.hpp"

namespace manyrrt {

namespace {

// Tokenised, comment-stripped lines with their 1-based numbers.
struct Line {
  int number;
  std::vector<std::string> tokens;
};

std::vector<Line> read_lines(std::istream& in) {
  std::vector<Line> out;
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    std::istringstream ss(raw);
    Line line{number, {}};
    for (std::string tok; ss >> tok;) line.tokens.push_back(tok);
    if (!line.tokens.empty()) out.push_back(std::move(line));
  }
  return out;
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& msg) {
  throw PlanningError(ErrorCode::kFormat, source + ":" + std::to_string(line) + ": " + msg);
}

double number(const std::string& source, const Line& line, std::size_t i) {
  if (i >= line.tokens.size()) fail(source, line.number, "missing value");
  const std::string& tok = line.tokens[i];
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    fail(source, line.number, "not a number: '" + tok + "'");
  }
  if (used != tok.size()) fail(source, line.number, "not a number: '" + tok + "'");
  return v;
}

void expect_count(const std::string& source, const Line& line, std::size_t n) {
  if (line.tokens.size() != n) {
    fail(source, line.number, "expected " + std::to_string(n - 1) + " values after '" + line.tokens[0] + "'");
  }
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw PlanningError(ErrorCode::kFormat, "cannot open " + path);
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(17);
  return out;
}

// Writes with round-trip precision and restores the caller's setting.
class ExactDigits {
 public:
  explicit ExactDigits(std::ostream& out) : out_(out), saved_(out.precision(17)) {}
  ~ExactDigits() { out_.precision(saved_); }

 private:
  std::ostream& out_;
  std::streamsize saved_;
};

}  // namespace

SerialChain parse_chain(std::istream& in, const std::string& source) {
  std::string name = "chain";
  std::vector<Link> links;
  for (const Line& line : read_lines(in)) {
    const std::string& key = line.tokens[0];
    if (key == "name") {
      expect_count(source, line, 2);
      name = line.tokens[1];
    } else if (key == "link") {
      expect_count(source, line, 9);
      Link l;
      l.axis = {number(source, line, 1), number(source, line, 2), number(source, line, 3)};
      l.offset = {number(source, line, 4), number(source, line, 5), number(source, line, 6)};
      l.lower = number(source, line, 7);
      l.upper = number(source, line, 8);
      links.push_back(l);
    } else {
      fail(source, line.number, "unknown keyword '" + key + "'");
    }
  }
  if (links.empty()) throw PlanningError(ErrorCode::kFormat, source + ": no links");
  try {
    return SerialChain(name, std::move(links));
  } catch (const std::invalid_argument& e) {
    throw PlanningError(ErrorCode::kFormat, source + ": " + e.what());
  }
}

SerialChain load_chain(const std::string& path) {
  auto in = open_in(path);
  return parse_chain(in, path);
}

void write_chain(std::ostream& out, const SerialChain& chain) {
  const ExactDigits digits(out);
  out << "name " << chain.name() << "\n";
  for (const Link& l : chain.links()) {
    out << "link " << l.axis.x() << " " << l.axis.y() << " " << l.axis.z() << " " << l.offset.x() << " "
        << l.offset.y() << " " << l.offset.z() << " " << l.lower << " " << l.upper << "\n";
  }
}

void save_chain(const SerialChain& chain, const std::string& path) {
  auto out = open_out(path);
  write_chain(out, chain);
}

World parse_world(std::istream& in, const std::string& source) {
  Aabb bounds;
  std::vector<Sphere> spheres;
  for (const Line& line : read_lines(in)) {
    const std::string& key = line.tokens[0];
    if (key == "bounds") {
      expect_count(source, line, 7);
      bounds.min = {number(source, line, 1), number(source, line, 2), number(source, line, 3)};
      bounds.max = {number(source, line, 4), number(source, line, 5), number(source, line, 6)};
    } else if (key == "sphere") {
      expect_count(source, line, 5);
      const double r = number(source, line, 4);
      if (!(r > 0.0)) fail(source, line.number, "sphere radius must be positive");
      spheres.push_back({{number(source, line, 1), number(source, line, 2), number(source, line, 3)}, r});
    } else {
      fail(source, line.number, "unknown keyword '" + key + "'");
    }
  }
  return World(std::move(spheres), bounds);
}

World load_world(const std::string& path) {
  auto in = open_in(path);
  return parse_world(in, path);
}

void write_world(std::ostream& out, const World& world) {
  const ExactDigits digits(out);
  const Aabb& b = world.bounds();
  out << "bounds " << b.min.x() << " " << b.min.y() << " " << b.min.z() << " " << b.max.x() << " "
      << b.max.y() << " " << b.max.z() << "\n";
  for (const Sphere& s : world.obstacles()) {
    out << "sphere " << s.center.x() << " " << s.center.y() << " " << s.center.z() << " " << s.radius << "\n";
  }
}

void save_world(const World& world, const std::string& path) {
  auto out = open_out(path);
  write_world(out, world);
}

Path parse_path(std::istream& in, const std::string& source) {
  const auto lines = read_lines(in);
  Path p;
  std::size_t i = 0;
  if (i >= lines.size() || lines[i].tokens[0] != "cost") {
    throw PlanningError(ErrorCode::kFormat, source + ": expected 'cost' line");
  }
  expect_count(source, lines[i], 2);
  p.cost = number(source, lines[i], 1);
  ++i;
  if (i >= lines.size() || lines[i].tokens[0] != "waypoints") {
    throw PlanningError(ErrorCode::kFormat, source + ": expected 'waypoints' line");
  }
  expect_count(source, lines[i], 3);
  const double count = number(source, lines[i], 1);
  const double dof = number(source, lines[i], 2);
  if (count < 0 || dof < 1 || count != std::floor(count) || dof != std::floor(dof)) {
    fail(source, lines[i].number, "bad waypoint header");
  }
  ++i;
  for (long w = 0; w < static_cast<long>(count); ++w, ++i) {
    if (i >= lines.size()) throw PlanningError(ErrorCode::kFormat, source + ": missing waypoint rows");
    expect_count(source, lines[i], static_cast<std::size_t>(dof));
    JointConfig q(static_cast<int>(dof));
    for (int j = 0; j < q.size(); ++j) q[j] = number(source, lines[i], static_cast<std::size_t>(j));
    p.waypoints.push_back(std::move(q));
  }
  if (i != lines.size()) fail(source, lines[i].number, "trailing content");
  return p;
}

Path load_path(const std::string& path) {
  auto in = open_in(path);
  return parse_path(in, path);
}

void write_path(std::ostream& out, const Path& path) {
  const ExactDigits digits(out);
  out << "cost " << path.cost << "\n";
  const long dof = path.waypoints.empty() ? 1 : path.waypoints.front().size();
  out << "waypoints " << path.waypoints.size() << " " << dof << "\n";
  for (const JointConfig& q : path.waypoints) {
    for (int j = 0; j < q.size(); ++j) out << (j ? " " : "") << q[j];
    out << "\n";
  }
}

void save_path(const Path& path, const std::string& file) {
  auto out = open_out(file);
  write_path(out, path);
}

void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace) {
  const ExactDigits digits(out);
  out << "iteration,wall_ms,best_cost\n";
  for (const TracePoint& t : trace) {
    out << t.iteration << "," << t.wall_ms << ",";
    if (std::isfinite(t.best_cost)) out << t.best_cost;
    out << "\n";
  }
}

void save_trace_csv(const std::vector<TracePoint>& trace, const std::string& path) {
  auto out = open_out(path);
  write_trace_csv(out, trace);
}

std::vector<TracePoint> parse_trace_csv(std::istream& in, const std::string& source) {
  std::vector<TracePoint> out;
  std::string raw;
  int number_ = 0;
  while (std::getline(in, raw)) {
    ++number_;
    if (number_ == 1) {
      if (raw != "iteration,wall_ms,best_cost") fail(source, 1, "unexpected header");
      continue;
    }
    if (raw.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(raw);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (raw.back() == ',') cells.push_back("");
    if (cells.size() != 3) fail(source, number_, "expected 3 columns");
    Line line{number_, cells};
    TracePoint t;
    t.iteration = static_cast<long>(number(source, line, 0));
    t.wall_ms = number(source, line, 1);
    t.best_cost = cells[2].empty() ? kInfinity : number(source, line, 2);
    out.push_back(t);
  }
  return out;
}

Pose pose_from_values(const std::vector<double>& v) {
  if (v.size() != 7) throw std::invalid_argument("pose needs 7 values: x y z qw qx qy qz");
  Pose p;
  p.position = {v[0], v[1], v[2]};
  Eigen::Quaterniond q(v[3], v[4], v[5], v[6]);
  if (!(q.norm() > 0.0)) throw std::invalid_argument("pose quaternion has zero norm");
  p.orientation = q.normalized();
  return p;
}

std::vector<double> pose_values(const Pose& pose) {
  const auto& q = pose.orientation;
  return {pose.position.x(), pose.position.y(), pose.position.z(), q.w(), q.x(), q.y(), q.z()};
}

}  // namespace manyrrt
