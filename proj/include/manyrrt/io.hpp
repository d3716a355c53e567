#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "manyrrt/collision.hpp"
#include "manyrrt/kinematics.hpp"
#include "manyrrt/planners.hpp"
#include "manyrrt/tree.hpp"

namespace manyrrt {

// Plain-text formats. Blank lines and text after '#' are ignored. Parse
// errors throw PlanningError(kFormat) naming the line.
//
//   chain:  name <id>
//           link ax ay az ox oy oz lower upper      (one per joint)
//   world:  bounds xmin ymin zmin xmax ymax zmax
//           sphere cx cy cz r
//   path:   cost <c>
//           waypoints <count> <dof>
//           q1 ... qdof                             (count rows)

SerialChain parse_chain(std::istream& in, const std::string& source = "<stream>");
SerialChain load_chain(const std::string& path);
void write_chain(std::ostream& out, const SerialChain& chain);
void save_chain(const SerialChain& chain, const std::string& path);

World parse_world(std::istream& in, const std::string& source = "<stream>");
World load_world(const std::string& path);
void write_world(std::ostream& out, const World& world);
void save_world(const World& world, const std::string& path);

Path parse_path(std::istream& in, const std::string& source = "<stream>");
Path load_path(const std::string& path);
void write_path(std::ostream& out, const Path& path);
void save_path(const Path& path, const std::string& file);

/// CSV with header iteration,wall_ms,best_cost; best_cost is empty while
/// no solution exists.
void write_trace_csv(std::ostream& out, const std::vector<TracePoint>& trace);
void save_trace_csv(const std::vector<TracePoint>& trace, const std::string& path);
std::vector<TracePoint> parse_trace_csv(std::istream& in, const std::string& source = "<stream>");

/// Pose from x y z qw qx qy qz; the quaternion is normalised.
Pose pose_from_values(const std::vector<double>& v);
std::vector<double> pose_values(const Pose& pose);

}  // namespace manyrrt
