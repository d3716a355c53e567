#include <sstream>

#include <gtest/gtest.h>

#include "manyrrt/error.hpp"
#include "manyrrt/io.hpp"

using namespace manyrrt;

TEST(ChainIo, RoundTrip) {
  for (const auto& chain : {planar_2dof(), generic_6dof(), generic_7dof()}) {
    std::stringstream ss;
    write_chain(ss, chain);
    const SerialChain back = parse_chain(ss);
    EXPECT_EQ(back.name(), chain.name());
    EXPECT_EQ(back.hash(), chain.hash());
  }
}

TEST(ChainIo, CommentsAndBlankLines) {
  std::istringstream in("# two links\nname arm\n\nlink 0 0 1  1 0 0  -3 3   # shoulder\nlink 0 0 1 0.5 0 0 -1 1\n");
  const SerialChain c = parse_chain(in);
  EXPECT_EQ(c.dof(), 2);
  EXPECT_DOUBLE_EQ(c.reach(), 1.5);
  EXPECT_DOUBLE_EQ(c.upper()[1], 1.0);
}

TEST(ChainIo, ErrorsNameTheLine) {
  std::istringstream in("name arm\nlink 0 0 1 1 0\n");
  try {
    parse_chain(in, "arm.txt");
    FAIL() << "expected a format error";
  } catch (const PlanningError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kFormat);
    EXPECT_NE(std::string(e.what()).find("arm.txt:2"), std::string::npos) << e.what();
  }
  std::istringstream unknown("name arm\njoint 1\n");
  EXPECT_THROW(parse_chain(unknown), PlanningError);
  std::istringstream none("name arm\n");
  EXPECT_THROW(parse_chain(none), PlanningError);
}

TEST(WorldIo, RoundTrip) {
  const World w = make_environment(EnvKind::Passage, 1.3, 0);
  std::stringstream ss;
  write_world(ss, w);
  const World back = parse_world(ss);
  EXPECT_EQ(back.hash(), w.hash());
  EXPECT_EQ(back.obstacles().size(), w.obstacles().size());
}

TEST(WorldIo, RejectsBadSphere) {
  std::istringstream in("sphere 0 0 0 -1\n");
  EXPECT_THROW(parse_world(in), PlanningError);
  std::istringstream junk("sphere 0 0 zero 1\n");
  EXPECT_THROW(parse_world(junk), PlanningError);
}

TEST(PathIo, RoundTrip) {
  Path p;
  p.waypoints = {Eigen::Vector3d(0.1, 0.2, 0.3), Eigen::Vector3d(-1.0 / 3.0, 0.5, 2.0)};
  p.cost = path_cost(p.waypoints);
  std::stringstream ss;
  write_path(ss, p);
  const Path back = parse_path(ss);
  EXPECT_EQ(back.waypoints, p.waypoints);
  EXPECT_EQ(back.cost, p.cost);
}

TEST(PathIo, CountMismatchIsAnError) {
  std::istringstream in("cost 1\nwaypoints 3 2\n0 0\n1 0\n");
  EXPECT_THROW(parse_path(in), PlanningError);
}

TEST(TraceCsv, EmptyCellWhileUnsolved) {
  const std::vector<TracePoint> t{{0, 0.5, kInfinity}, {1, 0.7, 4.25}, {2, 0.9, 4.0}};
  std::stringstream ss;
  write_trace_csv(ss, t);
  const std::string text = ss.str();
  EXPECT_EQ(text.substr(0, text.find('\n')), "iteration,wall_ms,best_cost");
  EXPECT_NE(text.find("\n0,0.5,\n"), std::string::npos) << text;
  const auto back = parse_trace_csv(ss);
  ASSERT_EQ(back.size(), 3u);
  EXPECT_TRUE(std::isinf(back[0].best_cost));
  EXPECT_DOUBLE_EQ(back[1].best_cost, 4.25);
  EXPECT_EQ(back[2].iteration, 2);
}

TEST(PoseValues, NormalisesQuaternion) {
  const Pose p = pose_from_values({1, 2, 3, 2, 0, 0, 0});
  EXPECT_DOUBLE_EQ(p.orientation.w(), 1.0);
  const auto v = pose_values(p);
  ASSERT_EQ(v.size(), 7u);
  EXPECT_DOUBLE_EQ(v[2], 3.0);
  EXPECT_THROW(pose_from_values({1, 2, 3}), std::invalid_argument);
}
