#include <gtest/gtest.h>

#include <numbers>
#include <sstream>

#include <currevo/controller.hpp>
#include <currevo/sim.hpp>

#include "oracles.hpp"

using namespace currevo;

namespace {
    struct ConstantController {
        WheelCommand cmd;
        void reset() {}
        WheelCommand act(const RawObservation&) { return cmd; }
    };

    std::vector<oracle::Box> boxes(const WorldGeometry& w)
    {
        std::vector<oracle::Box> out;
        for (const Rect& r : w.wall_rects)
            out.push_back({r.x0, r.y0, r.x1, r.y1});
        return out;
    }

    bool overlaps_any(const WorldGeometry& w, Vec2 p, double radius)
    {
        if (p.x - radius < 0 || p.y - radius < 0 || p.x + radius > 1 || p.y + radius > 1)
            return true;
        for (const Rect& r : w.wall_rects) {
            const double qx = std::max(r.x0, std::min(p.x, r.x1));
            const double qy = std::max(r.y0, std::min(p.y, r.y1));
            if (std::hypot(p.x - qx, p.y - qy) < radius)
                return true;
        }
        return false;
    }

    // row 7, wall at column 8, start/target elsewhere
    WorldGeometry single_wall_world()
    {
        std::string t;
        for (int r = 0; r < 15; ++r) {
            if (r)
                t += '|';
            for (int c = 0; c < 15; ++c)
                t += (r == 7 && c == 8) ? 'w' : (r == 0 && c == 0) ? 's' : (r == 14 && c == 14) ? 't' : 'e';
        }
        return to_world(parse_arena(t));
    }
} // namespace

TEST(Sense, FrontRayReachesRangeInEmptyArena)
{
    const WorldGeometry w = open_world({0.5, 0.5}, {0.9, 0.9});
    const RawObservation o = sense(w, {{0.5, 0.5}, 0.0, 0});
    EXPECT_NEAR(o.proximity[2], 0.5, 1e-12);
}

TEST(Sense, NearBoundary)
{
    const WorldGeometry w = open_world({0.5, 0.5}, {0.1, 0.1});
    const RawObservation o = sense(w, {{0.9, 0.5}, 0.0, 0});
    EXPECT_NEAR(o.proximity[2], 0.1, 1e-12);
    EXPECT_DOUBLE_EQ(o.proximity[0], 0.5);
    EXPECT_DOUBLE_EQ(o.proximity[4], 0.5);
    // diagonal rays: boundary at 0.1/cos(pi/4)
    EXPECT_NEAR(o.proximity[1], 0.1 * std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(o.proximity[3], 0.1 * std::sqrt(2.0), 1e-12);
}

TEST(Sense, TargetAtRobotPosition)
{
    const WorldGeometry w = open_world({0.3, 0.3}, {0.3, 0.3});
    const RawObservation o = sense(w, {{0.3, 0.3}, 1.0, 0});
    EXPECT_EQ(o.target_distance, 0.0);
    EXPECT_EQ(o.target_angle, 0.0);
}

TEST(Sense, TargetDistanceClampsAndAngleIsRelative)
{
    const WorldGeometry w = open_world({0.1, 0.1}, {0.9, 0.9});
    const RawObservation o = sense(w, {{0.1, 0.1}, std::numbers::pi / 2, 0});
    EXPECT_DOUBLE_EQ(o.target_distance, 0.5);
    EXPECT_NEAR(o.target_angle, -std::numbers::pi / 4, 1e-12);
}

TEST(Sense, WallRayHitsTileFace)
{
    const WorldGeometry w = single_wall_world();
    const RawObservation o = sense(w, {{0.4, 0.5}, 0.0, 0});
    EXPECT_NEAR(o.proximity[2], 8.0 / 15 - 0.4, 1e-12);
}

TEST(Sense, RayCastMatchesSlabOracle)
{
    Rng rng(11);
    int checked = 0;
    for (int a = 0; a < 200; ++a) {
        const WorldGeometry w = to_world(generate_random_arena(rng));
        const auto walls = boxes(w);
        for (int k = 0; k < 50; ++k) {
            const Vec2 p{0.02 + 0.96 * uniform01(rng), 0.02 + 0.96 * uniform01(rng)};
            if (overlaps_any(w, p, 0.0))
                continue;
            const double ang = (uniform01(rng) * 2 - 1) * std::numbers::pi;
            EXPECT_NEAR(cast_ray(w, p, ang, 0.5), oracle::ray_distance(walls, p.x, p.y, ang, 0.5), 1e-9);
            ++checked;
        }
    }
    EXPECT_GT(checked, 5000);
}

TEST(Step, StraightAtMaxSpeed)
{
    const WorldGeometry w = open_world({0.5, 0.5}, {0.9, 0.9});
    const SimParams p;
    const RobotState s = step(w, {{0.5, 0.5}, 0.0, 0}, {p.v_max, p.v_max});
    EXPECT_NEAR(s.position.x, 0.501, 1e-15);
    EXPECT_DOUBLE_EQ(s.position.y, 0.5);
    EXPECT_DOUBLE_EQ(s.heading, 0.0);
    EXPECT_EQ(s.step_index, 1);
}

TEST(Step, RotateLeftInPlace)
{
    const WorldGeometry w = open_world({0.5, 0.5}, {0.9, 0.9});
    const SimParams p;
    const RobotState s = step(w, {{0.5, 0.5}, 0.0, 0}, {-p.v_max, p.v_max});
    EXPECT_EQ(s.position, (Vec2{0.5, 0.5}));
    EXPECT_NEAR(s.heading, 0.05, 1e-15);
    const RobotState r = step(w, {{0.5, 0.5}, 0.0, 0}, {p.v_max, -p.v_max});
    EXPECT_NEAR(r.heading, -0.05, 1e-15);
}

TEST(Step, BlockedByWallKeepsPoseAndHeading)
{
    const WorldGeometry w = single_wall_world();
    const SimParams p;
    const RobotState touching{{8.0 / 15 - p.robot_radius, 0.5}, 0.0, 3};
    const RobotState s = step(w, touching, {p.v_max, p.v_max});
    EXPECT_EQ(s.position, touching.position);
    EXPECT_EQ(s.heading, 0.0);
    EXPECT_EQ(s.step_index, 4);
    // but turning is still allowed
    const RobotState t = step(w, touching, {0.0, p.v_max});
    EXPECT_EQ(t.position, touching.position);
    EXPECT_NEAR(t.heading, 0.025, 1e-15);
}

TEST(Step, BoundaryStopsRobot)
{
    const WorldGeometry w = open_world({0.5, 0.5}, {0.9, 0.9});
    const SimParams p;
    const RobotState s = step(w, {{0.9795, 0.5}, 0.0, 0}, {p.v_max, p.v_max});
    EXPECT_EQ(s.position.x, 0.9795);
}

TEST(Step, HeadingWrapsIntoHalfOpenInterval)
{
    EXPECT_DOUBLE_EQ(wrap_angle(std::numbers::pi), -std::numbers::pi);
    EXPECT_NEAR(wrap_angle(3 * std::numbers::pi / 2), -std::numbers::pi / 2, 1e-12);
    EXPECT_NEAR(wrap_angle(-3 * std::numbers::pi / 2), std::numbers::pi / 2, 1e-12);
}

TEST(Episode, StationaryController)
{
    const WorldGeometry w = open_world({0.2, 0.5}, {0.5, 0.5});
    ConstantController c{{0.0, 0.0}};
    const TrajectoryLog log = run_episode(w, c);
    ASSERT_EQ(log.poses.size(), 601u);
    ASSERT_EQ(log.observations.size(), 600u);
    for (const RobotState& s : log.poses)
        EXPECT_EQ(s.position, w.start_pos);
    EXPECT_NEAR(log.final_distance, 0.3, 1e-15);
    EXPECT_NEAR(log.mean_distance, 0.3, 1e-12);
}

TEST(Episode, StraightPastTargetGoldenValues)
{
    // x_k = 0.2 + 0.001 k, target at 0.5: final |0.3 - 0.6| = 0.3,
    // mean (0.001/600) * sum_k |300 - k| = 0.15
    const WorldGeometry w = open_world({0.2, 0.5}, {0.5, 0.5});
    ConstantController c{{0.01, 0.01}};
    const TrajectoryLog log = run_episode(w, c);
    EXPECT_NEAR(log.poses.back().position.x, 0.8, 1e-9);
    EXPECT_NEAR(log.final_distance, 0.3, 1e-9);
    EXPECT_NEAR(log.mean_distance, 0.15, 1e-9);
}

TEST(Episode, InitialHeadingPointsRight)
{
    const WorldGeometry w = open_world({0.2, 0.5}, {0.1, 0.9});
    ConstantController c{{0.0, 0.0}};
    const TrajectoryLog log = run_episode(w, c);
    EXPECT_EQ(log.poses.front().heading, 0.0);
    EXPECT_EQ(log.poses.front().step_index, 0);
    EXPECT_EQ(log.poses.back().step_index, 600);
}

TEST(Episode, ContainmentAndSensorBoundsOnRandomPolicies)
{
    Rng rng(5);
    const SimParams p;
    for (int i = 0; i < 200; ++i) {
        const WorldGeometry w = to_world(generate_random_arena(rng));
        const PolicyExpr expr = random_tree(rng, i % 2 ? InitMode::Full : InitMode::Grow, 4 + i % 7);
        PolicyController ctl(expr);
        const TrajectoryLog log = run_episode(w, ctl);
        double mean = 0;
        for (std::size_t k = 0; k < log.poses.size(); ++k) {
            ASSERT_FALSE(overlaps_any(w, log.poses[k].position, p.robot_radius)) << "episode " << i << " step " << k;
            if (k > 0) {
                EXPECT_LE(distance(log.poses[k].position, log.poses[k - 1].position), p.v_max * p.dt + 1e-15);
                mean += distance(log.poses[k].position, w.target_pos);
            }
            EXPECT_GE(log.poses[k].heading, -std::numbers::pi);
            EXPECT_LT(log.poses[k].heading, std::numbers::pi);
        }
        for (const RawObservation& o : log.observations) {
            for (double v : o.proximity) {
                EXPECT_GE(v, 0.0);
                EXPECT_LE(v, 0.5);
            }
            EXPECT_GE(o.target_distance, 0.0);
            EXPECT_LE(o.target_distance, 0.5);
            EXPECT_GE(o.target_angle, -std::numbers::pi);
            EXPECT_LE(o.target_angle, std::numbers::pi);
        }
        EXPECT_NEAR(log.final_distance, distance(log.poses.back().position, w.target_pos), 1e-12);
        EXPECT_NEAR(log.mean_distance, mean / 600, 1e-12);
    }
}

TEST(Episode, DeterministicAcrossRuns)
{
    Rng rng(99);
    const WorldGeometry w = to_world(generate_random_arena(rng));
    const PolicyExpr expr = random_tree(rng, InitMode::Full, 6);
    PolicyController a(expr), b(expr);
    EXPECT_EQ(run_episode(w, a), run_episode(w, b));
}

TEST(Episode, TrajectoryFileHasOneRowPerPose)
{
    const WorldGeometry w = open_world({0.2, 0.5}, {0.5, 0.5});
    ConstantController c{{0.01, 0.01}};
    const TrajectoryLog log = run_episode(w, c);
    std::ostringstream out;
    write_trajectory(out, log);
    std::istringstream in(out.str());
    std::string line;
    int rows = 0;
    std::getline(in, line);
    EXPECT_EQ(line, "step x y heading prox0 prox1 prox2 prox3 prox4 target_distance target_angle");
    while (std::getline(in, line))
        ++rows;
    EXPECT_EQ(rows, 601);
}
