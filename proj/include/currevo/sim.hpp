#ifndef CURREVO_SIM_HPP
#define CURREVO_SIM_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <currevo/arena.hpp>

namespace currevo {

    struct SimParams {
        double v_max = 0.01;       // m/s rim speed
        double axle_width = 0.04;  // m
        double dt = 0.1;           // s
        double robot_radius = 0.02;
        double sensor_range = 0.5;
        int steps = 600;
    };

    inline constexpr int k_proximity_rays = 5;
    inline constexpr std::array<double, k_proximity_rays> k_ray_offsets = {-std::numbers::pi / 2, -std::numbers::pi / 4, 0.0, std::numbers::pi / 4,
                                                                           std::numbers::pi / 2};

    struct RobotState {
        Vec2 position;
        double heading = 0.0;
        int step_index = 0;
        friend bool operator==(const RobotState&, const RobotState&) = default;
    };

    struct RawObservation {
        std::array<double, k_proximity_rays> proximity{};
        double target_distance = 0.0;
        double target_angle = 0.0;
        friend bool operator==(const RawObservation&, const RawObservation&) = default;
    };

    struct WheelCommand {
        double left = 0.0;
        double right = 0.0;
        friend bool operator==(const WheelCommand&, const WheelCommand&) = default;
    };

    struct TrajectoryLog {
        std::vector<RobotState> poses;            // initial state + one per step
        std::vector<RawObservation> observations; // observations[k] was sensed at poses[k]
        double final_distance = 0.0;
        double mean_distance = 0.0;
        friend bool operator==(const TrajectoryLog&, const TrajectoryLog&) = default;
    };

    /// Wraps an angle into [-pi, pi).
    inline double wrap_angle(double a)
    {
        constexpr double two_pi = 2.0 * std::numbers::pi;
        double w = std::fmod(a + std::numbers::pi, two_pi);
        if (w < 0.0)
            w += two_pi;
        w -= std::numbers::pi;
        return w >= std::numbers::pi ? -std::numbers::pi : w;
    }

    namespace detail {
        inline int tile_coord(double v)
        {
            const int i = static_cast<int>(std::floor(v / k_tile_side));
            return std::clamp(i, 0, k_arena_tiles - 1);
        }

        inline bool wall_at(const WorldGeometry& world, int ix, int iy)
        {
            if (ix < 0 || iy < 0 || ix >= k_arena_tiles || iy >= k_arena_tiles)
                return false;
            return world.occupied[ix][iy];
        }
    } // namespace detail

    /// Distance from `origin` along `angle` to the first wall tile or the arena
    /// boundary, clamped to `range`. Grid traversal over the wall lattice.
    inline double cast_ray(const WorldGeometry& world, Vec2 origin, double angle, double range)
    {
        const double dx = std::cos(angle);
        const double dy = std::sin(angle);
        int ix = detail::tile_coord(origin.x);
        int iy = detail::tile_coord(origin.y);
        if (detail::wall_at(world, ix, iy))
            return 0.0;

        const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
        const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
        constexpr double inf = std::numeric_limits<double>::infinity();
        double t_max_x = inf, t_max_y = inf, t_delta_x = inf, t_delta_y = inf;
        if (step_x != 0) {
            const double edge = (step_x > 0 ? ix + 1 : ix) * k_tile_side;
            t_max_x = (edge - origin.x) / dx;
            t_delta_x = k_tile_side / std::abs(dx);
        }
        if (step_y != 0) {
            const double edge = (step_y > 0 ? iy + 1 : iy) * k_tile_side;
            t_max_y = (edge - origin.y) / dy;
            t_delta_y = k_tile_side / std::abs(dy);
        }
        for (;;) {
            double t;
            if (t_max_x < t_max_y) {
                t = t_max_x;
                ix += step_x;
                t_max_x += t_delta_x;
            }
            else {
                t = t_max_y;
                iy += step_y;
                t_max_y += t_delta_y;
            }
            t = std::max(t, 0.0);
            if (t >= range)
                return range;
            if (ix < 0 || iy < 0 || ix >= k_arena_tiles || iy >= k_arena_tiles)
                return t; // left the arena through its boundary
            if (world.occupied[ix][iy])
                return t;
        }
    }

    inline bool disc_hits_rect(Vec2 c, double radius, const Rect& r)
    {
        const double qx = std::clamp(c.x, r.x0, r.x1);
        const double qy = std::clamp(c.y, r.y0, r.y1);
        const double ddx = c.x - qx;
        const double ddy = c.y - qy;
        return ddx * ddx + ddy * ddy < radius * radius;
    }

    /// True when a disc at `c` leaves the bounds or overlaps any wall tile.
    inline bool disc_collides(const WorldGeometry& world, Vec2 c, double radius)
    {
        const Rect& b = world.bounds;
        if (c.x - radius < b.x0 || c.x + radius > b.x1 || c.y - radius < b.y0 || c.y + radius > b.y1)
            return true;
        // radius < tile side, so only the 3x3 neighbourhood can touch the disc
        const int cx = detail::tile_coord(c.x);
        const int cy = detail::tile_coord(c.y);
        for (int ix = cx - 1; ix <= cx + 1; ++ix)
            for (int iy = cy - 1; iy <= cy + 1; ++iy)
                if (detail::wall_at(world, ix, iy)) {
                    const Rect r{ix * k_tile_side, iy * k_tile_side, (ix + 1) * k_tile_side, (iy + 1) * k_tile_side};
                    if (disc_hits_rect(c, radius, r))
                        return true;
                }
        return false;
    }

    inline RawObservation sense(const WorldGeometry& world, const RobotState& state, const SimParams& params = {})
    {
        RawObservation obs;
        for (int i = 0; i < k_proximity_rays; ++i)
            obs.proximity[i] = cast_ray(world, state.position, state.heading + k_ray_offsets[i], params.sensor_range);
        const double ddx = world.target_pos.x - state.position.x;
        const double ddy = world.target_pos.y - state.position.y;
        const double d = std::hypot(ddx, ddy);
        obs.target_distance = std::min(d, params.sensor_range);
        obs.target_angle = d == 0.0 ? 0.0 : wrap_angle(std::atan2(ddy, ddx) - state.heading);
        return obs;
    }

    inline RobotState step(const WorldGeometry& world, const RobotState& state, WheelCommand cmd, const SimParams& params = {})
    {
        const double v = 0.5 * (cmd.left + cmd.right);
        const double omega = (cmd.right - cmd.left) / params.axle_width;
        RobotState next = state;
        if (v != 0.0) {
            const Vec2 candidate{state.position.x + v * params.dt * std::cos(state.heading), state.position.y + v * params.dt * std::sin(state.heading)};
            if (!disc_collides(world, candidate, params.robot_radius))
                next.position = candidate;
        }
        next.heading = wrap_angle(state.heading + omega * params.dt);
        next.step_index = state.step_index + 1;
        return next;
    }

    struct EpisodeOutcome {
        Vec2 final_position;
        double final_distance = 0.0;
        double mean_distance = 0.0;
    };

    /// Shared episode loop; `log` may be null when only the outcome is needed.
    /// Controller needs `reset()` and `WheelCommand act(const RawObservation&)`.
    template <typename Controller>
    EpisodeOutcome simulate(const WorldGeometry& world, Controller& controller, const SimParams& params, TrajectoryLog* log)
    {
        controller.reset();
        RobotState state{world.start_pos, 0.0, 0};
        if (log) {
            log->poses.clear();
            log->observations.clear();
            log->poses.reserve(params.steps + 1);
            log->observations.reserve(params.steps);
            log->poses.push_back(state);
        }
        double distance_sum = 0.0;
        for (int k = 0; k < params.steps; ++k) {
            const RawObservation obs = sense(world, state, params);
            const WheelCommand cmd = controller.act(obs);
            state = step(world, state, cmd, params);
            distance_sum += distance(state.position, world.target_pos);
            if (log) {
                log->observations.push_back(obs);
                log->poses.push_back(state);
            }
        }
        EpisodeOutcome out;
        out.final_position = state.position;
        out.final_distance = distance(state.position, world.target_pos);
        out.mean_distance = params.steps > 0 ? distance_sum / params.steps : out.final_distance;
        if (log) {
            log->final_distance = out.final_distance;
            log->mean_distance = out.mean_distance;
        }
        return out;
    }

    template <typename Controller>
    TrajectoryLog run_episode(const WorldGeometry& world, Controller& controller, const SimParams& params = {})
    {
        TrajectoryLog log;
        simulate(world, controller, params, &log);
        return log;
    }

    template <typename Controller>
    TrajectoryLog run_episode(const Arena& arena, Controller& controller, const SimParams& params = {})
    {
        return run_episode(to_world(arena), controller, params);
    }

    /// Columnar text: step x y heading prox0..prox4 target_distance target_angle.
    /// The last row carries the final pose only, so its observation columns are empty.
    inline void write_trajectory(std::ostream& out, const TrajectoryLog& log)
    {
        out << "step x y heading prox0 prox1 prox2 prox3 prox4 target_distance target_angle\n";
        out.precision(17);
        for (std::size_t k = 0; k < log.poses.size(); ++k) {
            const RobotState& s = log.poses[k];
            out << s.step_index << ' ' << s.position.x << ' ' << s.position.y << ' ' << s.heading;
            if (k < log.observations.size()) {
                const RawObservation& o = log.observations[k];
                for (double p : o.proximity)
                    out << ' ' << p;
                out << ' ' << o.target_distance << ' ' << o.target_angle;
            }
            out << '\n';
        }
    }

    inline void save_trajectory(const TrajectoryLog& log, const std::string& path)
    {
        std::ofstream out(path);
        if (!out)
            throw std::runtime_error("cannot write trajectory file: " + path);
        write_trajectory(out, log);
    }

} // namespace currevo

#endif
