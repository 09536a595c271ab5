#ifndef CURREVO_FEEDBACK_HPP
#define CURREVO_FEEDBACK_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <currevo/arena.hpp>
#include <currevo/controller.hpp>
#include <currevo/map_elites.hpp>
#include <currevo/payload.hpp>
#include <currevo/raster.hpp>
#include <currevo/scene.hpp>
#include <currevo/sim.hpp>

namespace currevo {

    // ------------------------------------------------------------- metrics text

    inline std::string format_quality(double v)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return buf;
    }

    /// Three labelled lines built from the best policy's per-case fitness in
    /// curriculum order.
    inline std::string metrics_summary(std::span<const double> per_case)
    {
        if (per_case.empty())
            throw std::invalid_argument("metrics_summary needs at least one case");
        double sum = 0.0;
        std::string list;
        for (std::size_t i = 0; i < per_case.size(); ++i) {
            sum += per_case[i];
            list += (i ? ", " : "") + format_quality(per_case[i]);
        }
        return "Quality of the best policy on the last case: " + format_quality(per_case.back()) + "\n" + "Quality of the best policy on each case (curriculum order): " + list + "\n" +
               "Average quality over all cases: " + format_quality(sum / static_cast<double>(per_case.size())) + "\n";
    }

    // ------------------------------------------------------------ progression

    struct PlotSeries {
        std::string label;
        std::vector<Point> points; // (evaluations, fitness)
    };

    /// One series per case. Stages are laid end to end on the evaluation axis;
    /// a case's series starts at the stage that introduced it.
    inline std::vector<PlotSeries> progression_series(std::span<const ProgressionCurve> stages)
    {
        std::vector<PlotSeries> series;
        double offset = 0.0;
        for (const ProgressionCurve& curve : stages) {
            for (const Checkpoint& c : curve.checkpoints) {
                for (std::size_t j = 0; j < c.per_case.size(); ++j) {
                    if (j >= series.size())
                        series.push_back({"case " + std::to_string(j + 1), {}});
                    series[j].points.push_back({offset + static_cast<double>(c.evaluations), c.per_case[j]});
                }
            }
            if (!curve.checkpoints.empty())
                offset += static_cast<double>(curve.checkpoints.back().evaluations);
        }
        return series;
    }

    inline double nice_step(double span, int ticks = 5)
    {
        if (!(span > 0))
            return 1.0;
        const double raw = span / ticks;
        const double mag = std::pow(10.0, std::floor(std::log10(raw)));
        for (double m : {1.0, 2.0, 5.0, 10.0})
            if (m * mag >= raw)
                return m * mag;
        return 10 * mag;
    }

    /// Maps data coordinates to pixels inside the plotting rectangle.
    struct PlotFrame {
        double left = 80, top = 40, width = 500, height = 320;
        double x_max = 1.0, y_max = 1.0;

        double px(double x) const { return left + width * x / x_max; }
        double py(double y) const { return top + height * (1.0 - y / y_max); }
    };

    inline PlotFrame plot_frame(const std::vector<PlotSeries>& series)
    {
        double xm = 0.0, ym = 0.0;
        for (const PlotSeries& s : series)
            for (Point p : s.points) {
                xm = std::max(xm, p.x);
                ym = std::max(ym, p.y);
            }
        PlotFrame f;
        const double xs = nice_step(xm), ys = nice_step(ym);
        f.x_max = std::max(xs, std::ceil(xm / xs) * xs);
        f.y_max = std::max(ys, std::ceil(ym / ys) * ys);
        if (ym > 0 && f.y_max <= ym * 1.0000001)
            f.y_max += ys; // headroom so the top series stays visible
        return f;
    }

    namespace detail {
        inline Color palette(std::size_t i)
        {
            static constexpr Color colors[] = {{31, 119, 180}, {255, 127, 14}, {44, 160, 44}, {214, 39, 40}, {148, 103, 189}, {140, 86, 75}, {227, 119, 194}, {23, 190, 207}};
            return colors[i % 8];
        }
        inline std::string dash(std::size_t i)
        {
            static const char* dashes[] = {"", "6,3", "2,2"};
            return dashes[(i / 8) % 3];
        }
        inline std::string tick_label(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", v);
            return buf;
        }
    } // namespace detail

    inline constexpr int k_plot_width = 760;
    inline constexpr int k_plot_height = 420;

    inline Scene render_progression(const std::vector<PlotSeries>& series, const std::vector<double>& stage_boundaries = {})
    {
        const PlotFrame f = plot_frame(series);
        const Color ink{0, 0, 0}, grid{220, 220, 220};
        Scene s{k_plot_width, k_plot_height, {}};

        const double xs = nice_step(f.x_max), ys = nice_step(f.y_max);
        for (double y = 0; y <= f.y_max * (1 + 1e-9); y += ys) {
            s.add(shape::Line{{f.left, f.py(y)}, {f.left + f.width, f.py(y)}, grid, 1});
            s.add(shape::Text{{f.left - 6, f.py(y) + 4}, detail::tick_label(y), 11, shape::Anchor::End, false, ink});
        }
        for (double x = 0; x <= f.x_max * (1 + 1e-9); x += xs) {
            s.add(shape::Line{{f.px(x), f.top + f.height}, {f.px(x), f.top + f.height + 5}, ink, 1});
            s.add(shape::Text{{f.px(x), f.top + f.height + 18}, detail::tick_label(x), 11, shape::Anchor::Middle, false, ink});
        }
        for (double b : stage_boundaries)
            s.add(shape::Line{{f.px(b), f.top}, {f.px(b), f.top + f.height}, {170, 170, 170}, 1});
        s.add(shape::Rect{f.left, f.top, f.width, f.height, {}, false, ink, 1, "frame"});
        s.add(shape::Text{{f.left + f.width / 2, f.top + f.height + 42}, "fitness evaluations", 13, shape::Anchor::Middle, false, ink});
        s.add(shape::Text{{22, f.top + f.height / 2}, "quality (distance to target, lower is better)", 13, shape::Anchor::Middle, true, ink});
        s.add(shape::Text{{f.left + f.width / 2, 24}, "Best policy quality per case", 15, shape::Anchor::Middle, false, ink});

        for (std::size_t i = 0; i < series.size(); ++i) {
            shape::Polyline line{{}, detail::palette(i), 2, detail::dash(i), "series"};
            for (Point p : series[i].points)
                line.points.push_back({f.px(p.x), f.py(p.y)});
            s.add(std::move(line));
        }
        const double lx = f.left + f.width + 20;
        for (std::size_t i = 0; i < series.size(); ++i) {
            const double y = f.top + 10 + 20.0 * static_cast<double>(i);
            s.add(shape::Polyline{{{lx, y}, {lx + 28, y}}, detail::palette(i), 2, detail::dash(i), "legend-key"});
            s.add(shape::Text{{lx + 34, y + 4}, series[i].label, 12, shape::Anchor::Start, false, ink});
        }
        return s;
    }

    inline Scene render_progression(std::span<const ProgressionCurve> stages)
    {
        std::vector<double> bounds;
        double offset = 0.0;
        for (std::size_t i = 0; i + 1 < stages.size(); ++i)
            if (!stages[i].checkpoints.empty())
                bounds.push_back(offset += static_cast<double>(stages[i].checkpoints.back().evaluations));
        return render_progression(progression_series(stages), bounds);
    }

    inline Scene render_progression(const ProgressionCurve& curve) { return render_progression(std::span<const ProgressionCurve>(&curve, 1)); }

    // ------------------------------------------------------------- trajectory

    inline constexpr double k_trajectory_px_per_m = 500.0;
    inline constexpr double k_trajectory_margin = 20.0;

    inline Point world_to_px(Vec2 p) { return {k_trajectory_margin + k_trajectory_px_per_m * p.x, k_trajectory_margin + k_trajectory_px_per_m * (1.0 - p.y)}; }

    inline Scene render_trajectory(const WorldGeometry& world, const TrajectoryLog& traj)
    {
        const int side = static_cast<int>(2 * k_trajectory_margin + k_trajectory_px_per_m);
        Scene s{side, side, {}};
        const Color ink{0, 0, 0};
        for (const Rect& r : world.wall_rects) {
            const Point a = world_to_px({r.x0, r.y1});
            s.add(shape::Rect{a.x, a.y, (r.x1 - r.x0) * k_trajectory_px_per_m, (r.y1 - r.y0) * k_trajectory_px_per_m, {90, 90, 90}, true, {}, 0, "wall"});
        }
        const Point o = world_to_px({0, 1});
        s.add(shape::Rect{o.x, o.y, k_trajectory_px_per_m, k_trajectory_px_per_m, {}, false, ink, 2, "boundary"});
        shape::Polyline path{{}, {31, 119, 180}, 2, "", "path"};
        for (const RobotState& st : traj.poses)
            path.points.push_back(world_to_px(st.position));
        s.add(std::move(path));
        s.add(shape::Circle{world_to_px(world.start_pos), 7, {44, 160, 44}, "start"});
        s.add(shape::Circle{world_to_px(world.target_pos), 7, {214, 39, 40}, "target"});
        return s;
    }

    inline Scene render_trajectory(const Arena& arena, const TrajectoryLog& traj) { return render_trajectory(to_world(arena), traj); }

    inline Scene render_arena(const Arena& arena) { return render_trajectory(to_world(arena), TrajectoryLog{}); }

    // ---------------------------------------------------------------- payload

    inline ImageArtifact make_artifact(std::string name, std::string caption, const Scene& scene)
    {
        return {std::move(name), std::move(caption), to_svg(scene), to_png(scene)};
    }

    /// What a completed stage exposes to the feedback builder.
    struct FeedbackInput {
        std::vector<double> per_case_fitness;     // best policy, bag order
        std::vector<ProgressionCurve> curves;     // all stages so far, oldest first
        std::vector<Arena> bag;                   // current bag
        std::optional<PolicyExpr> best;           // needed for trajectories
        SimParams sim;
    };

    inline FeedbackPayload build_feedback(Modality modality, const FeedbackInput& in)
    {
        FeedbackPayload p;
        p.modality = modality;
        p.metrics_text = metrics_summary(in.per_case_fitness);
        if (modality == Modality::N)
            return p;
        p.progression = make_artifact("feedback-progression", "Convergence plot: quality of the best policy on each case over fitness evaluations (lower is better).",
                                      render_progression(std::span<const ProgressionCurve>(in.curves)));
        if (modality == Modality::NP)
            return p;
        if (!in.best)
            throw std::invalid_argument("trajectory feedback needs the best policy");
        for (std::size_t i = 0; i < in.bag.size(); ++i) {
            const WorldGeometry world = to_world(in.bag[i]);
            PolicyController controller(*in.best, in.sim);
            const TrajectoryLog log = run_episode(world, controller, in.sim);
            p.trajectories.push_back(make_artifact("feedback-case-" + std::to_string(i + 1),
                                                   "Trajectory of the best policy on case " + std::to_string(i + 1) + " (green: start, red: target, grey: walls).",
                                                   render_trajectory(world, log)));
        }
        return p;
    }

} // namespace currevo

#endif
