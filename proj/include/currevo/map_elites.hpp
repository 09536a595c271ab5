#ifndef CURREVO_MAP_ELITES_HPP
#define CURREVO_MAP_ELITES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <currevo/controller.hpp>
#include <currevo/gp.hpp>
#include <currevo/parallel.hpp>
#include <currevo/rng.hpp>
#include <currevo/sim.hpp>

namespace currevo {

    inline constexpr double k_final_weight = 0.9;
    inline constexpr double k_mean_weight = 0.1;
    inline constexpr int k_archive_bins = 10;
    inline constexpr double k_descriptor_lo = -0.5;
    inline constexpr double k_descriptor_hi = 0.5;
    inline constexpr std::size_t k_population_size = 100;
    inline constexpr std::size_t k_batch_size = 100;

    struct Evaluation {
        double fitness = 0.0;                 // lower is better
        std::vector<double> per_case_fitness; // bag order
        double d1 = 0.0;                      // mean final x gap to target
        double d2 = 0.0;                      // mean final y gap to target
        friend bool operator==(const Evaluation&, const Evaluation&) = default;
    };

    inline double fitness_single(double final_distance, double mean_distance) { return k_final_weight * final_distance + k_mean_weight * mean_distance; }
    inline double fitness_single(const TrajectoryLog& traj) { return fitness_single(traj.final_distance, traj.mean_distance); }
    inline double fitness_single(const EpisodeOutcome& out) { return fitness_single(out.final_distance, out.mean_distance); }

    /// One fitness evaluation: one episode per case.
    inline Evaluation evaluate(const PolicyExpr& expr, std::span<const WorldGeometry> cases, const SimParams& params = {})
    {
        if (cases.empty())
            throw std::invalid_argument("evaluate needs a non-empty bag of cases");
        Evaluation e;
        e.per_case_fitness.reserve(cases.size());
        double sum = 0.0, gx = 0.0, gy = 0.0;
        for (const WorldGeometry& world : cases) {
            PolicyController controller(expr, params);
            const EpisodeOutcome out = simulate(world, controller, params, nullptr);
            const double f = fitness_single(out);
            e.per_case_fitness.push_back(f);
            sum += f;
            gx += out.final_position.x - world.target_pos.x;
            gy += out.final_position.y - world.target_pos.y;
        }
        const double n = static_cast<double>(cases.size());
        e.fitness = sum / n;
        e.d1 = gx / n;
        e.d2 = gy / n;
        return e;
    }

    /// Equal-width discretization; the upper edge and out-of-domain values
    /// clamp into the outermost bins.
    inline int bin(double x, double lo, double hi, int n)
    {
        const double c = std::clamp(x, lo, hi);
        return std::clamp(static_cast<int>(std::floor(n * (c - lo) / (hi - lo))), 0, n - 1);
    }

    struct CellIndex {
        int row = 0;
        int col = 0;
        friend bool operator==(const CellIndex&, const CellIndex&) = default;
    };

    inline CellIndex cell_of(const Evaluation& e)
    {
        return {bin(e.d1, k_descriptor_lo, k_descriptor_hi, k_archive_bins), bin(e.d2, k_descriptor_lo, k_descriptor_hi, k_archive_bins)};
    }

    struct Elite {
        PolicyExpr expr;
        Evaluation eval;
    };

    enum class InsertResult { Inserted, Replaced, Rejected };

    /// 10x10 grid keyed by binned (d1, d2); row indexes d1, col indexes d2.
    class EliteArchive {
    public:
        InsertResult insert(const PolicyExpr& expr, const Evaluation& eval)
        {
            const CellIndex c = cell_of(eval);
            auto& slot = _cells[c.row][c.col];
            if (!slot) {
                slot = Elite{expr, eval};
                return InsertResult::Inserted;
            }
            if (eval.fitness <= slot->eval.fitness) {
                slot = Elite{expr, eval};
                return InsertResult::Replaced;
            }
            return InsertResult::Rejected;
        }

        const std::optional<Elite>& at(int row, int col) const { return _cells[row][col]; }
        const std::optional<Elite>& at(CellIndex c) const { return _cells[c.row][c.col]; }

        std::size_t size() const
        {
            std::size_t n = 0;
            for (const auto& row : _cells)
                for (const auto& cell : row)
                    n += cell.has_value();
            return n;
        }

        bool empty() const { return size() == 0; }

        /// Occupied cells in row-major order.
        std::vector<CellIndex> occupied() const
        {
            std::vector<CellIndex> out;
            for (int r = 0; r < k_archive_bins; ++r)
                for (int c = 0; c < k_archive_bins; ++c)
                    if (_cells[r][c])
                        out.push_back({r, c});
            return out;
        }

        /// Occupants sorted by fitness; ties keep row-major cell order.
        std::vector<CellIndex> ranked() const
        {
            std::vector<CellIndex> cells = occupied();
            std::stable_sort(cells.begin(), cells.end(), [this](CellIndex a, CellIndex b) { return at(a)->eval.fitness < at(b)->eval.fitness; });
            return cells;
        }

        /// Lowest fitness; ties go to the lowest (row, col).
        std::optional<CellIndex> best() const
        {
            const auto cells = ranked();
            if (cells.empty())
                return std::nullopt;
            return cells.front();
        }

        /// Places an elite at a given cell verbatim (used when reloading snapshots).
        void restore(CellIndex c, Elite elite) { _cells[c.row][c.col] = std::move(elite); }

    private:
        std::array<std::array<std::optional<Elite>, k_archive_bins>, k_archive_bins> _cells;
    };

    struct Checkpoint {
        long evaluations = 0;
        double best_fitness = 0.0;
        std::vector<double> per_case; // per-case fitness of the best occupant
        friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
    };

    struct ProgressionCurve {
        std::vector<Checkpoint> checkpoints;
        friend bool operator==(const ProgressionCurve&, const ProgressionCurve&) = default;
    };

    struct StageParams {
        long budget = 10000;
        unsigned threads = 1;
        SimParams sim;
        /// Called after every archive insertion, in insertion order.
        std::function<void(const EliteArchive&, const Evaluation&, InsertResult)> on_insert;
    };

    struct StageResult {
        EliteArchive archive;
        ProgressionCurve curve;
        Elite best;
        long evaluations = 0;
    };

    class BudgetTooSmall : public std::invalid_argument {
    public:
        using std::invalid_argument::invalid_argument;
    };

    /// Elitist MAP-Elites over a fixed bag of cases. Parents are drawn from a
    /// coordinator stream; each offspring is mutated with a stream derived from
    /// (seed, evaluation index) and results are inserted in index order, so the
    /// outcome does not depend on the number of worker threads.
    inline StageResult run_stage(const std::vector<PolicyExpr>& seeds, std::span<const WorldGeometry> cases, const StageParams& params, std::uint64_t seed)
    {
        if (seeds.empty())
            throw std::invalid_argument("run_stage needs at least one seed policy");
        if (params.budget < static_cast<long>(seeds.size()))
            throw BudgetTooSmall("budget " + std::to_string(params.budget) + " is smaller than the " + std::to_string(seeds.size()) + " seed evaluations");

        StageResult result;
        auto checkpoint = [&] {
            const Elite& b = *result.archive.at(*result.archive.best());
            result.curve.checkpoints.push_back({result.evaluations, b.eval.fitness, b.eval.per_case_fitness});
        };

        std::vector<Evaluation> evals(seeds.size());
        parallel_for(seeds.size(), params.threads, [&](std::size_t i) { evals[i] = evaluate(seeds[i], cases, params.sim); });
        auto insert = [&](const PolicyExpr& e, const Evaluation& ev) {
            const InsertResult r = result.archive.insert(e, ev);
            if (params.on_insert)
                params.on_insert(result.archive, ev, r);
        };
        for (std::size_t i = 0; i < seeds.size(); ++i)
            insert(seeds[i], evals[i]);
        result.evaluations = static_cast<long>(seeds.size());
        checkpoint();

        Rng parent_rng = make_rng(seed, 0);
        const std::uint64_t offspring_seed = derive_seed(seed, 1);
        while (result.evaluations < params.budget) {
            const std::size_t n = static_cast<std::size_t>(std::min<long>(static_cast<long>(k_batch_size), params.budget - result.evaluations));
            const std::vector<CellIndex> cells = result.archive.occupied();
            std::vector<const PolicyExpr*> parents(n);
            for (auto& p : parents)
                p = &result.archive.at(cells[static_cast<std::size_t>(uniform_int(parent_rng, 0, static_cast<int>(cells.size()) - 1))])->expr;

            std::vector<PolicyExpr> children(n);
            evals.assign(n, Evaluation{});
            const long base = result.evaluations;
            parallel_for(n, params.threads, [&](std::size_t i) {
                Rng rng = make_rng(offspring_seed, static_cast<std::uint64_t>(base) + i);
                children[i] = mutate(rng, *parents[i]);
                evals[i] = evaluate(children[i], cases, params.sim);
            });
            for (std::size_t i = 0; i < n; ++i)
                insert(children[i], evals[i]);
            result.evaluations += static_cast<long>(n);
            checkpoint();
        }
        result.best = *result.archive.at(*result.archive.best());
        return result;
    }

    /// Initial population for a stage: ramped half-and-half when there is no
    /// previous archive, otherwise the 25 best previous occupants, one mutant of
    /// each, and fresh random trees for the rest.
    inline std::vector<PolicyExpr> seed_population(const EliteArchive* prev, Rng& rng)
    {
        if (!prev)
            return ramped_half_and_half(rng, k_population_size);
        const std::vector<CellIndex> ranked = prev->ranked();
        const std::size_t keep = std::min(ranked.size(), k_population_size / 4);
        std::vector<PolicyExpr> out;
        out.reserve(k_population_size);
        for (std::size_t i = 0; i < keep; ++i)
            out.push_back(prev->at(ranked[i])->expr);
        for (std::size_t i = 0; i < keep; ++i)
            out.push_back(mutate(rng, out[i]));
        auto fresh = ramped_half_and_half(rng, k_population_size - out.size());
        out.insert(out.end(), std::make_move_iterator(fresh.begin()), std::make_move_iterator(fresh.end()));
        return out;
    }

    // ---------------------------------------------------------------- persistence

    namespace detail {
        inline std::string fmt17(double v)
        {
            char buf[40];
            std::snprintf(buf, sizeof buf, "%.17g", v);
            return buf;
        }

        inline std::vector<std::string> split(const std::string& line, char sep)
        {
            std::vector<std::string> out;
            std::string cur;
            std::istringstream ss(line);
            while (std::getline(ss, cur, sep))
                out.push_back(cur);
            if (!line.empty() && line.back() == sep)
                out.emplace_back();
            return out;
        }
    } // namespace detail

    /// row,col,fitness,d1,d2,policy
    inline void write_archive_csv(std::ostream& out, const EliteArchive& archive)
    {
        out << "row,col,fitness,d1,d2,policy\n";
        for (const CellIndex c : archive.occupied()) {
            const Elite& e = *archive.at(c);
            out << c.row << ',' << c.col << ',' << detail::fmt17(e.eval.fitness) << ',' << detail::fmt17(e.eval.d1) << ',' << detail::fmt17(e.eval.d2) << ','
                << format_expr(e.expr) << '\n';
        }
    }

    struct ArchiveRow {
        CellIndex cell;
        double fitness = 0.0;
        double d1 = 0.0;
        double d2 = 0.0;
        PolicyExpr expr;
    };

    inline std::vector<ArchiveRow> read_archive_csv(std::istream& in)
    {
        std::vector<ArchiveRow> rows;
        std::string line;
        if (!std::getline(in, line) || line.rfind("row,col,fitness", 0) != 0)
            throw std::runtime_error("archive file lacks the 'row,col,fitness,d1,d2,policy' header");
        int lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty())
                continue;
            const auto fields = detail::split(line, ',');
            if (fields.size() != 6)
                throw std::runtime_error("archive line " + std::to_string(lineno) + " has " + std::to_string(fields.size()) + " fields, expected 6");
            ArchiveRow r;
            r.cell = {std::stoi(fields[0]), std::stoi(fields[1])};
            r.fitness = std::stod(fields[2]);
            r.d1 = std::stod(fields[3]);
            r.d2 = std::stod(fields[4]);
            r.expr = parse_expr(fields[5]);
            rows.push_back(std::move(r));
        }
        return rows;
    }

    inline std::vector<ArchiveRow> load_archive_csv(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw std::runtime_error("cannot open archive file: " + path);
        return read_archive_csv(in);
    }

    /// Rebuilds an archive from a snapshot. Only the aggregate fitness and
    /// descriptors are stored, so per-case fitness comes back empty.
    inline EliteArchive archive_from_rows(const std::vector<ArchiveRow>& rows)
    {
        EliteArchive archive;
        for (const ArchiveRow& r : rows)
            archive.restore(r.cell, Elite{r.expr, Evaluation{r.fitness, {}, r.d1, r.d2}});
        return archive;
    }

    /// evaluations,best_fitness,case_1..case_n
    inline void write_progression_csv(std::ostream& out, const ProgressionCurve& curve)
    {
        const std::size_t cases = curve.checkpoints.empty() ? 0 : curve.checkpoints.front().per_case.size();
        out << "evaluations,best_fitness";
        for (std::size_t i = 0; i < cases; ++i)
            out << ",case_" << (i + 1);
        out << '\n';
        for (const Checkpoint& c : curve.checkpoints) {
            out << c.evaluations << ',' << detail::fmt17(c.best_fitness);
            for (double f : c.per_case)
                out << ',' << detail::fmt17(f);
            out << '\n';
        }
    }

    inline ProgressionCurve read_progression_csv(std::istream& in)
    {
        ProgressionCurve curve;
        std::string line;
        if (!std::getline(in, line) || line.rfind("evaluations,best_fitness", 0) != 0)
            throw std::runtime_error("progression file lacks the 'evaluations,best_fitness,...' header");
        while (std::getline(in, line)) {
            if (line.empty())
                continue;
            const auto fields = detail::split(line, ',');
            if (fields.size() < 2)
                throw std::runtime_error("malformed progression line: " + line);
            Checkpoint c;
            c.evaluations = std::stol(fields[0]);
            c.best_fitness = std::stod(fields[1]);
            for (std::size_t i = 2; i < fields.size(); ++i)
                c.per_case.push_back(std::stod(fields[i]));
            curve.checkpoints.push_back(std::move(c));
        }
        return curve;
    }

} // namespace currevo

#endif
