#ifndef CURREVO_STATS_HPP
#define CURREVO_STATS_HPP

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <currevo/map_elites.hpp>
#include <currevo/orchestrator.hpp>
#include <currevo/parallel.hpp>

namespace currevo {

    class SampleTooLarge : public std::invalid_argument {
    public:
        using std::invalid_argument::invalid_argument;
    };

    class StageMismatch : public std::runtime_error {
    public:
        using std::runtime_error::runtime_error;
    };

    struct Quartiles {
        double median = 0.0;
        double q1 = 0.0;
        double q3 = 0.0;
    };

    /// Linear interpolation between order statistics at p * (n - 1).
    inline double quantile_inclusive(std::vector<double> v, double p)
    {
        if (v.empty())
            throw std::invalid_argument("quantile of an empty sample");
        std::sort(v.begin(), v.end());
        const double h = p * static_cast<double>(v.size() - 1);
        const auto lo = static_cast<std::size_t>(std::floor(h));
        const std::size_t hi = std::min(lo + 1, v.size() - 1);
        return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
    }

    inline Quartiles median_iqr(std::span<const double> samples)
    {
        std::vector<double> v(samples.begin(), samples.end());
        return {quantile_inclusive(v, 0.5), quantile_inclusive(v, 0.25), quantile_inclusive(v, 0.75)};
    }

    struct MannWhitney {
        double u = 0.0; // pairs (x in a, y in b) with x > y, ties counting one half
        double p = 1.0; // exact two-sided, twice the smaller tail, capped at 1
    };

    inline constexpr std::size_t k_exact_mw_limit = 30;

    /// Exact test: the null distribution of a's midrank sum is counted over
    /// every way of choosing |a| of the pooled positions.
    inline MannWhitney mann_whitney_u(std::span<const double> a, std::span<const double> b)
    {
        const std::size_t na = a.size(), nb = b.size(), n = na + nb;
        if (na == 0 || nb == 0)
            throw std::invalid_argument("Mann-Whitney test needs two non-empty samples");
        if (n > k_exact_mw_limit)
            throw SampleTooLarge("exact Mann-Whitney test is limited to " + std::to_string(k_exact_mw_limit) + " pooled samples, got " + std::to_string(n));

        std::vector<std::pair<double, int>> pooled;
        for (double x : a)
            pooled.push_back({x, 0});
        for (double y : b)
            pooled.push_back({y, 1});
        std::sort(pooled.begin(), pooled.end(), [](const auto& l, const auto& r) { return l.first < r.first; });

        // doubled midranks keep every rank sum integral
        std::vector<int> rank2(n);
        for (std::size_t i = 0; i < n;) {
            std::size_t j = i;
            while (j < n && pooled[j].first == pooled[i].first)
                ++j;
            for (std::size_t k = i; k < j; ++k)
                rank2[k] = static_cast<int>(i + j + 1); // 2 * mean of ranks i+1..j
            i = j;
        }
        int observed2 = 0;
        for (std::size_t k = 0; k < n; ++k)
            if (pooled[k].second == 0)
                observed2 += rank2[k];

        const int max_sum = static_cast<int>(n * (n + 1));
        // ways[c][s]: subsets of size c with doubled rank sum s
        std::vector<std::vector<double>> ways(na + 1, std::vector<double>(static_cast<std::size_t>(max_sum) + 1, 0.0));
        ways[0][0] = 1.0;
        for (std::size_t k = 0; k < n; ++k)
            for (std::size_t c = std::min(na, k + 1); c >= 1; --c)
                for (int s = max_sum; s >= rank2[k]; --s)
                    ways[c][static_cast<std::size_t>(s)] += ways[c - 1][static_cast<std::size_t>(s - rank2[k])];

        const int offset2 = static_cast<int>(na * (na + 1)); // 2 * na(na+1)/2
        MannWhitney out;
        out.u = (observed2 - offset2) / 2.0;
        double total = 0.0, le = 0.0, ge = 0.0;
        for (int s = 0; s <= max_sum; ++s) {
            const double w = ways[na][static_cast<std::size_t>(s)];
            total += w;
            if (s <= observed2)
                le += w;
            if (s >= observed2)
                ge += w;
        }
        // doubled smaller tail
        out.p = std::min(1.0, 2.0 * std::min(le, ge) / total);
        return out;
    }

    // ---------------------------------------------------------------- evaluation

    struct PolicyScores {
        std::vector<double> fitness;               // f(s; C) per policy
        std::vector<std::vector<double>> per_case; // per policy, arena order
        double min = 0.0;
        std::size_t argmin = 0; // first policy reaching the minimum
    };

    inline PolicyScores eval_policies(std::span<const PolicyExpr> policies, std::span<const WorldGeometry> worlds, const SimParams& sim = {}, unsigned threads = 1)
    {
        if (policies.empty() || worlds.empty())
            throw std::invalid_argument("eval_policies needs at least one policy and one arena");
        std::vector<Evaluation> evals(policies.size());
        parallel_for(policies.size(), threads, [&](std::size_t i) { evals[i] = evaluate(policies[i], worlds, sim); });
        PolicyScores out;
        for (const Evaluation& e : evals) {
            out.fitness.push_back(e.fitness);
            out.per_case.push_back(e.per_case_fitness);
        }
        out.argmin = static_cast<std::size_t>(std::min_element(out.fitness.begin(), out.fitness.end()) - out.fitness.begin());
        out.min = out.fitness[out.argmin];
        return out;
    }

    inline PolicyScores eval_policies(std::span<const PolicyExpr> policies, std::span<const Arena> arenas, const SimParams& sim = {}, unsigned threads = 1)
    {
        std::vector<WorldGeometry> worlds;
        for (const Arena& a : arenas)
            worlds.push_back(to_world(a));
        return eval_policies(policies, std::span<const WorldGeometry>(worlds), sim, threads);
    }

    inline std::vector<PolicyExpr> archive_policies(const EliteArchive& archive)
    {
        std::vector<PolicyExpr> out;
        for (const CellIndex c : archive.occupied())
            out.push_back(archive.at(c)->expr);
        return out;
    }

    /// "test" and "expert" name the built-in sets; a directory contributes
    /// every *.txt file in name order; any other path is an arena list file.
    inline std::vector<Arena> load_arena_set(const std::string& source)
    {
        namespace fs = std::filesystem;
        if (source == "test")
            return test_arenas();
        if (source == "expert")
            return expert_curriculum();
        const fs::path p(source);
        if (!fs::exists(p))
            throw RunDirError("arena set not found: " + source + " (give a directory of .txt arenas, an arena list file, 'test' or 'expert')");
        std::vector<Arena> out;
        if (fs::is_directory(p)) {
            std::vector<fs::path> files;
            for (const auto& e : fs::directory_iterator(p))
                if (e.is_regular_file() && e.path().extension() == ".txt")
                    files.push_back(e.path());
            std::sort(files.begin(), files.end());
            for (const fs::path& f : files) {
                const auto part = detail::read_arena_list(f);
                out.insert(out.end(), part.begin(), part.end());
            }
        }
        else {
            out = detail::read_arena_list(p);
        }
        if (out.empty())
            throw RunDirError(source + " contains no arenas");
        return out;
    }

    // ------------------------------------------------------------------- report

    struct RunMetrics {
        std::string dir;
        std::vector<double> train;       // per stage
        std::vector<double> test_best;   // per stage
        std::vector<double> archive_min; // per stage
    };

    inline RunMetrics run_metrics(const RunRecord& rec, const std::string& dir, std::span<const Arena> tests, unsigned threads = 1)
    {
        RunMetrics m;
        m.dir = dir;
        for (const StageRecord& s : rec.stages) {
            m.train.push_back(s.best_fitness);
            m.test_best.push_back(eval_policies(std::span<const PolicyExpr>(&s.best, 1), tests, rec.config.sim, threads).min);
            const auto pols = archive_policies(s.archive);
            m.archive_min.push_back(eval_policies(pols, tests, rec.config.sim, threads).min);
        }
        return m;
    }

    enum class Metric { Train, TestBest, ArchiveMin };

    inline const char* metric_name(Metric m)
    {
        return m == Metric::Train ? "train fitness of the best policy" : (m == Metric::TestBest ? "test fitness of the best policy" : "best test fitness in the archive");
    }

    inline const std::vector<double>& metric_of(const RunMetrics& r, Metric m) { return m == Metric::Train ? r.train : (m == Metric::TestBest ? r.test_best : r.archive_min); }

    struct MethodGroup {
        std::string label;
        std::vector<RunMetrics> runs;
        int stages() const { return runs.empty() ? 0 : static_cast<int>(runs.front().train.size()); }
        std::vector<double> at_stage(Metric m, int stage) const
        {
            std::vector<double> out;
            for (const RunMetrics& r : runs)
                out.push_back(metric_of(r, m)[static_cast<std::size_t>(stage)]);
            return out;
        }
        std::vector<double> final(Metric m) const { return at_stage(m, stages() - 1); }
    };

    struct PValueMatrix {
        std::vector<std::string> labels;
        std::vector<std::vector<double>> p; // NaN when a pair exceeds the exact-test limit
    };

    struct StatsReport {
        std::vector<MethodGroup> groups; // sorted by label
        std::map<Metric, PValueMatrix> pvalues;

        std::string text() const;
    };

    /// Entries are "label=dir" or a bare directory labelled by its method.
    /// Every run of a label must have the same number of completed stages.
    inline StatsReport stats_report(const std::vector<std::string>& entries, std::span<const Arena> tests, unsigned threads = 1)
    {
        if (entries.empty())
            throw std::invalid_argument("stats needs at least one run directory");
        if (tests.empty())
            throw std::invalid_argument("stats needs at least one test arena");
        std::map<std::string, MethodGroup> by_label;
        for (const std::string& e : entries) {
            const auto eq = e.find('=');
            const std::string dir = eq == std::string::npos ? e : e.substr(eq + 1);
            const RunRecord rec = load_run(dir);
            if (rec.stages.empty())
                throw StageMismatch(dir + " has no completed stage");
            const std::string label = eq == std::string::npos ? method_name(rec.config.method) : e.substr(0, eq);
            MethodGroup& g = by_label[label];
            g.label = label;
            if (!g.runs.empty() && static_cast<int>(rec.stages.size()) != g.stages())
                throw StageMismatch("runs labelled '" + label + "' disagree on the number of stages: " + g.runs.front().dir + " has " + std::to_string(g.stages()) + ", " +
                                    dir + " has " + std::to_string(rec.stages.size()));
            g.runs.push_back(run_metrics(rec, dir, tests, threads));
        }
        StatsReport report;
        for (auto& [label, g] : by_label)
            report.groups.push_back(std::move(g));
        for (Metric m : {Metric::Train, Metric::TestBest, Metric::ArchiveMin}) {
            PValueMatrix pm;
            for (const MethodGroup& g : report.groups)
                pm.labels.push_back(g.label);
            const std::size_t k = report.groups.size();
            pm.p.assign(k, std::vector<double>(k, 1.0));
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) {
                    const auto a = report.groups[i].final(m), b = report.groups[j].final(m);
                    try {
                        pm.p[i][j] = mann_whitney_u(a, b).p;
                    }
                    catch (const SampleTooLarge&) {
                        pm.p[i][j] = std::numeric_limits<double>::quiet_NaN();
                    }
                }
            report.pvalues[m] = std::move(pm);
        }
        return report;
    }

    namespace detail {
        inline std::string g6(double v)
        {
            if (std::isnan(v))
                return "n/a";
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.6g", v);
            return buf;
        }
    } // namespace detail

    /// Comma-separated tables, one block per metric, blocks separated by a
    /// "# title" line.
    inline std::string StatsReport::text() const
    {
        std::string out;
        for (Metric m : {Metric::Train, Metric::TestBest, Metric::ArchiveMin}) {
            out += std::string("# progression: ") + metric_name(m) + "\n";
            out += "method,stage,runs,median,q1,q3\n";
            for (const MethodGroup& g : groups)
                for (int s = 0; s < g.stages(); ++s) {
                    const auto v = g.at_stage(m, s);
                    const Quartiles q = median_iqr(v);
                    out += g.label + "," + std::to_string(s + 1) + "," + std::to_string(v.size()) + "," + detail::g6(q.median) + "," + detail::g6(q.q1) + "," +
                           detail::g6(q.q3) + "\n";
                }
            out += "\n";
        }
        out += "# final stage, per run\nmethod,run,stages,train,test_best,archive_min\n";
        for (const MethodGroup& g : groups)
            for (const RunMetrics& r : g.runs)
                out += g.label + "," + r.dir + "," + std::to_string(r.train.size()) + "," + detail::g6(r.train.back()) + "," + detail::g6(r.test_best.back()) + "," +
                       detail::g6(r.archive_min.back()) + "\n";
        for (Metric m : {Metric::Train, Metric::TestBest, Metric::ArchiveMin}) {
            const PValueMatrix& pm = pvalues.at(m);
            out += std::string("\n# final stage, exact two-sided Mann-Whitney p-values: ") + metric_name(m) + "\nmethod";
            for (const std::string& l : pm.labels)
                out += "," + l;
            out += "\n";
            for (std::size_t i = 0; i < pm.labels.size(); ++i) {
                out += pm.labels[i];
                for (double p : pm.p[i])
                    out += "," + detail::g6(p);
                out += "\n";
            }
        }
        return out;
    }

} // namespace currevo

#endif
