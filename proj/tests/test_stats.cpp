#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <unistd.h>

#include <currevo/stats.hpp>

#include "oracles.hpp"

using namespace currevo;
namespace fs = std::filesystem;

namespace {
    fs::path scratch(const std::string& name)
    {
        const fs::path p = fs::temp_directory_path() / ("currevo-stats-" + std::to_string(::getpid()) + "-" + name);
        fs::remove_all(p);
        return p;
    }

    std::map<std::string, std::string> tree(const fs::path& root)
    {
        std::map<std::string, std::string> out;
        for (const auto& e : fs::recursive_directory_iterator(root))
            if (e.is_regular_file()) {
                std::ifstream in(e.path(), std::ios::binary);
                std::ostringstream ss;
                ss << in.rdbuf();
                out[fs::relative(e.path(), root).string()] = ss.str();
            }
        return out;
    }

    RunConfig tiny(Method m, std::uint64_t seed, int stages = 2)
    {
        RunConfig c;
        c.method = m;
        c.n_stage = stages;
        c.evals_per_stage = 100;
        c.seed = seed;
        return c;
    }
} // namespace

TEST(MedianIqr, InclusiveQuartiles)
{
    const std::vector<double> five = {5, 1, 4, 2, 3};
    const Quartiles a = median_iqr(five);
    EXPECT_DOUBLE_EQ(a.median, 3);
    EXPECT_DOUBLE_EQ(a.q1, 2);
    EXPECT_DOUBLE_EQ(a.q3, 4);
    const std::vector<double> ones = {1, 1, 1};
    const Quartiles b = median_iqr(ones);
    EXPECT_EQ(b.median, 1);
    EXPECT_EQ(b.q1, 1);
    EXPECT_EQ(b.q3, 1);
    const std::vector<double> four = {1, 2, 3, 4};
    const Quartiles c = median_iqr(four);
    EXPECT_DOUBLE_EQ(c.median, 2.5);
    EXPECT_DOUBLE_EQ(c.q1, 1.75);
    EXPECT_DOUBLE_EQ(c.q3, 3.25);
    const std::vector<double> one = {7};
    EXPECT_EQ(median_iqr(one).q3, 7);
}

TEST(MannWhitney, Examples)
{
    const std::vector<double> a = {1, 2}, b = {3, 4};
    const MannWhitney r = mann_whitney_u(a, b);
    EXPECT_EQ(r.u, 0);
    EXPECT_NEAR(r.p, 2.0 / 6.0, 1e-15);
    const std::vector<double> x = {1}, y = {2};
    EXPECT_EQ(mann_whitney_u(x, y).u, 0);
    EXPECT_EQ(mann_whitney_u(x, y).p, 1.0);
    const std::vector<double> same = {1, 2, 3};
    EXPECT_EQ(mann_whitney_u(same, same).p, 1.0);
    EXPECT_EQ(mann_whitney_u(same, same).u, 4.5);
}

TEST(MannWhitney, TenVersusTenSeparated)
{
    std::vector<double> a, b;
    for (int i = 0; i < 10; ++i) {
        a.push_back(i);
        b.push_back(100 + i);
    }
    // only the two extreme arrangements are as far out: 2 / C(20,10)
    EXPECT_NEAR(mann_whitney_u(a, b).p, 2.0 / 184756.0, 1e-18);
}

TEST(MannWhitney, RejectsOutsideExactRegime)
{
    std::vector<double> a(16, 1.0), b(15, 2.0);
    EXPECT_THROW(mann_whitney_u(a, b), SampleTooLarge);
    a.resize(15);
    EXPECT_NO_THROW(mann_whitney_u(a, b));
    EXPECT_THROW(mann_whitney_u(std::vector<double>{}, b), std::invalid_argument);
}

TEST(MannWhitney, MatchesBruteForceForAllSizesUpToSix)
{
    Rng rng(20240);
    for (int na = 1; na <= 6; ++na)
        for (int nb = 1; nb <= 6; ++nb)
            for (int draw = 0; draw < 25; ++draw) {
                // small integer range forces ties in most draws
                const int range = draw % 2 ? 4 : 1000;
                std::vector<double> a, b;
                for (int i = 0; i < na; ++i)
                    a.push_back(uniform_int(rng, 0, range));
                for (int i = 0; i < nb; ++i)
                    b.push_back(uniform_int(rng, 0, range));
                const MannWhitney got = mann_whitney_u(a, b);
                const oracle::MwResult want = oracle::mann_whitney_bruteforce(a, b);
                ASSERT_NEAR(got.u, want.u, 1e-12) << na << "+" << nb << " draw " << draw;
                ASSERT_NEAR(got.p, want.p, 1e-12) << na << "+" << nb << " draw " << draw;
                // swapping the samples mirrors U and keeps p
                const MannWhitney swapped = mann_whitney_u(b, a);
                ASSERT_NEAR(got.u + swapped.u, na * nb, 1e-12);
                ASSERT_NEAR(got.p, swapped.p, 1e-12);
            }
}

TEST(EvalPolicies, GoldenStraightLine)
{
    const std::vector<PolicyExpr> pols = {PolicyExpr::constant(0.0)};
    const std::vector<WorldGeometry> worlds = {open_world({0.2, 0.5}, {0.5, 0.5})};
    const PolicyScores s = eval_policies(pols, std::span<const WorldGeometry>(worlds));
    // 0.9 * 0.3 final + 0.1 * 0.15 mean
    EXPECT_NEAR(s.fitness[0], 0.285, 1e-9);
    EXPECT_EQ(s.min, s.fitness[0]);
    EXPECT_EQ(s.argmin, 0u);
}

TEST(EvalPolicies, MinOverPoliciesNeverIncreases)
{
    Rng rng(5);
    const auto arenas = test_arenas();
    const std::vector<Arena> two(arenas.begin(), arenas.begin() + 2);
    std::vector<PolicyExpr> pols;
    double last = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 6; ++i) {
        pols.push_back(random_tree(rng, InitMode::Grow, 4));
        const PolicyScores s = eval_policies(pols, two);
        EXPECT_LE(s.min, last);
        EXPECT_EQ(s.min, *std::min_element(s.fitness.begin(), s.fitness.end()));
        EXPECT_EQ(s.fitness.size(), pols.size());
        last = s.min;
    }
    EXPECT_EQ(eval_policies(pols, two, {}, 3).fitness, eval_policies(pols, two, {}, 1).fitness);
    EXPECT_THROW(eval_policies(std::vector<PolicyExpr>{}, two), std::invalid_argument);
}

class StatsReportTest : public ::testing::Test {
protected:
    static void SetUpTestSuite()
    {
        root = scratch("runs");
        for (std::uint64_t seed = 1; seed <= 3; ++seed) {
            expert_dirs.push_back((root / ("expert-" + std::to_string(seed))).string());
            run_experiment(tiny(Method::Expert, seed), expert_dirs.back(), nullptr);
            random_dirs.push_back((root / ("random-" + std::to_string(seed))).string());
            run_experiment(tiny(Method::Random, seed), random_dirs.back(), nullptr);
        }
        const auto all = test_arenas();
        tests.assign(all.begin(), all.begin() + 2);
    }

    static inline fs::path root;
    static inline std::vector<std::string> expert_dirs, random_dirs;
    static inline std::vector<Arena> tests;
};

TEST_F(StatsReportTest, MatrixHasUnitDiagonalAndValidPValues)
{
    std::vector<std::string> entries = expert_dirs;
    entries.insert(entries.end(), random_dirs.begin(), random_dirs.end());
    const auto before = tree(root);
    const StatsReport r = stats_report(entries, tests);
    EXPECT_EQ(tree(root), before); // read-only
    ASSERT_EQ(r.groups.size(), 2u);
    EXPECT_EQ(r.groups[0].label, "expert");
    EXPECT_EQ(r.groups[1].label, "random");
    for (const auto& [metric, pm] : r.pvalues) {
        ASSERT_EQ(pm.p.size(), 2u);
        EXPECT_EQ(pm.p[0][0], 1.0);
        EXPECT_EQ(pm.p[1][1], 1.0);
        EXPECT_EQ(pm.p[0][1], pm.p[1][0]);
        EXPECT_GT(pm.p[0][1], 0.0);
        EXPECT_LE(pm.p[0][1], 1.0);
    }
    // archive minimum can only be at or below the best policy's test score
    for (const MethodGroup& g : r.groups)
        for (const RunMetrics& m : g.runs)
            for (std::size_t s = 0; s < m.train.size(); ++s)
                EXPECT_LE(m.archive_min[s], m.test_best[s]);
    const std::string text = r.text();
    EXPECT_NE(text.find("# progression: train fitness of the best policy"), std::string::npos);
    EXPECT_NE(text.find("expert,2,3,"), std::string::npos);
    EXPECT_EQ(stats_report(entries, tests).text(), text);
}

TEST_F(StatsReportTest, LabelsOverrideMethodNames)
{
    const StatsReport r = stats_report({"a=" + expert_dirs[0], "a=" + expert_dirs[1], "b=" + expert_dirs[2]}, tests);
    ASSERT_EQ(r.groups.size(), 2u);
    EXPECT_EQ(r.groups[0].runs.size(), 2u);
    EXPECT_EQ(r.groups[1].label, "b");
}

TEST_F(StatsReportTest, InconsistentStageCountsAreRejected)
{
    const std::string longer = (root / "expert-3stages").string();
    run_experiment(tiny(Method::Expert, 9, 3), longer, nullptr);
    EXPECT_THROW(stats_report({expert_dirs[0], longer}, tests), StageMismatch);
    EXPECT_NO_THROW(stats_report({"short=" + expert_dirs[0], "long=" + longer}, tests));
}

TEST_F(StatsReportTest, MonotoneFixtureGivesMonotoneMedians)
{
    // rewrite the stored train fitness to a decreasing sequence
    std::vector<std::string> copies;
    for (std::size_t i = 0; i < random_dirs.size(); ++i) {
        const fs::path dst = root / ("mono-" + std::to_string(i));
        fs::remove_all(dst);
        fs::copy(random_dirs[i], dst, fs::copy_options::recursive);
        for (int s = 1; s <= 2; ++s) {
            const fs::path meta = dst / ("stage-" + std::to_string(s)) / "stage.json";
            std::ifstream in(meta);
            json j = json::parse(in);
            j["best_fitness"] = 1.0 / (s + 1) + 0.01 * static_cast<double>(i);
            std::ofstream(meta) << j.dump(2);
        }
        copies.push_back(dst.string());
    }
    const StatsReport r = stats_report(copies, tests);
    const MethodGroup& g = r.groups.at(0);
    EXPECT_GT(median_iqr(g.at_stage(Metric::Train, 0)).median, median_iqr(g.at_stage(Metric::Train, 1)).median);
}
