// Command-line front end: run, baseline, batch, eval, stats, render.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <currevo/config.hpp>
#include <currevo/feedback.hpp>
#include <currevo/http_transport.hpp>
#include <currevo/orchestrator.hpp>
#include <currevo/raster.hpp>
#include <currevo/stats.hpp>

namespace fs = std::filesystem;
using namespace currevo;

namespace {

    struct Globals {
        std::string config;
        std::optional<std::uint64_t> seed;
        std::string out;
        std::optional<unsigned> threads;
    };

    struct RunFlags {
        std::optional<int> stages;
        std::optional<long> evals;
        std::optional<long> budget;
        std::string script;
        std::string manual;
        bool http = false;
        std::string model;
        std::string url;
        int stop_after = -1;
        bool quiet = false;
    };

    class UsageError : public std::runtime_error {
    public:
        using std::runtime_error::runtime_error;
    };

    RunConfig resolve_config(const Globals& g, const RunFlags& f, Method method)
    {
        RunConfig c = g.config.empty() ? RunConfig{} : load_config(g.config);
        c.method = method;
        if (g.seed)
            c.seed = *g.seed;
        if (g.threads)
            c.threads = *g.threads;
        if (f.stages)
            c.n_stage = *f.stages;
        if (f.evals)
            c.evals_per_stage = *f.evals;
        if (f.budget)
            c.batch_budget = *f.budget;
        const int picked = !f.script.empty() + !f.manual.empty() + f.http;
        if (picked > 1)
            throw UsageError("choose one of --script, --manual and --http");
        if (!f.script.empty()) {
            c.transport.kind = TransportKind::Scripted;
            c.transport.script = fs::absolute(f.script).string();
        }
        if (!f.manual.empty()) {
            c.transport.kind = TransportKind::Manual;
            c.transport.manual_dir = fs::absolute(f.manual).string();
        }
        if (f.http)
            c.transport.kind = TransportKind::Http;
        if (!f.model.empty())
            c.transport.http.model = f.model;
        if (!f.url.empty())
            c.transport.http.url = f.url;
        return c;
    }

    std::unique_ptr<Transport> make_transport(const RunConfig& c, const std::string& out)
    {
        if (!is_interactive(c.method) && c.method != Method::Static)
            return nullptr;
        switch (c.transport.kind) {
        case TransportKind::Scripted:
            return std::make_unique<ScriptedTransport>(ScriptedTransport::from_file(c.transport.script));
        case TransportKind::Manual: {
            const fs::path dir = c.transport.manual_dir.empty() ? fs::path(out) / "exchange" : fs::path(c.transport.manual_dir);
            std::cerr << "manual transport: prompts appear under " << dir.string() << "/exchange-<n>/; write the reply to response.json there\n";
            return std::make_unique<ManualTransport>(dir, std::chrono::milliseconds(c.transport.poll_ms), std::chrono::seconds(c.transport.manual_timeout_s));
        }
        case TransportKind::Http: {
            const HttpSettings& h = c.transport.http;
            if (!h.api_key_env.empty() && !std::getenv(h.api_key_env.c_str()))
                throw UsageError("environment variable " + h.api_key_env + " is not set (it should hold the API key)");
            return std::make_unique<HttpTransport>(h);
        }
        }
        return nullptr;
    }

    int execute(const Globals& g, const RunFlags& f, Method method)
    {
        if (g.out.empty())
            throw UsageError("--out is required: the run directory to create or resume");
        const RunConfig cfg = resolve_config(g, f, method);
        cfg.validate();
        auto transport = make_transport(cfg, g.out);
        RunOptions opt;
        opt.max_new_stages = f.stop_after;
        opt.log = f.quiet ? nullptr : &std::cerr;
        const RunRecord rec = run_experiment(cfg, g.out, transport.get(), opt);
        if (!f.quiet)
            std::cerr << (rec.complete() ? "run complete: " : "run paused: ") << rec.stages.size() << "/" << rec.planned_stages << " stages in " << g.out << "\n";
        return 0;
    }

    void add_run_flags(CLI::App* cmd, RunFlags& f, bool with_transport)
    {
        cmd->add_option("--stages", f.stages, "number of stages (default 8)");
        cmd->add_option("--evals", f.evals, "fitness evaluations per stage (default 10000)");
        if (with_transport) {
            cmd->add_option("--script", f.script, "scripted transport: NDJSON file with one reply per line");
            cmd->add_option("--manual", f.manual, "manual transport: exchange directory (default <out>/exchange)");
            cmd->add_flag("--http", f.http, "HTTP chat-completions transport");
            cmd->add_option("--model", f.model, "model name for --http");
            cmd->add_option("--url", f.url, "endpoint URL for --http");
        }
        cmd->add_option("--stop-after", f.stop_after, "run at most this many new stages, then stop (resume later with the same command)");
        cmd->add_flag("-q,--quiet", f.quiet, "no progress lines");
    }

    std::string read_file(const std::string& path)
    {
        std::ifstream in(path, std::ios::binary);
        if (!in)
            throw RunDirError("cannot read " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    void write_file(const std::string& path, const std::string& content)
    {
        const fs::path p(path);
        if (p.has_parent_path())
            fs::create_directories(p.parent_path());
        std::ofstream out(path, std::ios::binary);
        out << content;
        if (!out)
            throw RunDirError("cannot write " + path);
    }

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Curriculum design experiments: MAP-Elites navigation policies trained on designer-proposed arenas."};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "JSON configuration file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "master seed");
    app.add_option("--out", g.out, "output directory (or file for render)");
    app.add_option("--threads", g.threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);

    RunFlags run_flags;
    std::string interactive_mode = "interactive-NPB";
    CLI::App* run = app.add_subcommand("run", "interactive curriculum run");
    run->add_option("--mode", interactive_mode, "feedback modality")->check(CLI::IsMember({"interactive-N", "interactive-NP", "interactive-NPB", "N", "NP", "NPB", "N+P", "N+P+B"}));
    add_run_flags(run, run_flags, true);

    RunFlags base_flags;
    std::string baseline_kind;
    CLI::App* baseline = app.add_subcommand("baseline", "fixed-curriculum baseline");
    baseline->add_option("kind", baseline_kind, "expert, static or random")->required()->check(CLI::IsMember({"expert", "static", "random"}));
    add_run_flags(baseline, base_flags, true);

    RunFlags batch_flags;
    std::string curriculum;
    CLI::App* batch = app.add_subcommand("batch", "train once on a whole saved curriculum");
    batch->add_option("--curriculum", curriculum, "run directory, arena list file or 'expert'")->required();
    batch->add_option("--budget", batch_flags.budget, "fitness evaluations (default 40000)");
    batch->add_flag("-q,--quiet", batch_flags.quiet, "no progress lines");

    std::vector<std::string> eval_archives, eval_policies_files;
    std::string eval_arenas = "test";
    CLI::App* eval = app.add_subcommand("eval", "evaluate saved policies on an arena set");
    eval->add_option("--archive", eval_archives, "archive.csv (every occupant is evaluated)");
    eval->add_option("--policy", eval_policies_files, "file holding one policy expression");
    eval->add_option("--arenas", eval_arenas, "arena directory, list file, 'test' or 'expert' (default test)");

    std::vector<std::string> stats_dirs;
    std::string stats_arenas = "test";
    CLI::App* stats = app.add_subcommand("stats", "comparison tables over run directories");
    stats->add_option("runs", stats_dirs, "run directories, optionally label=dir")->required()->expected(2, -1);
    stats->add_option("--arenas", stats_arenas, "held-out arena set (default test)");

    std::string render_arena_path, render_policy;
    bool render_png = false;
    CLI::App* render = app.add_subcommand("render", "draw an arena, or a policy's trajectory in it, as SVG");
    render->add_option("--arena", render_arena_path, "arena file")->required();
    render->add_option("--policy", render_policy, "policy expression file: also draw its trajectory");
    render->add_flag("--png", render_png, "write PNG instead of SVG");

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (*run) {
            const std::string m = interactive_mode.rfind("interactive-", 0) == 0 ? interactive_mode : "interactive-" + modality_name(parse_modality(interactive_mode));
            return execute(g, run_flags, parse_method(m));
        }
        if (*baseline)
            return execute(g, base_flags, parse_method(baseline_kind));
        if (*batch) {
            if (g.out.empty())
                throw UsageError("--out is required: the run directory to create or resume");
            RunConfig cfg = resolve_config(g, batch_flags, Method::BatchReplay);
            cfg.curriculum = curriculum == "expert" ? curriculum : fs::absolute(curriculum).string();
            cfg.validate();
            RunOptions opt;
            opt.log = batch_flags.quiet ? nullptr : &std::cerr;
            run_experiment(cfg, g.out, nullptr, opt);
            return 0;
        }
        if (*eval) {
            if (eval_archives.empty() && eval_policies_files.empty())
                throw UsageError("eval needs --archive or --policy");
            std::vector<PolicyExpr> policies;
            std::vector<std::string> names;
            for (const std::string& a : eval_archives)
                for (const ArchiveRow& r : load_archive_csv(a)) {
                    policies.push_back(r.expr);
                    names.push_back(a + ":" + std::to_string(r.cell.row) + "," + std::to_string(r.cell.col));
                }
            for (const std::string& p : eval_policies_files) {
                std::string text = read_file(p);
                while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
                    text.pop_back();
                policies.push_back(parse_expr(text));
                names.push_back(p);
            }
            if (policies.empty())
                throw UsageError("no policies to evaluate");
            const auto arenas = load_arena_set(eval_arenas);
            RunConfig cfg = g.config.empty() ? RunConfig{} : load_config(g.config);
            const PolicyScores s = eval_policies(policies, arenas, cfg.sim, g.threads.value_or(1));
            std::string table = "policy\tfitness";
            for (std::size_t i = 0; i < arenas.size(); ++i)
                table += "\tcase_" + std::to_string(i + 1);
            table += "\n";
            for (std::size_t i = 0; i < policies.size(); ++i) {
                table += "\"" + names[i] + "\"\t" + detail::g6(s.fitness[i]);
                for (double v : s.per_case[i])
                    table += "\t" + detail::g6(v);
                table += "\n";
            }
            table += "min\t" + detail::g6(s.min);
            for (double v : s.per_case[s.argmin])
                table += "\t" + detail::g6(v);
            table += "\n";
            std::cout << table;
            if (!g.out.empty())
                write_file(g.out, table);
            return 0;
        }
        if (*stats) {
            const auto arenas = load_arena_set(stats_arenas);
            const StatsReport r = stats_report(stats_dirs, arenas, g.threads.value_or(1));
            const std::string text = r.text();
            std::cout << text;
            if (!g.out.empty())
                write_file(g.out, text);
            return 0;
        }
        if (*render) {
            if (g.out.empty())
                throw UsageError("--out is required: the image file to write");
            const Arena arena = load_arena(render_arena_path);
            Scene scene = render_arena(arena);
            if (!render_policy.empty()) {
                std::string text = read_file(render_policy);
                while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back())))
                    text.pop_back();
                const RunConfig cfg = g.config.empty() ? RunConfig{} : load_config(g.config);
                const PolicyExpr policy = parse_expr(text);
                PolicyController controller(policy, cfg.sim);
                const WorldGeometry world = to_world(arena);
                scene = render_trajectory(world, run_episode(world, controller, cfg.sim));
            }
            if (render_png) {
                const auto png = to_png(scene);
                write_file(g.out, std::string(png.begin(), png.end()));
            }
            else {
                write_file(g.out, to_svg(scene));
            }
            return 0;
        }
    }
    catch (const std::exception& e) {
        std::cerr << "currevo: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
