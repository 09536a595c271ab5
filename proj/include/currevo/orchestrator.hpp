// Stage loop shared by every method, plus the run-directory layout:
//
//   <out>/config.json            resolved configuration
//   <out>/summary.csv            one line per completed stage
//   <out>/initial/               fixed curriculum of the non-interactive methods
//   <out>/stage-<k>/             case.txt bag.txt archive.csv best.sexp
//                                progression.csv stage.json timing.json and,
//                                for interactive runs, response.json and
//                                transcript.json (the exchange that produced
//                                case k), messages.json, and feedback.txt,
//                                feedback.json, feedback-*.svg/png (the report
//                                on stage k, sent with the next request)
//
// Stage directories are written under a ".partial" name and renamed when
// complete, so an interrupted run resumes from the last whole stage.
#ifndef CURREVO_ORCHESTRATOR_HPP
#define CURREVO_ORCHESTRATOR_HPP

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include <currevo/arena.hpp>
#include <currevo/config.hpp>
#include <currevo/feedback.hpp>
#include <currevo/gateway.hpp>
#include <currevo/map_elites.hpp>
#include <currevo/reference_arenas.hpp>
#include <currevo/rng.hpp>

namespace currevo {

    class RunDirError : public std::runtime_error {
    public:
        using std::runtime_error::runtime_error;
    };

    inline constexpr std::uint64_t k_stream_search = 1;
    inline constexpr std::uint64_t k_stream_population = 2;
    inline constexpr std::uint64_t k_stream_fallback = 3;
    inline constexpr std::uint64_t k_stream_curriculum = 4;

    inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t stage) { return derive_seed(derive_seed(seed, stream), stage); }

    struct StageRecord {
        int index = 0; // 1-based
        std::vector<Arena> bag;
        bool case_fallback = false; // newest case was a random substitute
        long budget = 0;
        long evaluations = 0;
        EliteArchive archive;
        PolicyExpr best;
        double best_fitness = 0.0;
        std::vector<double> per_case; // best policy, bag order
        ProgressionCurve curve;
        std::string feedback_text;
        json response; // exchange that produced the newest case; null without a designer
        double seconds = 0.0;
    };

    struct RunRecord {
        RunConfig config;
        std::vector<StageRecord> stages;
        int planned_stages = 0;
        bool complete() const { return static_cast<int>(stages.size()) == planned_stages; }
    };

    struct RunOptions {
        int max_new_stages = -1; // stop early after this many stages; -1 runs to the end
        std::ostream* log = nullptr;
    };

    inline int planned_stages(const RunConfig& c) { return c.method == Method::BatchReplay ? 1 : c.n_stage; }

    namespace detail {
        namespace fs = std::filesystem;

        inline void write_text(const fs::path& p, const std::string& content)
        {
            std::ofstream out(p, std::ios::binary);
            out << content;
            out.close();
            if (!out)
                throw RunDirError("cannot write " + p.string());
        }

        inline std::string read_text(const fs::path& p)
        {
            std::ifstream in(p, std::ios::binary);
            if (!in)
                throw RunDirError("cannot read " + p.string());
            std::ostringstream ss;
            ss << in.rdbuf();
            return ss.str();
        }

        inline json read_json(const fs::path& p)
        {
            const json j = json::parse(read_text(p), nullptr, false);
            if (j.is_discarded())
                throw RunDirError(p.string() + " is not valid JSON");
            return j;
        }

        inline std::string arenas_text(const std::vector<Arena>& arenas)
        {
            std::string out;
            for (const Arena& a : arenas)
                out += render_text(a) + "\n";
            return out;
        }

        inline std::vector<Arena> read_arena_list(const fs::path& p)
        {
            std::vector<Arena> out;
            std::istringstream in(read_text(p));
            std::string line;
            int lineno = 0;
            while (std::getline(in, line)) {
                ++lineno;
                if (!line.empty() && line.back() == '\r')
                    line.pop_back();
                if (line.find_first_not_of(" \t") == std::string::npos)
                    continue;
                try {
                    out.push_back(parse_arena(line));
                }
                catch (const ArenaError& e) {
                    throw RunDirError(p.string() + ":" + std::to_string(lineno) + ": " + e.what());
                }
            }
            return out;
        }

        inline fs::path stage_dir(const fs::path& out, int k) { return out / ("stage-" + std::to_string(k)); }

        /// Writes into <final>.partial, then renames.
        template <typename Fn>
        void write_atomically(const fs::path& final_dir, Fn&& fill)
        {
            fs::path tmp = final_dir;
            tmp += ".partial";
            fs::remove_all(tmp);
            fs::create_directories(tmp);
            fill(tmp);
            fs::rename(tmp, final_dir);
        }

        inline json messages_json(const std::vector<ChatMessage>& messages)
        {
            json j = json::array();
            for (const ChatMessage& m : messages)
                j.push_back(to_json(m));
            return j;
        }

        /// Image files are referenced relative to the run root, since a
        /// request carries the report written in the previous stage directory.
        inline json message_json(const ChatMessage& m, const std::string& image_dir)
        {
            json j = to_json(m);
            if (j.contains("images"))
                for (json& img : j["images"])
                    img["file"] = image_dir + "/" + img["name"].get<std::string>();
            return j;
        }

        inline ChatMessage read_message(const json& j, const fs::path& root)
        {
            ChatMessage m;
            const std::string role = j.at("role").get<std::string>();
            m.role = role == "assistant" ? Role::Assistant : (role == "system" ? Role::System : Role::User);
            m.text = j.at("text").get<std::string>();
            if (j.contains("images"))
                for (const json& img : j["images"]) {
                    ImageArtifact a;
                    a.name = img.at("name").get<std::string>();
                    a.caption = img.at("caption").get<std::string>();
                    const fs::path base = root / img.at("file").get<std::string>();
                    a.svg = read_text(fs::path(base.string() + ".svg"));
                    const std::string png = read_text(fs::path(base.string() + ".png"));
                    a.png.assign(png.begin(), png.end());
                    m.images.push_back(std::move(a));
                }
            return m;
        }

        inline std::vector<ChatMessage> read_messages(const fs::path& file, const fs::path& root)
        {
            std::vector<ChatMessage> out;
            for (const json& j : read_json(file))
                out.push_back(read_message(j, root));
            return out;
        }

        /// feedback.txt for reading, feedback.json plus image files for replay.
        inline void write_feedback(const fs::path& dir, const std::string& dir_name, const ChatMessage& msg)
        {
            write_text(dir / "feedback.txt", msg.text);
            write_text(dir / "feedback.json", message_json(msg, dir_name).dump(2) + "\n");
            for (const ImageArtifact& img : msg.images) {
                write_text(dir / (img.name + ".svg"), img.svg);
                write_text(dir / (img.name + ".png"), std::string(img.png.begin(), img.png.end()));
            }
        }

        inline json case_response_json(const CaseResult& r)
        {
            return json{{"case", r.response.case_text},
                        {"understood", r.response.understood},
                        {"reasoning", r.response.reasoning},
                        {"arena", render_text(r.arena)},
                        {"fallback", r.fallback},
                        {"attempts", r.attempts}};
        }

        inline std::string per_case_field(const std::vector<double>& v)
        {
            std::string out;
            for (std::size_t i = 0; i < v.size(); ++i)
                out += (i ? ";" : "") + fmt17(v[i]);
            return out;
        }

        inline void write_summary(const fs::path& out, const std::vector<StageRecord>& stages)
        {
            std::string s = "stage,bag_size,evaluations,best_fitness,last_case_fitness,case_fallback,per_case_fitness\n";
            for (const StageRecord& r : stages)
                s += std::to_string(r.index) + "," + std::to_string(r.bag.size()) + "," + std::to_string(r.evaluations) + "," + fmt17(r.best_fitness) + "," +
                     fmt17(r.per_case.empty() ? 0.0 : r.per_case.back()) + "," + (r.case_fallback ? "1" : "0") + "," + per_case_field(r.per_case) + "\n";
            write_text(out / "summary.csv", s);
        }

        inline StageRecord read_stage(const fs::path& dir)
        {
            StageRecord r;
            const json meta = read_json(dir / "stage.json");
            r.index = meta.at("stage").get<int>();
            r.case_fallback = meta.at("case_fallback").get<bool>();
            r.budget = meta.at("budget").get<long>();
            r.evaluations = meta.at("evaluations").get<long>();
            r.best_fitness = meta.at("best_fitness").get<double>();
            r.per_case = meta.at("per_case_fitness").get<std::vector<double>>();
            r.bag = read_arena_list(dir / "bag.txt");
            r.archive = archive_from_rows(load_archive_csv((dir / "archive.csv").string()));
            std::string sexp = read_text(dir / "best.sexp");
            while (!sexp.empty() && (sexp.back() == '\n' || sexp.back() == '\r'))
                sexp.pop_back();
            r.best = parse_expr(sexp);
            std::istringstream prog(read_text(dir / "progression.csv"));
            r.curve = read_progression_csv(prog);
            if (fs::exists(dir / "feedback.txt"))
                r.feedback_text = read_text(dir / "feedback.txt");
            if (fs::exists(dir / "response.json"))
                r.response = read_json(dir / "response.json");
            if (fs::exists(dir / "timing.json"))
                r.seconds = read_json(dir / "timing.json").value("seconds", 0.0);
            return r;
        }

        inline void write_stage(const fs::path& dir, const StageRecord& r, bool write_case)
        {
            if (write_case)
                write_text(dir / "case.txt", render_text(r.bag.back()) + "\n");
            write_text(dir / "bag.txt", arenas_text(r.bag));
            {
                std::ostringstream a;
                write_archive_csv(a, r.archive);
                write_text(dir / "archive.csv", a.str());
            }
            write_text(dir / "best.sexp", format_expr(r.best) + "\n");
            {
                std::ostringstream p;
                write_progression_csv(p, r.curve);
                write_text(dir / "progression.csv", p.str());
            }
            const json meta{{"stage", r.index},          {"bag_size", r.bag.size()},         {"budget", r.budget},
                            {"evaluations", r.evaluations}, {"best_fitness", r.best_fitness}, {"per_case_fitness", r.per_case},
                            {"case_fallback", r.case_fallback}};
            write_text(dir / "stage.json", meta.dump(2) + "\n");
            if (!r.response.is_null())
                write_text(dir / "response.json", r.response.dump(2) + "\n");
            write_text(dir / "timing.json", json{{"seconds", r.seconds}}.dump() + "\n");
        }

        inline int completed_stages(const fs::path& out, int planned)
        {
            int k = 0;
            while (k < planned && fs::is_directory(stage_dir(out, k + 1)))
                ++k;
            return k;
        }

        inline void prepare_run_dir(const fs::path& out, const RunConfig& cfg)
        {
            fs::create_directories(out);
            for (const auto& entry : fs::directory_iterator(out))
                if (entry.is_directory() && entry.path().extension() == ".partial")
                    fs::remove_all(entry.path());
            const fs::path cfg_path = out / "config.json";
            const json want = to_json(cfg);
            if (fs::exists(cfg_path)) {
                if (read_json(cfg_path) != want)
                    throw RunDirError(out.string() + " already holds a run with a different configuration");
            }
            else {
                write_text(cfg_path, want.dump(2) + "\n");
            }
        }
    } // namespace detail

    /// Cases listed in a run directory (stage-<k>/case.txt in order, or
    /// initial/curriculum.txt), in a text file with one arena per line, or the
    /// built-in reference sequence when `source` is "expert".
    inline std::vector<Arena> load_curriculum(const std::string& source)
    {
        namespace fs = std::filesystem;
        if (source == "expert")
            return expert_curriculum();
        const fs::path p(source);
        if (fs::is_directory(p)) {
            std::vector<Arena> out;
            for (int k = 1; fs::exists(detail::stage_dir(p, k) / "case.txt"); ++k)
                out.push_back(load_arena((detail::stage_dir(p, k) / "case.txt").string()));
            if (!out.empty())
                return out;
            if (fs::exists(p / "initial" / "curriculum.txt"))
                return detail::read_arena_list(p / "initial" / "curriculum.txt");
            throw RunDirError(source + " holds no stage cases and no curriculum");
        }
        if (!fs::exists(p))
            throw RunDirError("curriculum source not found: " + source);
        auto out = detail::read_arena_list(p);
        if (out.empty())
            throw RunDirError(source + " lists no arenas");
        return out;
    }

    inline RunRecord load_run(const std::string& dir)
    {
        namespace fs = std::filesystem;
        const fs::path p(dir);
        if (!fs::exists(p / "config.json"))
            throw RunDirError(dir + " is not a run directory (no config.json)");
        RunRecord rec;
        rec.config = config_from_json(detail::read_json(p / "config.json"));
        rec.planned_stages = planned_stages(rec.config);
        const int done = detail::completed_stages(p, rec.planned_stages);
        for (int k = 1; k <= done; ++k)
            rec.stages.push_back(detail::read_stage(detail::stage_dir(p, k)));
        return rec;
    }

    namespace detail {
        struct Curriculum {
            std::vector<Arena> cases;
            std::vector<bool> fallback;
        };

        /// The fixed curriculum of a non-interactive method, computed once and
        /// kept under initial/.
        inline Curriculum ensure_curriculum(const RunConfig& cfg, const fs::path& out, Transport* transport, std::size_t& replies_used)
        {
            const fs::path init = out / "initial";
            Curriculum c;
            if (fs::is_directory(init)) {
                c.cases = read_arena_list(init / "curriculum.txt");
                const json info = read_json(init / "curriculum.json");
                c.fallback = info.at("fallback").get<std::vector<bool>>();
                replies_used = info.value("replies", std::size_t{0});
                return c;
            }
            json info;
            std::vector<ChatMessage> messages;
            json transcript;
            switch (cfg.method) {
            case Method::Expert: {
                auto all = expert_curriculum();
                if (cfg.n_stage > static_cast<int>(all.size()))
                    throw ConfigError("the expert curriculum has " + std::to_string(all.size()) + " cases; n_stage " + std::to_string(cfg.n_stage) + " is too large");
                c.cases.assign(all.begin(), all.begin() + cfg.n_stage);
                break;
            }
            case Method::Random: {
                Rng rng = make_rng(derive_seed(cfg.seed, k_stream_curriculum), 0);
                for (int i = 0; i < cfg.n_stage; ++i)
                    c.cases.push_back(generate_random_arena(rng));
                break;
            }
            case Method::BatchReplay:
                if (cfg.curriculum.empty())
                    throw ConfigError("batch-replay needs a curriculum source (run directory, arena list or 'expert')");
                c.cases = load_curriculum(cfg.curriculum);
                break;
            case Method::Static: {
                Rng rng = make_rng(derive_seed(cfg.seed, k_stream_fallback), 0);
                Conversation history;
                CurriculumResult r = request_curriculum(*transport, history, static_curriculum_prompt(cfg.n_stage), static_cast<std::size_t>(cfg.n_stage), rng);
                c.cases = r.arenas;
                c.fallback = r.fallback;
                messages = history;
                transcript = to_json(r.transcript);
                info["response"] = {{"cases", r.response.cases}, {"understood", r.response.understood}, {"reasoning", r.response.reasoning}};
                for (const ChatMessage& m : history)
                    replies_used += m.role == Role::Assistant;
                break;
            }
            default:
                throw std::logic_error("no fixed curriculum for " + method_name(cfg.method));
            }
            if (c.fallback.empty())
                c.fallback.assign(c.cases.size(), false);
            info["method"] = method_name(cfg.method);
            info["fallback"] = c.fallback;
            info["replies"] = replies_used;
            write_atomically(init, [&](const fs::path& dir) {
                write_text(dir / "curriculum.txt", arenas_text(c.cases));
                write_text(dir / "curriculum.json", info.dump(2) + "\n");
                if (!messages.empty()) {
                    write_text(dir / "prompt.txt", messages.front().text);
                    write_text(dir / "transcript.json", transcript.dump(2) + "\n");
                    write_text(dir / "messages.json", messages_json(messages).dump(2) + "\n");
                }
            });
            return c;
        }

        inline void log_line(const RunOptions& opt, const std::string& s)
        {
            if (opt.log)
                *opt.log << s << std::endl;
        }
    } // namespace detail

    /// Runs (or resumes) one experiment into `out`. Interactive and static
    /// methods need a transport; the others ignore it.
    inline RunRecord run_experiment(const RunConfig& cfg, const std::string& out_dir, Transport* transport, const RunOptions& opt = {})
    {
        namespace fs = std::filesystem;
        cfg.validate();
        const bool interactive = is_interactive(cfg.method);
        if ((interactive || cfg.method == Method::Static) && !transport)
            throw std::invalid_argument(method_name(cfg.method) + " needs a transport");
        const fs::path out(out_dir);
        detail::prepare_run_dir(out, cfg);

        RunRecord rec;
        rec.config = cfg;
        rec.planned_stages = planned_stages(cfg);
        const int done = detail::completed_stages(out, rec.planned_stages);
        for (int k = 1; k <= done; ++k)
            rec.stages.push_back(detail::read_stage(detail::stage_dir(out, k)));

        Conversation history;
        std::optional<ChatMessage> report; // feedback on the last completed stage
        detail::Curriculum curriculum;
        if (interactive) {
            for (int k = 1; k <= done; ++k) {
                const auto m = detail::read_messages(detail::stage_dir(out, k) / "messages.json", out);
                history.insert(history.end(), m.begin(), m.end());
            }
            std::size_t replies = 0;
            for (const ChatMessage& m : history)
                replies += m.role == Role::Assistant;
            transport->resume(replies);
            if (done > 0)
                report = detail::read_message(detail::read_json(detail::stage_dir(out, done) / "feedback.json"), out);
        }
        else {
            std::size_t replies = 0;
            curriculum = detail::ensure_curriculum(cfg, out, transport, replies);
            if (transport)
                transport->resume(replies);
        }

        std::optional<EliteArchive> prev;
        std::vector<ProgressionCurve> curves;
        std::vector<Arena> bag;
        for (const StageRecord& r : rec.stages)
            curves.push_back(r.curve);
        if (!rec.stages.empty()) {
            prev = rec.stages.back().archive;
            bag = rec.stages.back().bag;
        }

        int ran = 0;
        for (int k = done + 1; k <= rec.planned_stages; ++k) {
            if (opt.max_new_stages >= 0 && ran >= opt.max_new_stages)
                break;
            const auto t0 = std::chrono::steady_clock::now();
            StageRecord r;
            r.index = k;
            r.budget = cfg.evals_per_stage;
            std::vector<ChatMessage> exchange;
            json transcript;
            if (cfg.method == Method::BatchReplay) {
                bag = curriculum.cases;
                r.budget = cfg.batch_budget;
            }
            else if (interactive) {
                const ChatMessage request = report ? *report : contextualization_prompt({cfg.n_stage, modality_of(cfg.method)});
                Rng fb_rng = make_rng(derive_seed(cfg.seed, k_stream_fallback), static_cast<std::uint64_t>(k));
                const std::size_t h0 = history.size();
                CaseResult cr = request_case(*transport, history, request, fb_rng);
                exchange.assign(history.begin() + static_cast<long>(h0), history.end());
                transcript = to_json(cr.transcript);
                r.response = detail::case_response_json(cr);
                bag.push_back(cr.arena);
                r.case_fallback = cr.fallback;
            }
            else {
                bag.push_back(curriculum.cases[static_cast<std::size_t>(k - 1)]);
                r.case_fallback = curriculum.fallback[static_cast<std::size_t>(k - 1)];
            }
            r.bag = bag;

            Rng pop_rng = make_rng(derive_seed(cfg.seed, k_stream_population), static_cast<std::uint64_t>(k));
            const std::vector<PolicyExpr> seeds = seed_population(prev ? &*prev : nullptr, pop_rng);
            std::vector<WorldGeometry> worlds;
            for (const Arena& a : bag)
                worlds.push_back(to_world(a));
            StageParams sp;
            sp.budget = r.budget;
            sp.threads = cfg.threads;
            sp.sim = cfg.sim;
            StageResult res = run_stage(seeds, worlds, sp, stream_seed(cfg.seed, k_stream_search, static_cast<std::uint64_t>(k)));

            r.archive = res.archive;
            r.best = res.best.expr;
            r.best_fitness = res.best.eval.fitness;
            r.per_case = res.best.eval.per_case_fitness;
            r.curve = res.curve;
            r.evaluations = res.evaluations;
            curves.push_back(res.curve);

            if (interactive) {
                FeedbackInput in{r.per_case, curves, bag, r.best, cfg.sim};
                report = feedback_prompt(build_feedback(modality_of(cfg.method), in), {k, cfg.n_stage, r.case_fallback});
                r.feedback_text = report->text;
            }
            r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

            const std::string name = "stage-" + std::to_string(k);
            const std::string prev_name = "stage-" + std::to_string(k - 1);
            detail::write_atomically(out / name, [&](const fs::path& dir) {
                detail::write_stage(dir, r, cfg.method != Method::BatchReplay);
                if (!interactive)
                    return;
                json messages = json::array();
                for (const ChatMessage& m : exchange)
                    messages.push_back(detail::message_json(m, prev_name));
                detail::write_text(dir / "messages.json", messages.dump(2) + "\n");
                detail::write_text(dir / "transcript.json", transcript.dump(2) + "\n");
                detail::write_feedback(dir, name, *report);
            });
            prev = r.archive;
            rec.stages.push_back(std::move(r));
            detail::write_summary(out, rec.stages);
            ++ran;

            const StageRecord& last = rec.stages.back();
            char buf[160];
            std::snprintf(buf, sizeof buf, "stage %d/%d: best fitness %.5f on %zu case(s), %ld evaluations, %.1f s%s", k, rec.planned_stages, last.best_fitness,
                          last.bag.size(), last.evaluations, last.seconds, last.case_fallback ? " (random substitute case)" : "");
            detail::log_line(opt, buf);
        }
        return rec;
    }

} // namespace currevo

#endif
