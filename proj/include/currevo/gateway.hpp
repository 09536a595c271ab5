#ifndef CURREVO_GATEWAY_HPP
#define CURREVO_GATEWAY_HPP

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <json.hpp>

#include <currevo/arena.hpp>
#include <currevo/payload.hpp>
#include <currevo/prompts.hpp>
#include <currevo/rng.hpp>

namespace currevo {

    using json = nlohmann::json;

    // ---------------------------------------------------------------- messages

    enum class Role { System, User, Assistant };

    inline std::string role_name(Role r) { return r == Role::System ? "system" : (r == Role::User ? "user" : "assistant"); }

    struct ChatMessage {
        Role role = Role::User;
        std::string text;
        std::vector<ImageArtifact> images; // user messages only
    };

    using Conversation = std::vector<ChatMessage>;

    inline ChatMessage user_message(std::string text, std::vector<ImageArtifact> images = {}) { return {Role::User, std::move(text), std::move(images)}; }
    inline ChatMessage assistant_message(std::string text) { return {Role::Assistant, std::move(text), {}}; }

    inline json to_json(const ChatMessage& m)
    {
        json j{{"role", role_name(m.role)}, {"text", m.text}};
        if (!m.images.empty()) {
            j["images"] = json::array();
            for (const ImageArtifact& img : m.images)
                j["images"].push_back({{"name", img.name}, {"caption", img.caption}});
        }
        return j;
    }

    // ----------------------------------------------------------------- prompts

    struct PromptConfig {
        int n_stage = 8;
        Modality modality = Modality::NPB;
    };

    inline std::string feedback_description(Modality m)
    {
        std::string out(k_feedback_numbers);
        if (m == Modality::NP || m == Modality::NPB)
            out += k_feedback_plot;
        if (m == Modality::NPB)
            out += k_feedback_trajectories;
        return out;
    }

    inline ChatMessage contextualization_prompt(const PromptConfig& config)
    {
        return user_message(render_template(k_context_template, {{"N_STAGE", std::to_string(config.n_stage)},
                                                                 {"ROLE_MODE", ", one stage at a time"},
                                                                 {"FEEDBACK_DESCRIPTION", feedback_description(config.modality)},
                                                                 {"CONSTRAINTS", constraints_text()},
                                                                 {"EXAMPLE_ARENA", std::string(k_example_arena)},
                                                                 {"RESPONSE_FORMAT", std::string(k_response_format)},
                                                                 {"REQUEST", "Now propose the first case."}}));
    }

    /// Single-shot variant asking for the whole curriculum as a list.
    inline ChatMessage static_curriculum_prompt(int n_cases)
    {
        const std::string n = std::to_string(n_cases);
        return user_message(render_template(k_context_template, {{"N_STAGE", n},
                                                                 {"ROLE_MODE", ", all of them at once before training starts"},
                                                                 {"FEEDBACK_DESCRIPTION", std::string(k_static_feedback)},
                                                                 {"CONSTRAINTS", constraints_text()},
                                                                 {"EXAMPLE_ARENA", std::string(k_example_arena)},
                                                                 {"RESPONSE_FORMAT", render_template(k_static_response_format, {{"N_STAGE", n}})},
                                                                 {"REQUEST", "Now propose all " + n + " cases."}}));
    }

    struct FeedbackContext {
        int stage = 0;   // 1-based index of the stage just completed, 0 to omit
        int n_stage = 0;
        bool previous_fallback = false;
    };

    /// Metrics, then one caption line per attached image, then the format recap.
    inline ChatMessage feedback_prompt(const FeedbackPayload& payload, const FeedbackContext& ctx = {})
    {
        std::string text;
        if (ctx.stage > 0)
            text += "Stage " + std::to_string(ctx.stage) + (ctx.n_stage > 0 ? " of " + std::to_string(ctx.n_stage) : std::string()) + " is complete.\n";
        if (ctx.previous_fallback)
            text += "Your previous case could not be used after several corrections, so a randomly generated arena took its place in the bag.\n";
        text += (text.empty() ? "" : "\n") + payload.metrics_text;
        std::vector<ImageArtifact> images;
        const auto attached = payload.images();
        if (!attached.empty()) {
            text += "\nAttached images:\n";
            for (std::size_t i = 0; i < attached.size(); ++i) {
                text += "Image " + std::to_string(i + 1) + ": " + attached[i]->caption + "\n";
                images.push_back(*attached[i]);
            }
        }
        text += "\n" + std::string(k_recap) + "\n";
        text += "Now propose the next case.";
        return user_message(std::move(text), std::move(images));
    }

    inline ChatMessage repair_prompt(const std::string& error)
    {
        return user_message("Your last reply could not be used: " + error + "\n" + std::string(k_recap) + "\nPlease send the corrected reply.");
    }

    // ------------------------------------------------------------ reply parsing

    struct CaseResponse {
        std::string case_text;
        std::string understood;
        std::string reasoning;
    };

    class ResponseError : public std::runtime_error {
    public:
        enum class Kind { NoJsonFound, MissingKey, NonStringValue, BadCaseList };

        ResponseError(Kind kind, std::string key, const std::string& msg) : std::runtime_error(msg), _kind(kind), _key(std::move(key)) {}
        Kind kind() const { return _kind; }
        const std::string& key() const { return _key; }

    private:
        Kind _kind;
        std::string _key;
    };

    namespace detail {
        /// End (one past) of the balanced object starting at `open`, honouring
        /// string literals; npos when unbalanced.
        inline std::size_t balanced_end(std::string_view text, std::size_t open)
        {
            int depth = 0;
            bool in_string = false, escaped = false;
            for (std::size_t i = open; i < text.size(); ++i) {
                const char c = text[i];
                if (in_string) {
                    if (escaped)
                        escaped = false;
                    else if (c == '\\')
                        escaped = true;
                    else if (c == '"')
                        in_string = false;
                    continue;
                }
                if (c == '"')
                    in_string = true;
                else if (c == '{')
                    ++depth;
                else if (c == '}' && --depth == 0)
                    return i + 1;
            }
            return std::string_view::npos;
        }

        /// Raw line breaks and tabs inside string literals are escaped; models
        /// sometimes lay arenas out over several lines.
        inline std::string escape_raw_controls(std::string_view s)
        {
            std::string out;
            bool in_string = false, escaped = false;
            for (char c : s) {
                if (in_string && !escaped && (c == '\n' || c == '\r' || c == '\t')) {
                    out += c == '\n' ? "\\n" : (c == '\r' ? "\\r" : "\\t");
                    continue;
                }
                if (in_string) {
                    if (escaped)
                        escaped = false;
                    else if (c == '\\')
                        escaped = true;
                    else if (c == '"')
                        in_string = false;
                }
                else if (c == '"')
                    in_string = true;
                out += c;
            }
            return out;
        }

        inline std::optional<json> first_json_object(std::string_view text)
        {
            for (std::size_t open = text.find('{'); open != std::string_view::npos; open = text.find('{', open + 1)) {
                const std::size_t end = balanced_end(text, open);
                if (end == std::string_view::npos)
                    continue;
                const std::string_view candidate = text.substr(open, end - open);
                json j = json::parse(candidate, nullptr, false);
                if (j.is_discarded())
                    j = json::parse(escape_raw_controls(candidate), nullptr, false);
                if (!j.is_discarded() && j.is_object())
                    return j;
            }
            return std::nullopt;
        }

        inline std::string string_field(const json& j, const std::string& key)
        {
            if (!j.contains(key))
                throw ResponseError(ResponseError::Kind::MissingKey, key, "the JSON object has no \"" + key + "\" key");
            if (!j[key].is_string())
                throw ResponseError(ResponseError::Kind::NonStringValue, key, "the value of \"" + key + "\" must be a string");
            return j[key].get<std::string>();
        }

        inline json require_object(std::string_view text)
        {
            auto j = first_json_object(text);
            if (!j)
                throw ResponseError(ResponseError::Kind::NoJsonFound, "", "no JSON object was found in the reply");
            return *j;
        }
    } // namespace detail

    inline CaseResponse parse_response(std::string_view text)
    {
        const json j = detail::require_object(text);
        return {detail::string_field(j, "case"), detail::string_field(j, "understood"), detail::string_field(j, "reasoning")};
    }

    struct CurriculumResponse {
        std::vector<std::string> cases;
        std::string understood;
        std::string reasoning;
    };

    inline CurriculumResponse parse_curriculum_response(std::string_view text, std::size_t expected)
    {
        const json j = detail::require_object(text);
        if (!j.contains("cases"))
            throw ResponseError(ResponseError::Kind::MissingKey, "cases", "the JSON object has no \"cases\" key");
        const json& list = j["cases"];
        if (!list.is_array() || list.size() != expected)
            throw ResponseError(ResponseError::Kind::BadCaseList, "cases", "\"cases\" must be a list of exactly " + std::to_string(expected) + " arena strings");
        CurriculumResponse out;
        for (const json& c : list) {
            if (!c.is_string())
                throw ResponseError(ResponseError::Kind::NonStringValue, "cases", "every element of \"cases\" must be a string");
            out.cases.push_back(c.get<std::string>());
        }
        out.understood = detail::string_field(j, "understood");
        out.reasoning = detail::string_field(j, "reasoning");
        return out;
    }

    // --------------------------------------------------------------- transports

    class TransportFailure : public std::runtime_error {
    public:
        using std::runtime_error::runtime_error;
    };

    /// Sends the whole conversation and returns the assistant's reply text.
    class Transport {
    public:
        virtual ~Transport() = default;
        virtual std::string complete(const Conversation& conversation) = 0;
        /// Called when a run resumes after `replies` completed exchanges.
        virtual void resume(std::size_t replies) { (void)replies; }
    };

    /// Canned replies, one per line of an NDJSON file. A line holding a JSON
    /// string is the reply verbatim; an object with a string "content" member
    /// yields that member; any other object is the reply in serialized form.
    class ScriptedTransport : public Transport {
    public:
        explicit ScriptedTransport(std::vector<std::string> replies) : _replies(std::move(replies)) {}

        static ScriptedTransport from_file(const std::string& path)
        {
            std::ifstream in(path);
            if (!in)
                throw TransportFailure("cannot open script file: " + path);
            std::vector<std::string> replies;
            std::string line;
            int lineno = 0;
            while (std::getline(in, line)) {
                ++lineno;
                if (line.find_first_not_of(" \t\r") == std::string::npos)
                    continue;
                const json j = json::parse(line, nullptr, false);
                if (j.is_discarded())
                    throw TransportFailure(path + ":" + std::to_string(lineno) + ": not a JSON value");
                replies.push_back(reply_text(j));
            }
            return ScriptedTransport(std::move(replies));
        }

        static std::string reply_text(const json& j)
        {
            if (j.is_string())
                return j.get<std::string>();
            if (j.is_object() && j.contains("content") && j["content"].is_string())
                return j["content"].get<std::string>();
            return j.dump();
        }

        std::string complete(const Conversation&) override
        {
            if (_next >= _replies.size())
                throw TransportFailure("scripted transport ran out of replies after " + std::to_string(_replies.size()));
            return _replies[_next++];
        }

        void resume(std::size_t replies) override { _next = std::min(replies, _replies.size()); }

        std::size_t used() const { return _next; }
        std::size_t remaining() const { return _replies.size() - _next; }

    private:
        std::vector<std::string> _replies;
        std::size_t _next = 0;
    };

    /// File exchange with a human operator: each request becomes
    /// <dir>/exchange-<n>/ holding prompt.txt, conversation.json and the image
    /// attachments; the reply is read from response.json once it appears.
    class ManualTransport : public Transport {
    public:
        ManualTransport(std::filesystem::path dir, std::chrono::milliseconds poll = std::chrono::milliseconds(1000), std::chrono::seconds timeout = std::chrono::seconds(0))
            : _dir(std::move(dir)), _poll(poll), _timeout(timeout)
        {
        }

        std::string complete(const Conversation& conversation) override
        {
            namespace fs = std::filesystem;
            const fs::path ex = _dir / ("exchange-" + std::to_string(_count++));
            std::error_code ec;
            fs::create_directories(ex, ec);
            if (ec)
                throw TransportFailure("cannot create " + ex.string() + ": " + ec.message());
            if (conversation.empty())
                throw TransportFailure("empty conversation");
            const ChatMessage& last = conversation.back();
            write_file(ex / "prompt.txt", last.text);
            json conv = json::array();
            for (const ChatMessage& m : conversation)
                conv.push_back(to_json(m));
            write_file(ex / "conversation.json", conv.dump(2));
            for (const ImageArtifact& img : last.images) {
                write_file(ex / (img.name + ".svg"), img.svg);
                write_file(ex / (img.name + ".png"), std::string(img.png.begin(), img.png.end()));
            }
            const fs::path response = ex / "response.json";
            const auto start = std::chrono::steady_clock::now();
            while (!fs::exists(response)) {
                if (_timeout.count() > 0 && std::chrono::steady_clock::now() - start > _timeout)
                    throw TransportFailure("timed out waiting for " + response.string());
                std::this_thread::sleep_for(_poll);
            }
            std::this_thread::sleep_for(std::min(_poll, std::chrono::milliseconds(200))); // let the writer finish
            std::ifstream in(response, std::ios::binary);
            if (!in)
                throw TransportFailure("cannot read " + response.string());
            std::ostringstream ss;
            ss << in.rdbuf();
            return ss.str();
        }

        void resume(std::size_t replies) override { _count = static_cast<int>(replies); }

        const std::filesystem::path& directory() const { return _dir; }

    private:
        static void write_file(const std::filesystem::path& p, const std::string& content)
        {
            std::ofstream out(p, std::ios::binary);
            out << content;
            if (!out)
                throw TransportFailure("cannot write " + p.string());
        }

        std::filesystem::path _dir;
        std::chrono::milliseconds _poll;
        std::chrono::seconds _timeout;
        int _count = 0;
    };

    // ------------------------------------------------------- validate and repair

    struct TranscriptEntry {
        std::string kind; // "attempt" or "fallback"
        int attempt = 0;
        std::string request;
        std::string reply;
        std::string error; // empty when the reply was accepted
        std::string arena; // accepted or substituted arena
    };

    inline json to_json(const TranscriptEntry& e)
    {
        return json{{"kind", e.kind}, {"attempt", e.attempt}, {"request", e.request}, {"reply", e.reply}, {"error", e.error}, {"arena", e.arena}};
    }

    inline json to_json(const std::vector<TranscriptEntry>& t)
    {
        json j = json::array();
        for (const TranscriptEntry& e : t)
            j.push_back(to_json(e));
        return j;
    }

    struct CaseResult {
        CaseResponse response;
        Arena arena;
        bool fallback = false;
        int attempts = 0;
        std::vector<TranscriptEntry> transcript;
    };

    inline constexpr int k_max_case_attempts = 3;

    /// Sends `next` after `history`, validates the proposed arena and asks for
    /// corrections. After k_max_case_attempts unusable replies a random arena
    /// is substituted. `history` receives every message exchanged.
    inline CaseResult request_case(Transport& transport, Conversation& history, ChatMessage next, Rng& fallback_rng, int max_attempts = k_max_case_attempts)
    {
        std::vector<TranscriptEntry> transcript;
        for (int attempt = 1; attempt <= max_attempts; ++attempt) {
            history.push_back(next);
            const std::string reply = transport.complete(history);
            history.push_back(assistant_message(reply));
            TranscriptEntry entry{"attempt", attempt, next.text, reply, "", ""};
            try {
                CaseResponse response = parse_response(reply);
                Arena arena = parse_arena(response.case_text);
                entry.arena = render_text(arena);
                transcript.push_back(entry);
                return {std::move(response), std::move(arena), false, attempt, std::move(transcript)};
            }
            catch (const ResponseError& e) {
                entry.error = e.what();
            }
            catch (const ArenaError& e) {
                entry.error = std::string("the arena is invalid: ") + e.what();
            }
            transcript.push_back(entry);
            next = repair_prompt(entry.error);
        }
        Arena arena = generate_random_arena(fallback_rng);
        const std::string text = render_text(arena);
        transcript.push_back({"fallback", 0, "", "", "no valid case after " + std::to_string(max_attempts) + " attempts; random arena substituted", text});
        return {CaseResponse{text, "", "random fallback arena"}, std::move(arena), true, max_attempts, std::move(transcript)};
    }

    struct CurriculumResult {
        std::vector<Arena> arenas;
        std::vector<bool> fallback;
        CurriculumResponse response;
        std::vector<TranscriptEntry> transcript;
    };

    /// Whole-curriculum request. The list itself gets the usual repair budget;
    /// afterwards each invalid case is repaired (or replaced) on its own.
    inline CurriculumResult request_curriculum(Transport& transport, Conversation& history, ChatMessage next, std::size_t n_cases, Rng& fallback_rng,
                                               int max_attempts = k_max_case_attempts)
    {
        CurriculumResult out;
        std::optional<CurriculumResponse> list;
        for (int attempt = 1; attempt <= max_attempts && !list; ++attempt) {
            history.push_back(next);
            const std::string reply = transport.complete(history);
            history.push_back(assistant_message(reply));
            TranscriptEntry entry{"attempt", attempt, next.text, reply, "", ""};
            try {
                list = parse_curriculum_response(reply, n_cases);
            }
            catch (const ResponseError& e) {
                entry.error = e.what();
                next = user_message("Your last reply could not be used: " + entry.error + "\n" + render_template(k_static_response_format, {{"N_STAGE", std::to_string(n_cases)}}));
            }
            out.transcript.push_back(entry);
        }
        if (!list) {
            for (std::size_t i = 0; i < n_cases; ++i) {
                out.arenas.push_back(generate_random_arena(fallback_rng));
                out.fallback.push_back(true);
                out.transcript.push_back({"fallback", 0, "", "", "no usable case list; random arena substituted for case " + std::to_string(i + 1), render_text(out.arenas.back())});
            }
            return out;
        }
        out.response = *list;
        for (std::size_t i = 0; i < n_cases; ++i) {
            try {
                out.arenas.push_back(parse_arena(list->cases[i]));
                out.fallback.push_back(false);
            }
            catch (const ArenaError& e) {
                const ChatMessage fix = user_message("Case " + std::to_string(i + 1) + " of your list is invalid: " + e.what() + "\nSend a corrected version of case " +
                                                     std::to_string(i + 1) + " only.\n" + std::string(k_recap));
                CaseResult r = request_case(transport, history, fix, fallback_rng, max_attempts);
                out.arenas.push_back(r.arena);
                out.fallback.push_back(r.fallback);
                for (auto& t : r.transcript)
                    out.transcript.push_back(std::move(t));
            }
        }
        return out;
    }

} // namespace currevo

#endif
