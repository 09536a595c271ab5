#ifndef CURREVO_CONFIG_HPP
#define CURREVO_CONFIG_HPP

#include <cstdint>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include <currevo/http_settings.hpp>
#include <currevo/payload.hpp>
#include <currevo/sim.hpp>

namespace currevo {

    using json = nlohmann::json;

    class ConfigError : public std::runtime_error {
    public:
        using std::runtime_error::runtime_error;
    };

    enum class Method { InteractiveN, InteractiveNP, InteractiveNPB, Expert, Static, Random, BatchReplay };

    inline std::string method_name(Method m)
    {
        switch (m) {
        case Method::InteractiveN: return "interactive-N";
        case Method::InteractiveNP: return "interactive-NP";
        case Method::InteractiveNPB: return "interactive-NPB";
        case Method::Expert: return "expert";
        case Method::Static: return "static";
        case Method::Random: return "random";
        case Method::BatchReplay: return "batch-replay";
        }
        return "?";
    }

    inline Method parse_method(const std::string& s)
    {
        for (Method m : {Method::InteractiveN, Method::InteractiveNP, Method::InteractiveNPB, Method::Expert, Method::Static, Method::Random, Method::BatchReplay})
            if (method_name(m) == s)
                return m;
        throw ConfigError("unknown method '" + s + "' (expected interactive-N, interactive-NP, interactive-NPB, expert, static, random or batch-replay)");
    }

    inline bool is_interactive(Method m) { return m == Method::InteractiveN || m == Method::InteractiveNP || m == Method::InteractiveNPB; }

    inline Modality modality_of(Method m)
    {
        if (m == Method::InteractiveN)
            return Modality::N;
        if (m == Method::InteractiveNP)
            return Modality::NP;
        return Modality::NPB;
    }

    enum class TransportKind { Scripted, Manual, Http };

    struct TransportConfig {
        TransportKind kind = TransportKind::Scripted;
        std::string script;          // scripted: NDJSON file of replies
        std::string manual_dir;      // manual: exchange directory (default <out>/exchange)
        int poll_ms = 1000;          // manual
        int manual_timeout_s = 0;    // manual, 0 waits forever
        HttpSettings http;
    };

    struct RunConfig {
        Method method = Method::InteractiveNPB;
        int n_stage = 8;
        long evals_per_stage = 10000;
        long batch_budget = 40000;
        std::uint64_t seed = 1;
        unsigned threads = 1;
        TransportConfig transport;
        SimParams sim;
        std::string curriculum; // batch-replay: run directory or arena list file

        void validate() const
        {
            if (n_stage < 1)
                throw ConfigError("n_stage must be at least 1, got " + std::to_string(n_stage));
            if (evals_per_stage < 100)
                throw ConfigError("evals_per_stage must be at least 100, got " + std::to_string(evals_per_stage));
            if (batch_budget < 100)
                throw ConfigError("batch_budget must be at least 100, got " + std::to_string(batch_budget));
            if (threads < 1)
                throw ConfigError("threads must be at least 1");
            if ((is_interactive(method) || method == Method::Static) && transport.kind == TransportKind::Scripted && transport.script.empty())
                throw ConfigError("the scripted transport needs transport.script (an NDJSON file of replies)");
            if ((is_interactive(method) || method == Method::Static) && transport.kind == TransportKind::Http && transport.http.model.empty())
                throw ConfigError("the http transport needs transport.model");
        }
    };

    inline std::string transport_kind_name(TransportKind k) { return k == TransportKind::Scripted ? "scripted" : (k == TransportKind::Manual ? "manual" : "http"); }

    inline json to_json(const RunConfig& c)
    {
        json t{{"kind", transport_kind_name(c.transport.kind)}};
        if (c.transport.kind == TransportKind::Scripted)
            t["script"] = c.transport.script;
        if (c.transport.kind == TransportKind::Manual) {
            t["dir"] = c.transport.manual_dir;
            t["poll_ms"] = c.transport.poll_ms;
            t["timeout_s"] = c.transport.manual_timeout_s;
        }
        if (c.transport.kind == TransportKind::Http) {
            const HttpSettings& h = c.transport.http;
            t["url"] = h.url;
            t["model"] = h.model;
            t["api_key_env"] = h.api_key_env;
            t["auth_header"] = h.auth_header;
            t["auth_prefix"] = h.auth_prefix;
            t["timeout_s"] = h.timeout_s;
            t["max_tokens"] = h.max_tokens;
            t["retries"] = h.retries;
            t["backoff_ms"] = h.backoff_ms;
            if (h.temperature)
                t["temperature"] = *h.temperature;
        }
        json j{{"method", method_name(c.method)},
               {"n_stage", c.n_stage},
               {"evals_per_stage", c.evals_per_stage},
               {"batch_budget", c.batch_budget},
               {"seed", c.seed},
               {"transport", t},
               {"sim",
                {{"v_max", c.sim.v_max},
                 {"axle_width", c.sim.axle_width},
                 {"dt", c.sim.dt},
                 {"robot_radius", c.sim.robot_radius},
                 {"sensor_range", c.sim.sensor_range},
                 {"steps", c.sim.steps}}}};
        if (!c.curriculum.empty())
            j["curriculum"] = c.curriculum;
        return j;
    }

    namespace detail {
        template <typename T>
        void read_field(const json& j, const char* key, T& out, const std::string& where)
        {
            if (!j.contains(key))
                return;
            try {
                out = j.at(key).get<T>();
            }
            catch (const json::exception&) {
                throw ConfigError(where + key + " has the wrong type");
            }
        }

        inline void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where)
        {
            for (auto it = j.begin(); it != j.end(); ++it)
                if (!known.count(it.key()))
                    throw ConfigError("unknown config key '" + where + it.key() + "'");
        }
    } // namespace detail

    /// Missing keys keep their defaults; unknown keys are errors. The thread
    /// count is not part of the file since it does not affect results.
    inline RunConfig config_from_json(const json& j)
    {
        if (!j.is_object())
            throw ConfigError("config must be a JSON object");
        detail::reject_unknown(j, {"method", "n_stage", "evals_per_stage", "batch_budget", "seed", "threads", "transport", "sim", "curriculum"}, "");
        RunConfig c;
        std::string method = method_name(c.method);
        detail::read_field(j, "method", method, "");
        c.method = parse_method(method);
        detail::read_field(j, "n_stage", c.n_stage, "");
        detail::read_field(j, "evals_per_stage", c.evals_per_stage, "");
        detail::read_field(j, "batch_budget", c.batch_budget, "");
        detail::read_field(j, "seed", c.seed, "");
        detail::read_field(j, "threads", c.threads, "");
        detail::read_field(j, "curriculum", c.curriculum, "");
        if (j.contains("transport")) {
            const json& t = j["transport"];
            if (!t.is_object())
                throw ConfigError("transport must be an object");
            detail::reject_unknown(t, {"kind", "script", "dir", "poll_ms", "timeout_s", "url", "model", "api_key_env", "auth_header", "auth_prefix", "max_tokens", "retries", "backoff_ms", "temperature"},
                                   "transport.");
            std::string kind = "scripted";
            detail::read_field(t, "kind", kind, "transport.");
            if (kind == "scripted")
                c.transport.kind = TransportKind::Scripted;
            else if (kind == "manual")
                c.transport.kind = TransportKind::Manual;
            else if (kind == "http")
                c.transport.kind = TransportKind::Http;
            else
                throw ConfigError("transport.kind must be scripted, manual or http, got '" + kind + "'");
            detail::read_field(t, "script", c.transport.script, "transport.");
            detail::read_field(t, "dir", c.transport.manual_dir, "transport.");
            detail::read_field(t, "poll_ms", c.transport.poll_ms, "transport.");
            HttpSettings& h = c.transport.http;
            if (c.transport.kind == TransportKind::Manual)
                detail::read_field(t, "timeout_s", c.transport.manual_timeout_s, "transport.");
            else
                detail::read_field(t, "timeout_s", h.timeout_s, "transport.");
            detail::read_field(t, "url", h.url, "transport.");
            detail::read_field(t, "model", h.model, "transport.");
            detail::read_field(t, "api_key_env", h.api_key_env, "transport.");
            detail::read_field(t, "auth_header", h.auth_header, "transport.");
            detail::read_field(t, "auth_prefix", h.auth_prefix, "transport.");
            detail::read_field(t, "max_tokens", h.max_tokens, "transport.");
            detail::read_field(t, "retries", h.retries, "transport.");
            detail::read_field(t, "backoff_ms", h.backoff_ms, "transport.");
            if (t.contains("temperature")) {
                double temp = 0;
                detail::read_field(t, "temperature", temp, "transport.");
                h.temperature = temp;
            }
        }
        if (j.contains("sim")) {
            const json& s = j["sim"];
            detail::reject_unknown(s, {"v_max", "axle_width", "dt", "robot_radius", "sensor_range", "steps"}, "sim.");
            detail::read_field(s, "v_max", c.sim.v_max, "sim.");
            detail::read_field(s, "axle_width", c.sim.axle_width, "sim.");
            detail::read_field(s, "dt", c.sim.dt, "sim.");
            detail::read_field(s, "robot_radius", c.sim.robot_radius, "sim.");
            detail::read_field(s, "sensor_range", c.sim.sensor_range, "sim.");
            detail::read_field(s, "steps", c.sim.steps, "sim.");
        }
        return c;
    }

    inline RunConfig load_config(const std::string& path)
    {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file: " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        const json j = json::parse(ss.str(), nullptr, false);
        if (j.is_discarded())
            throw ConfigError("config file is not valid JSON: " + path);
        return config_from_json(j);
    }

} // namespace currevo

#endif
