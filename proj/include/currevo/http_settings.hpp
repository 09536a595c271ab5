#ifndef CURREVO_HTTP_SETTINGS_HPP
#define CURREVO_HTTP_SETTINGS_HPP

#include <optional>
#include <string>

namespace currevo {

    struct HttpSettings {
        std::string url = "https://api.openai.com/v1/chat/completions";
        std::string model;
        std::string api_key_env = "LLM_API_KEY";
        std::string auth_header = "Authorization";
        std::string auth_prefix = "Bearer ";
        int timeout_s = 300;
        int max_tokens = 4096;
        std::optional<double> temperature;
        int retries = 3;
        int backoff_ms = 2000;
    };

} // namespace currevo

#endif
