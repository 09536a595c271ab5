#ifndef CURREVO_HTTP_TRANSPORT_HPP
#define CURREVO_HTTP_TRANSPORT_HPP

#include <chrono>
#include <cstdlib>
#include <optional>
#include <string>
#include <thread>

#include <httplib.h>
#include <openssl/evp.h>

#include <currevo/gateway.hpp>
#include <currevo/http_settings.hpp>

namespace currevo {

    inline std::string base64_encode(const unsigned char* data, std::size_t size)
    {
        std::string out(4 * ((size + 2) / 3), '\0');
        const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), data, static_cast<int>(size));
        out.resize(static_cast<std::size_t>(n));
        return out;
    }

    /// Builds the chat-completions request body. Images travel as PNG data URIs.
    inline json chat_request_body(const Conversation& conversation, const HttpSettings& s)
    {
        json messages = json::array();
        for (const ChatMessage& m : conversation) {
            if (m.images.empty()) {
                messages.push_back({{"role", role_name(m.role)}, {"content", m.text}});
                continue;
            }
            json parts = json::array();
            parts.push_back({{"type", "text"}, {"text", m.text}});
            for (const ImageArtifact& img : m.images)
                parts.push_back({{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + base64_encode(img.png.data(), img.png.size())}}}});
            messages.push_back({{"role", role_name(m.role)}, {"content", parts}});
        }
        json body{{"model", s.model}, {"messages", messages}, {"max_tokens", s.max_tokens}};
        if (s.temperature)
            body["temperature"] = *s.temperature;
        return body;
    }

    /// Reply text from a chat-completions response; content may be a string
    /// or a list of text parts.
    inline std::string chat_reply_text(const json& response)
    {
        if (!response.contains("choices") || !response["choices"].is_array() || response["choices"].empty())
            throw TransportFailure("response has no choices: " + response.dump().substr(0, 300));
        const json& msg = response["choices"][0]["message"];
        const json& content = msg["content"];
        if (content.is_string())
            return content.get<std::string>();
        if (content.is_array()) {
            std::string out;
            for (const json& part : content)
                if (part.contains("text") && part["text"].is_string())
                    out += part["text"].get<std::string>();
            return out;
        }
        throw TransportFailure("response message has no text content");
    }

    class HttpTransport : public Transport {
    public:
        explicit HttpTransport(HttpSettings settings) : _settings(std::move(settings))
        {
            const auto scheme_end = _settings.url.find("://");
            if (scheme_end == std::string::npos)
                throw std::invalid_argument("endpoint URL needs a scheme: " + _settings.url);
            const auto path_start = _settings.url.find('/', scheme_end + 3);
            _origin = _settings.url.substr(0, path_start);
            _path = path_start == std::string::npos ? "/" : _settings.url.substr(path_start);
            if (!_settings.api_key_env.empty())
                if (const char* key = std::getenv(_settings.api_key_env.c_str()))
                    _api_key = key;
        }

        std::string complete(const Conversation& conversation) override
        {
            const std::string body = chat_request_body(conversation, _settings).dump();
            std::string last_error;
            for (int attempt = 0; attempt <= _settings.retries; ++attempt) {
                if (attempt > 0)
                    std::this_thread::sleep_for(std::chrono::milliseconds(static_cast<long>(_settings.backoff_ms) << (attempt - 1)));
                httplib::Client client(_origin);
                client.set_connection_timeout(30);
                client.set_read_timeout(_settings.timeout_s);
                client.set_write_timeout(_settings.timeout_s);
                httplib::Headers headers;
                if (!_api_key.empty())
                    headers.emplace(_settings.auth_header, _settings.auth_prefix + _api_key);
                const auto res = client.Post(_path, headers, body, "application/json");
                if (!res) {
                    last_error = "request to " + _settings.url + " failed: " + httplib::to_string(res.error());
                    continue;
                }
                if (res->status == 429 || res->status >= 500) {
                    last_error = "HTTP " + std::to_string(res->status) + " from " + _settings.url;
                    continue;
                }
                if (res->status != 200)
                    throw TransportFailure("HTTP " + std::to_string(res->status) + " from " + _settings.url + ": " + res->body.substr(0, 500));
                const json j = json::parse(res->body, nullptr, false);
                if (j.is_discarded())
                    throw TransportFailure("endpoint returned a non-JSON body");
                return chat_reply_text(j);
            }
            throw TransportFailure(last_error + " (gave up after " + std::to_string(_settings.retries + 1) + " tries)");
        }

    private:
        HttpSettings _settings;
        std::string _origin;
        std::string _path;
        std::string _api_key;
    };

} // namespace currevo

#endif
