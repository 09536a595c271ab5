#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include <currevo/http_transport.hpp>

using namespace currevo;

namespace {
    /// Chat-completions stand-in on localhost recording what it receives.
    class FakeEndpoint {
    public:
        FakeEndpoint()
        {
            _server.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
                ++calls;
                last_body = json::parse(req.body);
                last_auth = req.get_header_value("Authorization");
                if (fail_first > 0) {
                    --fail_first;
                    res.status = 503;
                    return;
                }
                if (reject) {
                    res.status = 400;
                    res.set_content(R"({"error": "bad request"})", "application/json");
                    return;
                }
                json reply{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
                res.set_content(reply.dump(), "application/json");
            });
            port = _server.bind_to_any_port("127.0.0.1");
            _thread = std::thread([this] { _server.listen_after_bind(); });
            _server.wait_until_ready();
        }
        ~FakeEndpoint()
        {
            _server.stop();
            _thread.join();
        }

        std::string url() const { return "http://127.0.0.1:" + std::to_string(port) + "/v1/chat/completions"; }

        int port = 0;
        std::atomic<int> calls = 0;
        int fail_first = 0;
        bool reject = false;
        std::string content = "hello";
        json last_body;
        std::string last_auth;

    private:
        httplib::Server _server;
        std::thread _thread;
    };

    HttpSettings settings_for(const FakeEndpoint& e)
    {
        HttpSettings s;
        s.url = e.url();
        s.model = "test-model";
        s.api_key_env = "CURREVO_TEST_KEY";
        s.backoff_ms = 1;
        s.timeout_s = 10;
        return s;
    }
} // namespace

TEST(Base64, KnownVectors)
{
    auto enc = [](const std::string& s) { return base64_encode(reinterpret_cast<const unsigned char*>(s.data()), s.size()); };
    EXPECT_EQ(enc(""), "");
    EXPECT_EQ(enc("f"), "Zg==");
    EXPECT_EQ(enc("fo"), "Zm8=");
    EXPECT_EQ(enc("foobar"), "Zm9vYmFy");
}

TEST(Http, RequestShapeAndReply)
{
    FakeEndpoint endpoint;
    endpoint.content = "{\"case\": \"x\"}";
    ::setenv("CURREVO_TEST_KEY", "secret", 1);
    HttpTransport t(settings_for(endpoint));
    Conversation conv = {user_message("context"), assistant_message("ok"),
                         user_message("feedback", {ImageArtifact{"p", "plot", "<svg/>", {'f', 'o', 'o'}}})};
    EXPECT_EQ(t.complete(conv), "{\"case\": \"x\"}");
    const json& body = endpoint.last_body;
    EXPECT_EQ(body["model"], "test-model");
    ASSERT_EQ(body["messages"].size(), 3u);
    EXPECT_EQ(body["messages"][0]["role"], "user");
    EXPECT_EQ(body["messages"][0]["content"], "context");
    EXPECT_EQ(body["messages"][1]["role"], "assistant");
    const json& parts = body["messages"][2]["content"];
    ASSERT_EQ(parts.size(), 2u);
    EXPECT_EQ(parts[0]["type"], "text");
    EXPECT_EQ(parts[1]["type"], "image_url");
    EXPECT_EQ(parts[1]["image_url"]["url"], "data:image/png;base64,Zm9v");
    EXPECT_EQ(endpoint.last_auth, "Bearer secret");
}

TEST(Http, RetriesServerErrorsWithBackoff)
{
    FakeEndpoint endpoint;
    endpoint.fail_first = 2;
    HttpTransport t(settings_for(endpoint));
    EXPECT_EQ(t.complete({user_message("x")}), "hello");
    EXPECT_EQ(endpoint.calls, 3);
}

TEST(Http, GivesUpAfterRetries)
{
    FakeEndpoint endpoint;
    endpoint.fail_first = 100;
    HttpTransport t(settings_for(endpoint));
    EXPECT_THROW(t.complete({user_message("x")}), TransportFailure);
    EXPECT_EQ(endpoint.calls, 4);
}

TEST(Http, ClientErrorIsNotRetried)
{
    FakeEndpoint endpoint;
    endpoint.reject = true;
    HttpTransport t(settings_for(endpoint));
    EXPECT_THROW(t.complete({user_message("x")}), TransportFailure);
    EXPECT_EQ(endpoint.calls, 1);
}

TEST(Http, UnreachableEndpoint)
{
    HttpSettings s;
    s.url = "http://127.0.0.1:1/v1/chat/completions";
    s.backoff_ms = 1;
    s.retries = 1;
    HttpTransport t(s);
    EXPECT_THROW(t.complete({user_message("x")}), TransportFailure);
}

TEST(Http, FullRepairLoopOverHttp)
{
    FakeEndpoint endpoint;
    std::string arena = "s" + std::string(14, 'e');
    for (int r = 1; r < 14; ++r)
        arena += "|" + std::string(15, 'e');
    arena += "|" + std::string(14, 'e') + "t";
    endpoint.content = "Here you go:\n" + json{{"case", arena}, {"understood", "u"}, {"reasoning", "r"}}.dump();
    HttpTransport t(settings_for(endpoint));
    Conversation history;
    Rng rng(1);
    const CaseResult r = request_case(t, history, user_message("go"), rng);
    EXPECT_FALSE(r.fallback);
    EXPECT_EQ(render_text(r.arena), arena);
}
