// Copyright 2026 The errscale Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "doctest.h"
#include "errscale/collector.hpp"
#include "errscale/error_model.hpp"
#include "errscale/rng.hpp"
#include "httplib.h"
#include "json.hpp"

using namespace errscale;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

SamplingPlan plan_for(TaskKind task, std::vector<std::int64_t> cs, std::int64_t samples, std::uint64_t seed = 11) {
    SamplingPlan p;
    p.task = task;
    p.model_id = "mock";
    p.c_values = std::move(cs);
    p.samples_per_c = samples;
    p.base_seed = seed;
    return p;
}

RunOptions fixed_clock(int in_flight = 4) {
    RunOptions o;
    o.max_in_flight = in_flight;
    o.clock = [] { return std::int64_t{1'700'000'000}; };
    return o;
}

std::vector<std::string> sorted_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    std::sort(lines.begin(), lines.end());
    return lines;
}

class CountingProvider : public Provider {
public:
    std::string send(const TaskInstance& inst, const std::string&) override {
        const int now = ++in_flight_;
        int seen = peak_.load();
        while (now > seen && !peak_.compare_exchange_weak(seen, now)) {
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(2));
        --in_flight_;
        return format_response(inst);
    }
    int peak() const { return peak_.load(); }

private:
    std::atomic<int> in_flight_{0};
    std::atomic<int> peak_{0};
};

class FlakyProvider : public Provider {
public:
    bool fail = true;
    std::string send(const TaskInstance& inst, const std::string&) override {
        if (fail && inst.seed % 3 == 0) throw ProviderError("unavailable", true);
        return format_response(inst);
    }
};

struct TestServer {
    httplib::Server server;
    int port = 0;
    std::thread thread;

    TestServer() = default;
    void start() {
        port = server.bind_to_any_port("127.0.0.1");
        REQUIRE(port > 0);
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~TestServer() {
        server.stop();
        if (thread.joinable()) thread.join();
    }
    std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port) + path; }
};

ProviderConfig http_config(const std::string& url) {
    ProviderConfig cfg;
    cfg.kind = ProviderKind::HttpJson;
    cfg.endpoint_url = url;
    cfg.request_template = R"({"model": "m", "messages": [{"role": "user", "content": "{{prompt}}"}], "temperature": 0})";
    cfg.response_text_path = "/choices/0/text";
    cfg.timeout = 2.0;
    cfg.retry = {4, 0.5, 2.0, 3.0};
    return cfg;
}

std::string reply(const std::string& text) { return nlohmann::json{{"choices", {{{"text", text}}}}}.dump(); }

}  // namespace

TEST_CASE("plan validation and seeds") {
    auto p = plan_for(TaskKind::Reversal, {4, 8}, 5);
    CHECK_NOTHROW(p.validate());
    p.c_values = {8, 4};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.c_values = {4, 4};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.c_values = {};
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = plan_for(TaskKind::Reversal, {4}, 0);
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = plan_for(TaskKind::Reversal, {4}, 1);
    p.typo_variant = true;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);

    CHECK(sample_seed(1, 4, 0) == sample_seed(1, 4, 0));
    std::set<std::uint64_t> seeds;
    for (std::int64_t c = 1; c <= 50; ++c) {
        for (std::int64_t k = 0; k < 200; ++k) seeds.insert(sample_seed(9, c, k));
    }
    CHECK(seeds.size() == 10000);
}

TEST_CASE("provider config") {
    const auto cfg = ProviderConfig::from_json(R"({
        "kind": "http_json", "endpoint_url": "http://localhost:8080/v1/complete",
        "request_template": {"input": "{{prompt}}", "max_tokens": 4096},
        "response_text_path": "/output/0/text", "auth_env_var": "ERRSCALE_TEST_KEY",
        "timeout": 30, "max_in_flight": 8,
        "retry": {"max_attempts": 5, "base_backoff": 0.25, "factor": 3, "max_backoff": 10}
    })");
    CHECK(cfg.kind == ProviderKind::HttpJson);
    CHECK(cfg.max_in_flight == 8);
    CHECK(cfg.retry.max_attempts == 5);
    CHECK(cfg.retry.factor == 3.0);
    CHECK(nlohmann::json::parse(render_request(cfg.request_template, "x"))["input"] == "x");

    CHECK(ProviderConfig::from_json(R"({"kind": "mock_noisy", "noise_rate": 0.1})").noise_rate == 0.1);
    CHECK_THROWS_AS(ProviderConfig::from_json(R"({"kind": "mock_noisy", "noise_rate": 1.5})"), std::invalid_argument);
    CHECK_THROWS_AS(ProviderConfig::from_json(R"({"kind": "mock_perfect", "max_in_flight": 0})"), std::invalid_argument);
    CHECK_THROWS_AS(ProviderConfig::from_json(R"({"kind": "mock_perfect", "retry": {"max_attempts": 0}})"), std::invalid_argument);
    CHECK_THROWS_AS(ProviderConfig::from_json(R"({"kind": "carrier_pigeon"})"), std::invalid_argument);
    CHECK_THROWS_AS(ProviderConfig::from_json(R"({"kind": "mock_perfect", "api_key": "secret"})"), std::invalid_argument);
    CHECK_THROWS_AS(ProviderConfig::from_json(R"({"kind": "http_json"})"), std::invalid_argument);
    CHECK_THROWS_AS(ProviderConfig::from_json(R"({"kind": "http_json", "endpoint_url": "http://h/", "request_template": "{}"})"),
                    std::invalid_argument);
}

TEST_CASE("backoff delays are nondecreasing") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        RetryPolicy p{static_cast<int>(rng.uniform_int(1, 30)), rng.uniform() * 5, 1.0 + rng.uniform() * 4, 0.0};
        p.max_backoff = p.base_backoff + rng.uniform() * 100;
        REQUIRE_NOTHROW(p.validate());
        for (int k = 1; k < p.max_attempts; ++k) REQUIRE(p.delay(k + 1) >= p.delay(k));
    }
    const RetryPolicy p{6, 1.0, 2.0, 5.0};
    CHECK(p.delay(1) == 1.0);
    CHECK(p.delay(2) == 2.0);
    CHECK(p.delay(3) == 4.0);
    CHECK(p.delay(4) == 5.0);
}

TEST_CASE("request rendering and response extraction") {
    const std::string prompt = "line one\n\"quoted\" \\ back\ttab é";
    const auto body = nlohmann::json::parse(render_request(R"({"a": ["pre {{prompt}} post", 3], "b": "{{prompt}}"})", prompt));
    CHECK(body["a"][0] == "pre " + prompt + " post");
    CHECK(body["a"][1] == 3);
    CHECK(body["b"] == prompt);
    CHECK_THROWS_AS(render_request("{not json", prompt), std::invalid_argument);

    CHECK(extract_response_text(reply("hello"), "/choices/0/text") == "hello");
    CHECK_THROWS_AS(extract_response_text("<html>", "/choices/0/text"), ProviderError);
    CHECK_THROWS_AS(extract_response_text(R"({"choices": []})", "/choices/0/text"), ProviderError);
    CHECK_THROWS_AS(extract_response_text(R"({"choices": [{"text": 5}]})", "/choices/0/text"), ProviderError);
}

TEST_CASE("mock_perfect plan stores correct records and resumes") {
    TempDir dir("errscale_collector_perfect");
    RecordStore store(dir.path / "r.jsonl");
    MockPerfectProvider provider;
    const auto plan = plan_for(TaskKind::Reversal, {4, 8}, 5);
    const auto first = run_plan(plan, provider, store, fixed_clock());
    CHECK(store.size() == 10);
    REQUIRE(first.per_c.size() == 2);
    for (const auto& row : first.per_c) {
        CHECK(row.sent == 5);
        CHECK(row.parsed == 5);
        CHECK(row.correct == 5);
        CHECK(row.failed == 0);
    }
    CHECK(first.complete());
    const auto second = run_plan(plan, provider, store, fixed_clock());
    CHECK(second.total_sent() == 0);
    CHECK(second.per_c[0].skipped == 5);
    CHECK(store.size() == 10);
    for (const auto& r : store.snapshot()) CHECK(r.correct == std::optional<bool>(true));
}

TEST_CASE("every task round-trips through the mock providers") {
    TempDir dir("errscale_collector_kinds");
    for (auto kind : kAllTaskKinds) {
        RecordStore store(dir.path / (std::string(task_name(kind)) + ".jsonl"));
        MockPerfectProvider perfect;
        const auto s = run_plan(plan_for(kind, {3, 6}, 10), perfect, store, fixed_clock());
        CHECK_MESSAGE(s.per_c[0].correct + s.per_c[1].correct == 20, task_name(kind));
        MockNoisyProvider zero(0.0);
        TaskInstance inst = generate(kind, 5, 77);
        CHECK(zero.send(inst, "") == perfect.send(inst, ""));
        MockNoisyProvider total(1.0);
        CHECK(grade(inst, parse(kind, total.send(inst, ""))) == GradeOutcome::Incorrect);
    }
}

TEST_CASE("stored content is a function of the plan") {
    TempDir dir("errscale_collector_determinism");
    const auto plan = plan_for(TaskKind::NestedLinear, {5, 10, 15}, 40, 123);
    MockNoisyProvider noisy(0.05);
    RecordStore a(dir.path / "a.jsonl");
    RecordStore b(dir.path / "b.jsonl");
    run_plan(plan, noisy, a, fixed_clock(1));
    run_plan(plan, noisy, b, fixed_clock(7));
    const auto la = sorted_lines(a.path());
    CHECK(la.size() == 120);
    CHECK(la == sorted_lines(b.path()));
}

TEST_CASE("in-flight requests stay within the bound") {
    TempDir dir("errscale_collector_inflight");
    for (int bound : {1, 3, 8}) {
        RecordStore store(dir.path / ("s" + std::to_string(bound) + ".jsonl"));
        CountingProvider provider;
        run_plan(plan_for(TaskKind::Reversal, {2, 4, 6, 8}, 12), provider, store, fixed_clock(bound));
        CHECK(provider.peak() <= bound);
        CHECK(provider.peak() >= std::min(bound, 2));
        CHECK(store.size() == 48);
    }
}

TEST_CASE("failed sends are reported and retried on the next run") {
    TempDir dir("errscale_collector_flaky");
    RecordStore store(dir.path / "r.jsonl");
    FlakyProvider provider;
    const auto plan = plan_for(TaskKind::Reversal, {4, 9}, 30);
    const auto first = run_plan(plan, provider, store, fixed_clock());
    CHECK_FALSE(first.complete());
    CHECK(first.total_failed() > 0);
    CHECK(first.errors.size() == static_cast<std::size_t>(first.total_failed()));
    CHECK(store.size() == static_cast<std::size_t>(60 - first.total_failed()));
    provider.fail = false;
    const auto second = run_plan(plan, provider, store, fixed_clock());
    CHECK(second.total_sent() == first.total_failed());
    CHECK(second.complete());
    CHECK(store.size() == 60);
}

TEST_CASE("parse failures are stored as ungraded records") {
    class Mumbler : public Provider {
    public:
        std::string send(const TaskInstance&, const std::string&) override { return "I am not sure."; }
    };
    TempDir dir("errscale_collector_mumble");
    RecordStore store(dir.path / "r.jsonl");
    Mumbler provider;
    const auto s = run_plan(plan_for(TaskKind::DynamicProgramming, {5}, 4), provider, store, fixed_clock());
    CHECK(s.per_c[0].sent == 4);
    CHECK(s.per_c[0].parsed == 0);
    for (const auto& r : store.snapshot()) {
        CHECK_FALSE(r.parse_ok);
        CHECK_FALSE(r.correct.has_value());
    }
    CHECK(aggregate(store.snapshot(), TaskKind::DynamicProgramming, "mock").empty());
}

TEST_CASE("closed loop against the naive law") {
    TempDir dir("errscale_collector_closed_loop");
    RecordStore store(dir.path / "r.jsonl");
    MockNoisyProvider provider(0.02);
    const auto plan = plan_for(TaskKind::Reversal, {10, 20, 40, 80, 160, 320}, 500, 2024);
    const auto s = run_plan(plan, provider, store, fixed_clock(8));
    CHECK(s.complete());
    const auto pts = aggregate(store.snapshot(), TaskKind::Reversal, "mock");
    REQUIRE(pts.size() == 6);
    for (const auto& p : pts) {
        const double truth = naive_accuracy(0.02, p.c);
        CHECK_MESSAGE(std::abs(p.mean_accuracy - truth) <= 3 * p.ci_halfwidth, "c=" << p.c);
    }
}

TEST_CASE("http_json provider against a local server") {
    TestServer ts;
    std::mutex mu;
    std::vector<std::string> bodies;
    std::vector<std::string> auths;
    std::atomic<int> flaky_calls{0};
    ts.server.Post("/ok", [&](const httplib::Request& req, httplib::Response& res) {
        {
            std::lock_guard lock(mu);
            bodies.push_back(req.body);
            auths.push_back(req.get_header_value("Authorization"));
        }
        const auto prompt = nlohmann::json::parse(req.body)["messages"][0]["content"].get<std::string>();
        res.set_content(reply("echo:" + prompt), "application/json");
    });
    ts.server.Post("/flaky", [&](const httplib::Request&, httplib::Response& res) {
        if (++flaky_calls <= 2) {
            res.status = flaky_calls == 1 ? 503 : 429;
            return;
        }
        res.set_content(reply("done"), "application/json");
    });
    ts.server.Post("/bad", [&](const httplib::Request&, httplib::Response& res) { res.status = 400; });
    ts.server.Post("/down", [&](const httplib::Request&, httplib::Response& res) { res.status = 500; });
    ts.server.Post("/html", [&](const httplib::Request&, httplib::Response& res) { res.set_content("<html/>", "text/html"); });
    ts.server.Post("/slow", [&](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(std::chrono::milliseconds(600));
        res.set_content(reply("late"), "application/json");
    });
    ts.start();

    std::vector<double> sleeps;
    auto sleeper = [&](double s) { sleeps.push_back(s); };

    SUBCASE("prompt substitution and auth header") {
        ::setenv("ERRSCALE_TEST_SECRET", "s3cr3t", 1);
        auto cfg = http_config(ts.url("/ok"));
        cfg.auth_env_var = "ERRSCALE_TEST_SECRET";
        HttpJsonProvider provider(cfg, sleeper);
        const std::string prompt = "Reverse \"this\"\nplease";
        CHECK(provider.send_text(prompt) == "echo:" + prompt);
        REQUIRE(bodies.size() == 1);
        CHECK(nlohmann::json::parse(bodies[0])["temperature"] == 0);
        CHECK(auths[0] == "Bearer s3cr3t");
        CHECK(sleeps.empty());
    }
    SUBCASE("missing auth variable") {
        ::unsetenv("ERRSCALE_TEST_ABSENT");
        auto cfg = http_config(ts.url("/ok"));
        cfg.auth_env_var = "ERRSCALE_TEST_ABSENT";
        CHECK_THROWS_AS(HttpJsonProvider(cfg, sleeper), ProviderError);
    }
    SUBCASE("transient statuses are retried with growing delays") {
        HttpJsonProvider provider(http_config(ts.url("/flaky")), sleeper);
        CHECK(provider.send_text("x") == "done");
        CHECK(flaky_calls == 3);
        CHECK(sleeps == std::vector<double>{0.5, 1.0});
    }
    SUBCASE("client errors fail fast") {
        HttpJsonProvider provider(http_config(ts.url("/bad")), sleeper);
        try {
            provider.send_text("x");
            FAIL("expected an error");
        } catch (const ProviderError& e) {
            CHECK_FALSE(e.transient());
        }
        CHECK(sleeps.empty());
    }
    SUBCASE("exhausted retries") {
        HttpJsonProvider provider(http_config(ts.url("/down")), sleeper);
        CHECK_THROWS_AS(provider.send_text("x"), ProviderError);
        CHECK(sleeps == std::vector<double>{0.5, 1.0, 2.0});
    }
    SUBCASE("malformed response document") {
        HttpJsonProvider provider(http_config(ts.url("/html")), sleeper);
        CHECK_THROWS_AS(provider.send_text("x"), ProviderError);
        CHECK(sleeps.empty());
    }
    SUBCASE("timeouts are transient") {
        auto cfg = http_config(ts.url("/slow"));
        cfg.timeout = 0.2;
        cfg.retry.max_attempts = 2;
        HttpJsonProvider provider(cfg, sleeper);
        CHECK_THROWS_AS(provider.send_text("x"), ProviderError);
        CHECK(sleeps.size() == 1);
    }
    SUBCASE("run_plan through http") {
        class GradingServerProvider : public Provider {
        public:
            explicit GradingServerProvider(HttpJsonProvider& http) : http_(http) {}
            std::string send(const TaskInstance& inst, const std::string& prompt) override {
                const auto echo = http_.send(inst, prompt);
                REQUIRE(echo == "echo:" + prompt);
                return format_response(inst);
            }

        private:
            HttpJsonProvider& http_;
        };
        HttpJsonProvider http(http_config(ts.url("/ok")), sleeper);
        GradingServerProvider provider(http);
        TempDir dir("errscale_collector_http");
        RecordStore store(dir.path / "r.jsonl");
        const auto s = run_plan(plan_for(TaskKind::BinaryAddition, {4, 8}, 6), provider, store, fixed_clock(3));
        CHECK(s.complete());
        CHECK(bodies.size() == 12);
        CHECK(store.size() == 12);
    }
}
