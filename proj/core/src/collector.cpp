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

#include "errscale/collector.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <regex>
#include <sstream>
#include <thread>

#include "errscale/rng.hpp"
#include "httplib.h"
#include "json.hpp"

namespace errscale {

using nlohmann::json;

namespace {

constexpr std::uint64_t kNoiseStream = 0x6e6f697379ULL;

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument(what);
}

void substitute_strings(json& node, std::string_view prompt) {
    static constexpr std::string_view kPlaceholder = "{{prompt}}";
    if (node.is_string()) {
        auto s = node.get<std::string>();
        std::string out;
        std::size_t pos = 0;
        for (std::size_t hit; (hit = s.find(kPlaceholder, pos)) != std::string::npos; pos = hit + kPlaceholder.size()) {
            out.append(s, pos, hit - pos);
            out.append(prompt);
        }
        out.append(s, pos);
        node = std::move(out);
    } else if (node.is_structured()) {
        for (auto& child : node) substitute_strings(child, prompt);
    }
}

bool is_transient(httplib::Error e) {
    switch (e) {
        case httplib::Error::Connection:
        case httplib::Error::ConnectionTimeout:
        case httplib::Error::Read:
        case httplib::Error::Write:
            return true;
        default:
            return false;
    }
}

std::int64_t system_seconds() {
    return std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count();
}

}  // namespace

void SamplingPlan::validate() const {
    require(!model_id.empty(), "SamplingPlan: model_id must not be empty");
    require(!c_values.empty(), "SamplingPlan: c_values must not be empty");
    require(std::adjacent_find(c_values.begin(), c_values.end(), std::greater_equal<>()) == c_values.end(),
            "SamplingPlan: c_values must be strictly increasing");
    require(c_values.front() >= 1, "SamplingPlan: c_values must be positive");
    require(samples_per_c >= 1, "SamplingPlan: samples_per_c must be at least 1");
    require(!typo_variant || task == TaskKind::VanillaAddition, "SamplingPlan: typo_variant applies to vanilla_addition only");
}

std::uint64_t sample_seed(std::uint64_t base_seed, std::int64_t c, std::int64_t k) {
    return derive_seed(base_seed, {static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(k)});
}

std::string_view provider_kind_name(ProviderKind kind) {
    switch (kind) {
        case ProviderKind::HttpJson: return "http_json";
        case ProviderKind::MockPerfect: return "mock_perfect";
        case ProviderKind::MockNoisy: return "mock_noisy";
    }
    return "?";
}

ProviderKind parse_provider_kind(std::string_view text) {
    for (auto k : {ProviderKind::HttpJson, ProviderKind::MockPerfect, ProviderKind::MockNoisy}) {
        if (provider_kind_name(k) == text) return k;
    }
    throw std::invalid_argument("unknown provider kind: " + std::string(text));
}

void RetryPolicy::validate() const {
    require(max_attempts >= 1, "retry.max_attempts must be at least 1");
    require(std::isfinite(base_backoff) && base_backoff >= 0.0, "retry.base_backoff must be non-negative");
    require(std::isfinite(factor) && factor >= 1.0, "retry.factor must be at least 1");
    require(max_backoff >= base_backoff, "retry.max_backoff must be at least base_backoff");
}

double RetryPolicy::delay(int retry) const {
    if (retry < 1) return 0.0;
    const double d = base_backoff * std::pow(factor, retry - 1);
    return std::isfinite(d) ? std::min(d, max_backoff) : max_backoff;
}

void ProviderConfig::validate() const {
    require(max_in_flight >= 1, "provider: max_in_flight must be at least 1");
    require(noise_rate >= 0.0 && noise_rate <= 1.0, "provider: noise_rate must lie in [0, 1]");
    require(std::isfinite(timeout) && timeout > 0.0, "provider: timeout must be positive");
    retry.validate();
    if (kind == ProviderKind::HttpJson) {
        require(!endpoint_url.empty(), "provider: http_json needs endpoint_url");
        require(std::string_view(endpoint_url).starts_with("http://") || std::string_view(endpoint_url).starts_with("https://"),
                "provider: endpoint_url must start with http:// or https://");
        require(request_template.find("{{prompt}}") != std::string::npos,
                "provider: request_template has no {{prompt}} placeholder");
        render_request(request_template, "");
        json::json_pointer check(response_text_path);  // throws on a bad pointer
        (void)check;
    }
}

ProviderConfig ProviderConfig::from_json(std::string_view text) {
    ProviderConfig cfg;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("provider config: ") + e.what());
    }
    require(j.is_object(), "provider config must be a JSON object");
    try {
        for (const auto& [key, value] : j.items()) {
            if (key == "kind") cfg.kind = parse_provider_kind(value.get<std::string>());
            else if (key == "endpoint_url") cfg.endpoint_url = value.get<std::string>();
            else if (key == "request_template") cfg.request_template = value.is_string() ? value.get<std::string>() : value.dump();
            else if (key == "response_text_path") cfg.response_text_path = value.get<std::string>();
            else if (key == "auth_env_var") cfg.auth_env_var = value.get<std::string>();
            else if (key == "auth_header") cfg.auth_header = value.get<std::string>();
            else if (key == "auth_prefix") cfg.auth_prefix = value.get<std::string>();
            else if (key == "timeout") cfg.timeout = value.get<double>();
            else if (key == "max_in_flight") cfg.max_in_flight = value.get<int>();
            else if (key == "noise_rate") cfg.noise_rate = value.get<double>();
            else if (key == "retry") {
                require(value.is_object(), "provider config: retry must be an object");
                for (const auto& [rk, rv] : value.items()) {
                    if (rk == "max_attempts") cfg.retry.max_attempts = rv.get<int>();
                    else if (rk == "base_backoff") cfg.retry.base_backoff = rv.get<double>();
                    else if (rk == "factor") cfg.retry.factor = rv.get<double>();
                    else if (rk == "max_backoff") cfg.retry.max_backoff = rv.get<double>();
                    else throw std::invalid_argument("provider config: unknown retry key " + rk);
                }
            } else {
                throw std::invalid_argument("provider config: unknown key " + key);
            }
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("provider config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ProviderConfig ProviderConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read provider config " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

std::string MockPerfectProvider::send(const TaskInstance& inst, const std::string&) { return format_response(inst); }

MockNoisyProvider::MockNoisyProvider(double noise_rate) : noise_rate_(noise_rate) {
    require(noise_rate >= 0.0 && noise_rate <= 1.0, "mock_noisy: noise_rate must lie in [0, 1]");
}

std::string MockNoisyProvider::send(const TaskInstance& inst, const std::string&) {
    return corrupt_response(inst, noise_rate_, derive_seed(inst.seed, {kNoiseStream}));
}

std::string render_request(std::string_view request_template, std::string_view prompt) {
    json doc;
    try {
        doc = json::parse(request_template);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("request_template is not JSON: ") + e.what());
    }
    substitute_strings(doc, prompt);
    return doc.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string extract_response_text(std::string_view document, std::string_view pointer) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::exception& e) {
        throw ProviderError(std::string("malformed response document: ") + e.what(), false);
    }
    try {
        const auto& node = doc.at(json::json_pointer(std::string(pointer)));
        if (!node.is_string()) throw ProviderError("response value at " + std::string(pointer) + " is not a string", false);
        return node.get<std::string>();
    } catch (const json::exception&) {
        throw ProviderError("response document has nothing at " + std::string(pointer), false);
    }
}

HttpJsonProvider::HttpJsonProvider(ProviderConfig config, Sleeper sleeper)
    : config_(std::move(config)), sleeper_(std::move(sleeper)) {
    config_.kind = ProviderKind::HttpJson;
    config_.validate();
    static const std::regex url_re(R"(^(https?://[^/]+)(/.*)?$)");
    std::smatch m;
    if (!std::regex_match(config_.endpoint_url, m, url_re)) {
        throw std::invalid_argument("provider: cannot parse endpoint_url " + config_.endpoint_url);
    }
    scheme_host_port_ = m[1].str();
    path_ = m[2].matched ? m[2].str() : "/";
#ifndef CPPHTTPLIB_OPENSSL_SUPPORT
    if (scheme_host_port_.starts_with("https://")) {
        throw std::invalid_argument("provider: built without TLS support; https endpoints are unavailable");
    }
#endif
    if (!config_.auth_env_var.empty()) {
        const char* secret = std::getenv(config_.auth_env_var.c_str());
        if (secret == nullptr || *secret == '\0') {
            throw ProviderError("auth variable " + config_.auth_env_var + " is not set", false);
        }
        auth_value_ = config_.auth_prefix + secret;
    }
    if (!sleeper_) {
        sleeper_ = [](double s) { std::this_thread::sleep_for(std::chrono::duration<double>(s)); };
    }
}

std::string HttpJsonProvider::attempt(const std::string& body) const {
    httplib::Client client(scheme_host_port_);
    const auto whole = static_cast<time_t>(config_.timeout);
    const auto micros = static_cast<time_t>((config_.timeout - static_cast<double>(whole)) * 1e6);
    client.set_connection_timeout(whole, micros);
    client.set_read_timeout(whole, micros);
    client.set_write_timeout(whole, micros);
    httplib::Headers headers;
    if (!auth_value_.empty()) headers.emplace(config_.auth_header, auth_value_);
    auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
        const auto err = res.error();
        throw ProviderError("request failed: " + httplib::to_string(err), is_transient(err));
    }
    const int status = res->status;
    if (status == 429 || status >= 500) throw ProviderError("HTTP " + std::to_string(status), true);
    if (status < 200 || status >= 300) throw ProviderError("HTTP " + std::to_string(status) + ": " + res->body.substr(0, 200), false);
    return extract_response_text(res->body, config_.response_text_path);
}

std::string HttpJsonProvider::send_text(const std::string& prompt) {
    const std::string body = render_request(config_.request_template, prompt);
    for (int n = 1;; ++n) {
        try {
            return attempt(body);
        } catch (const ProviderError& e) {
            if (!e.transient()) throw;
            if (n >= config_.retry.max_attempts) {
                throw ProviderError("gave up after " + std::to_string(n) + " attempts: " + e.what(), true);
            }
            sleeper_(config_.retry.delay(n));
        }
    }
}

std::string HttpJsonProvider::send(const TaskInstance&, const std::string& prompt) { return send_text(prompt); }

std::unique_ptr<Provider> make_provider(const ProviderConfig& config) {
    config.validate();
    switch (config.kind) {
        case ProviderKind::HttpJson: return std::make_unique<HttpJsonProvider>(config);
        case ProviderKind::MockPerfect: return std::make_unique<MockPerfectProvider>();
        case ProviderKind::MockNoisy: return std::make_unique<MockNoisyProvider>(config.noise_rate);
    }
    throw std::invalid_argument("unknown provider kind");
}

std::int64_t RunSummary::total_sent() const {
    std::int64_t n = 0;
    for (const auto& s : per_c) n += s.sent;
    return n;
}

std::int64_t RunSummary::total_failed() const {
    std::int64_t n = 0;
    for (const auto& s : per_c) n += s.failed;
    return n;
}

std::int64_t RunSummary::total_stored() const { return total_sent() - total_failed(); }

RunSummary run_plan(const SamplingPlan& plan, Provider& provider, RecordStore& store, const RunOptions& options) {
    plan.validate();
    require(options.max_in_flight >= 1, "run_plan: max_in_flight must be at least 1");
    const TemplateSet& templates = options.templates ? *options.templates : TemplateSet::builtin();
    const auto clock = options.clock ? options.clock : std::function<std::int64_t()>(system_seconds);

    struct Job {
        std::size_t slot;
        TaskInstance inst;
        std::string prompt;
    };
    RunSummary summary;
    std::vector<Job> jobs;
    for (std::int64_t c : plan.c_values) {
        CSummary row;
        row.c = c;
        const std::size_t slot = summary.per_c.size();
        for (std::int64_t k = 0; k < plan.samples_per_c; ++k) {
            const auto seed = sample_seed(plan.base_seed, c, k);
            if (store.contains(DedupKey{plan.task, plan.model_id, c, seed, plan.typo_variant})) {
                ++row.skipped;
                continue;
            }
            auto inst = generate(plan.task, c, seed, plan.typo_variant);
            auto prompt = render_prompt(inst, templates);
            jobs.push_back({slot, std::move(inst), std::move(prompt)});
        }
        summary.per_c.push_back(row);
    }

    std::mutex mu;  // guards summary
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < jobs.size();) {
            const Job& job = jobs[i];
            TrialRecord rec;
            rec.task = plan.task;
            rec.model_id = plan.model_id;
            rec.c = job.inst.c;
            rec.seed = job.inst.seed;
            rec.typo_variant = plan.typo_variant;
            rec.prompt_digest = prompt_digest(job.prompt);
            std::string error;
            try {
                rec.response_text = provider.send(job.inst, job.prompt);
            } catch (const std::exception& e) {
                error = e.what();
            }
            if (error.empty()) {
                const auto parsed = parse(plan.task, rec.response_text);
                rec.parse_ok = parsed.parse_ok;
                if (parsed.parse_ok) rec.correct = grade(job.inst, parsed) == GradeOutcome::Correct;
                rec.timestamp = clock();
                try {
                    store.append(rec);
                } catch (const std::exception& e) {
                    error = std::string("store: ") + e.what();
                }
            }
            std::lock_guard lock(mu);
            auto& row = summary.per_c[job.slot];
            ++row.sent;
            if (!error.empty()) {
                ++row.failed;
                summary.errors.push_back("c=" + std::to_string(rec.c) + " seed=" + std::to_string(rec.seed) + ": " + error);
                continue;
            }
            if (rec.parse_ok) ++row.parsed;
            if (rec.correct.value_or(false)) ++row.correct;
        }
    };
    const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(options.max_in_flight), jobs.size());
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    std::sort(summary.errors.begin(), summary.errors.end());
    return summary;
}

}  // namespace errscale
