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

#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "errscale/datastore.hpp"
#include "errscale/prompt_templates.hpp"
#include "errscale/tasks.hpp"

namespace errscale {

struct SamplingPlan {
    TaskKind task = TaskKind::Reversal;
    std::string model_id;
    std::vector<std::int64_t> c_values;
    std::int64_t samples_per_c = 200;
    std::uint64_t base_seed = 0;
    bool typo_variant = false;  // VanillaAddition only

    void validate() const;
};

/// Instance seed for sample k at complexity c.
std::uint64_t sample_seed(std::uint64_t base_seed, std::int64_t c, std::int64_t k);

enum class ProviderKind { HttpJson, MockPerfect, MockNoisy };

std::string_view provider_kind_name(ProviderKind kind);
ProviderKind parse_provider_kind(std::string_view text);

struct RetryPolicy {
    int max_attempts = 4;
    double base_backoff = 1.0;  // seconds before the first retry
    double factor = 2.0;
    double max_backoff = 60.0;

    void validate() const;
    /// Delay before retry number `retry` (1-based). Nondecreasing in retry.
    double delay(int retry) const;
};

/// Provider settings. The request template is a JSON document; every
/// string value in it has "{{prompt}}" replaced by the prompt text. The
/// response text is taken from response_text_path, a JSON Pointer. The
/// secret never lives in the config: auth_env_var names the environment
/// variable whose value is sent as auth_header, prefixed by auth_prefix.
struct ProviderConfig {
    ProviderKind kind = ProviderKind::MockPerfect;
    std::string endpoint_url;
    std::string request_template = R"({"prompt": "{{prompt}}"})";
    std::string response_text_path = "/text";
    std::string auth_env_var;
    std::string auth_header = "Authorization";
    std::string auth_prefix = "Bearer ";
    double timeout = 120.0;  // seconds
    int max_in_flight = 4;
    RetryPolicy retry;
    double noise_rate = 0.0;

    void validate() const;
    /// Keys as the field names; retry is {"max_attempts", "base_backoff",
    /// "factor", "max_backoff"}. request_template may be a string or an
    /// inline JSON object. Unknown keys are rejected.
    static ProviderConfig from_json(std::string_view text);
    static ProviderConfig load(const std::filesystem::path& path);
};

class ProviderError : public std::runtime_error {
public:
    ProviderError(const std::string& what, bool transient) : std::runtime_error(what), transient_(transient) {}
    bool transient() const { return transient_; }

private:
    bool transient_;
};

/// Response source for one rendered prompt. Implementations must be safe
/// to call from several threads at once. The instance is passed so that
/// mocks can answer without reading the prompt.
class Provider {
public:
    virtual ~Provider() = default;
    virtual std::string send(const TaskInstance& inst, const std::string& prompt) = 0;
};

class MockPerfectProvider : public Provider {
public:
    std::string send(const TaskInstance& inst, const std::string& prompt) override;
};

/// Corrupts each graded token with probability noise_rate, seeded from the
/// instance seed so the same instance always gets the same response.
class MockNoisyProvider : public Provider {
public:
    explicit MockNoisyProvider(double noise_rate);
    std::string send(const TaskInstance& inst, const std::string& prompt) override;

private:
    double noise_rate_;
};

/// Request body for a prompt. Throws std::invalid_argument when the
/// template is not JSON.
std::string render_request(std::string_view request_template, std::string_view prompt);
/// Text at the JSON Pointer. Throws ProviderError (not transient) when the
/// document is malformed or the path does not lead to a string.
std::string extract_response_text(std::string_view document, std::string_view pointer);

class HttpJsonProvider : public Provider {
public:
    using Sleeper = std::function<void(double seconds)>;

    /// Reads the auth variable immediately; a missing variable throws
    /// ProviderError.
    explicit HttpJsonProvider(ProviderConfig config, Sleeper sleeper = {});
    std::string send(const TaskInstance& inst, const std::string& prompt) override;
    std::string send_text(const std::string& prompt);

private:
    std::string attempt(const std::string& body) const;

    ProviderConfig config_;
    Sleeper sleeper_;
    std::string scheme_host_port_;
    std::string path_;
    std::string auth_value_;
};

std::unique_ptr<Provider> make_provider(const ProviderConfig& config);

struct CSummary {
    std::int64_t c = 0;
    std::int64_t skipped = 0;  // already in the store
    std::int64_t sent = 0;
    std::int64_t parsed = 0;
    std::int64_t correct = 0;
    std::int64_t failed = 0;   // no response after retries; nothing stored
};

struct RunSummary {
    std::vector<CSummary> per_c;
    std::vector<std::string> errors;  // one line per failed sample

    std::int64_t total_sent() const;
    std::int64_t total_failed() const;
    std::int64_t total_stored() const;
    bool complete() const { return total_failed() == 0; }
};

struct RunOptions {
    int max_in_flight = 4;
    const TemplateSet* templates = nullptr;  // builtin when null
    std::function<std::int64_t()> clock;     // UTC seconds; system clock when empty
};

/// Generates every (c, k) instance, skips those already stored, and sends
/// the rest through at most max_in_flight concurrent workers. Responses
/// are parsed and graded on the worker; records are funnelled into the
/// store one at a time. Failed sends are counted and listed, never dropped
/// silently; re-running the plan retries them.
RunSummary run_plan(const SamplingPlan& plan, Provider& provider, RecordStore& store, const RunOptions& options = {});

}  // namespace errscale
