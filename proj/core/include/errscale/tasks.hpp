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

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "errscale/prompt_templates.hpp"

namespace errscale {

enum class TaskKind {
    Reversal,
    NestedLinear,
    DynamicProgramming,
    TowerOfHanoi,
    VanillaAddition,
    AlgorithmicAddition,
    BinaryAddition,
    Multiplication,
    PolynomialMultiplication,
};

inline constexpr std::array<TaskKind, 9> kAllTaskKinds = {
    TaskKind::Reversal,           TaskKind::NestedLinear,   TaskKind::DynamicProgramming,
    TaskKind::TowerOfHanoi,       TaskKind::VanillaAddition, TaskKind::AlgorithmicAddition,
    TaskKind::BinaryAddition,     TaskKind::Multiplication, TaskKind::PolynomialMultiplication,
};

/// snake_case name, also the prompt template name ("tower_of_hanoi").
std::string_view task_name(TaskKind kind);
/// Short key used in results tables ("TH").
std::string_view task_key(TaskKind kind);
/// Accepts the snake_case name, the short key or the CamelCase enumerator,
/// ignoring case. Throws std::invalid_argument otherwise.
TaskKind parse_task_kind(std::string_view text);
std::optional<TaskKind> try_parse_task_kind(std::string_view text);

inline constexpr int kHanoiDisks = 10;
inline constexpr std::int64_t kMaxComplexity = 100'000;
inline constexpr std::string_view kFixedMultiplicand = "7869";

// Payloads. Reversal and DynamicProgramming use ListPayload; the addition
// and multiplication family uses OperandPayload, with `a` the fixed small
// factor for the two multiplication tasks.
struct ListPayload {
    std::vector<int> values;
    bool operator==(const ListPayload&) const = default;
};
struct NestedLinearPayload {
    int c0 = 0;
    std::vector<int> list1;
    std::vector<int> list2;
    bool operator==(const NestedLinearPayload&) const = default;
};
struct HanoiPayload {
    std::vector<int> labels;
    std::int64_t n_moves = 0;
    bool operator==(const HanoiPayload&) const = default;
};
struct OperandPayload {
    std::string a;
    std::string b;
    bool operator==(const OperandPayload&) const = default;
};
using Payload = std::variant<ListPayload, NestedLinearPayload, HanoiPayload, OperandPayload>;

struct HanoiMove {
    int disk = 0;  // label, not size index
    int from = 0;
    int to = 0;
    bool operator==(const HanoiMove&) const = default;
};

struct AdditionTrace {
    std::vector<int> list1, list2;
    std::vector<int> rev_list1, rev_list2;
    std::vector<std::pair<int, int>> pairs;
    std::vector<std::int64_t> sums;
    std::vector<int> digits;
    std::vector<int> rev_digits;
    std::string number;
    bool operator==(const AdditionTrace&) const = default;
};

struct MultiplicationTrace {
    std::vector<std::string> subproducts;  // least significant digit of `small` first
    std::string product;
    bool operator==(const MultiplicationTrace&) const = default;
};

struct PolynomialTrace {
    std::vector<int> p, q;
    std::vector<std::int64_t> r;
    std::vector<int> s;
    std::string answer;
    bool operator==(const PolynomialTrace&) const = default;
};

struct ListAnswer {
    std::vector<std::int64_t> values;
    bool operator==(const ListAnswer&) const = default;
};
struct MovesAnswer {
    std::vector<HanoiMove> moves;
    bool operator==(const MovesAnswer&) const = default;
};
struct NumberAnswer {
    std::string value;
    bool operator==(const NumberAnswer&) const = default;
};
using Expected = std::variant<ListAnswer, MovesAnswer, NumberAnswer, AdditionTrace, MultiplicationTrace, PolynomialTrace>;

struct TaskInstance {
    TaskKind kind = TaskKind::Reversal;
    std::int64_t c = 1;
    std::uint64_t seed = 0;
    Payload payload;
    Expected expected;
    bool typo_variant = false;  // VanillaAddition only
};

/// Deterministic instance for (kind, c, seed). Throws std::invalid_argument
/// when c is out of range for the kind.
TaskInstance generate(TaskKind kind, std::int64_t c, std::uint64_t seed, bool typo_variant = false);

/// Builds an instance from an explicit payload, validating it against the
/// kind and c and filling in the oracle output.
TaskInstance make_instance(TaskKind kind, std::int64_t c, Payload payload, std::uint64_t seed = 0,
                           bool typo_variant = false);

/// Throws std::invalid_argument when the payload does not fit the kind or c.
void validate_payload(TaskKind kind, std::int64_t c, const Payload& payload);

Expected oracle(TaskKind kind, const Payload& payload);
inline Expected oracle(const TaskInstance& inst) { return oracle(inst.kind, inst.payload); }

/// Prompt text for the instance. The typo variant of VanillaAddition needs
/// a "vanilla_addition_typo" template supplied through overrides.
std::string render_prompt(const TaskInstance& inst, const TemplateSet& templates = TemplateSet::builtin());

/// Maximum-sum non-adjacent selection; 1 marks a chosen index, 2 the rest.
/// Backward DP preferring to take on ties, forward reconstruction.
std::vector<int> max_nonadjacent_marks(const std::vector<int>& lst);

/// First n_moves moves of the binary-counter Hanoi solution. Size index
/// i = trailing zeros of the move number; even i cycles 0->2->1->0, odd i
/// cycles 0->1->2->0; the emitted disk is labels[i].
std::vector<HanoiMove> hanoi_moves(const std::vector<int>& labels, int n_disks, std::int64_t n_moves);

/// Left-to-right carry propagation keeping the units digit of each entry.
std::vector<int> carry_normalize(const std::vector<std::int64_t>& sums);

AdditionTrace algorithmic_addition_trace(std::string_view a, std::string_view b);
MultiplicationTrace multiplication_trace(std::string_view small, std::string_view large);
PolynomialTrace polynomial_multiplication_trace(std::string_view a, std::string_view b);

struct ParsedResponse {
    TaskKind kind = TaskKind::Reversal;
    /// Keyword -> canonical value: integers without leading zeros, lists
    /// as "a,b,c", tuples as "(a,b),(c,d)".
    std::map<std::string, std::string> fields;
    bool parse_ok = false;
    std::string failure_reason;
};

/// Keyword-anchored extraction. For each keyword the last occurrence
/// followed by a well-formed value wins. Never throws.
ParsedResponse parse(TaskKind kind, std::string_view response);

enum class GradeOutcome { Correct, Incorrect, Ungraded };

/// Keyword whose value decides correctness.
std::string_view graded_keyword(TaskKind kind);
/// Canonical graded value of the instance's expected output.
std::string expected_graded_value(const TaskInstance& inst);

/// Exact match on the graded keyword only. Parse failures are Ungraded.
/// Throws std::invalid_argument when the kinds differ.
GradeOutcome grade(const TaskInstance& inst, const ParsedResponse& parsed);

/// Expected output written the way the prompt asks for it.
std::string format_response(const TaskInstance& inst);

/// As format_response, with each graded token (list element, digit, bit,
/// move) independently replaced by a wrong token of the same kind with
/// probability noise_rate.
std::string corrupt_response(const TaskInstance& inst, double noise_rate, std::uint64_t seed);

/// FNV-1a 64 of the text as 16 lowercase hex digits.
std::string prompt_digest(std::string_view text);

std::string instance_to_json(const TaskInstance& inst);
/// Parses and re-derives the expected output; a stored expected output
/// that disagrees with the oracle is an error (std::invalid_argument).
TaskInstance instance_from_json(std::string_view text);

}  // namespace errscale
