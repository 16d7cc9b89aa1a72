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

#include <stdexcept>

#include "errscale/tasks.hpp"
#include "json.hpp"

namespace errscale {

namespace {

using nlohmann::json;

json payload_json(const Payload& payload) {
    return std::visit(
        [](const auto& p) -> json {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, ListPayload>) {
                return {{"values", p.values}};
            } else if constexpr (std::is_same_v<T, NestedLinearPayload>) {
                return {{"c0", p.c0}, {"list1", p.list1}, {"list2", p.list2}};
            } else if constexpr (std::is_same_v<T, HanoiPayload>) {
                return {{"labels", p.labels}, {"n_moves", p.n_moves}};
            } else {
                return {{"a", p.a}, {"b", p.b}};
            }
        },
        payload);
}

Payload payload_from_json(TaskKind kind, const json& j) {
    switch (kind) {
        case TaskKind::Reversal:
        case TaskKind::DynamicProgramming:
            return ListPayload{j.at("values").get<std::vector<int>>()};
        case TaskKind::NestedLinear:
            return NestedLinearPayload{j.at("c0").get<int>(), j.at("list1").get<std::vector<int>>(),
                                       j.at("list2").get<std::vector<int>>()};
        case TaskKind::TowerOfHanoi:
            return HanoiPayload{j.at("labels").get<std::vector<int>>(), j.at("n_moves").get<std::int64_t>()};
        default:
            return OperandPayload{j.at("a").get<std::string>(), j.at("b").get<std::string>()};
    }
}

json expected_json(const Expected& expected) {
    return std::visit(
        [](const auto& e) -> json {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, ListAnswer>) {
                return {{"list", e.values}};
            } else if constexpr (std::is_same_v<T, MovesAnswer>) {
                json moves = json::array();
                for (const auto& m : e.moves) moves.push_back({m.disk, m.from, m.to});
                return {{"moves", moves}};
            } else if constexpr (std::is_same_v<T, NumberAnswer>) {
                return {{"number", e.value}};
            } else if constexpr (std::is_same_v<T, AdditionTrace>) {
                json pairs = json::array();
                for (const auto& [x, y] : e.pairs) pairs.push_back({x, y});
                return {{"anslist1", e.list1},         {"anslist2", e.list2},     {"ansrevlist1", e.rev_list1},
                        {"ansrevlist2", e.rev_list2},  {"anspairlist", pairs},    {"anssumslist", e.sums},
                        {"ansdigitslist", e.digits},   {"ansrevdigitslist", e.rev_digits},
                        {"ansnum", e.number}};
            } else if constexpr (std::is_same_v<T, MultiplicationTrace>) {
                return {{"subproducts", e.subproducts}, {"product", e.product}};
            } else {
                return {{"p", e.p}, {"q", e.q}, {"r", e.r}, {"s", e.s}, {"answer", e.answer}};
            }
        },
        expected);
}

}  // namespace

std::string instance_to_json(const TaskInstance& inst) {
    json j = {
        {"kind", std::string(task_name(inst.kind))},
        {"c", inst.c},
        {"seed", inst.seed},
        {"typo_variant", inst.typo_variant},
        {"payload", payload_json(inst.payload)},
        {"expected", expected_json(inst.expected)},
    };
    return j.dump(2);
}

TaskInstance instance_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("instance file is not valid JSON: ") + e.what());
    }
    try {
        const TaskKind kind = parse_task_kind(j.at("kind").get<std::string>());
        const auto c = j.at("c").get<std::int64_t>();
        const auto seed = j.at("seed").get<std::uint64_t>();
        const bool typo = j.value("typo_variant", false);
        TaskInstance inst = make_instance(kind, c, payload_from_json(kind, j.at("payload")), seed, typo);
        if (j.contains("expected") && j.at("expected") != expected_json(inst.expected)) {
            throw std::invalid_argument("instance expected output disagrees with the oracle");
        }
        return inst;
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed instance: ") + e.what());
    }
}

}  // namespace errscale
