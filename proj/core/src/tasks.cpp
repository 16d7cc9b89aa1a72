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

#include "errscale/tasks.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "errscale/digits.hpp"
#include "errscale/rng.hpp"

namespace errscale {

namespace {

struct KindInfo {
    TaskKind kind;
    std::string_view name;
    std::string_view key;
    std::string_view enumerator;
};

constexpr std::array<KindInfo, 9> kKinds = {{
    {TaskKind::Reversal, "reversal", "R", "Reversal"},
    {TaskKind::NestedLinear, "nested_linear", "NLT", "NestedLinear"},
    {TaskKind::DynamicProgramming, "dynamic_programming", "DP", "DynamicProgramming"},
    {TaskKind::TowerOfHanoi, "tower_of_hanoi", "TH", "TowerOfHanoi"},
    {TaskKind::VanillaAddition, "vanilla_addition", "VA", "VanillaAddition"},
    {TaskKind::AlgorithmicAddition, "algorithmic_addition", "AA", "AlgorithmicAddition"},
    {TaskKind::BinaryAddition, "binary_addition", "BA", "BinaryAddition"},
    {TaskKind::Multiplication, "multiplication", "M", "Multiplication"},
    {TaskKind::PolynomialMultiplication, "polynomial_multiplication", "PM", "PolynomialMultiplication"},
}};

const KindInfo& info(TaskKind kind) {
    for (const auto& k : kKinds) {
        if (k.kind == kind) return k;
    }
    throw std::invalid_argument("unknown TaskKind");
}

bool iequals(std::string_view a, std::string_view b) {
    return a.size() == b.size() && std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) == std::tolower(static_cast<unsigned char>(y));
           });
}

[[noreturn]] void bad(TaskKind kind, const std::string& what) {
    throw std::invalid_argument(std::string(task_name(kind)) + ": " + what);
}

template <class T>
const T& payload_as(TaskKind kind, const Payload& payload) {
    const T* p = std::get_if<T>(&payload);
    if (!p) bad(kind, "payload has the wrong shape for this task");
    return *p;
}

std::string join(const std::vector<int>& v, std::string_view sep) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << sep;
        os << v[i];
    }
    return os.str();
}

bool canonical_decimal(std::string_view s) { return is_decimal(s) && (s.size() == 1 || s[0] != '0'); }
bool canonical_binary(std::string_view s) { return is_binary(s) && (s.size() == 1 || s[0] != '0'); }

std::string random_number(Rng& rng, std::int64_t length, int base) {
    std::string out;
    out.reserve(static_cast<std::size_t>(length));
    out.push_back(static_cast<char>('0' + rng.uniform_int(1, base - 1)));
    for (std::int64_t i = 1; i < length; ++i) out.push_back(static_cast<char>('0' + rng.below(base)));
    return out;
}

std::int64_t checked_step(std::int64_t c, std::int64_t a, std::int64_t b) {
    std::int64_t prod = 0;
    std::int64_t out = 0;
    if (__builtin_mul_overflow(c, a, &prod) || __builtin_add_overflow(prod, b, &out)) {
        throw std::overflow_error("nested_linear: chain value overflows 64 bits");
    }
    return out;
}

}  // namespace

std::string_view task_name(TaskKind kind) { return info(kind).name; }
std::string_view task_key(TaskKind kind) { return info(kind).key; }

std::optional<TaskKind> try_parse_task_kind(std::string_view text) {
    for (const auto& k : kKinds) {
        if (iequals(text, k.name) || iequals(text, k.key) || iequals(text, k.enumerator)) return k.kind;
    }
    return std::nullopt;
}

TaskKind parse_task_kind(std::string_view text) {
    if (auto k = try_parse_task_kind(text)) return *k;
    throw std::invalid_argument("unknown task \"" + std::string(text) + "\"");
}

void validate_payload(TaskKind kind, std::int64_t c, const Payload& payload) {
    if (c < 1 || c > kMaxComplexity) bad(kind, "c must lie in [1, " + std::to_string(kMaxComplexity) + "]");
    const auto size_c = static_cast<std::size_t>(c);
    switch (kind) {
        case TaskKind::Reversal:
        case TaskKind::DynamicProgramming: {
            const auto& p = payload_as<ListPayload>(kind, payload);
            if (p.values.size() != size_c) bad(kind, "list length must equal c");
            for (int v : p.values) {
                if (v < 0) bad(kind, "list entries must be non-negative");
            }
            return;
        }
        case TaskKind::NestedLinear: {
            const auto& p = payload_as<NestedLinearPayload>(kind, payload);
            if (p.list1.size() != size_c || p.list2.size() != size_c) bad(kind, "both lists must have length c");
            auto in_range = [](int v) { return v >= -9 && v <= 9; };
            if (!in_range(p.c0) || !std::all_of(p.list1.begin(), p.list1.end(), in_range) ||
                !std::all_of(p.list2.begin(), p.list2.end(), in_range)) {
                bad(kind, "initial value and list entries must lie in [-9, 9]");
            }
            return;
        }
        case TaskKind::TowerOfHanoi: {
            const auto& p = payload_as<HanoiPayload>(kind, payload);
            if (p.labels.size() != static_cast<std::size_t>(kHanoiDisks)) bad(kind, "the prompt is written for 10 disks");
            if (p.n_moves != c) bad(kind, "move count must equal c");
            // hanoi_moves itself checks the permutation and the move bound.
            hanoi_moves(p.labels, kHanoiDisks, p.n_moves);
            return;
        }
        case TaskKind::VanillaAddition:
        case TaskKind::AlgorithmicAddition:
        case TaskKind::BinaryAddition: {
            const auto& p = payload_as<OperandPayload>(kind, payload);
            const bool binary = kind == TaskKind::BinaryAddition;
            const auto ok = binary ? canonical_binary : canonical_decimal;
            if (!ok(p.a) || !ok(p.b)) bad(kind, binary ? "operands must be binary numbers" : "operands must be decimal numbers");
            if (static_cast<std::int64_t>(std::max(p.a.size(), p.b.size())) != c) bad(kind, "c must equal the operand length");
            return;
        }
        case TaskKind::Multiplication:
        case TaskKind::PolynomialMultiplication: {
            const auto& p = payload_as<OperandPayload>(kind, payload);
            if (!canonical_decimal(p.a) || !canonical_decimal(p.b) || p.a == "0" || p.b == "0") {
                bad(kind, "factors must be positive decimal numbers");
            }
            if (static_cast<std::int64_t>(p.b.size()) != c) bad(kind, "c must equal the length of the variable factor");
            return;
        }
    }
    bad(kind, "unhandled task");
}

Expected oracle(TaskKind kind, const Payload& payload) {
    switch (kind) {
        case TaskKind::Reversal: {
            const auto& p = payload_as<ListPayload>(kind, payload);
            return ListAnswer{{p.values.rbegin(), p.values.rend()}};
        }
        case TaskKind::NestedLinear: {
            const auto& p = payload_as<NestedLinearPayload>(kind, payload);
            if (p.list1.size() != p.list2.size()) bad(kind, "lists differ in length");
            ListAnswer out;
            out.values.push_back(p.c0);
            for (std::size_t i = 0; i < p.list1.size(); ++i) {
                out.values.push_back(checked_step(out.values.back(), p.list1[i], p.list2[i]));
            }
            return out;
        }
        case TaskKind::DynamicProgramming: {
            const auto marks = max_nonadjacent_marks(payload_as<ListPayload>(kind, payload).values);
            return ListAnswer{{marks.begin(), marks.end()}};
        }
        case TaskKind::TowerOfHanoi: {
            const auto& p = payload_as<HanoiPayload>(kind, payload);
            return MovesAnswer{hanoi_moves(p.labels, static_cast<int>(p.labels.size()), p.n_moves)};
        }
        case TaskKind::VanillaAddition: {
            const auto& p = payload_as<OperandPayload>(kind, payload);
            return NumberAnswer{add_decimal(p.a, p.b)};
        }
        case TaskKind::BinaryAddition: {
            const auto& p = payload_as<OperandPayload>(kind, payload);
            return NumberAnswer{add_binary(p.a, p.b)};
        }
        case TaskKind::AlgorithmicAddition: {
            const auto& p = payload_as<OperandPayload>(kind, payload);
            return algorithmic_addition_trace(p.a, p.b);
        }
        case TaskKind::Multiplication: {
            const auto& p = payload_as<OperandPayload>(kind, payload);
            return multiplication_trace(p.a, p.b);
        }
        case TaskKind::PolynomialMultiplication: {
            const auto& p = payload_as<OperandPayload>(kind, payload);
            return polynomial_multiplication_trace(p.a, p.b);
        }
    }
    bad(kind, "unhandled task");
}

TaskInstance make_instance(TaskKind kind, std::int64_t c, Payload payload, std::uint64_t seed, bool typo_variant) {
    if (typo_variant && kind != TaskKind::VanillaAddition) bad(kind, "only vanilla_addition has a typo variant");
    validate_payload(kind, c, payload);
    TaskInstance inst;
    inst.kind = kind;
    inst.c = c;
    inst.seed = seed;
    inst.expected = oracle(kind, payload);
    inst.payload = std::move(payload);
    inst.typo_variant = typo_variant;
    return inst;
}

TaskInstance generate(TaskKind kind, std::int64_t c, std::uint64_t seed, bool typo_variant) {
    if (c < 1 || c > kMaxComplexity) bad(kind, "c must lie in [1, " + std::to_string(kMaxComplexity) + "]");
    if (kind == TaskKind::TowerOfHanoi && c > (std::int64_t{1} << kHanoiDisks) - 1) {
        bad(kind, "at most 1023 moves exist for 10 disks");
    }
    Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(kind), static_cast<std::uint64_t>(c)}));
    const auto n = static_cast<std::size_t>(c);
    Payload payload;
    switch (kind) {
        case TaskKind::Reversal:
        case TaskKind::DynamicProgramming: {
            ListPayload p;
            p.values.resize(n);
            for (auto& v : p.values) v = static_cast<int>(rng.below(10));
            payload = std::move(p);
            break;
        }
        case TaskKind::NestedLinear: {
            NestedLinearPayload p;
            p.c0 = static_cast<int>(rng.uniform_int(-9, 9));
            std::int64_t value = p.c0;
            for (std::size_t i = 0; i < n; ++i) {
                // Rejection sampling keeps every chain value in [-9, 9].
                while (true) {
                    const auto a = rng.uniform_int(-9, 9);
                    const auto b = rng.uniform_int(-9, 9);
                    const auto next = value * a + b;
                    if (next >= -9 && next <= 9) {
                        p.list1.push_back(static_cast<int>(a));
                        p.list2.push_back(static_cast<int>(b));
                        value = next;
                        break;
                    }
                }
            }
            payload = std::move(p);
            break;
        }
        case TaskKind::TowerOfHanoi: {
            HanoiPayload p;
            p.labels.resize(kHanoiDisks);
            std::iota(p.labels.begin(), p.labels.end(), 0);
            for (std::size_t i = p.labels.size() - 1; i > 0; --i) {
                std::swap(p.labels[i], p.labels[rng.below(i + 1)]);
            }
            p.n_moves = c;
            payload = std::move(p);
            break;
        }
        case TaskKind::VanillaAddition:
        case TaskKind::AlgorithmicAddition:
        case TaskKind::BinaryAddition: {
            const int base = kind == TaskKind::BinaryAddition ? 2 : 10;
            OperandPayload p;
            p.a = random_number(rng, c, base);
            p.b = random_number(rng, c, base);
            payload = std::move(p);
            break;
        }
        case TaskKind::Multiplication:
        case TaskKind::PolynomialMultiplication: {
            OperandPayload p;
            p.a = std::string(kFixedMultiplicand);
            p.b = random_number(rng, c, 10);
            payload = std::move(p);
            break;
        }
    }
    return make_instance(kind, c, std::move(payload), seed, typo_variant);
}

std::string render_prompt(const TaskInstance& inst, const TemplateSet& templates) {
    std::map<std::string, std::string, std::less<>> values;
    std::string name(task_name(inst.kind));
    switch (inst.kind) {
        case TaskKind::Reversal:
            values["LIST"] = join(std::get<ListPayload>(inst.payload).values, ", ");
            break;
        case TaskKind::DynamicProgramming:
            values["LST"] = join(std::get<ListPayload>(inst.payload).values, ", ");
            break;
        case TaskKind::NestedLinear: {
            const auto& p = std::get<NestedLinearPayload>(inst.payload);
            values["C0"] = std::to_string(p.c0);
            values["LIST1"] = join(p.list1, ", ");
            values["LIST2"] = join(p.list2, ", ");
            break;
        }
        case TaskKind::TowerOfHanoi: {
            const auto& p = std::get<HanoiPayload>(inst.payload);
            values["LABELS"] = join(p.labels, ", ");
            values["L0"] = std::to_string(p.labels.at(0));
            values["L1"] = std::to_string(p.labels.at(1));
            values["MOVES"] = std::to_string(p.n_moves);
            break;
        }
        case TaskKind::VanillaAddition:
        case TaskKind::AlgorithmicAddition:
        case TaskKind::BinaryAddition:
        case TaskKind::PolynomialMultiplication: {
            const auto& p = std::get<OperandPayload>(inst.payload);
            values["A"] = p.a;
            values["B"] = p.b;
            break;
        }
        case TaskKind::Multiplication: {
            const auto& p = std::get<OperandPayload>(inst.payload);
            values["SMALL"] = p.a;
            values["LARGE"] = p.b;
            break;
        }
    }
    if (inst.typo_variant) {
        name += "_typo";
        if (!templates.contains(name)) {
            throw std::runtime_error(
                "the typo variant of vanilla_addition has no built-in text; supply vanilla_addition_typo.txt "
                "in a template override directory");
        }
    }
    return substitute(templates.get(name), values);
}

std::vector<int> max_nonadjacent_marks(const std::vector<int>& lst) {
    if (lst.empty()) throw std::invalid_argument("max_nonadjacent_marks: empty list");
    for (int v : lst) {
        if (v < 0) throw std::invalid_argument("max_nonadjacent_marks: entries must be non-negative");
    }
    const std::size_t n = lst.size();
    std::vector<std::int64_t> dp(n + 2, 0);
    std::vector<bool> choose(n, false);
    for (std::size_t i = n; i-- > 0;) {
        const std::int64_t take = lst[i] + dp[i + 2];
        const std::int64_t skip = dp[i + 1];
        if (take >= skip) {
            dp[i] = take;
            choose[i] = true;
        } else {
            dp[i] = skip;
        }
    }
    std::vector<int> res(n, 2);
    for (std::size_t i = 0; i < n;) {
        if (choose[i]) {
            res[i] = 1;
            i += 2;
        } else {
            i += 1;
        }
    }
    return res;
}

std::vector<HanoiMove> hanoi_moves(const std::vector<int>& labels, int n_disks, std::int64_t n_moves) {
    if (n_disks < 1 || n_disks > 62) throw std::invalid_argument("hanoi_moves: n_disks must lie in [1, 62]");
    if (labels.size() != static_cast<std::size_t>(n_disks)) {
        throw std::invalid_argument("hanoi_moves: need one label per disk");
    }
    std::vector<int> sorted = labels;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < n_disks; ++i) {
        if (sorted[static_cast<std::size_t>(i)] != i) {
            throw std::invalid_argument("hanoi_moves: labels must be a permutation of 0..n_disks-1");
        }
    }
    const std::int64_t max_moves = (std::int64_t{1} << n_disks) - 1;
    if (n_moves < 0 || n_moves > max_moves) {
        throw std::invalid_argument("hanoi_moves: n_moves must lie in [0, " + std::to_string(max_moves) + "]");
    }
    std::vector<int> pos(static_cast<std::size_t>(n_disks), 0);
    std::vector<HanoiMove> out;
    out.reserve(static_cast<std::size_t>(n_moves));
    for (std::int64_t k = 1; k <= n_moves; ++k) {
        const auto i = static_cast<std::size_t>(std::countr_zero(static_cast<std::uint64_t>(k)));
        const int from = pos[i];
        const int to = (i % 2 == 0) ? (from + 2) % 3 : (from + 1) % 3;
        pos[i] = to;
        out.push_back({labels[i], from, to});
    }
    return out;
}

std::vector<int> carry_normalize(const std::vector<std::int64_t>& sums) {
    if (sums.empty()) throw std::invalid_argument("carry_normalize: empty list");
    std::vector<int> out;
    out.reserve(sums.size() + 2);
    std::int64_t carry = 0;
    for (auto s : sums) {
        if (s < 0) throw std::invalid_argument("carry_normalize: entries must be non-negative");
        const std::int64_t v = s + carry;
        out.push_back(static_cast<int>(v % 10));
        carry = v / 10;
    }
    while (carry) {
        out.push_back(static_cast<int>(carry % 10));
        carry /= 10;
    }
    return out;
}

AdditionTrace algorithmic_addition_trace(std::string_view a, std::string_view b) {
    if (!is_decimal(a) || !is_decimal(b)) throw std::invalid_argument("algorithmic_addition_trace: non-digit input");
    AdditionTrace t;
    for (char ch : a) t.list1.push_back(ch - '0');
    for (char ch : b) t.list2.push_back(ch - '0');
    t.rev_list1.assign(t.list1.rbegin(), t.list1.rend());
    t.rev_list2.assign(t.list2.rbegin(), t.list2.rend());
    const std::size_t n = std::max(t.rev_list1.size(), t.rev_list2.size());
    for (std::size_t i = 0; i < n; ++i) {
        const int x = i < t.rev_list1.size() ? t.rev_list1[i] : 0;
        const int y = i < t.rev_list2.size() ? t.rev_list2[i] : 0;
        t.pairs.emplace_back(x, y);
        t.sums.push_back(x + y);
    }
    t.digits = carry_normalize(t.sums);
    t.rev_digits.assign(t.digits.rbegin(), t.digits.rend());
    std::string number;
    for (int d : t.rev_digits) number.push_back(static_cast<char>('0' + d));
    t.number = strip_leading_zeros(number);
    return t;
}

MultiplicationTrace multiplication_trace(std::string_view small, std::string_view large) {
    if (!is_decimal(small) || !is_decimal(large)) throw std::invalid_argument("multiplication_trace: non-digit input");
    MultiplicationTrace t;
    const std::string large_canon = strip_leading_zeros(large);
    std::string product = "0";
    std::size_t place = 0;
    for (auto it = small.rbegin(); it != small.rend(); ++it, ++place) {
        std::string sub = multiply_decimal(std::string(1, *it), large_canon);
        if (sub != "0") sub.append(place, '0');
        product = add_decimal(product, sub);
        t.subproducts.push_back(std::move(sub));
    }
    t.product = product;
    return t;
}

PolynomialTrace polynomial_multiplication_trace(std::string_view a, std::string_view b) {
    if (!is_decimal(a) || !is_decimal(b)) throw std::invalid_argument("polynomial_multiplication_trace: non-digit input");
    PolynomialTrace t;
    t.p = digits_lsd_first(a);
    t.q = digits_lsd_first(b);
    t.r.assign(t.p.size() + t.q.size() - 1, 0);
    for (std::size_t i = 0; i < t.p.size(); ++i) {
        for (std::size_t j = 0; j < t.q.size(); ++j) t.r[i + j] += t.p[i] * t.q[j];
    }
    t.s = carry_normalize(t.r);
    std::string number;
    for (auto it = t.s.rbegin(); it != t.s.rend(); ++it) number.push_back(static_cast<char>('0' + *it));
    t.answer = strip_leading_zeros(number);
    return t;
}

std::string prompt_digest(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
        h >>= 4;
    }
    return out;
}

}  // namespace errscale
