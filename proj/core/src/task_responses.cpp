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
#include <cctype>
#include <functional>
#include <sstream>
#include <stdexcept>

#include "errscale/digits.hpp"
#include "errscale/rng.hpp"
#include "errscale/tasks.hpp"

namespace errscale {

namespace {

bool is_word_char(char ch) { return std::isalnum(static_cast<unsigned char>(ch)) || ch == '_'; }

// Recursive-descent reader over one candidate value. Any failure leaves the
// caller to try an earlier keyword occurrence.
class Reader {
public:
    Reader(std::string_view s, std::size_t pos) : s_(s), pos_(pos) {}

    void skip_ws() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    }
    bool eat(char ch) {
        skip_ws();
        if (pos_ < s_.size() && s_[pos_] == ch) {
            ++pos_;
            return true;
        }
        return false;
    }
    // Canonical integer text, or nullopt.
    std::optional<std::string> integer(bool allow_sign) {
        skip_ws();
        bool negative = false;
        if (allow_sign && pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
            negative = s_[pos_] == '-';
            ++pos_;
        }
        const std::size_t start = pos_;
        while (pos_ < s_.size() && s_[pos_] >= '0' && s_[pos_] <= '9') ++pos_;
        if (pos_ == start) return std::nullopt;
        // "12abc" is not a number.
        if (pos_ < s_.size() && is_word_char(s_[pos_])) return std::nullopt;
        std::string digits = strip_leading_zeros(s_.substr(start, pos_ - start));
        if (negative && digits != "0") digits.insert(digits.begin(), '-');
        return digits;
    }
    // [a, b, ...] with each element checked by `ok`.
    std::optional<std::string> int_list(bool allow_sign, const std::function<bool(const std::string&)>& ok) {
        if (!eat('[')) return std::nullopt;
        std::string out;
        if (eat(']')) return out;
        while (true) {
            auto v = integer(allow_sign);
            if (!v || !ok(*v)) return std::nullopt;
            if (!out.empty()) out += ',';
            out += *v;
            if (eat(']')) return out;
            if (!eat(',')) return std::nullopt;
        }
    }
    // [(a, b, ...), (c, d, ...)] with exactly `arity` integers per tuple.
    std::optional<std::string> tuple_list(int arity) {
        if (!eat('[')) return std::nullopt;
        std::string out;
        if (eat(']')) return out;
        while (true) {
            if (!eat('(')) return std::nullopt;
            if (!out.empty()) out += ',';
            out += '(';
            for (int k = 0; k < arity; ++k) {
                if (k > 0) {
                    if (!eat(',')) return std::nullopt;
                    out += ',';
                }
                auto v = integer(false);
                if (!v) return std::nullopt;
                out += *v;
            }
            if (!eat(')')) return std::nullopt;
            out += ')';
            if (eat(']')) return out;
            if (!eat(',')) return std::nullopt;
        }
    }

private:
    std::string_view s_;
    std::size_t pos_;
};

// Every position of `keyword` not preceded or followed by a word character.
std::vector<std::size_t> keyword_positions(std::string_view text, std::string_view keyword) {
    std::vector<std::size_t> out;
    for (std::size_t pos = text.find(keyword); pos != std::string_view::npos; pos = text.find(keyword, pos + 1)) {
        if (pos > 0 && is_word_char(text[pos - 1])) continue;
        const std::size_t end = pos + keyword.size();
        if (end < text.size() && is_word_char(text[end])) continue;
        out.push_back(end);
    }
    return out;
}

using ValueReader = std::function<std::optional<std::string>(Reader&)>;

enum class Found { Value, Absent, Malformed };

// Last occurrence of `keyword` <sep> value that reads cleanly.
Found find_last(std::string_view text, std::string_view keyword, char sep, const ValueReader& read, std::string& out) {
    const auto positions = keyword_positions(text, keyword);
    if (positions.empty()) return Found::Absent;
    for (auto it = positions.rbegin(); it != positions.rend(); ++it) {
        Reader r(text, *it);
        if (!r.eat(sep)) continue;
        if (auto v = read(r)) {
            out = std::move(*v);
            return Found::Value;
        }
    }
    return Found::Malformed;
}

bool any_value(const std::string&) { return true; }
bool mark_value(const std::string& v) { return v == "1" || v == "2"; }

ValueReader number_reader(bool binary) {
    return [binary](Reader& r) -> std::optional<std::string> {
        auto v = r.integer(false);
        if (v && binary && !is_binary(*v)) return std::nullopt;
        return v;
    };
}

ValueReader list_reader(bool allow_sign, bool (*ok)(const std::string&)) {
    return [allow_sign, ok](Reader& r) { return r.int_list(allow_sign, ok); };
}

ValueReader bracketed_number_reader() {
    return [](Reader& r) -> std::optional<std::string> {
        if (!r.eat('[')) return std::nullopt;
        auto v = r.integer(false);
        if (!v || !r.eat(']')) return std::nullopt;
        return v;
    };
}

// Indexed lines NAME<i>=value or NAME[i]=value, later lines overriding
// earlier ones. Fails when the indices do not cover 0..max.
struct IndexedResult {
    bool any = false;
    std::optional<std::string> joined;
    std::string problem;
};

IndexedResult read_indexed(std::string_view text, std::string_view name, bool bracketed) {
    IndexedResult res;
    std::map<std::int64_t, std::string> by_index;
    for (std::size_t pos = text.find(name); pos != std::string_view::npos; pos = text.find(name, pos + 1)) {
        if (pos > 0 && is_word_char(text[pos - 1])) continue;
        std::size_t i = pos + name.size();
        if (bracketed) {
            if (i >= text.size() || text[i] != '[') continue;
            ++i;
        }
        const std::size_t digits_start = i;
        while (i < text.size() && text[i] >= '0' && text[i] <= '9') ++i;
        if (i == digits_start || i - digits_start > 9) continue;
        const auto index = std::stoll(std::string(text.substr(digits_start, i - digits_start)));
        if (bracketed) {
            if (i >= text.size() || text[i] != ']') continue;
            ++i;
        } else if (i < text.size() && is_word_char(text[i])) {
            continue;
        }
        Reader r(text, i);
        if (!r.eat('=')) continue;
        auto v = r.integer(true);
        if (!v) continue;
        res.any = true;
        by_index[index] = *v;
    }
    if (!res.any) return res;
    std::string joined;
    std::int64_t expect = 0;
    for (const auto& [index, value] : by_index) {
        if (index != expect) {
            res.problem = std::string(name) + (bracketed ? "[" : "") + std::to_string(expect) + (bracketed ? "]" : "") +
                          " missing";
            return res;
        }
        if (!joined.empty()) joined += ',';
        joined += value;
        ++expect;
    }
    res.joined = std::move(joined);
    return res;
}

struct FieldSpec {
    std::string keyword;
    char sep;
    ValueReader read;
};

struct KindFormat {
    FieldSpec graded;
    std::vector<FieldSpec> optional;
};

KindFormat format_for(TaskKind kind) {
    switch (kind) {
        case TaskKind::NestedLinear:
            return {{"CHAIN", '=', list_reader(true, any_value)}, {}};
        case TaskKind::DynamicProgramming:
            return {{"ANSWER", '=', list_reader(false, mark_value)}, {}};
        case TaskKind::TowerOfHanoi:
            return {{"ANSWER", '=', [](Reader& r) { return r.tuple_list(3); }}, {}};
        case TaskKind::VanillaAddition:
            return {{"ANSWER", ':', number_reader(false)}, {}};
        case TaskKind::BinaryAddition:
            return {{"ANSWER", ':', number_reader(true)}, {}};
        case TaskKind::AlgorithmicAddition: {
            auto digits = list_reader(false, any_value);
            return {{"ANSNUM", ':', number_reader(false)},
                    {{"ANSLIST1", ':', digits},
                     {"ANSLIST2", ':', digits},
                     {"ANSREVLIST1", ':', digits},
                     {"ANSREVLIST2", ':', digits},
                     {"ANSPAIRLIST", ':', [](Reader& r) { return r.tuple_list(2); }},
                     {"ANSSUMSLIST", ':', digits},
                     {"ANSDIGITSLIST", ':', digits},
                     {"ANSREVDIGITSLIST", ':', digits}}};
        }
        case TaskKind::Multiplication:
            return {{"ANSWER", '=', bracketed_number_reader()},
                    {{"SUBPRODLIST", '=', list_reader(false, any_value)}}};
        case TaskKind::PolynomialMultiplication:
            return {{"ANS", '=', number_reader(false)}, {}};
        case TaskKind::Reversal:
            break;
    }
    return {};
}

std::string join_ints(const std::vector<std::int64_t>& v, std::string_view sep) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << sep;
        os << v[i];
    }
    return os.str();
}

template <class Int>
std::vector<std::int64_t> widen(const std::vector<Int>& v) {
    return {v.begin(), v.end()};
}

std::string moves_text(const std::vector<HanoiMove>& moves, std::string_view sep) {
    std::ostringstream os;
    for (std::size_t i = 0; i < moves.size(); ++i) {
        if (i) os << ',' << (sep.empty() ? "" : " ");
        os << '(' << moves[i].disk << ',' << sep << moves[i].from << ',' << sep << moves[i].to << ')';
    }
    return os.str();
}

std::string render_answer(TaskKind kind, const Expected& e) {
    std::ostringstream os;
    switch (kind) {
        case TaskKind::Reversal: {
            const auto& v = std::get<ListAnswer>(e).values;
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (i) os << '\n';
                os << "R[" << i << "]=" << v[i] << ';';
            }
            break;
        }
        case TaskKind::NestedLinear:
            os << "CHAIN=[" << join_ints(std::get<ListAnswer>(e).values, ",") << "];";
            break;
        case TaskKind::DynamicProgramming:
            os << "ANSWER=[" << join_ints(std::get<ListAnswer>(e).values, ",") << "];";
            break;
        case TaskKind::TowerOfHanoi:
            os << "ANSWER=[" << moves_text(std::get<MovesAnswer>(e).moves, " ") << "];";
            break;
        case TaskKind::VanillaAddition:
        case TaskKind::BinaryAddition:
            os << "ANSWER: " << std::get<NumberAnswer>(e).value;
            break;
        case TaskKind::AlgorithmicAddition: {
            const auto& t = std::get<AdditionTrace>(e);
            os << "ANSLIST1: [" << join_ints(widen(t.list1), ",") << "]\n";
            os << "ANSLIST2: [" << join_ints(widen(t.list2), ",") << "]\n";
            os << "ANSREVLIST1: [" << join_ints(widen(t.rev_list1), ",") << "]\n";
            os << "ANSREVLIST2: [" << join_ints(widen(t.rev_list2), ",") << "]\n";
            os << "ANSPAIRLIST: [";
            for (std::size_t i = 0; i < t.pairs.size(); ++i) {
                if (i) os << ", ";
                os << '(' << t.pairs[i].first << ',' << t.pairs[i].second << ')';
            }
            os << "]\n";
            os << "ANSSUMSLIST: [" << join_ints(t.sums, ",") << "]\n";
            os << "ANSDIGITSLIST: [" << join_ints(widen(t.digits), ",") << "]\n";
            os << "ANSREVDIGITSLIST: [" << join_ints(widen(t.rev_digits), ",") << "]\n";
            os << "ANSNUM: " << t.number;
            break;
        }
        case TaskKind::Multiplication: {
            const auto& t = std::get<MultiplicationTrace>(e);
            os << "SUBPRODLIST=[";
            for (std::size_t i = 0; i < t.subproducts.size(); ++i) os << (i ? ", " : "") << t.subproducts[i];
            os << "];\nANSWER=[" << t.product << "];";
            break;
        }
        case TaskKind::PolynomialMultiplication: {
            const auto& t = std::get<PolynomialTrace>(e);
            for (std::size_t i = 0; i < t.p.size(); ++i) os << 'P' << i << '=' << t.p[i] << ";\n";
            for (std::size_t i = 0; i < t.q.size(); ++i) os << 'Q' << i << '=' << t.q[i] << ";\n";
            for (std::size_t i = 0; i < t.r.size(); ++i) os << 'R' << i << '=' << t.r[i] << ";\n";
            for (std::size_t i = 0; i < t.s.size(); ++i) os << 'S' << i << '=' << t.s[i] << ";\n";
            os << "ANS=" << t.answer << ';';
            break;
        }
    }
    return os.str();
}

// Replaces each digit with a different digit (or flips each bit) with
// probability `rate`.
void corrupt_digits(std::string& number, int base, double rate, Rng& rng) {
    for (char& ch : number) {
        if (!rng.bernoulli(rate)) continue;
        const int d = ch - '0';
        const int shift = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(base - 1)));
        ch = static_cast<char>('0' + (d + shift) % base);
    }
}

std::int64_t other_value(std::int64_t v, std::int64_t lo, std::int64_t hi, Rng& rng) {
    if (v < lo || v > hi) return v + 1;
    const auto span = static_cast<std::uint64_t>(hi - lo);
    return lo + (v - lo + 1 + static_cast<std::int64_t>(rng.below(span))) % (hi - lo + 1);
}

}  // namespace

ParsedResponse parse(TaskKind kind, std::string_view response) {
    ParsedResponse out;
    out.kind = kind;
    auto fail = [&](std::string reason) {
        out.fields.clear();
        out.parse_ok = false;
        out.failure_reason = std::move(reason);
        return out;
    };
    try {
        if (kind == TaskKind::Reversal) {
            auto r = read_indexed(response, "R", true);
            if (!r.any) return fail("keyword R[i]= not found");
            if (!r.joined) return fail(r.problem);
            out.fields["R"] = *r.joined;
            out.parse_ok = true;
            return out;
        }
        const KindFormat fmt = format_for(kind);
        std::string value;
        switch (find_last(response, fmt.graded.keyword, fmt.graded.sep, fmt.graded.read, value)) {
            case Found::Absent:
                return fail("keyword " + fmt.graded.keyword + " not found");
            case Found::Malformed:
                return fail("keyword " + fmt.graded.keyword + " has no well-formed value");
            case Found::Value:
                out.fields[fmt.graded.keyword] = value;
                break;
        }
        for (const auto& spec : fmt.optional) {
            if (find_last(response, spec.keyword, spec.sep, spec.read, value) == Found::Value) {
                out.fields[spec.keyword] = value;
            }
        }
        if (kind == TaskKind::PolynomialMultiplication) {
            for (std::string_view name : {"P", "Q", "R", "S"}) {
                auto r = read_indexed(response, name, false);
                if (r.joined) out.fields[std::string(name)] = *r.joined;
            }
        }
        out.parse_ok = true;
        return out;
    } catch (const std::exception& e) {
        return fail(std::string("parser error: ") + e.what());
    }
}

std::string_view graded_keyword(TaskKind kind) {
    switch (kind) {
        case TaskKind::Reversal:
            return "R";
        case TaskKind::NestedLinear:
            return "CHAIN";
        case TaskKind::AlgorithmicAddition:
            return "ANSNUM";
        case TaskKind::PolynomialMultiplication:
            return "ANS";
        default:
            return "ANSWER";
    }
}

std::string expected_graded_value(const TaskInstance& inst) {
    return std::visit(
        [](const auto& e) -> std::string {
            using T = std::decay_t<decltype(e)>;
            if constexpr (std::is_same_v<T, ListAnswer>) {
                return join_ints(e.values, ",");
            } else if constexpr (std::is_same_v<T, MovesAnswer>) {
                return moves_text(e.moves, "");
            } else if constexpr (std::is_same_v<T, NumberAnswer>) {
                return e.value;
            } else if constexpr (std::is_same_v<T, AdditionTrace>) {
                return e.number;
            } else if constexpr (std::is_same_v<T, MultiplicationTrace>) {
                return e.product;
            } else {
                return e.answer;
            }
        },
        inst.expected);
}

GradeOutcome grade(const TaskInstance& inst, const ParsedResponse& parsed) {
    if (parsed.kind != inst.kind) throw std::invalid_argument("grade: response parsed for a different task");
    if (!parsed.parse_ok) return GradeOutcome::Ungraded;
    const auto it = parsed.fields.find(std::string(graded_keyword(inst.kind)));
    if (it == parsed.fields.end()) return GradeOutcome::Ungraded;
    return it->second == expected_graded_value(inst) ? GradeOutcome::Correct : GradeOutcome::Incorrect;
}

std::string format_response(const TaskInstance& inst) { return render_answer(inst.kind, inst.expected); }

std::string corrupt_response(const TaskInstance& inst, double noise_rate, std::uint64_t seed) {
    if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) throw std::invalid_argument("corrupt_response: noise_rate must lie in [0, 1]");
    Rng rng(seed);
    Expected e = inst.expected;
    switch (inst.kind) {
        case TaskKind::Reversal:
            for (auto& v : std::get<ListAnswer>(e).values) {
                if (rng.bernoulli(noise_rate)) v = other_value(v, 0, 9, rng);
            }
            break;
        case TaskKind::NestedLinear:
            for (auto& v : std::get<ListAnswer>(e).values) {
                if (rng.bernoulli(noise_rate)) v = other_value(v, -9, 9, rng);
            }
            break;
        case TaskKind::DynamicProgramming:
            for (auto& v : std::get<ListAnswer>(e).values) {
                if (rng.bernoulli(noise_rate)) v = v == 1 ? 2 : 1;
            }
            break;
        case TaskKind::TowerOfHanoi:
            for (auto& m : std::get<MovesAnswer>(e).moves) {
                if (rng.bernoulli(noise_rate)) m.to = 3 - m.from - m.to;  // the remaining tower
            }
            break;
        case TaskKind::VanillaAddition:
            corrupt_digits(std::get<NumberAnswer>(e).value, 10, noise_rate, rng);
            break;
        case TaskKind::BinaryAddition:
            corrupt_digits(std::get<NumberAnswer>(e).value, 2, noise_rate, rng);
            break;
        case TaskKind::AlgorithmicAddition:
            corrupt_digits(std::get<AdditionTrace>(e).number, 10, noise_rate, rng);
            break;
        case TaskKind::Multiplication:
            corrupt_digits(std::get<MultiplicationTrace>(e).product, 10, noise_rate, rng);
            break;
        case TaskKind::PolynomialMultiplication:
            corrupt_digits(std::get<PolynomialTrace>(e).answer, 10, noise_rate, rng);
            break;
    }
    return render_answer(inst.kind, e);
}

}  // namespace errscale
