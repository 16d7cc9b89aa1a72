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

#include "errscale/digits.hpp"

#include <algorithm>
#include <cstdint>
#include <stdexcept>

namespace errscale {

namespace {

void require(bool ok, std::string_view what, std::string_view s) {
    if (!ok) throw std::invalid_argument(std::string(what) + ": not a digit string: \"" + std::string(s) + "\"");
}

std::string add_in_base(std::string_view a, std::string_view b, int base) {
    std::string out;
    out.reserve(std::max(a.size(), b.size()) + 1);
    int carry = 0;
    auto ia = a.rbegin();
    auto ib = b.rbegin();
    while (ia != a.rend() || ib != b.rend() || carry) {
        int sum = carry;
        if (ia != a.rend()) sum += *ia++ - '0';
        if (ib != b.rend()) sum += *ib++ - '0';
        out.push_back(static_cast<char>('0' + sum % base));
        carry = sum / base;
    }
    std::reverse(out.begin(), out.end());
    return strip_leading_zeros(out);
}

}  // namespace

bool is_decimal(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char ch) { return ch >= '0' && ch <= '9'; });
}

bool is_binary(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char ch) { return ch == '0' || ch == '1'; });
}

std::string strip_leading_zeros(std::string_view s) {
    const auto first = s.find_first_not_of('0');
    if (first == std::string_view::npos) return "0";
    return std::string(s.substr(first));
}

std::string add_decimal(std::string_view a, std::string_view b) {
    require(is_decimal(a) && is_decimal(b), "add_decimal", is_decimal(a) ? b : a);
    return add_in_base(a, b, 10);
}

std::string add_binary(std::string_view a, std::string_view b) {
    require(is_binary(a) && is_binary(b), "add_binary", is_binary(a) ? b : a);
    return add_in_base(a, b, 2);
}

std::string multiply_decimal(std::string_view a, std::string_view b) {
    require(is_decimal(a) && is_decimal(b), "multiply_decimal", is_decimal(a) ? b : a);
    const auto da = digits_lsd_first(a);
    const auto db = digits_lsd_first(b);
    std::vector<std::uint64_t> acc(da.size() + db.size(), 0);
    for (std::size_t i = 0; i < da.size(); ++i) {
        if (da[i] == 0) continue;
        for (std::size_t j = 0; j < db.size(); ++j) acc[i + j] += static_cast<std::uint64_t>(da[i] * db[j]);
        // Keep the accumulators small enough for very long operands.
        if (i % 1024 == 1023) {
            std::uint64_t carry = 0;
            for (auto& v : acc) {
                v += carry;
                carry = v / 10;
                v %= 10;
            }
        }
    }
    std::string out;
    std::uint64_t carry = 0;
    for (auto v : acc) {
        v += carry;
        out.push_back(static_cast<char>('0' + v % 10));
        carry = v / 10;
    }
    while (carry) {
        out.push_back(static_cast<char>('0' + carry % 10));
        carry /= 10;
    }
    std::reverse(out.begin(), out.end());
    return strip_leading_zeros(out);
}

std::vector<int> digits_lsd_first(std::string_view s) {
    require(is_decimal(s), "digits_lsd_first", s);
    std::vector<int> out;
    out.reserve(s.size());
    for (auto it = s.rbegin(); it != s.rend(); ++it) out.push_back(*it - '0');
    return out;
}

}  // namespace errscale
