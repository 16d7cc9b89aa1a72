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

#include <string>
#include <string_view>
#include <vector>

namespace errscale {

// Arbitrary-length arithmetic on unsigned digit strings, most significant
// digit first. Results carry no leading zeros ("0" for zero).

bool is_decimal(std::string_view s);
bool is_binary(std::string_view s);

/// Drops leading zeros; an all-zero or empty string becomes "0".
std::string strip_leading_zeros(std::string_view s);

std::string add_decimal(std::string_view a, std::string_view b);
std::string add_binary(std::string_view a, std::string_view b);
std::string multiply_decimal(std::string_view a, std::string_view b);

/// Decimal digits least significant first, e.g. "123" -> {3, 2, 1}.
std::vector<int> digits_lsd_first(std::string_view s);

}  // namespace errscale
