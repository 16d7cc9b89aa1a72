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

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace errscale {

namespace detail {
struct EmbeddedTemplate {
    const char* name;
    const char* text;
};
const std::vector<EmbeddedTemplate>& embedded_templates();
}  // namespace detail

/// Named prompt templates. Placeholders are written ${NAME}; everything
/// else is emitted byte for byte.
class TemplateSet {
public:
    /// The templates compiled into the library.
    static const TemplateSet& builtin();

    /// Built-in templates, with every <name>.txt in `dir` replacing or
    /// adding the template of that name. Files are read verbatim.
    static TemplateSet with_overrides(const std::filesystem::path& dir);

    bool contains(std::string_view name) const;
    /// Throws std::out_of_range for an unknown name.
    const std::string& get(std::string_view name) const;
    std::vector<std::string> names() const;

private:
    std::map<std::string, std::string, std::less<>> templates_;
};

/// Replaces each ${NAME} with values.at(NAME). Throws std::invalid_argument
/// for a placeholder with no value or an unterminated "${".
std::string substitute(std::string_view tpl, const std::map<std::string, std::string, std::less<>>& values);

}  // namespace errscale
