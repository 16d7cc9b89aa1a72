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

#include "errscale/prompt_templates.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace errscale {

const TemplateSet& TemplateSet::builtin() {
    static const TemplateSet set = [] {
        TemplateSet s;
        for (const auto& t : detail::embedded_templates()) s.templates_.emplace(t.name, t.text);
        return s;
    }();
    return set;
}

TemplateSet TemplateSet::with_overrides(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw std::invalid_argument("template override directory not found: " + dir.string());
    }
    TemplateSet s = builtin();
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        if (!in) throw std::runtime_error("cannot read template " + entry.path().string());
        std::ostringstream buf;
        buf << in.rdbuf();
        s.templates_[entry.path().stem().string()] = buf.str();
    }
    return s;
}

bool TemplateSet::contains(std::string_view name) const { return templates_.find(name) != templates_.end(); }

const std::string& TemplateSet::get(std::string_view name) const {
    const auto it = templates_.find(name);
    if (it == templates_.end()) throw std::out_of_range("no prompt template named " + std::string(name));
    return it->second;
}

std::vector<std::string> TemplateSet::names() const {
    std::vector<std::string> out;
    for (const auto& [name, text] : templates_) out.push_back(name);
    return out;
}

std::string substitute(std::string_view tpl, const std::map<std::string, std::string, std::less<>>& values) {
    std::string out;
    out.reserve(tpl.size() + 64);
    std::size_t pos = 0;
    while (pos < tpl.size()) {
        const auto open = tpl.find("${", pos);
        if (open == std::string_view::npos) {
            out.append(tpl.substr(pos));
            break;
        }
        out.append(tpl.substr(pos, open - pos));
        const auto close = tpl.find('}', open + 2);
        if (close == std::string_view::npos) throw std::invalid_argument("unterminated placeholder in template");
        const auto name = tpl.substr(open + 2, close - open - 2);
        const auto it = values.find(name);
        if (it == values.end()) throw std::invalid_argument("no value for placeholder ${" + std::string(name) + "}");
        out.append(it->second);
        pos = close + 1;
    }
    return out;
}

}  // namespace errscale
