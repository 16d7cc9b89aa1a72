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

#include "errscale/datastore.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace errscale {

namespace {

using nlohmann::json;

bool is_hex16(std::string_view s) {
    return s.size() == 16 && std::all_of(s.begin(), s.end(), [](char ch) {
               return (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'f');
           });
}

std::string shortest(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

template <class T>
T parse_number(std::string_view text, std::string_view what) {
    T value{};
    const auto* first = text.data();
    const auto* last = text.data() + text.size();
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc{} || res.ptr != last) {
        throw std::invalid_argument("bad " + std::string(what) + " \"" + std::string(text) + "\"");
    }
    return value;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

}  // namespace

void TrialRecord::validate() const {
    if (model_id.empty()) throw std::invalid_argument("TrialRecord: model_id must not be empty");
    if (c < 1) throw std::invalid_argument("TrialRecord: c must be positive");
    if (!is_hex16(prompt_digest)) throw std::invalid_argument("TrialRecord: prompt_digest must be 16 lowercase hex digits");
    if (!parse_ok && correct.has_value()) throw std::invalid_argument("TrialRecord: correct must be absent when parse failed");
    if (parse_ok && !correct.has_value()) throw std::invalid_argument("TrialRecord: correct is required when parse succeeded");
    if (typo_variant && task != TaskKind::VanillaAddition) {
        throw std::invalid_argument("TrialRecord: typo_variant applies to vanilla_addition only");
    }
}

DedupKey dedup_key(const TrialRecord& r) { return {r.task, r.model_id, r.c, r.seed, r.typo_variant}; }

std::string record_to_json(const TrialRecord& r) {
    json j = {
        {"task", std::string(task_name(r.task))},
        {"model_id", r.model_id},
        {"c", r.c},
        {"seed", r.seed},
        {"prompt_digest", r.prompt_digest},
        {"response_text", r.response_text},
        {"parse_ok", r.parse_ok},
        {"typo_variant", r.typo_variant},
        {"timestamp", r.timestamp},
    };
    if (r.correct) j["correct"] = *r.correct;
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

TrialRecord record_from_json(std::string_view line) {
    TrialRecord r;
    try {
        const json j = json::parse(line);
        r.task = parse_task_kind(j.at("task").get<std::string>());
        r.model_id = j.at("model_id").get<std::string>();
        r.c = j.at("c").get<std::int64_t>();
        r.seed = j.at("seed").get<std::uint64_t>();
        r.prompt_digest = j.at("prompt_digest").get<std::string>();
        r.response_text = j.at("response_text").get<std::string>();
        r.parse_ok = j.at("parse_ok").get<bool>();
        if (j.contains("correct") && !j.at("correct").is_null()) r.correct = j.at("correct").get<bool>();
        r.typo_variant = j.value("typo_variant", false);
        r.timestamp = j.at("timestamp").get<std::int64_t>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed record: ") + e.what());
    }
    r.validate();
    return r;
}

std::vector<TrialRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open record file " + path.string());
    std::vector<TrialRecord> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        try {
            out.push_back(record_from_json(line));
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

RecordStore::RecordStore(std::filesystem::path path) : path_(std::move(path)) {
    if (std::filesystem::exists(path_)) {
        for (const auto& r : read_records(path_)) {
            if (!keys_.insert(dedup_key(r)).second) {
                throw DuplicateRecordError("record file " + path_.string() + " already holds duplicate keys");
            }
        }
    } else if (path_.has_parent_path()) {
        std::filesystem::create_directories(path_.parent_path());
    }
    out_.open(path_, std::ios::binary | std::ios::app);
    if (!out_) throw std::runtime_error("cannot open record file for appending: " + path_.string());
}

std::size_t RecordStore::append(const TrialRecord& record) {
    record.validate();
    const std::string line = record_to_json(record);
    std::lock_guard lock(mu_);
    DedupKey key = dedup_key(record);
    if (keys_.count(key)) {
        throw DuplicateRecordError("duplicate record for " + std::string(task_name(record.task)) + "/" +
                                   record.model_id + " c=" + std::to_string(record.c) +
                                   " seed=" + std::to_string(record.seed));
    }
    out_ << line << '\n';
    out_.flush();
    if (!out_) throw std::runtime_error("write to " + path_.string() + " failed");
    keys_.insert(std::move(key));
    return keys_.size() - 1;
}

bool RecordStore::contains(const DedupKey& key) const {
    std::lock_guard lock(mu_);
    return keys_.count(key) > 0;
}

std::size_t RecordStore::size() const {
    std::lock_guard lock(mu_);
    return keys_.size();
}

std::vector<TrialRecord> RecordStore::snapshot() const {
    std::lock_guard lock(mu_);
    return read_records(path_);
}

NormalizationRule NormalizationRule::parse(std::string_view text) {
    if (text == "identity") return identity();
    if (text == "stride_down") return stride_down();
    if (text == "odd_up") return odd_up();
    if (text.starts_with("odd_up:")) {
        const auto t = parse_number<std::int64_t>(text.substr(7), "odd_up threshold");
        if (t < 0) throw std::invalid_argument("odd_up threshold must be non-negative");
        return odd_up(t);
    }
    throw std::invalid_argument("unknown normalization rule \"" + std::string(text) + "\"");
}

std::int64_t NormalizationRule::apply(std::int64_t c) const {
    switch (kind_) {
        case Kind::Identity:
            return c;
        case Kind::OddUp:
            return (c > threshold_ && c % 2 != 0) ? c + 1 : c;
        case Kind::StrideDown:
            return c % 5 == 4 ? c - 1 : c;
    }
    return c;
}

std::string NormalizationRule::to_string() const {
    switch (kind_) {
        case Kind::Identity:
            return "identity";
        case Kind::OddUp:
            return "odd_up:" + std::to_string(threshold_);
        case Kind::StrideDown:
            return "stride_down";
    }
    return "identity";
}

std::vector<AccuracyPoint> aggregate(std::span<const TrialRecord> records, TaskKind task, std::string_view model_id,
                                     const NormalizationRule& rule) {
    std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> groups;  // c -> (N, R)
    for (const auto& r : records) {
        if (r.task != task || r.model_id != model_id || !r.parse_ok) continue;
        auto& g = groups[rule.apply(r.c)];
        g.first += 1;
        if (r.correct.value_or(false)) g.second += 1;
    }
    std::vector<AccuracyPoint> out;
    out.reserve(groups.size());
    for (const auto& [c, nr] : groups) out.push_back(AccuracyPoint::from_counts(c, nr.first, nr.second));
    return out;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char ch : field) {
        if (ch == '"') out += '"';
        out += ch;
    }
    out += '"';
    return out;
}

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows) {
    out << kAggregateHeader << '\n';
    for (const auto& row : rows) {
        const auto& p = row.point;
        out << csv_escape(row.task) << ',' << csv_escape(row.model_id) << ',' << p.c << ',' << p.n_trials << ','
            << p.n_correct << ',' << shortest(p.mean_accuracy) << ',' << shortest(p.ci_halfwidth) << '\n';
    }
}

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    char ch;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
        row.clear();
    };
    while (in.get(ch)) {
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    field += '"';
                } else {
                    in_quotes = false;
                }
            } else {
                field += ch;
            }
            continue;
        }
        switch (ch) {
            case '"':
                if (field_started) throw std::invalid_argument("csv: quote inside an unquoted field");
                in_quotes = true;
                field_started = true;
                break;
            case ',':
                end_field();
                break;
            case '\r':
                if (in.peek() == '\n') in.get(ch);
                end_row();
                break;
            case '\n':
                end_row();
                break;
            default:
                field += ch;
                field_started = true;
        }
    }
    if (in_quotes) throw std::invalid_argument("csv: unterminated quoted field");
    if (field_started || !row.empty()) end_row();
    return rows;
}

namespace {

struct Header {
    std::map<std::string, std::size_t> index;

    explicit Header(const std::vector<std::string>& names) {
        for (std::size_t i = 0; i < names.size(); ++i) index[trim(names[i])] = i;
    }
    std::optional<std::size_t> find(const std::string& name) const {
        const auto it = index.find(name);
        if (it == index.end()) return std::nullopt;
        return it->second;
    }
    std::size_t require(const std::string& name) const {
        if (auto i = find(name)) return *i;
        throw std::invalid_argument("csv: missing column \"" + name + "\"");
    }
};

const std::string& cell(const std::vector<std::string>& row, std::size_t i, std::size_t line) {
    if (i >= row.size()) throw std::invalid_argument("csv: row " + std::to_string(line) + " is too short");
    return row[i];
}

}  // namespace

std::vector<AggregateRow> read_aggregate_csv(std::istream& in) {
    const auto rows = parse_csv(in);
    if (rows.empty()) throw std::invalid_argument("aggregate csv: empty input");
    const Header h(rows[0]);
    const std::size_t ti = h.require("task"), mi = h.require("model_id"), ci = h.require("c"),
                      ni = h.require("n_trials"), ri = h.require("n_correct"), ai = h.require("accuracy"),
                      hi = h.require("ci_halfwidth");
    std::vector<AggregateRow> out;
    for (std::size_t line = 1; line < rows.size(); ++line) {
        const auto& row = rows[line];
        AggregateRow r;
        r.task = cell(row, ti, line);
        r.model_id = cell(row, mi, line);
        auto& p = r.point;
        p.c = parse_number<std::int64_t>(trim(cell(row, ci, line)), "c");
        p.n_trials = parse_number<std::int64_t>(trim(cell(row, ni, line)), "n_trials");
        p.n_correct = parse_number<std::int64_t>(trim(cell(row, ri, line)), "n_correct");
        const double acc = parse_number<double>(trim(cell(row, ai, line)), "accuracy");
        p.ci_halfwidth = parse_number<double>(trim(cell(row, hi, line)), "ci_halfwidth");
        if (p.n_trials < 1) throw std::invalid_argument("aggregate csv: n_trials must be positive on row " + std::to_string(line));
        p.mean_accuracy = static_cast<double>(p.n_correct) / static_cast<double>(p.n_trials);
        if (std::fabs(acc - p.mean_accuracy) > 1e-9) {
            throw std::invalid_argument("aggregate csv: accuracy disagrees with n_correct / n_trials on row " +
                                        std::to_string(line));
        }
        p.validate();
        out.push_back(std::move(r));
    }
    return out;
}

DatasetMapping DatasetMapping::from_json(std::string_view text) {
    DatasetMapping m;
    try {
        const json j = json::parse(text);
        const std::string layout = j.value("layout", std::string("trials"));
        if (layout == "trials") {
            m.layout = Layout::Trials;
        } else if (layout == "aggregated") {
            m.layout = Layout::Aggregated;
        } else {
            throw std::invalid_argument("mapping: layout must be \"trials\" or \"aggregated\"");
        }
        if (j.contains("columns")) m.columns = j.at("columns").get<std::map<std::string, std::string>>();
        if (j.contains("constants")) m.constants = j.at("constants").get<std::map<std::string, std::string>>();
        if (j.contains("task_values")) m.task_values = j.at("task_values").get<std::map<std::string, std::string>>();
        if (j.contains("true_values")) m.true_values = j.at("true_values").get<std::set<std::string>>();
        if (j.contains("filters")) m.filters = j.at("filters").get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("mapping: ") + e.what());
    }
    std::vector<std::string> needed = {"task", "model_id", "c"};
    if (m.layout == Layout::Trials) {
        needed.push_back("correct");
    } else {
        needed.push_back("n_trials");
        needed.push_back("n_correct");
    }
    for (const auto& f : needed) {
        if (!m.columns.count(f) && !m.constants.count(f)) {
            throw std::invalid_argument("mapping: no column or constant for \"" + f + "\"");
        }
    }
    return m;
}

DatasetMapping DatasetMapping::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open mapping file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

IngestedDataset ingest_csv(std::istream& in, const DatasetMapping& mapping) {
    const auto rows = parse_csv(in);
    if (rows.empty()) throw std::invalid_argument("dataset: empty input");
    const Header h(rows[0]);
    std::map<std::string, std::size_t> col;
    for (const auto& [field, name] : mapping.columns) col[field] = h.require(name);
    std::vector<std::pair<std::size_t, std::string>> filters;
    for (const auto& [name, value] : mapping.filters) filters.emplace_back(h.require(name), value);

    IngestedDataset out;
    for (std::size_t line = 1; line < rows.size(); ++line) {
        const auto& row = rows[line];
        ++out.rows_read;
        bool keep = true;
        for (const auto& [i, value] : filters) keep = keep && trim(cell(row, i, line)) == value;
        if (!keep) {
            ++out.rows_skipped;
            continue;
        }
        auto get = [&](const std::string& field) -> std::optional<std::string> {
            if (auto it = col.find(field); it != col.end()) return trim(cell(row, it->second, line));
            if (auto it = mapping.constants.find(field); it != mapping.constants.end()) return it->second;
            return std::nullopt;
        };
        auto truthy = [&](const std::string& v) { return mapping.true_values.count(v) > 0; };
        const std::string raw_task = *get("task");
        const auto mapped = mapping.task_values.find(raw_task);
        const TaskKind task = parse_task_kind(mapped != mapping.task_values.end() ? mapped->second : raw_task);
        const std::string model_id = *get("model_id");
        const auto c = parse_number<std::int64_t>(*get("c"), "c");
        try {
            if (mapping.layout == DatasetMapping::Layout::Trials) {
                TrialRecord r;
                r.task = task;
                r.model_id = model_id;
                r.c = c;
                const auto seed = get("seed");
                r.seed = seed ? parse_number<std::uint64_t>(*seed, "seed") : static_cast<std::uint64_t>(line);
                r.response_text = get("response_text").value_or("");
                r.prompt_digest = std::string(16, '0');  // prompt not part of the external data
                r.parse_ok = get("parse_ok") ? truthy(*get("parse_ok")) : true;
                if (r.parse_ok) r.correct = truthy(*get("correct"));
                r.typo_variant = get("typo_variant") ? truthy(*get("typo_variant")) : false;
                if (task != TaskKind::VanillaAddition) r.typo_variant = false;
                r.validate();
                out.records.push_back(std::move(r));
            } else {
                const auto n = parse_number<std::int64_t>(*get("n_trials"), "n_trials");
                const auto k = parse_number<std::int64_t>(*get("n_correct"), "n_correct");
                out.rows.push_back({std::string(task_name(task)), model_id, AccuracyPoint::from_counts(c, n, k)});
            }
        } catch (const std::exception& e) {
            throw std::invalid_argument("dataset row " + std::to_string(line) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace errscale
