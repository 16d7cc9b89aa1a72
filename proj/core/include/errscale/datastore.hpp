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

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "errscale/inference.hpp"
#include "errscale/tasks.hpp"

namespace errscale {

struct TrialRecord {
    TaskKind task = TaskKind::Reversal;
    std::string model_id;
    std::int64_t c = 1;
    std::uint64_t seed = 0;
    std::string prompt_digest;  // 16 hex digits
    std::string response_text;
    bool parse_ok = false;
    std::optional<bool> correct;  // absent exactly when parse_ok is false
    bool typo_variant = false;    // VanillaAddition only
    std::int64_t timestamp = 0;   // UTC seconds

    /// Throws std::invalid_argument on a broken invariant.
    void validate() const;
    bool operator==(const TrialRecord&) const = default;
};

struct DedupKey {
    TaskKind task;
    std::string model_id;
    std::int64_t c;
    std::uint64_t seed;
    bool typo_variant;
    auto operator<=>(const DedupKey&) const = default;
};

DedupKey dedup_key(const TrialRecord& r);

/// One JSON object, no trailing newline. Invalid UTF-8 in the response is
/// replaced by U+FFFD.
std::string record_to_json(const TrialRecord& r);
/// Throws std::invalid_argument for malformed or invalid records.
TrialRecord record_from_json(std::string_view line);

/// All records of a line-delimited file, validated. Blank lines are
/// skipped; a bad line is an error naming its line number.
std::vector<TrialRecord> read_records(const std::filesystem::path& path);

class DuplicateRecordError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Append-only record file with deduplication on DedupKey. Existing
/// content is loaded on construction. append() is safe to call from
/// several threads; writes are serialized.
class RecordStore {
public:
    explicit RecordStore(std::filesystem::path path);

    /// Returns the 0-based position of the new record. Throws
    /// std::invalid_argument for an invalid record, DuplicateRecordError
    /// for a repeated key and std::runtime_error on I/O failure.
    std::size_t append(const TrialRecord& record);

    bool contains(const DedupKey& key) const;
    std::size_t size() const;
    const std::filesystem::path& path() const { return path_; }
    /// Records as currently stored on disk.
    std::vector<TrialRecord> snapshot() const;

private:
    std::filesystem::path path_;
    mutable std::mutex mu_;
    std::set<DedupKey> keys_;
    std::ofstream out_;
};

class NormalizationRule {
public:
    enum class Kind { Identity, OddUp, StrideDown };

    static NormalizationRule identity() { return NormalizationRule(Kind::Identity, 0); }
    /// Odd c above the threshold moves up to the next even value.
    static NormalizationRule odd_up(std::int64_t threshold = 20) { return NormalizationRule(Kind::OddUp, threshold); }
    /// c = 5j + 4 moves down to 5j + 3.
    static NormalizationRule stride_down() { return NormalizationRule(Kind::StrideDown, 0); }
    /// "identity", "odd_up", "odd_up:<threshold>" or "stride_down".
    static NormalizationRule parse(std::string_view text);

    std::int64_t apply(std::int64_t c) const;
    Kind kind() const { return kind_; }
    std::int64_t threshold() const { return threshold_; }
    std::string to_string() const;

private:
    NormalizationRule(Kind kind, std::int64_t threshold) : kind_(kind), threshold_(threshold) {}
    Kind kind_;
    std::int64_t threshold_;
};

/// Points for one task and model, grouped by normalized c and sorted by
/// c. Parse failures count toward neither N nor R. Groups left with no
/// graded trial are dropped.
std::vector<AccuracyPoint> aggregate(std::span<const TrialRecord> records, TaskKind task, std::string_view model_id,
                                     const NormalizationRule& rule = NormalizationRule::identity());

struct AggregateRow {
    std::string task;
    std::string model_id;
    AccuracyPoint point;
};

inline constexpr std::string_view kAggregateHeader = "task,model_id,c,n_trials,n_correct,accuracy,ci_halfwidth";

void write_aggregate_csv(std::ostream& out, std::span<const AggregateRow> rows);
/// Reads the aggregate CSV written above. Columns are found by header name;
/// extra columns are ignored. Throws std::invalid_argument on bad content.
std::vector<AggregateRow> read_aggregate_csv(std::istream& in);

/// RFC 4180 reader: quoted fields, doubled quotes, CRLF or LF line ends.
std::vector<std::vector<std::string>> parse_csv(std::istream& in);
std::string csv_escape(std::string_view field);

/// External dataset adapter, driven by a JSON mapping file:
///
///   {
///     "layout": "trials" | "aggregated",
///     "columns": { "task": "...", "model_id": "...", "c": "...",
///                  "correct": "...", "parse_ok": "...", "seed": "...",
///                  "response_text": "...", "typo_variant": "...",
///                  "n_trials": "...", "n_correct": "..." },
///     "constants": { "model_id": "flash", "task": "reversal" },
///     "task_values": { "<dataset value>": "<task name>" },
///     "true_values": ["1", "true", "True", "TRUE", "yes"],
///     "filters": { "<column>": "<required value>" }
///   }
///
/// "trials" needs task, model_id, c and correct (a column or a constant);
/// parse_ok defaults to true and seed to the row number. "aggregated"
/// needs task, model_id, c, n_trials and n_correct.
struct DatasetMapping {
    enum class Layout { Trials, Aggregated };
    Layout layout = Layout::Trials;
    std::map<std::string, std::string> columns;
    std::map<std::string, std::string> constants;
    std::map<std::string, std::string> task_values;
    std::set<std::string> true_values = {"1", "true", "True", "TRUE", "yes", "Yes"};
    std::map<std::string, std::string> filters;

    static DatasetMapping from_json(std::string_view text);
    static DatasetMapping load(const std::filesystem::path& path);
};

struct IngestedDataset {
    std::vector<TrialRecord> records;  // Trials layout
    std::vector<AggregateRow> rows;    // Aggregated layout
    std::size_t rows_read = 0;
    std::size_t rows_skipped = 0;      // by filters
};

IngestedDataset ingest_csv(std::istream& in, const DatasetMapping& mapping);

}  // namespace errscale
