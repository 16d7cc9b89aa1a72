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
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "doctest.h"
#include "errscale/datastore.hpp"
#include "errscale/rng.hpp"

using namespace errscale;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

TrialRecord record(std::int64_t c, std::uint64_t seed, std::optional<bool> correct, bool parse_ok = true) {
    TrialRecord r;
    r.task = TaskKind::Reversal;
    r.model_id = "mock";
    r.c = c;
    r.seed = seed;
    r.prompt_digest = prompt_digest("prompt " + std::to_string(seed));
    r.response_text = "R[0]=1;";
    r.parse_ok = parse_ok;
    r.correct = correct;
    r.timestamp = 1'760'000'000;
    return r;
}

std::string random_text(Rng& rng) {
    static const std::vector<std::string> pieces = {"a",  "Z",  " ", "\n", "\t", "\"", "\\", ",",  "{}", "é",
                                                    "深", "😀", "∑", "\r", "0",  "[",  "]",  "\x01", "ß"};
    std::string s;
    const auto n = rng.below(30);
    for (std::uint64_t i = 0; i < n; ++i) s += pieces[rng.below(pieces.size())];
    return s;
}

}  // namespace

TEST_CASE("record validation") {
    CHECK_NOTHROW(record(3, 1, true).validate());
    CHECK_NOTHROW(record(3, 1, std::nullopt, false).validate());
    CHECK_THROWS_AS(record(3, 1, false, false).validate(), std::invalid_argument);
    CHECK_THROWS_AS(record(3, 1, std::nullopt, true).validate(), std::invalid_argument);
    auto r = record(3, 1, true);
    r.prompt_digest = "xyz";
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
    r = record(3, 1, true);
    r.typo_variant = true;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
    r.task = TaskKind::VanillaAddition;
    CHECK_NOTHROW(r.validate());
    r = record(0, 1, true);
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}

TEST_CASE("record JSON round trip on randomized records") {
    Rng rng(31);
    for (int i = 0; i < 2000; ++i) {
        TrialRecord r;
        r.task = kAllTaskKinds[rng.below(kAllTaskKinds.size())];
        r.model_id = "model-" + std::to_string(rng.below(5)) + random_text(rng);
        if (r.model_id.empty()) r.model_id = "m";
        r.c = rng.uniform_int(1, 1'000'000);
        r.seed = rng.next();
        r.prompt_digest = prompt_digest(std::to_string(rng.next()));
        r.response_text = random_text(rng);
        r.parse_ok = rng.bernoulli(0.8);
        if (r.parse_ok) r.correct = rng.bernoulli(0.5);
        r.typo_variant = r.task == TaskKind::VanillaAddition && rng.bernoulli(0.5);
        r.timestamp = rng.uniform_int(0, 4'000'000'000);
        const std::string line = record_to_json(r);
        REQUIRE(line.find('\n') == std::string::npos);
        REQUIRE(record_from_json(line) == r);
    }
    const auto failed = record_to_json(record(2, 2, std::nullopt, false));
    CHECK(failed.find("\"correct\"") == std::string::npos);
    CHECK_THROWS_AS(record_from_json("{}"), std::invalid_argument);
    CHECK_THROWS_AS(record_from_json("not json"), std::invalid_argument);
}

TEST_CASE("record store appends, deduplicates and reloads") {
    TempDir dir("errscale_store_test");
    const auto path = dir.path / "sub" / "records.jsonl";
    {
        RecordStore store(path);
        CHECK(store.append(record(4, 1, true)) == 0);
        CHECK(store.append(record(4, 2, false)) == 1);
        CHECK_THROWS_AS(store.append(record(4, 1, false)), DuplicateRecordError);
        CHECK_THROWS_AS(store.append(record(4, 3, false, false)), std::invalid_argument);
        auto typo = record(4, 1, true);
        typo.task = TaskKind::VanillaAddition;
        typo.typo_variant = true;
        CHECK(store.append(typo) == 2);
        typo.typo_variant = false;
        CHECK(store.append(typo) == 3);
        CHECK(store.size() == 4);
        CHECK(store.snapshot().size() == 4);
    }
    RecordStore reopened(path);
    CHECK(reopened.size() == 4);
    CHECK(reopened.contains(dedup_key(record(4, 2, true))));
    CHECK_FALSE(reopened.contains(dedup_key(record(5, 2, true))));
    CHECK_THROWS_AS(reopened.append(record(4, 2, true)), DuplicateRecordError);

    {
        std::ofstream bad(dir.path / "bad.jsonl");
        bad << record_to_json(record(1, 1, true)) << "\n\n{\"task\": 3}\n";
    }
    try {
        read_records(dir.path / "bad.jsonl");
        FAIL("expected an error");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
}

TEST_CASE("normalization rules") {
    const auto odd = NormalizationRule::odd_up();
    CHECK(odd.apply(21) == 22);
    CHECK(odd.apply(22) == 22);
    CHECK(odd.apply(19) == 19);
    CHECK(odd.apply(20) == 20);
    const auto stride = NormalizationRule::stride_down();
    CHECK(stride.apply(4) == 3);
    CHECK(stride.apply(9) == 8);
    CHECK(stride.apply(8) == 8);
    CHECK(stride.apply(10) == 10);
    for (const auto& rule : {NormalizationRule::identity(), odd, stride, NormalizationRule::odd_up(0)}) {
        for (std::int64_t c = 1; c < 500; ++c) REQUIRE(rule.apply(rule.apply(c)) == rule.apply(c));
        CHECK(NormalizationRule::parse(rule.to_string()).to_string() == rule.to_string());
    }
    CHECK(NormalizationRule::parse("odd_up").threshold() == 20);
    CHECK(NormalizationRule::parse("odd_up:7").apply(9) == 10);
    CHECK_THROWS_AS(NormalizationRule::parse("round"), std::invalid_argument);
}

TEST_CASE("aggregate examples") {
    std::vector<TrialRecord> recs;
    std::uint64_t seed = 0;
    for (int i = 0; i < 150; ++i) recs.push_back(record(10, seed++, true));
    for (int i = 0; i < 48; ++i) recs.push_back(record(10, seed++, false));
    for (int i = 0; i < 2; ++i) recs.push_back(record(10, seed++, std::nullopt, false));
    const auto pts = aggregate(recs, TaskKind::Reversal, "mock");
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].c == 10);
    CHECK(pts[0].n_trials == 198);
    CHECK(pts[0].n_correct == 150);
    CHECK(pts[0].ci_halfwidth == credible_halfwidth(150, 198));

    std::vector<TrialRecord> pooled = {record(21, 1, true), record(21, 2, false), record(22, 3, true), record(7, 4, true)};
    const auto odd = aggregate(pooled, TaskKind::Reversal, "mock", NormalizationRule::odd_up());
    REQUIRE(odd.size() == 2);
    CHECK(odd[0].c == 7);
    CHECK(odd[1].c == 22);
    CHECK(odd[1].n_trials == 3);
    CHECK(odd[1].n_correct == 2);
    CHECK(aggregate(pooled, TaskKind::Reversal, "mock").size() == 3);
    CHECK(aggregate(pooled, TaskKind::Reversal, "other").empty());
    CHECK(aggregate(pooled, TaskKind::NestedLinear, "mock").empty());
    CHECK(aggregate(std::vector<TrialRecord>{}, TaskKind::Reversal, "mock").empty());
    // A group of parse failures alone yields no point.
    CHECK(aggregate(std::vector<TrialRecord>{record(3, 1, std::nullopt, false)}, TaskKind::Reversal, "mock").empty());
}

TEST_CASE("aggregate does not depend on record order") {
    Rng rng(4);
    std::vector<TrialRecord> recs;
    for (std::uint64_t s = 0; s < 3000; ++s) {
        const bool ok = rng.bernoulli(0.95);
        recs.push_back(record(rng.uniform_int(1, 40), s, ok ? std::optional<bool>(rng.bernoulli(0.6)) : std::nullopt, ok));
    }
    const auto rule = NormalizationRule::stride_down();
    const auto base = aggregate(recs, TaskKind::Reversal, "mock", rule);
    std::mt19937_64 shuffle_rng(1);
    for (int k = 0; k < 5; ++k) {
        std::shuffle(recs.begin(), recs.end(), shuffle_rng);
        const auto again = aggregate(recs, TaskKind::Reversal, "mock", rule);
        REQUIRE(again.size() == base.size());
        for (std::size_t i = 0; i < base.size(); ++i) {
            CHECK(again[i].c == base[i].c);
            CHECK(again[i].n_trials == base[i].n_trials);
            CHECK(again[i].n_correct == base[i].n_correct);
            CHECK(again[i].ci_halfwidth == base[i].ci_halfwidth);
        }
    }
    for (const auto& p : base) CHECK_NOTHROW(p.validate());
}

TEST_CASE("CSV parsing") {
    std::istringstream in("a,b,c\r\n1,\"x, \"\"y\"\"\",\n\"multi\nline\",2,3\n\n4,5,6");
    const auto rows = parse_csv(in);
    REQUIRE(rows.size() == 4);
    CHECK(rows[1] == std::vector<std::string>{"1", "x, \"y\"", ""});
    CHECK(rows[2][0] == "multi\nline");
    CHECK(rows[3] == std::vector<std::string>{"4", "5", "6"});
    std::istringstream bad("a,\"b");
    CHECK_THROWS_AS(parse_csv(bad), std::invalid_argument);
    CHECK(csv_escape("plain") == "plain");
    CHECK(csv_escape("a,b") == "\"a,b\"");
    CHECK(csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
}

TEST_CASE("aggregate CSV round trip") {
    std::vector<AggregateRow> rows;
    for (std::int64_t c : {4, 8, 16}) {
        rows.push_back({"reversal", "model, with comma", AccuracyPoint::from_counts(c, 200, 200 - 10 * c)});
    }
    std::ostringstream out;
    write_aggregate_csv(out, rows);
    CHECK(out.str().rfind(std::string(kAggregateHeader) + "\n", 0) == 0);
    std::istringstream in(out.str());
    const auto back = read_aggregate_csv(in);
    REQUIRE(back.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(back[i].task == rows[i].task);
        CHECK(back[i].model_id == rows[i].model_id);
        CHECK(back[i].point.c == rows[i].point.c);
        CHECK(back[i].point.n_correct == rows[i].point.n_correct);
        CHECK(back[i].point.mean_accuracy == rows[i].point.mean_accuracy);
        CHECK(back[i].point.ci_halfwidth == rows[i].point.ci_halfwidth);
    }
    std::istringstream wrong("task,model_id,c,n_trials,n_correct,accuracy,ci_halfwidth\nr,m,4,10,5,0.7,0.1\n");
    CHECK_THROWS_AS(read_aggregate_csv(wrong), std::invalid_argument);
    std::istringstream missing("task,model_id,c\nr,m,4\n");
    CHECK_THROWS_AS(read_aggregate_csv(missing), std::invalid_argument);
}

TEST_CASE("mapping-driven ingestion") {
    const auto mapping = DatasetMapping::from_json(R"({
        "layout": "trials",
        "columns": {"task": "Task", "model_id": "Model", "c": "Length", "correct": "Correct",
                    "parse_ok": "Parsed", "typo_variant": "Typo"},
        "task_values": {"Reverse": "reversal", "Add": "vanilla_addition"},
        "filters": {"Keep": "y"}
    })");
    std::istringstream csv(
        "Task,Model,Length,Correct,Parsed,Typo,Keep\n"
        "Reverse,flash,10,1,1,0,y\n"
        "Reverse,flash,10,0,1,0,y\n"
        "Reverse,flash,10,,0,0,y\n"
        "Add,flash,5,1,1,1,y\n"
        "Reverse,flash,10,1,1,0,n\n");
    const auto ds = ingest_csv(csv, mapping);
    CHECK(ds.rows_read == 5);
    CHECK(ds.rows_skipped == 1);
    REQUIRE(ds.records.size() == 4);
    CHECK(ds.records[3].task == TaskKind::VanillaAddition);
    CHECK(ds.records[3].typo_variant);
    CHECK_FALSE(ds.records[2].parse_ok);
    const auto pts = aggregate(ds.records, TaskKind::Reversal, "flash");
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].n_trials == 2);
    CHECK(pts[0].n_correct == 1);

    const auto agg = DatasetMapping::from_json(R"({
        "layout": "aggregated",
        "columns": {"c": "c", "n_trials": "N", "n_correct": "R"},
        "constants": {"task": "reversal", "model_id": "flash"}
    })");
    std::istringstream csv2("c,N,R\n8,200,190\n16,200,150\n");
    const auto ds2 = ingest_csv(csv2, agg);
    REQUIRE(ds2.rows.size() == 2);
    CHECK(ds2.rows[1].point.n_correct == 150);
    CHECK(ds2.rows[1].task == "reversal");

    CHECK_THROWS_AS(DatasetMapping::from_json(R"({"layout": "trials", "columns": {"c": "c"}})"), std::invalid_argument);
    CHECK_THROWS_AS(DatasetMapping::from_json(R"({"layout": "cube"})"), std::invalid_argument);
    std::istringstream csv3("Task,Model\nReverse,flash\n");
    CHECK_THROWS_AS(ingest_csv(csv3, mapping), std::invalid_argument);
}
