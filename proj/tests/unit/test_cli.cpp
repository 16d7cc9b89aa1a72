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

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "errscale/datastore.hpp"
#include "errscale/error_model.hpp"
#include "errscale/rng.hpp"
#include "json.hpp"

using namespace errscale;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& f) const { return (path / f).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_points(const std::string& path, const std::vector<AccuracyPoint>& pts, const std::string& task = "reversal") {
    std::vector<AggregateRow> rows;
    for (const auto& p : pts) rows.push_back({task, "synthetic", p});
    std::ofstream f(path);
    write_aggregate_csv(f, rows);
}

std::vector<AccuracyPoint> on_curve(const ErrorModelParams& truth, const std::vector<std::int64_t>& cs) {
    const std::int64_t n = 1'000'000'000'000;
    std::vector<AccuracyPoint> pts;
    for (auto c : cs) {
        const auto r = std::llround(accuracy(truth, static_cast<double>(c)) * static_cast<double>(n));
        auto pt = AccuracyPoint::from_counts(c, n, r);
        pt.ci_halfwidth = 0.01;  // a typical measurement scale, not the half-width at this N
        pts.push_back(pt);
    }
    return pts;
}

struct PlotCsv {
    std::vector<std::array<double, 3>> observed;
    std::vector<std::array<double, 2>> fit;
};

PlotCsv read_plot_csv(const std::string& path) {
    std::istringstream in(slurp(path));
    const auto rows = parse_csv(in);
    PlotCsv p;
    REQUIRE(rows.at(0) == std::vector<std::string>{"series", "c", "accuracy", "ci_halfwidth"});
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i][0] == "observed") {
            p.observed.push_back({std::stod(rows[i][1]), std::stod(rows[i][2]), std::stod(rows[i][3])});
        } else {
            REQUIRE(rows[i][0] == "fit");
            p.fit.push_back({std::stod(rows[i][1]), std::stod(rows[i][2])});
        }
    }
    return p;
}

}  // namespace

TEST_CASE("c value lists") {
    CHECK(cli::parse_c_values("4,8,16") == std::vector<std::int64_t>{4, 8, 16});
    CHECK(cli::parse_c_values("1:4") == std::vector<std::int64_t>{1, 2, 3, 4});
    CHECK(cli::parse_c_values("2:11:3") == std::vector<std::int64_t>{2, 5, 8, 11});
    CHECK(cli::parse_c_values("10:320:x2") == std::vector<std::int64_t>{10, 20, 40, 80, 160, 320});
    CHECK(cli::parse_c_values("1,2,5:7") == std::vector<std::int64_t>{1, 2, 5, 6, 7});
    for (const char* bad : {"", ",", "4,,8", "8,4", "4,4", "0,1", "a", "5:1", "1:8:x1", "1:2:3:4"}) {
        CHECK_THROWS_AS(cli::parse_c_values(bad), cli::UsageError);
    }
}

TEST_CASE("usage errors") {
    CHECK(run({}).code == cli::kExitUsage);
    CHECK(run({"frobnicate"}).code == cli::kExitUsage);
    CHECK(run({"gen", "--c", "3"}).code == cli::kExitUsage);
    CHECK(run({"gen", "--task", "nope", "--c", "3"}).code == cli::kExitUsage);
    CHECK(run({"simulate"}).code == cli::kExitUsage);
    CHECK(run({"simulate", "--c-values", ""}).code == cli::kExitUsage);
    CHECK(run({"fit", "--input", "x.csv", "--alpha", "sideways"}).code != cli::kExitOk);
    const auto help = run({"--help"});
    CHECK(help.code == cli::kExitOk);
    CHECK(help.out.find("collect") != std::string::npos);
}

TEST_CASE("gen, solve and eval") {
    TempDir dir("errscale_cli_gen");
    CHECK(run({"gen", "--task", "reversal", "--c", "7", "--seed", "9", "--out", dir / "a.json", "--prompt-out", dir / "a.txt"}).code == 0);
    CHECK(run({"gen", "--task", "reversal", "--c", "7", "--seed", "9", "--out", dir / "b.json", "--prompt-out", dir / "b.txt"}).code == 0);
    CHECK(slurp(dir / "a.json") == slurp(dir / "b.json"));
    CHECK(slurp(dir / "a.txt") == slurp(dir / "b.txt"));
    CHECK_FALSE(slurp(dir / "a.txt").empty());

    const auto hanoi = run({"gen", "--task", "tower_of_hanoi", "--c", "2000"});
    CHECK(hanoi.code == cli::kExitError);
    CHECK(hanoi.err.find("1023") != std::string::npos);

    const auto nlt = run({"gen", "--task", "NLT", "--c", "4", "--seed", "1"});
    CHECK(nlt.code == 0);
    CHECK(nlt.out.find("\nLIST1=") != std::string::npos);
    CHECK(nlt.out.find("\nLIST2=") != std::string::npos);

    const auto solved = run({"solve", "--instance", dir / "a.json"});
    CHECK(solved.code == 0);
    std::ofstream(dir / "resp.txt") << "Sure.\n" << solved.out;
    const auto ev = run({"eval", "--instance", dir / "a.json", "--response", dir / "resp.txt"});
    CHECK(ev.code == 0);
    CHECK(ev.out.find("outcome: correct") != std::string::npos);
    std::ofstream(dir / "bad.txt") << "no idea";
    const auto ev2 = run({"eval", "--instance", dir / "a.json", "--response", dir / "bad.txt"});
    CHECK(ev2.code == 0);
    CHECK(ev2.out.find("outcome: ungraded") != std::string::npos);
    CHECK(run({"solve", "--task", "M", "--c", "3", "--seed", "2"}).out.find("ANSWER=[") != std::string::npos);
    CHECK(run({"eval", "--instance", dir / "missing.json", "--response", dir / "bad.txt"}).code == cli::kExitError);
}

TEST_CASE("simulate") {
    const auto res = run({"simulate", "--r", "0.02", "--q", "2", "--alpha", "0.5", "--c-values", "1:64:x2", "--samples", "200000", "--seed", "4"});
    REQUIRE(res.code == 0);
    std::istringstream in(res.out);
    std::string line;
    std::getline(in, line);
    CHECK(line == "c,gamma_argument,analytic,closed_form,monte_carlo,binomial_se,deviation_se");
    int rows = 0;
    while (std::getline(in, line) && line.rfind("max", 0) != 0) {
        std::istringstream ls(line);
        const auto rows_csv = parse_csv(ls);
        const auto& f = rows_csv.at(0);
        CHECK(std::abs(std::stod(f[2]) - std::stod(f[3])) < 1e-12);
        CHECK(std::stod(f[6]) < 3.0);
        ++rows;
    }
    CHECK(rows == 7);
    CHECK(line.rfind("max deviation: ", 0) == 0);

    const auto scaling = run({"simulate", "scaling", "--seed", "8"});
    REQUIRE(scaling.code == 0);
    const auto value_after = [&](const std::string& key) {
        const auto pos = scaling.out.find(key);
        REQUIRE(pos != std::string::npos);
        return std::stod(scaling.out.substr(pos + key.size()));
    };
    CHECK(std::abs(value_after("alpha uncorrelated: ") - 0.5) < 0.05);
    CHECK(std::abs(value_after("alpha correlated: ") - 1.0) < 0.05);
}

TEST_CASE("fit reports") {
    TempDir dir("errscale_cli_fit");
    const ErrorModelParams truth{2.7e-4, 4.2, 1.0};
    const std::vector<std::int64_t> cs = {8, 16, 32, 64, 128, 256, 512};
    write_points(dir / "curve.csv", on_curve(truth, cs));
    const auto res = run({"fit", "--input", dir / "curve.csv", "--bootstrap", "20", "--out", dir / "fit.json"});
    REQUIRE(res.code == 0);
    const auto report = nlohmann::json::parse(slurp(dir / "fit.json"));
    REQUIRE(report["fits"].size() == 1);
    CHECK(report["fits"][0]["chi_squared"].get<double>() < 1e-10);
    CHECK(std::abs(report["fits"][0]["r"].get<double>() / truth.r - 1) < 1e-4);

    const auto cmp = run({"fit", "--input", dir / "curve.csv", "--compare-alpha", "--bootstrap", "20", "--out", dir / "cmp.json"});
    REQUIRE(cmp.code == 0);
    const auto table = nlohmann::json::parse(slurp(dir / "cmp.json"))["fits"];
    REQUIRE(table.size() == 2);
    CHECK(table[0]["alpha"] == 1.0);
    CHECK(table[1]["alpha"] == 0.5);
    for (const auto& row : table) {
        CHECK(row.contains("r"));
        CHECK(row.contains("q"));
        CHECK(row.contains("chi_squared"));
    }
    CHECK(table[1]["chi_squared"].get<double>() > table[0]["chi_squared"].get<double>());
    CHECK(cmp.out.find("fixed       1 ") != std::string::npos);
    CHECK(cmp.out.find("fixed       0.5 ") != std::string::npos);

    Rng rng(77);
    std::vector<AccuracyPoint> noisy;
    for (auto c : cs) noisy.push_back(AccuracyPoint::from_counts(c, 200, rng.binomial(200, accuracy(truth, static_cast<double>(c)))));
    write_points(dir / "binomial.csv", noisy);
    REQUIRE(run({"fit", "--input", dir / "binomial.csv", "--seed", "3", "--out", dir / "b.json"}).code == 0);
    const auto b = nlohmann::json::parse(slurp(dir / "b.json"))["fits"][0];
    CHECK(std::abs(b["r"].get<double>() - truth.r) <= 3 * b["se_r"].get<double>());
    CHECK(std::abs(b["q"].get<double>() - truth.q) <= 3 * b["se_q"].get<double>());

    write_points(dir / "two.csv", on_curve(truth, {8, 16}));
    CHECK(run({"fit", "--input", dir / "two.csv"}).code == cli::kExitError);

    // Identical inputs and seeds give identical files.
    REQUIRE(run({"fit", "--input", dir / "binomial.csv", "--seed", "3", "--out", dir / "b2.json"}).code == 0);
    CHECK(slurp(dir / "b.json") == slurp(dir / "b2.json"));
}

TEST_CASE("collect, aggregate, fit and plot in sequence") {
    TempDir dir("errscale_cli_pipeline");
    const std::vector<std::string> collect = {"collect",         "--task",     "reversal", "--model-id", "mock",
                                              "--c-values",      "4:64:x2,96,128,192,256", "--samples-per-c", "400",
                                              "--provider",      "mock_noisy", "--noise-rate", "0.01", "--seed", "5",
                                              "--out",           dir / "r.jsonl"};
    const auto first = run(collect);
    REQUIRE(first.code == 0);
    CHECK(first.out.find("4,0,400,400,") != std::string::npos);
    const auto again = run(collect);
    CHECK(again.code == 0);
    CHECK(again.out.find("4,400,0,0,0,0") != std::string::npos);

    REQUIRE(run({"aggregate", "--records", dir / "r.jsonl", "--out", dir / "agg.csv"}).code == 0);
    REQUIRE(run({"aggregate", "--records", dir / "r.jsonl", "--out", dir / "agg2.csv"}).code == 0);
    CHECK(slurp(dir / "agg.csv") == slurp(dir / "agg2.csv"));
    REQUIRE(run({"fit", "--input", dir / "agg.csv", "--alpha", "free", "--bootstrap", "20", "--out", dir / "fit.json"}).code == 0);

    REQUIRE(run({"plot", "--input", dir / "agg.csv", "--fit", dir / "fit.json", "--svg", dir / "p.svg", "--csv", dir / "p.csv", "--log-x"}).code == 0);
    const auto plot = read_plot_csv(dir / "p.csv");
    REQUIRE(plot.observed.size() == 9);
    REQUIRE(plot.fit.size() >= 200);
    CHECK(plot.fit.front()[0] <= plot.observed.front()[0]);
    CHECK(plot.fit.back()[0] >= plot.observed.back()[0]);
    const auto svg = slurp(dir / "p.svg");
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("<polyline") != std::string::npos);
    CHECK(svg.find("</svg>") != std::string::npos);

    REQUIRE(run({"plot", "--input", dir / "agg.csv", "--fit", dir / "fit.json", "--svg", dir / "p2.svg", "--csv", dir / "p2.csv", "--log-x"}).code == 0);
    CHECK(slurp(dir / "p.svg") == slurp(dir / "p2.svg"));
    CHECK(slurp(dir / "p.csv") == slurp(dir / "p2.csv"));

    // Points only without fit parameters.
    REQUIRE(run({"plot", "--input", dir / "agg.csv", "--svg", dir / "bare.svg", "--csv", dir / "bare.csv"}).code == 0);
    CHECK(read_plot_csv(dir / "bare.csv").fit.empty());
    CHECK(slurp(dir / "bare.svg").find("<polyline") == std::string::npos);
    CHECK(run({"plot", "--input", dir / "agg.csv"}).code == cli::kExitUsage);
}

TEST_CASE("fitted curve runs through the error bars of law-generated data") {
    TempDir dir("errscale_cli_coverage");
    const ErrorModelParams truth{2.7e-4, 4.2, 1.0};
    Rng rng(2718);
    std::vector<AccuracyPoint> pts;
    for (int i = 0; i < 20; ++i) {
        const auto c = static_cast<std::int64_t>(std::llround(8 * std::pow(64.0, i / 19.0))) + i;
        pts.push_back(AccuracyPoint::from_counts(c, 200, rng.binomial(200, accuracy(truth, static_cast<double>(c)))));
    }
    write_points(dir / "agg.csv", pts);
    REQUIRE(run({"fit", "--input", dir / "agg.csv", "--bootstrap", "20", "--out", dir / "fit.json"}).code == 0);
    REQUIRE(run({"plot", "--input", dir / "agg.csv", "--fit", dir / "fit.json", "--csv", dir / "p.csv"}).code == 0);
    const auto plot = read_plot_csv(dir / "p.csv");
    const auto fit = nlohmann::json::parse(slurp(dir / "fit.json"))["fits"][0];
    const ErrorModelParams params{fit["r"].get<double>(), fit["q"].get<double>(), fit["alpha"].get<double>()};
    CHECK(plot.fit.front()[1] == doctest::Approx(accuracy(params, plot.fit.front()[0])).epsilon(1e-15));
    int inside = 0;
    for (const auto& o : plot.observed) inside += std::abs(accuracy(params, o[0]) - o[1]) <= o[2];
    CHECK(inside >= 0.9 * static_cast<double>(plot.observed.size()));
}

TEST_CASE("perfect mock data plots flat") {
    TempDir dir("errscale_cli_perfect");
    REQUIRE(run({"collect", "--task", "BA", "--model-id", "ideal", "--c-values", "2,4,8,16", "--samples-per-c", "20",
                 "--provider", "mock_perfect", "--out", dir / "r.jsonl"}).code == 0);
    REQUIRE(run({"aggregate", "--records", dir / "r.jsonl", "--out", dir / "agg.csv"}).code == 0);
    REQUIRE(run({"plot", "--input", dir / "agg.csv", "--csv", dir / "p.csv", "--svg", dir / "p.svg"}).code == 0);
    const auto plot = read_plot_csv(dir / "p.csv");
    REQUIRE(plot.observed.size() == 4);
    for (const auto& o : plot.observed) CHECK(o[1] == 1.0);
}

TEST_CASE("aggregate options") {
    TempDir dir("errscale_cli_aggregate");
    REQUIRE(run({"collect", "--task", "DP", "--model-id", "m", "--c-values", "21,22,30", "--samples-per-c", "10",
                 "--provider", "mock_perfect", "--out", dir / "r.jsonl"}).code == 0);
    REQUIRE(run({"aggregate", "--records", dir / "r.jsonl", "--normalize", "odd_up", "--out", dir / "agg.csv"}).code == 0);
    std::istringstream in(slurp(dir / "agg.csv"));
    const auto rows = read_aggregate_csv(in);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].point.c == 22);
    CHECK(rows[0].point.n_trials == 20);
    CHECK(run({"aggregate", "--records", dir / "r.jsonl", "--normalize", "sideways"}).code == cli::kExitError);
    CHECK(run({"aggregate"}).code == cli::kExitUsage);

    std::ofstream(dir / "data.csv") << "Model,Length,Ok\nflash,10,1\nflash,10,0\nflash,10,1\n";
    std::ofstream(dir / "map.json")
        << R"({"layout": "trials", "columns": {"model_id": "Model", "c": "Length", "correct": "Ok"}, "constants": {"task": "reversal"}})";
    const auto ext = run({"aggregate", "--dataset", dir / "data.csv", "--mapping", dir / "map.json"});
    REQUIRE(ext.code == 0);
    CHECK(ext.out.find("reversal,flash,10,3,2,") != std::string::npos);
}

TEST_CASE("collect reports failures with a distinct exit status") {
    TempDir dir("errscale_cli_collect_fail");
    std::ofstream(dir / "provider.json") << R"({
        "kind": "http_json", "endpoint_url": "http://127.0.0.1:1/v1",
        "request_template": {"prompt": "{{prompt}}"}, "response_text_path": "/text",
        "timeout": 1, "retry": {"max_attempts": 1, "base_backoff": 0, "max_backoff": 0}
    })";
    const auto res = run({"collect", "--task", "reversal", "--model-id", "m", "--c-values", "3", "--samples-per-c", "2",
                          "--provider-config", dir / "provider.json", "--out", dir / "r.jsonl"});
    CHECK(res.code == cli::kExitIncomplete);
    CHECK(res.out.find("3,0,2,0,0,2") != std::string::npos);
    CHECK(res.err.find("re-run") != std::string::npos);
    // A flag overrides the config kind.
    const auto mock = run({"collect", "--task", "reversal", "--model-id", "m", "--c-values", "3", "--samples-per-c", "2",
                           "--provider-config", dir / "provider.json", "--provider", "mock_perfect", "--out", dir / "r.jsonl"});
    CHECK(mock.code == 0);
    CHECK(run({"collect", "--task", "reversal", "--model-id", "m", "--c-values", "3", "--out", dir / "x.jsonl"}).code == cli::kExitUsage);
}
