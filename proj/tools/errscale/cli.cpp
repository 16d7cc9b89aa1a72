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

#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "errscale/collector.hpp"
#include "errscale/datastore.hpp"
#include "errscale/error_model.hpp"
#include "errscale/inference.hpp"
#include "errscale/tasks.hpp"
#include "json.hpp"
#include "plot.hpp"

namespace errscale::cli {

namespace {

using nlohmann::json;

std::string fmt(const char* spec, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

std::int64_t parse_int(std::string_view s) {
    std::int64_t v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw UsageError("not an integer: \"" + std::string(s) + "\"");
    return v;
}

std::string read_file(const std::string& path) {
    if (path == "-") {
        std::ostringstream ss;
        ss << std::cin.rdbuf();
        return ss.str();
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content, std::ostream& out) {
    if (path.empty() || path == "-") {
        out << content;
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot write " + path);
    f << content;
    if (!f.flush()) throw std::runtime_error("write failed: " + path);
}

TemplateSet load_templates(const std::string& dir) {
    return dir.empty() ? TemplateSet::builtin() : TemplateSet::with_overrides(dir);
}

TaskKind task_arg(const std::string& text) {
    auto k = try_parse_task_kind(text);
    if (!k) throw UsageError("unknown task \"" + text + "\"");
    return *k;
}

AlphaMode alpha_arg(const std::string& text) {
    if (text == "free") return AlphaMode::free();
    if (text == "1/2") return AlphaMode::fixed(0.5);
    double v = 0;
    const auto [p, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || p != text.data() + text.size() || !(v > 0)) {
        throw UsageError("--alpha must be a positive number, 1/2 or free");
    }
    return AlphaMode::fixed(v);
}

struct Group {
    std::string task;
    std::string model_id;
    std::vector<AccuracyPoint> points;
};

/// Rows of one (task, model) pair. Without filters the file must hold a
/// single pair.
Group select_group(const std::vector<AggregateRow>& rows, const std::string& task, const std::string& model) {
    std::set<std::pair<std::string, std::string>> pairs;
    for (const auto& r : rows) {
        const bool task_ok = task.empty() || r.task == task ||
                             (try_parse_task_kind(r.task) && try_parse_task_kind(task) &&
                              *try_parse_task_kind(r.task) == *try_parse_task_kind(task));
        if (task_ok && (model.empty() || r.model_id == model)) pairs.emplace(r.task, r.model_id);
    }
    if (pairs.empty()) throw std::invalid_argument("no rows match the requested task and model");
    if (pairs.size() > 1) throw UsageError("input holds several task/model groups; pass --task and --model-id");
    Group g{pairs.begin()->first, pairs.begin()->second, {}};
    for (const auto& r : rows) {
        if (r.task == g.task && r.model_id == g.model_id) g.points.push_back(r.point);
    }
    std::sort(g.points.begin(), g.points.end(), [](const auto& a, const auto& b) { return a.c < b.c; });
    return g;
}

std::vector<AggregateRow> load_aggregate(const std::string& path) {
    std::istringstream in(read_file(path));
    return read_aggregate_csv(in);
}

json fit_to_json(const FitResult& f, const AlphaMode& mode) {
    json j = {
        {"alpha_mode", mode.is_free() ? "free" : "fixed"},
        {"alpha", f.params.alpha},
        {"r", f.params.r},
        {"se_r", f.se_r},
        {"q", f.params.q},
        {"se_q", f.se_q},
        {"chi_squared", f.chi_squared},
        {"n_points", f.n_points},
        {"converged", f.converged},
        {"degenerate", f.degenerate},
        {"bootstrap_replicates", f.bootstrap_replicates},
    };
    j["se_alpha"] = f.se_alpha ? json(*f.se_alpha) : json(nullptr);
    return j;
}

// ---------------------------------------------------------------------------

struct GenArgs {
    std::string task;
    std::int64_t c = 0;
    std::uint64_t seed = 0;
    bool typo = false;
    std::string templates, out, prompt_out;
};

int cmd_gen(const GenArgs& a, std::ostream& out) {
    const auto inst = generate(task_arg(a.task), a.c, a.seed, a.typo);
    const auto templates = load_templates(a.templates);
    const auto prompt = render_prompt(inst, templates);
    if (!a.out.empty()) write_file(a.out, instance_to_json(inst) + "\n", out);
    // With the instance on stdout the prompt only goes to --prompt-out.
    if (!a.prompt_out.empty() || a.out != "-") write_file(a.prompt_out, prompt, out);
    return kExitOk;
}

struct SolveArgs {
    std::string instance, task;
    std::int64_t c = 0;
    std::uint64_t seed = 0;
    bool json_out = false;
};

TaskInstance instance_from_args(const std::string& file, const std::string& task, std::int64_t c, std::uint64_t seed) {
    if (!file.empty()) return instance_from_json(read_file(file));
    if (task.empty() || c <= 0) throw UsageError("pass --instance, or --task and --c");
    return generate(task_arg(task), c, seed);
}

int cmd_solve(const SolveArgs& a, std::ostream& out) {
    const auto inst = instance_from_args(a.instance, a.task, a.c, a.seed);
    if (a.json_out) {
        out << instance_to_json(inst) << "\n";
    } else {
        out << format_response(inst) << "\n";
    }
    return kExitOk;
}

struct EvalArgs {
    std::string instance, response;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    const auto inst = instance_from_json(read_file(a.instance));
    const auto parsed = parse(inst.kind, read_file(a.response));
    const auto outcome = grade(inst, parsed);
    out << "task: " << task_name(inst.kind) << "\n";
    out << "c: " << inst.c << "\n";
    out << "parse_ok: " << (parsed.parse_ok ? "true" : "false") << "\n";
    if (!parsed.parse_ok) out << "reason: " << parsed.failure_reason << "\n";
    for (const auto& [k, v] : parsed.fields) out << "field " << k << ": " << v << "\n";
    out << "expected " << graded_keyword(inst.kind) << ": " << expected_graded_value(inst) << "\n";
    out << "outcome: "
        << (outcome == GradeOutcome::Correct ? "correct" : outcome == GradeOutcome::Incorrect ? "incorrect" : "ungraded")
        << "\n";
    return kExitOk;
}

struct CollectArgs {
    std::string task, model_id, c_values, provider_config, provider, endpoint_url, auth_env_var, templates, out;
    std::int64_t samples_per_c = 200;
    std::uint64_t seed = 0;
    std::optional<double> noise_rate, timeout;
    std::optional<int> max_in_flight;
    bool typo = false;
};

int cmd_collect(const CollectArgs& a, std::ostream& out, std::ostream& err) {
    if (a.provider_config.empty() && a.provider.empty()) throw UsageError("pass --provider-config or --provider");
    ProviderConfig cfg = a.provider_config.empty() ? ProviderConfig{} : ProviderConfig::load(a.provider_config);
    if (!a.provider.empty()) cfg.kind = parse_provider_kind(a.provider);
    if (!a.endpoint_url.empty()) cfg.endpoint_url = a.endpoint_url;
    if (!a.auth_env_var.empty()) cfg.auth_env_var = a.auth_env_var;
    if (a.noise_rate) cfg.noise_rate = *a.noise_rate;
    if (a.timeout) cfg.timeout = *a.timeout;
    if (a.max_in_flight) cfg.max_in_flight = *a.max_in_flight;
    cfg.validate();

    SamplingPlan plan;
    plan.task = task_arg(a.task);
    plan.model_id = a.model_id;
    plan.c_values = parse_c_values(a.c_values);
    plan.samples_per_c = a.samples_per_c;
    plan.base_seed = a.seed;
    plan.typo_variant = a.typo;
    plan.validate();

    const auto provider = make_provider(cfg);
    const auto templates = load_templates(a.templates);
    RecordStore store(a.out);
    RunOptions opts;
    opts.max_in_flight = cfg.max_in_flight;
    opts.templates = &templates;
    const auto summary = run_plan(plan, *provider, store, opts);

    out << "c,skipped,sent,parsed,correct,failed\n";
    for (const auto& s : summary.per_c) {
        out << s.c << ',' << s.skipped << ',' << s.sent << ',' << s.parsed << ',' << s.correct << ',' << s.failed << "\n";
    }
    for (const auto& e : summary.errors) err << "failed: " << e << "\n";
    if (!summary.complete()) {
        err << summary.total_failed() << " of " << summary.total_sent()
            << " samples failed and were not stored; re-run the same command to retry them\n";
        return kExitIncomplete;
    }
    return kExitOk;
}

struct AggregateArgs {
    std::vector<std::string> records;
    std::string dataset, mapping, task, model_id, normalize = "identity", out;
};

std::vector<AggregateRow> pool_rows(const std::vector<AggregateRow>& rows, const NormalizationRule& rule) {
    std::map<std::tuple<std::string, std::string, std::int64_t>, std::pair<std::int64_t, std::int64_t>> pooled;
    for (const auto& r : rows) {
        auto& acc = pooled[{r.task, r.model_id, rule.apply(r.point.c)}];
        acc.first += r.point.n_trials;
        acc.second += r.point.n_correct;
    }
    std::vector<AggregateRow> outv;
    for (const auto& [key, counts] : pooled) {
        outv.push_back({std::get<0>(key), std::get<1>(key), AccuracyPoint::from_counts(std::get<2>(key), counts.first, counts.second)});
    }
    return outv;
}

int cmd_aggregate(const AggregateArgs& a, std::ostream& out) {
    if (a.records.empty() && a.dataset.empty()) throw UsageError("pass --records or --dataset");
    if (!a.dataset.empty() && a.mapping.empty()) throw UsageError("--dataset needs --mapping");
    const auto rule = NormalizationRule::parse(a.normalize);
    std::optional<TaskKind> task;
    if (!a.task.empty()) task = task_arg(a.task);

    std::vector<TrialRecord> records;
    std::vector<AggregateRow> ready;
    for (const auto& path : a.records) {
        auto more = read_records(path);
        records.insert(records.end(), more.begin(), more.end());
    }
    if (!a.dataset.empty()) {
        std::istringstream in(read_file(a.dataset));
        auto ds = ingest_csv(in, DatasetMapping::load(a.mapping));
        records.insert(records.end(), ds.records.begin(), ds.records.end());
        for (auto& r : ds.rows) {
            const auto kind = try_parse_task_kind(r.task);
            if (task && (!kind || *kind != *task)) continue;
            if (!a.model_id.empty() && r.model_id != a.model_id) continue;
            ready.push_back(std::move(r));
        }
    }

    std::set<std::pair<TaskKind, std::string>> groups;
    for (const auto& r : records) {
        if ((!task || r.task == *task) && (a.model_id.empty() || r.model_id == a.model_id)) groups.emplace(r.task, r.model_id);
    }
    std::vector<AggregateRow> rows = pool_rows(ready, rule);
    for (const auto& [kind, model] : groups) {
        for (const auto& p : aggregate(records, kind, model, rule)) rows.push_back({std::string(task_name(kind)), model, p});
    }
    std::sort(rows.begin(), rows.end(), [](const auto& x, const auto& y) {
        return std::tie(x.task, x.model_id, x.point.c) < std::tie(y.task, y.model_id, y.point.c);
    });
    std::ostringstream csv;
    write_aggregate_csv(csv, rows);
    write_file(a.out, csv.str(), out);
    return kExitOk;
}

struct FitArgs {
    std::string input, task, model_id, alpha = "1", out;
    bool compare = false;
    int bootstrap = 200;
    std::uint64_t seed = 0;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
    const auto g = select_group(load_aggregate(a.input), a.task, a.model_id);
    std::vector<AlphaMode> modes;
    if (a.compare) {
        modes = {AlphaMode::fixed(1.0), AlphaMode::fixed(0.5)};
    } else {
        modes = {alpha_arg(a.alpha)};
    }
    FitOptions opts;
    opts.seed = a.seed;
    opts.bootstrap_replicates = a.bootstrap;

    json report = {{"task", g.task}, {"model_id", g.model_id}, {"n_points", g.points.size()}, {"fits", json::array()}};
    out << "task: " << g.task << "  model: " << g.model_id << "  points: " << g.points.size() << "\n";
    out << "alpha_mode  alpha     r             se_r          q           se_q        chi2          converged\n";
    for (const auto& mode : modes) {
        const auto f = fit(g.points, mode, opts);
        report["fits"].push_back(fit_to_json(f, mode));
        out << (mode.is_free() ? "free        " : "fixed       ") << fmt("%-8.4g", f.params.alpha) << "  "
            << fmt("%-12.5e", f.params.r) << "  " << fmt("%-12.3e", f.se_r) << "  " << fmt("%-10.5g", f.params.q) << "  "
            << fmt("%-10.4g", f.se_q) << "  " << fmt("%-12.5g", f.chi_squared) << "  "
            << (f.converged ? "yes" : "no") << (f.degenerate ? " (degenerate input)" : "") << "\n";
    }
    if (!a.out.empty()) write_file(a.out, report.dump(2) + "\n", out);
    return kExitOk;
}

struct PlotArgs {
    std::string input, task, model_id, fit_report, svg, csv, title;
    std::optional<double> r, q, alpha;
    bool log_x = false;
};

int cmd_plot(const PlotArgs& a, std::ostream& out) {
    if (a.svg.empty() && a.csv.empty()) throw UsageError("pass --svg and/or --csv");
    const auto g = select_group(load_aggregate(a.input), a.task, a.model_id);
    std::optional<ErrorModelParams> params;
    if (!a.fit_report.empty()) {
        const auto report = json::parse(read_file(a.fit_report));
        if (!report.contains("fits") || report["fits"].empty()) throw std::invalid_argument("fit report has no fits");
        const auto& f = report["fits"][0];
        params = ErrorModelParams{f.at("r").get<double>(), f.at("q").get<double>(), f.at("alpha").get<double>()};
    }
    if (a.r || a.q || a.alpha) {
        if (!a.r || !a.q) throw UsageError("--r and --q go together");
        params = ErrorModelParams{*a.r, *a.q, a.alpha.value_or(1.0)};
    }
    std::string subtitle;
    if (params) {
        subtitle = "fit: r=" + fmt("%.4g", params->r) + ", q=" + fmt("%.4g", params->q) + ", alpha=" + fmt("%.4g", params->alpha);
    }
    const auto series = build_plot_series(g.points, params, a.title.empty() ? g.task + " / " + g.model_id : a.title, subtitle);
    if (!a.csv.empty()) {
        std::ostringstream ss;
        write_plot_csv(ss, series);
        write_file(a.csv, ss.str(), out);
    }
    if (!a.svg.empty()) {
        std::ostringstream ss;
        write_plot_svg(ss, series, a.log_x);
        write_file(a.svg, ss.str(), out);
    }
    return kExitOk;
}

struct SimulateArgs {
    double r = 1e-3, q = 2, alpha = 1;
    std::string c_values;
    std::int64_t samples = 1'000'000;
    std::uint64_t seed = 0;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    if (a.c_values.empty()) throw UsageError("--c-values is required");
    const auto cs = parse_c_values(a.c_values);
    const ErrorModelParams params{a.r, a.q, a.alpha};
    params.validate();
    const auto mc = MonteCarloConfig::from_params(params, a.samples, a.seed);
    const bool closed = a.q == 2.0;
    out << "c,gamma_argument,analytic," << (closed ? "closed_form," : "") << "monte_carlo,binomial_se,deviation_se\n";
    double worst = 0.0;
    for (auto c : cs) {
        const double cd = static_cast<double>(c);
        const double an = accuracy(params, cd);
        const double sim = mc_accuracy(mc, cd);
        const double se = std::sqrt(an * (1 - an) / static_cast<double>(a.samples));
        const double dev = se > 0 ? std::abs(sim - an) / se : (sim == an ? 0.0 : INFINITY);
        worst = std::max(worst, dev);
        out << c << ',' << fmt("%.10g", gamma_argument(params, cd)) << ',' << fmt("%.12g", an) << ',';
        if (closed) out << fmt("%.12g", 1 - std::exp(-1 / (a.r * std::pow(cd, 2 * a.alpha)))) << ',';
        out << fmt("%.12g", sim) << ',' << fmt("%.4g", se) << ',' << fmt("%.3f", dev) << "\n";
    }
    out << "max deviation: " << fmt("%.3f", worst) << " SE\n";
    return kExitOk;
}

struct ScalingArgs {
    int classes = 1;
    std::string lengths = "16,32,64,128,256";
    std::int64_t trials = 10'000;
    double noise = 1.0;
    std::uint64_t seed = 0;
};

int cmd_scaling(const ScalingArgs& a, std::ostream& out) {
    ScalingDemoConfig cfg;
    cfg.token_classes = a.classes;
    cfg.context_lengths = parse_c_values(a.lengths);
    cfg.trials_per_length = a.trials;
    cfg.per_term_noise = a.noise;
    cfg.seed = a.seed;
    const auto res = scaling_demo(cfg);
    out << "c,variance_uncorrelated,variance_correlated\n";
    for (std::size_t i = 0; i < res.context_lengths.size(); ++i) {
        out << res.context_lengths[i] << ',' << fmt("%.6g", res.variance_uncorrelated[i]) << ','
            << fmt("%.6g", res.variance_correlated[i]) << "\n";
    }
    out << "alpha uncorrelated: " << fmt("%.4f", res.alpha_uncorrelated) << "\n";
    out << "alpha correlated: " << fmt("%.4f", res.alpha_correlated) << "\n";
    return kExitOk;
}

}  // namespace

std::vector<std::int64_t> parse_c_values(std::string_view text) {
    std::vector<std::int64_t> cs;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = std::min(text.find(',', start), text.size());
        const auto piece = text.substr(start, end - start);
        start = end + 1;
        if (piece.empty()) throw UsageError("empty entry in c list");
        std::vector<std::string_view> parts;
        for (std::size_t p = 0; p <= piece.size();) {
            const auto q = std::min(piece.find(':', p), piece.size());
            parts.push_back(piece.substr(p, q - p));
            p = q + 1;
        }
        if (parts.size() == 1) {
            cs.push_back(parse_int(parts[0]));
        } else if (parts.size() <= 3) {
            const auto lo = parse_int(parts[0]);
            const auto hi = parse_int(parts[1]);
            if (lo < 1 || hi < lo) throw UsageError("bad range \"" + std::string(piece) + "\"");
            if (parts.size() == 3 && parts[2].starts_with("x")) {
                const auto factor = parse_int(parts[2].substr(1));
                if (factor < 2) throw UsageError("geometric factor must be at least 2");
                for (auto v = lo; v <= hi; v *= factor) cs.push_back(v);
            } else {
                const auto step = parts.size() == 3 ? parse_int(parts[2]) : 1;
                if (step < 1) throw UsageError("range step must be positive");
                for (auto v = lo; v <= hi; v += step) cs.push_back(v);
            }
        } else {
            throw UsageError("bad c entry \"" + std::string(piece) + "\"");
        }
        if (end == text.size()) break;
    }
    if (cs.empty()) throw UsageError("empty c list");
    for (std::size_t i = 1; i < cs.size(); ++i) {
        if (cs[i] <= cs[i - 1]) throw UsageError("c values must be strictly increasing");
    }
    if (cs.front() < 1) throw UsageError("c values must be positive");
    return cs;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Error-rate scaling toolkit: tasks, collection, aggregation, fitting and simulation", "errscale"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "errscale 0.1.0");

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate a task instance and render its prompt");
    g->add_option("--task", gen.task, "Task name or key (e.g. reversal, NLT)")->required();
    g->add_option("--c", gen.c, "Complexity parameter")->required();
    g->add_option("--seed", gen.seed, "Instance seed");
    g->add_flag("--typo", gen.typo, "Typo variant (vanilla_addition only)");
    g->add_option("--templates", gen.templates, "Directory of template overrides");
    g->add_option("--out", gen.out, "Instance JSON output file");
    g->add_option("--prompt-out", gen.prompt_out, "Prompt text output file (default stdout)");

    SolveArgs solve;
    auto* s = app.add_subcommand("solve", "Print the expected response for an instance");
    s->add_option("--instance", solve.instance, "Instance JSON file");
    s->add_option("--task", solve.task, "Task, when generating instead of loading");
    s->add_option("--c", solve.c, "Complexity parameter");
    s->add_option("--seed", solve.seed, "Instance seed");
    s->add_flag("--json", solve.json_out, "Print the instance with its expected output as JSON");

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Parse and grade a response against an instance");
    e->add_option("--instance", ev.instance, "Instance JSON file")->required();
    e->add_option("--response", ev.response, "Response text file, - for stdin")->required();

    CollectArgs col;
    auto* c = app.add_subcommand("collect", "Run a sampling plan against a provider");
    c->add_option("--task", col.task, "Task name or key")->required();
    c->add_option("--model-id", col.model_id, "Model identifier stored with each record")->required();
    c->add_option("--c-values", col.c_values, "c list, e.g. 4,8,16 or 10:320:x2")->required();
    c->add_option("--samples-per-c", col.samples_per_c, "Samples per c value");
    c->add_option("--seed", col.seed, "Base seed of the plan");
    c->add_option("--provider-config", col.provider_config, "Provider config JSON file");
    c->add_option("--provider", col.provider, "Provider kind: http_json, mock_perfect or mock_noisy");
    c->add_option("--endpoint-url", col.endpoint_url, "Override endpoint_url");
    c->add_option("--auth-env-var", col.auth_env_var, "Override auth_env_var");
    c->add_option("--noise-rate", col.noise_rate, "Override noise_rate (mock_noisy)");
    c->add_option("--timeout", col.timeout, "Override timeout in seconds");
    c->add_option("--max-in-flight", col.max_in_flight, "Override max_in_flight");
    c->add_flag("--typo", col.typo, "Typo variant (vanilla_addition only)");
    c->add_option("--templates", col.templates, "Directory of template overrides");
    c->add_option("--out", col.out, "Record file (appended, deduplicated)")->required();

    AggregateArgs agg;
    auto* a = app.add_subcommand("aggregate", "Aggregate trial records into an accuracy CSV");
    a->add_option("--records", agg.records, "Record files");
    a->add_option("--dataset", agg.dataset, "External dataset CSV");
    a->add_option("--mapping", agg.mapping, "Mapping JSON for --dataset");
    a->add_option("--task", agg.task, "Only this task");
    a->add_option("--model-id", agg.model_id, "Only this model");
    a->add_option("--normalize", agg.normalize, "identity, odd_up[:threshold] or stride_down");
    a->add_option("--out", agg.out, "Output CSV (default stdout)");

    FitArgs fa;
    auto* f = app.add_subcommand("fit", "Fit the accuracy law to an aggregate CSV");
    f->add_option("--input", fa.input, "Aggregate CSV")->required();
    f->add_option("--task", fa.task, "Task to fit when the CSV holds several");
    f->add_option("--model-id", fa.model_id, "Model to fit when the CSV holds several");
    f->add_option("--alpha", fa.alpha, "Variance exponent: a number, 1/2 or free");
    f->add_flag("--compare-alpha", fa.compare, "Fit alpha=1 and alpha=1/2 and print both");
    f->add_option("--bootstrap", fa.bootstrap, "Bootstrap replicates for uncertainties");
    f->add_option("--seed", fa.seed, "Bootstrap seed");
    f->add_option("--out", fa.out, "JSON report file");

    PlotArgs pa;
    auto* p = app.add_subcommand("plot", "Write an SVG plot and its data CSV");
    p->add_option("--input", pa.input, "Aggregate CSV")->required();
    p->add_option("--task", pa.task, "Task to plot when the CSV holds several");
    p->add_option("--model-id", pa.model_id, "Model to plot when the CSV holds several");
    p->add_option("--fit", pa.fit_report, "JSON report from fit; the first fit is drawn");
    p->add_option("--r", pa.r, "Curve parameter r");
    p->add_option("--q", pa.q, "Curve parameter q");
    p->add_option("--alpha", pa.alpha, "Curve parameter alpha (default 1)");
    p->add_option("--svg", pa.svg, "SVG output file");
    p->add_option("--csv", pa.csv, "CSV output file");
    p->add_option("--title", pa.title, "Plot title");
    p->add_flag("--log-x", pa.log_x, "Logarithmic c axis");

    SimulateArgs sim;
    auto* m = app.add_subcommand("simulate", "Compare the accuracy law with Monte Carlo sampling");
    m->add_option("--r", sim.r, "Noise rate r");
    m->add_option("--q", sim.q, "Error directions q (integer for Monte Carlo)");
    m->add_option("--alpha", sim.alpha, "Variance exponent");
    m->add_option("--c-values", sim.c_values, "c list, e.g. 1,2,4 or 1:64:x2");
    m->add_option("--samples", sim.samples, "Monte Carlo samples per c");
    m->add_option("--seed", sim.seed, "Monte Carlo seed");
    ScalingArgs sc;
    auto* ms = m->add_subcommand("scaling", "Estimate alpha from correlated and uncorrelated noise sums");
    ms->add_option("--classes", sc.classes, "Token classes in the correlated regime");
    ms->add_option("--lengths", sc.lengths, "Context lengths");
    ms->add_option("--trials", sc.trials, "Trials per length");
    ms->add_option("--noise", sc.noise, "Per-term noise standard deviation");
    ms->add_option("--seed", sc.seed, "Seed");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& ex) {
        return app.exit(ex, out, err);
    } catch (const CLI::CallForAllHelp& ex) {
        return app.exit(ex, out, err);
    } catch (const CLI::CallForVersion& ex) {
        return app.exit(ex, out, err);
    } catch (const CLI::ParseError& ex) {
        app.exit(ex, out, err);
        return kExitUsage;
    }

    try {
        if (g->parsed()) return cmd_gen(gen, out);
        if (s->parsed()) return cmd_solve(solve, out);
        if (e->parsed()) return cmd_eval(ev, out);
        if (c->parsed()) return cmd_collect(col, out, err);
        if (a->parsed()) return cmd_aggregate(agg, out);
        if (f->parsed()) return cmd_fit(fa, out);
        if (p->parsed()) return cmd_plot(pa, out);
        if (ms->parsed()) return cmd_scaling(sc, out);
        if (m->parsed()) return cmd_simulate(sim, out);
    } catch (const UsageError& ex) {
        err << "usage error: " << ex.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& ex) {
        err << "error: " << ex.what() << "\n";
        return kExitError;
    }
    return kExitUsage;
}

}  // namespace errscale::cli
