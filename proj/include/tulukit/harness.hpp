#pragma once

// Experiment harness: runs configuration matrices, ablations, falsification,
// script-condition studies, and sensitivity sweeps over a held-out question
// set, computes the metric battery per response, attaches paired-bootstrap
// significance with Holm-Bonferroni correction, and emits reports.
//
// Replay determinism contract: with mode=replay, two runs of the same
// experiment produce byte-identical report files. Nothing below may read a
// clock in replay mode.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "tulukit/datagen.hpp"
#include "tulukit/gateway.hpp"
#include "tulukit/grammar_check.hpp"
#include "tulukit/language_pack.hpp"
#include "tulukit/prompt.hpp"
#include "tulukit/purity.hpp"
#include "tulukit/stats.hpp"
#include "tulukit/token_counter.hpp"

#include "json.hpp"

namespace tulu {

// ---------------------------------------------------------------------------
// Configuration

enum class MetricKind { contamination, grammar, coverage, tokens_per_word };

inline std::string to_string(MetricKind m) {
    switch (m) {
        case MetricKind::contamination: return "contamination";
        case MetricKind::grammar: return "grammar";
        case MetricKind::coverage: return "coverage";
        case MetricKind::tokens_per_word: return "tokens_per_word";
    }
    return "?";
}

inline MetricKind metric_from_string(const std::string& s) {
    if (s == "contamination") return MetricKind::contamination;
    if (s == "grammar") return MetricKind::grammar;
    if (s == "coverage") return MetricKind::coverage;
    if (s == "tokens_per_word") return MetricKind::tokens_per_word;
    throw ParseError("unknown metric: " + s);
}

// Serializable form of CompileConfig (the counter is wired in at run time).
struct CompileSpec {
    PromptVersion version = PromptVersion::v4;
    std::set<Ablation> ablations;
    std::optional<std::vector<LayerKind>> layer_order;
    size_t example_count = 10;
    bool corrupted_grammar = false;
    uint64_t corruption_seed = 1;
    bool emphasis = true;

    CompileConfig to_config(const TokenCounter* counter) const {
        CompileConfig cfg;
        cfg.version = version;
        cfg.ablations = ablations;
        cfg.layer_order = layer_order;
        cfg.example_count = example_count;
        cfg.counter = counter;
        cfg.corrupted_grammar = corrupted_grammar;
        cfg.corruption_seed = corruption_seed;
        cfg.emphasis = emphasis;
        return cfg;
    }
};

struct MatrixCell {
    std::string label;
    std::string provider_id = "gemini";
    std::string model_id = "gemini-2.0-flash";
    CompileSpec compile;
    double temperature = 0.3;
    double top_p = 0.9;
    std::optional<int64_t> seed;
    int max_output_tokens = 256;
};

struct CounterSpec {
    std::string kind = "whitespace";  // whitespace | greedy | replay
    std::string path;                 // vocabulary file or recorded-count store
};

struct StatsSettings {
    size_t resamples = 10000;
    uint64_t seed = 20260800;
    double alpha = 0.05;
};

struct SweepSettings {
    std::vector<double> temperatures = {0.3, 0.7, 1.0};
    std::vector<double> top_ps = {0.8, 0.9, 0.95};
    size_t orderings = 5;
    uint64_t ordering_seed = 7;
    std::vector<int64_t> seeds = {1, 2, 3, 4, 5};
    size_t question_count = 10;  // sweeps run on the first N held-out questions
};

struct ExperimentConfig {
    std::string pack_path;
    std::string test_set_path;
    std::string script_questions_path;
    std::string fixture_dir;
    std::string output_dir = "out";
    GatewayMode mode = GatewayMode::replay;
    std::vector<MatrixCell> matrix;
    std::set<MetricKind> metrics = {MetricKind::contamination, MetricKind::grammar,
                                    MetricKind::coverage, MetricKind::tokens_per_word};
    StatsSettings stats;
    SweepSettings sweeps;
    std::optional<std::string> group_by;
    CounterSpec counter;
    size_t max_in_flight = 4;
    // Self-play settings: matrix.front() is the generator cell, judges are
    // the scoring configurations.
    std::vector<MatrixCell> judges;
    size_t generate_n = 10;
};

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j,
                                                    const std::filesystem::path& workspace) {
    ExperimentConfig cfg;
    auto resolve = [&](const std::string& p) {
        if (p.empty()) return p;
        std::filesystem::path path(p);
        return path.is_absolute() ? p : (workspace / path).string();
    };
    cfg.pack_path = resolve(j.at("pack").get<std::string>());
    cfg.test_set_path = resolve(j.value("test_set", std::string{}));
    cfg.script_questions_path = resolve(j.value("script_questions", std::string{}));
    cfg.fixture_dir = resolve(j.value("fixture_dir", std::string{}));
    cfg.output_dir = resolve(j.value("output_dir", std::string{"out"}));
    cfg.mode = gateway_mode_from_string(j.value("mode", "replay"));
    if (j.contains("metrics")) {
        cfg.metrics.clear();
        for (const auto& m : j.at("metrics")) cfg.metrics.insert(metric_from_string(m));
    }
    if (j.contains("stats")) {
        const auto& s = j.at("stats");
        cfg.stats.resamples = s.value("resamples", cfg.stats.resamples);
        cfg.stats.seed = s.value("seed", cfg.stats.seed);
        cfg.stats.alpha = s.value("alpha", cfg.stats.alpha);
    }
    if (j.contains("sweeps")) {
        const auto& s = j.at("sweeps");
        if (s.contains("temperatures"))
            cfg.sweeps.temperatures = s.at("temperatures").get<std::vector<double>>();
        if (s.contains("top_ps")) cfg.sweeps.top_ps = s.at("top_ps").get<std::vector<double>>();
        cfg.sweeps.orderings = s.value("orderings", cfg.sweeps.orderings);
        cfg.sweeps.ordering_seed = s.value("ordering_seed", cfg.sweeps.ordering_seed);
        if (s.contains("seeds")) cfg.sweeps.seeds = s.at("seeds").get<std::vector<int64_t>>();
        cfg.sweeps.question_count = s.value("questions", cfg.sweeps.question_count);
    }
    if (j.contains("group_by")) cfg.group_by = j.at("group_by").get<std::string>();
    if (j.contains("counter")) {
        cfg.counter.kind = j.at("counter").value("kind", "whitespace");
        cfg.counter.path = resolve(j.at("counter").value("path", std::string{}));
    }
    cfg.max_in_flight = j.value("max_in_flight", cfg.max_in_flight);
    cfg.generate_n = j.value("generate_n", cfg.generate_n);
    auto parse_cell = [&](const nlohmann::json& c) {
        MatrixCell cell;
        cell.label = c.value("label", std::string{});
        cell.provider_id = c.value("provider", cell.provider_id);
        cell.model_id = c.value("model", cell.model_id);
        if (c.contains("compile")) {
            const auto& k = c.at("compile");
            cell.compile.version = version_from_string(k.value("version", "v4"));
            for (const auto& a : k.value("ablations", nlohmann::json::array()))
                cell.compile.ablations.insert(ablation_from_string(a));
            if (k.contains("layer_order")) {
                std::vector<LayerKind> order;
                for (const auto& l : k.at("layer_order"))
                    order.push_back(layer_kind_from_string(l));
                cell.compile.layer_order = order;
            }
            cell.compile.example_count = k.value("example_count", cell.compile.example_count);
            cell.compile.corrupted_grammar = k.value("corrupted_grammar", false);
            cell.compile.corruption_seed = k.value("corruption_seed", cell.compile.corruption_seed);
            cell.compile.emphasis = k.value("emphasis", true);
        }
        cell.temperature = c.value("temperature", cell.temperature);
        cell.top_p = c.value("top_p", cell.top_p);
        if (c.contains("seed")) cell.seed = c.at("seed").get<int64_t>();
        cell.max_output_tokens = c.value("max_output_tokens", cell.max_output_tokens);
        return cell;
    };
    for (const auto& c : j.value("matrix", nlohmann::json::array()))
        cfg.matrix.push_back(parse_cell(c));
    for (const auto& c : j.value("judges", nlohmann::json::array()))
        cfg.judges.push_back(parse_cell(c));
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path,
                                               const std::filesystem::path& workspace) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open experiment config: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("experiment config " + path + ": " + e.what());
    }
    return experiment_config_from_json(doc, workspace);
}

inline std::unique_ptr<TokenCounter> make_counter(const CounterSpec& spec) {
    if (spec.kind == "whitespace") return std::make_unique<WhitespaceCounter>();
    if (spec.kind == "greedy")
        return std::make_unique<GreedySubwordCounter>(GreedySubwordCounter::from_file(spec.path));
    if (spec.kind == "replay")
        return std::make_unique<ReplayTokenCounter>(ReplayTokenCounter::from_file(spec.path));
    throw ParseError("unknown counter kind: " + spec.kind);
}

// ---------------------------------------------------------------------------
// Report model

struct ResponseRow {
    std::string question;
    std::string response;             // raw model output
    std::string response_normalized;  // NFC + normalize_roman, metric input
    bool contaminated = false;
    std::vector<std::string> hits;  // prohibited forms found
    std::string grammar;            // "passed" | "failed" | "not_applicable" | ""
    size_t checkable = 0;
    std::optional<double> coverage;
    std::optional<double> tokens_per_word;
    std::optional<std::string> region;
    std::string script_condition;  // script study only
};

struct CellResult {
    std::string label;
    std::string provider_id;
    std::string model_id;
    std::string prompt_hash;
    bool failed = false;
    std::string error;
    std::vector<ResponseRow> rows;
    std::optional<double> contamination_pct;
    std::optional<double> grammar_pct;
    size_t grammar_applicable = 0;
    std::optional<double> coverage_mean;
    std::optional<double> tokens_per_word_mean;
};

struct Comparison {
    std::string metric;
    std::string cell_a;
    std::string cell_b;
    double observed_diff = 0.0;
    double p_value = 1.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double adjusted_p = 1.0;
    bool rejected = false;
    size_t n = 0;
};

struct GroupAggregate {
    std::string cell;
    std::string group;
    size_t n = 0;
    std::optional<double> contamination_pct;
    std::optional<double> grammar_pct;
};

struct MetricReport {
    std::string experiment;  // matrix | falsification | script_conditions | sensitivity
    std::string pack_id;
    std::string pack_hash;
    std::string mode;
    std::string counter_name;
    StatsSettings stats;
    std::vector<CellResult> cells;
    std::vector<Comparison> comparisons;
    std::vector<GroupAggregate> groups;
    nlohmann::json extra = nlohmann::json::object();
    std::string generated_at;  // empty in replay mode, by contract
};

// ---------------------------------------------------------------------------
// Core runner

namespace detail {

inline void aggregate_cell(CellResult& cell, const std::set<MetricKind>& metrics) {
    if (cell.rows.empty()) return;
    if (metrics.count(MetricKind::contamination)) {
        size_t contaminated = 0;
        for (const auto& r : cell.rows)
            if (r.contaminated) ++contaminated;
        cell.contamination_pct =
            100.0 * static_cast<double>(contaminated) / static_cast<double>(cell.rows.size());
    }
    if (metrics.count(MetricKind::grammar)) {
        size_t applicable = 0, passed = 0;
        for (const auto& r : cell.rows) {
            if (r.grammar == "passed") { ++applicable; ++passed; }
            else if (r.grammar == "failed") ++applicable;
        }
        cell.grammar_applicable = applicable;
        if (applicable > 0)
            cell.grammar_pct = 100.0 * static_cast<double>(passed) / static_cast<double>(applicable);
    }
    if (metrics.count(MetricKind::coverage)) {
        double sum = 0.0;
        size_t n = 0;
        for (const auto& r : cell.rows)
            if (r.coverage) { sum += *r.coverage; ++n; }
        if (n > 0) cell.coverage_mean = sum / static_cast<double>(n);
    }
    if (metrics.count(MetricKind::tokens_per_word)) {
        double sum = 0.0;
        size_t n = 0;
        for (const auto& r : cell.rows)
            if (r.tokens_per_word) { sum += *r.tokens_per_word; ++n; }
        if (n > 0) cell.tokens_per_word_mean = sum / static_cast<double>(n);
    }
}

inline ResponseRow measure_response(const std::string& question, const std::string& response,
                                    const std::optional<std::string>& region,
                                    const LanguagePack& pack, const TokenCounter& counter,
                                    const std::set<MetricKind>& metrics) {
    ResponseRow row;
    row.question = question;
    row.response = response;
    row.response_normalized =
        normalize_roman(uni::compose_canonical(response), pack.scheme);
    row.region = region;
    if (metrics.count(MetricKind::contamination)) {
        auto result = detect_contamination(row.response_normalized, pack);
        row.contaminated = result.contaminated;
        for (const auto& hit : result.hits) row.hits.push_back(hit.prohibited);
    }
    if (metrics.count(MetricKind::grammar)) {
        auto verdict = check_response(row.response_normalized, pack);
        row.checkable = verdict.checkable_constructions;
        row.grammar = !verdict.applicable() ? "not_applicable"
                      : verdict.passed()    ? "passed"
                                            : "failed";
    }
    if (metrics.count(MetricKind::coverage))
        row.coverage = vocabulary_coverage(row.response_normalized, pack);
    if (metrics.count(MetricKind::tokens_per_word) && !row.response_normalized.empty()) {
        bool has_word = row.response_normalized.find_first_not_of(" \t\r\n") != std::string::npos;
        if (has_word) row.tokens_per_word = tokens_per_word(row.response_normalized, counter);
    }
    return row;
}

}  // namespace detail

// Requests for one matrix cell, exactly as the runner will send them. The
// fixture tooling uses the same function so that recorded request hashes
// always agree with replay-time hashes.
struct CellRequests {
    LayeredPrompt prompt;
    std::vector<ChatRequest> requests;
};

inline CellRequests make_cell_requests(const LanguagePack& pack,
                                       const std::vector<DatasetExample>& questions,
                                       const MatrixCell& cell, const TokenCounter& counter) {
    CellRequests out;
    out.prompt = compile_prompt(pack, cell.compile.to_config(&counter));
    out.requests.reserve(questions.size());
    for (const auto& q : questions) {
        ChatRequest r;
        r.provider_id = cell.provider_id;
        r.model_id = cell.model_id;
        r.system_prompt = out.prompt.text();
        r.user_message = q.question;
        r.temperature = cell.temperature;
        r.top_p = cell.top_p;
        r.seed = cell.seed;
        r.max_output_tokens = cell.max_output_tokens;
        out.requests.push_back(std::move(r));
    }
    return out;
}

namespace detail {

inline CellResult run_cell(const LanguagePack& pack, const std::vector<DatasetExample>& questions,
                           const MatrixCell& cell, LlmGateway& gateway,
                           const TokenCounter& counter, const std::set<MetricKind>& metrics,
                           size_t max_in_flight) {
    CellResult result;
    result.label = cell.label;
    result.provider_id = cell.provider_id;
    result.model_id = cell.model_id;
    try {
        auto [prompt, requests] = make_cell_requests(pack, questions, cell, counter);
        result.prompt_hash = prompt.content_hash;
        auto batch = gateway.send_batch(requests, max_in_flight);
        for (size_t i = 0; i < batch.size(); ++i) {
            if (batch[i].error) {
                result.failed = true;
                result.error = batch[i].error->message;
                continue;
            }
            result.rows.push_back(measure_response(questions[i].question,
                                                   batch[i].record->response_text,
                                                   questions[i].region, pack, counter, metrics));
        }
        aggregate_cell(result, metrics);
    } catch (const Error& e) {
        result.failed = true;
        result.error = e.what();
    }
    return result;
}

// Paired per-question samples for a binary metric across two cells; grammar
// pairs drop questions not applicable in either arm.
inline std::optional<stats::PairedSample> paired_metric(const CellResult& a, const CellResult& b,
                                                        MetricKind metric) {
    if (a.rows.size() != b.rows.size() || a.rows.empty()) return std::nullopt;
    stats::PairedSample sample;
    for (size_t i = 0; i < a.rows.size(); ++i) {
        if (metric == MetricKind::contamination) {
            sample.a.push_back(a.rows[i].contaminated ? 1.0 : 0.0);
            sample.b.push_back(b.rows[i].contaminated ? 1.0 : 0.0);
        } else if (metric == MetricKind::grammar) {
            if (a.rows[i].grammar == "not_applicable" || b.rows[i].grammar == "not_applicable")
                continue;
            sample.a.push_back(a.rows[i].grammar == "passed" ? 1.0 : 0.0);
            sample.b.push_back(b.rows[i].grammar == "passed" ? 1.0 : 0.0);
        }
    }
    if (sample.a.empty()) return std::nullopt;
    return sample;
}

inline void attach_comparisons(MetricReport& report, const StatsSettings& settings,
                               const std::set<MetricKind>& metrics) {
    std::vector<MetricKind> compared;
    if (metrics.count(MetricKind::grammar)) compared.push_back(MetricKind::grammar);
    if (metrics.count(MetricKind::contamination)) compared.push_back(MetricKind::contamination);

    for (size_t i = 0; i + 1 < report.cells.size(); ++i) {
        const CellResult& a = report.cells[i];
        const CellResult& b = report.cells[i + 1];
        if (a.failed || b.failed) continue;
        if (a.provider_id != b.provider_id || a.model_id != b.model_id) continue;
        for (MetricKind metric : compared) {
            auto sample = paired_metric(b, a, metric);  // later cell minus earlier
            if (!sample) continue;
            uint64_t seed = settings.seed ^ fnv1a(a.label + "|" + b.label + "|" + to_string(metric));
            stats::TestResult t = stats::paired_bootstrap(*sample, settings.resamples, seed);
            Comparison c;
            c.metric = to_string(metric);
            c.cell_a = a.label;
            c.cell_b = b.label;
            c.observed_diff = t.observed_diff;
            c.p_value = t.p_value;
            c.ci_low = t.ci_low;
            c.ci_high = t.ci_high;
            c.n = sample->size();
            report.comparisons.push_back(c);
        }
    }
    std::vector<double> p_values;
    for (const auto& c : report.comparisons) p_values.push_back(c.p_value);
    auto corrected = stats::holm_bonferroni(p_values, settings.alpha);
    for (size_t i = 0; i < corrected.size(); ++i) {
        report.comparisons[i].adjusted_p = corrected[i].adjusted_p;
        report.comparisons[i].rejected = corrected[i].rejected;
    }
}

inline void attach_groups(MetricReport& report) {
    for (const auto& cell : report.cells) {
        std::map<std::string, std::vector<const ResponseRow*>> by_group;
        for (const auto& row : cell.rows)
            if (row.region) by_group[*row.region].push_back(&row);
        for (const auto& [group, rows] : by_group) {
            GroupAggregate agg;
            agg.cell = cell.label;
            agg.group = group;
            agg.n = rows.size();
            size_t contaminated = 0, applicable = 0, passed = 0;
            for (const ResponseRow* r : rows) {
                if (r->contaminated) ++contaminated;
                if (r->grammar == "passed") { ++applicable; ++passed; }
                else if (r->grammar == "failed") ++applicable;
            }
            agg.contamination_pct =
                100.0 * static_cast<double>(contaminated) / static_cast<double>(rows.size());
            if (applicable > 0)
                agg.grammar_pct =
                    100.0 * static_cast<double>(passed) / static_cast<double>(applicable);
            report.groups.push_back(std::move(agg));
        }
    }
}

inline std::string hash_pack(const LanguagePack& pack) { return content_hash(serialize_pack(pack)); }

struct LoadedExperiment {
    LanguagePack pack;
    std::vector<DatasetExample> test_set;
    std::unique_ptr<TokenCounter> counter;
    std::unique_ptr<LlmGateway> gateway;
};

inline LoadedExperiment load_experiment(const ExperimentConfig& cfg,
                                        std::shared_ptr<Transport> transport) {
    LoadedExperiment loaded;
    loaded.pack = load_pack(cfg.pack_path);
    if (!cfg.test_set_path.empty()) {
        loaded.test_set = load_examples_jsonl(cfg.test_set_path);
        // Hygiene: the held-out set must be disjoint from the pack's seed
        // examples (which feed the few-shot layer).
        std::unordered_set<std::string> seed_keys;
        for (const auto& ex : loaded.pack.seed_examples)
            seed_keys.insert(normalized_question_key(ex.question, loaded.pack.scheme));
        for (const auto& ex : loaded.test_set)
            if (seed_keys.count(normalized_question_key(ex.question, loaded.pack.scheme)))
                throw ValidationError("heldout_overlap", "test-set question '" + ex.question +
                                                             "' appears in the pack's seed examples");
    }
    loaded.counter = make_counter(cfg.counter);
    loaded.gateway = std::make_unique<LlmGateway>(cfg.mode, cfg.fixture_dir, std::move(transport));
    return loaded;
}

inline void stamp_report(MetricReport& report, const ExperimentConfig& cfg,
                         const LoadedExperiment& loaded) {
    report.pack_id = loaded.pack.id;
    report.pack_hash = hash_pack(loaded.pack);
    report.mode = to_string(cfg.mode);
    report.counter_name = loaded.counter->name();
    report.stats = cfg.stats;
    if (cfg.mode != GatewayMode::replay) report.generated_at = utc_timestamp_now();
}

}  // namespace detail

// Runs every matrix cell, aggregates, and compares adjacent cells of the
// same model. Cell failures are isolated: the cell is marked failed and the
// run continues.
inline MetricReport run_matrix(const ExperimentConfig& cfg,
                               std::shared_ptr<Transport> transport = nullptr) {
    auto loaded = detail::load_experiment(cfg, std::move(transport));
    MetricReport report;
    report.experiment = "matrix";
    detail::stamp_report(report, cfg, loaded);
    for (const auto& cell : cfg.matrix)
        report.cells.push_back(detail::run_cell(loaded.pack, loaded.test_set, cell,
                                                *loaded.gateway, *loaded.counter, cfg.metrics,
                                                cfg.max_in_flight));
    detail::attach_comparisons(report, cfg.stats, cfg.metrics);
    if (cfg.group_by) detail::attach_groups(report);
    return report;
}

// Runs each matrix cell twice, the second time rendering the grammar layer
// from the corrupted rule pack, and reports metric deltas.
inline MetricReport run_falsification(const ExperimentConfig& cfg,
                                      std::shared_ptr<Transport> transport = nullptr) {
    auto loaded = detail::load_experiment(cfg, std::move(transport));
    MetricReport report;
    report.experiment = "falsification";
    detail::stamp_report(report, cfg, loaded);
    nlohmann::json deltas = nlohmann::json::array();
    for (const auto& cell : cfg.matrix) {
        MatrixCell clean = cell;
        clean.label = cell.label + "__clean";
        clean.compile.corrupted_grammar = false;
        MatrixCell falsified = cell;
        falsified.label = cell.label + "__falsified";
        falsified.compile.corrupted_grammar = true;
        CellResult clean_result = detail::run_cell(loaded.pack, loaded.test_set, clean,
                                                   *loaded.gateway, *loaded.counter, cfg.metrics,
                                                   cfg.max_in_flight);
        CellResult falsified_result = detail::run_cell(loaded.pack, loaded.test_set, falsified,
                                                       *loaded.gateway, *loaded.counter,
                                                       cfg.metrics, cfg.max_in_flight);
        nlohmann::json delta = {{"cell", cell.label}};
        auto diff = [](const std::optional<double>& after, const std::optional<double>& before)
            -> nlohmann::json {
            if (after && before) return *after - *before;
            return nullptr;
        };
        delta["grammar"] = diff(falsified_result.grammar_pct, clean_result.grammar_pct);
        delta["contamination"] =
            diff(falsified_result.contamination_pct, clean_result.contamination_pct);
        delta["coverage"] = diff(falsified_result.coverage_mean, clean_result.coverage_mean);
        deltas.push_back(delta);
        report.cells.push_back(std::move(clean_result));
        report.cells.push_back(std::move(falsified_result));
    }
    report.extra["deltas"] = deltas;
    detail::attach_comparisons(report, cfg.stats, cfg.metrics);
    return report;
}

// One row per dual-rendered question; see the script study file schema in
// the repo docs: JSON-lines of {"id", "roman", "kannada", "region"?}.
struct ScriptQuestion {
    std::string id;
    std::string roman;
    std::string kannada;
    std::optional<std::string> region;
};

inline std::vector<ScriptQuestion> load_script_questions(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open script questions: " + path);
    std::vector<ScriptQuestion> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            auto j = nlohmann::json::parse(line);
            ScriptQuestion q;
            q.id = j.at("id").get<std::string>();
            q.roman = uni::compose_canonical(j.at("roman").get<std::string>());
            q.kannada = uni::compose_canonical(j.at("kannada").get<std::string>());
            if (j.contains("region")) q.region = j.at("region").get<std::string>();
            out.push_back(std::move(q));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

// The four script-by-instruction conditions. The instruction is the system
// prompt; the question rendering supplies the script signal.
struct ScriptStudyCondition {
    std::string label;
    bool kannada_rendering = false;
    bool target_instruction = false;
};

inline const std::vector<ScriptStudyCondition>& script_study_conditions() {
    static const std::vector<ScriptStudyCondition> conditions = {
        {"kannada_script+target_instruction", true, true},
        {"kannada_script+contaminant_instruction", true, false},
        {"roman+target_instruction", false, true},
        {"roman+contaminant_instruction", false, false},
    };
    return conditions;
}

inline std::string script_condition_instruction(const LanguagePack& pack,
                                                const ScriptStudyCondition& condition) {
    if (condition.target_instruction)
        return "Respond in " + pack.target_language_name +
               " using the standardized romanization.";
    return "Respond in " + pack.contaminant_language_name + ".";
}

inline std::vector<ChatRequest> make_script_requests(const LanguagePack& pack,
                                                     const std::vector<ScriptQuestion>& questions,
                                                     const MatrixCell& base,
                                                     const ScriptStudyCondition& condition) {
    std::string instruction = script_condition_instruction(pack, condition);
    std::vector<ChatRequest> requests;
    requests.reserve(questions.size());
    for (const auto& q : questions) {
        ChatRequest r;
        r.provider_id = base.provider_id;
        r.model_id = base.model_id;
        r.system_prompt = instruction;
        r.user_message = condition.kannada_rendering ? q.kannada : q.roman;
        r.temperature = base.temperature;
        r.top_p = base.top_p;
        r.seed = base.seed;
        r.max_output_tokens = base.max_output_tokens;
        requests.push_back(std::move(r));
    }
    return requests;
}

inline MetricReport run_script_conditions(const ExperimentConfig& cfg,
                                          std::shared_ptr<Transport> transport = nullptr) {
    if (cfg.matrix.empty()) throw Error("script study needs one matrix cell for provider/model");
    auto loaded = detail::load_experiment(cfg, std::move(transport));
    auto questions = load_script_questions(cfg.script_questions_path);
    const MatrixCell& base = cfg.matrix.front();
    const LanguagePack& pack = loaded.pack;

    MetricReport report;
    report.experiment = "script_conditions";
    detail::stamp_report(report, cfg, loaded);
    nlohmann::json distributions = nlohmann::json::array();

    for (const auto& condition : script_study_conditions()) {
        CellResult cell;
        cell.label = condition.label;
        cell.provider_id = base.provider_id;
        cell.model_id = base.model_id;
        cell.prompt_hash = content_hash(script_condition_instruction(pack, condition));
        std::vector<ChatRequest> requests = make_script_requests(pack, questions, base, condition);
        std::map<std::string, size_t> condition_counts;
        try {
            auto batch = loaded.gateway->send_batch(requests, cfg.max_in_flight);
            for (size_t i = 0; i < batch.size(); ++i) {
                if (batch[i].error) {
                    cell.failed = true;
                    cell.error = batch[i].error->message;
                    continue;
                }
                ResponseRow row = detail::measure_response(requests[i].user_message,
                                                           batch[i].record->response_text,
                                                           questions[i].region, pack,
                                                           *loaded.counter, cfg.metrics);
                row.script_condition =
                    to_string(classify_script(batch[i].record->response_text, pack.scheme));
                ++condition_counts[row.script_condition];
                cell.rows.push_back(std::move(row));
            }
            detail::aggregate_cell(cell, cfg.metrics);
        } catch (const Error& e) {
            cell.failed = true;
            cell.error = e.what();
        }
        nlohmann::json dist = {{"condition", condition.label}, {"counts", condition_counts}};
        if (!cell.rows.empty())
            dist["kannada_share"] = 100.0 *
                                    static_cast<double>(condition_counts["kannada_script"]) /
                                    static_cast<double>(cell.rows.size());
        distributions.push_back(dist);
        report.cells.push_back(std::move(cell));
    }
    report.extra["conditions"] = distributions;
    return report;
}

enum class SweepKind { temperature, top_p, ordering, seeds };

inline std::string to_string(SweepKind s) {
    switch (s) {
        case SweepKind::temperature: return "temperature";
        case SweepKind::top_p: return "top_p";
        case SweepKind::ordering: return "ordering";
        case SweepKind::seeds: return "seeds";
    }
    return "?";
}

inline SweepKind sweep_from_string(const std::string& s) {
    if (s == "temperature") return SweepKind::temperature;
    if (s == "top_p") return SweepKind::top_p;
    if (s == "ordering") return SweepKind::ordering;
    if (s == "seeds") return SweepKind::seeds;
    throw ParseError("unknown sweep: " + s);
}

// Sweep points as fully resolved cells; shared with the fixture tooling.
inline std::vector<MatrixCell> sweep_points(const ExperimentConfig& cfg, SweepKind sweep,
                                            const LanguagePack& pack,
                                            const TokenCounter& counter) {
    if (cfg.matrix.empty()) throw Error("sensitivity sweep needs one matrix cell as the base");
    const MatrixCell& base = cfg.matrix.front();
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", v);
        return std::string(buf);
    };
    std::vector<MatrixCell> points;
    if (sweep == SweepKind::temperature) {
        for (double t : cfg.sweeps.temperatures) {
            MatrixCell cell = base;
            cell.label = "T=" + fmt(t);
            cell.temperature = t;
            points.push_back(std::move(cell));
        }
    } else if (sweep == SweepKind::top_p) {
        for (double p : cfg.sweeps.top_ps) {
            MatrixCell cell = base;
            cell.label = "top_p=" + fmt(p);
            cell.top_p = p;
            points.push_back(std::move(cell));
        }
    } else if (sweep == SweepKind::seeds) {
        for (int64_t s : cfg.sweeps.seeds) {
            MatrixCell cell = base;
            cell.label = "seed=" + std::to_string(s);
            cell.seed = s;
            points.push_back(std::move(cell));
        }
    } else {
        LayeredPrompt prompt = compile_prompt(pack, base.compile.to_config(&counter));
        auto layer_orders = seeded_layer_orders(prompt, cfg.sweeps.orderings, cfg.sweeps.ordering_seed);
        for (size_t i = 0; i < layer_orders.size(); ++i) {
            MatrixCell cell = base;
            cell.label = "ordering#" + std::to_string(i + 1);
            cell.compile.layer_order = layer_orders[i];
            points.push_back(std::move(cell));
        }
    }
    return points;
}

// One report row per sweep point, run on the first sweeps.question_count
// held-out questions.
inline MetricReport run_sensitivity(const ExperimentConfig& cfg, SweepKind sweep,
                                    std::shared_ptr<Transport> transport = nullptr) {
    auto loaded = detail::load_experiment(cfg, std::move(transport));
    std::vector<DatasetExample> questions = loaded.test_set;
    if (questions.size() > cfg.sweeps.question_count)
        questions.resize(cfg.sweeps.question_count);

    MetricReport report;
    report.experiment = "sensitivity";
    detail::stamp_report(report, cfg, loaded);
    report.extra["sweep"] = to_string(sweep);

    for (const MatrixCell& cell : sweep_points(cfg, sweep, loaded.pack, *loaded.counter))
        report.cells.push_back(detail::run_cell(loaded.pack, questions, cell, *loaded.gateway,
                                                *loaded.counter, cfg.metrics, cfg.max_in_flight));

    // Sweep summary: mean and population std of the headline metrics.
    auto summarize = [&](auto metric_of) -> nlohmann::json {
        std::vector<double> values;
        for (const auto& cell : report.cells)
            if (auto v = metric_of(cell)) values.push_back(*v);
        if (values.empty()) return nullptr;
        double mean = 0.0;
        for (double v : values) mean += v;
        mean /= static_cast<double>(values.size());
        double var = 0.0;
        for (double v : values) var += (v - mean) * (v - mean);
        var /= static_cast<double>(values.size());
        return {{"mean", mean}, {"std", std::sqrt(var)}, {"n", values.size()}};
    };
    report.extra["summary"] = {
        {"grammar", summarize([](const CellResult& c) { return c.grammar_pct; })},
        {"contamination", summarize([](const CellResult& c) { return c.contamination_pct; })},
    };
    return report;
}

// ---------------------------------------------------------------------------
// Agreement ingestion: one JSON-lines file per annotator, rows
// {"id": ..., "scores": {dimension: integer, ...}}.

struct AgreementReport {
    struct Coefficients {
        double mean_pairwise_kappa = 0.0;
        double fleiss_kappa = 0.0;
    };
    std::map<std::string, Coefficients> per_dimension;
    Coefficients overall;
    size_t items = 0;
    size_t annotators = 0;
};

inline AgreementReport agreement_from_annotations(const std::vector<std::string>& files) {
    if (files.size() < 2) throw Error("agreement needs at least 2 annotator files");
    using Annotations = std::map<std::string, std::map<std::string, int>>;  // id -> dim -> score
    std::vector<Annotations> annotators;
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open annotations: " + path);
        Annotations ann;
        std::string line;
        size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            try {
                auto j = nlohmann::json::parse(line);
                std::string id = j.at("id").get<std::string>();
                for (auto it = j.at("scores").begin(); it != j.at("scores").end(); ++it)
                    ann[id][it.key()] = it.value().get<int>();
            } catch (const nlohmann::json::exception& e) {
                throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
            }
        }
        annotators.push_back(std::move(ann));
    }

    const Annotations& first = annotators.front();
    for (size_t i = 1; i < annotators.size(); ++i) {
        if (annotators[i].size() != first.size())
            throw ValidationError("annotation_misaligned", "annotators rated different item sets");
        for (const auto& [id, scores] : first)
            if (!annotators[i].count(id))
                throw ValidationError("annotation_misaligned",
                                      "item '" + id + "' missing from " + files[i]);
    }

    std::set<std::string> dimensions;
    for (const auto& [id, scores] : first)
        for (const auto& [dim, score] : scores) dimensions.insert(dim);

    AgreementReport report;
    report.items = first.size();
    report.annotators = annotators.size();
    std::vector<std::vector<int>> overall(annotators.size());
    for (const auto& dim : dimensions) {
        std::vector<std::vector<int>> labels(annotators.size());
        for (const auto& [id, scores] : first) {
            for (size_t a = 0; a < annotators.size(); ++a) {
                auto item = annotators[a].find(id);
                auto score = item->second.find(dim);
                if (score == item->second.end())
                    throw ValidationError("annotation_misaligned",
                                          "item '" + id + "' lacks dimension '" + dim + "' in " +
                                              files[a]);
                labels[a].push_back(score->second);
                overall[a].push_back(score->second);
            }
        }
        AgreementReport::Coefficients c;
        c.mean_pairwise_kappa = stats::mean_pairwise_kappa(labels);
        c.fleiss_kappa = stats::fleiss_kappa(stats::fleiss_table(labels));
        report.per_dimension[dim] = c;
    }
    report.overall.mean_pairwise_kappa = stats::mean_pairwise_kappa(overall);
    report.overall.fleiss_kappa = stats::fleiss_kappa(stats::fleiss_table(overall));
    return report;
}

inline nlohmann::json agreement_to_json(const AgreementReport& r) {
    nlohmann::json dims = nlohmann::json::object();
    for (const auto& [dim, c] : r.per_dimension)
        dims[dim] = {{"mean_pairwise_kappa", c.mean_pairwise_kappa},
                     {"fleiss_kappa", c.fleiss_kappa}};
    return {{"items", r.items},
            {"annotators", r.annotators},
            {"per_dimension", dims},
            {"overall",
             {{"mean_pairwise_kappa", r.overall.mean_pairwise_kappa},
              {"fleiss_kappa", r.overall.fleiss_kappa}}}};
}

}  // namespace tulu
