// tulukit: command-line entry point for every pipeline stage. One subcommand
// per operation; all paths resolve against --workspace. Exit codes: 0 on
// success, 1 on operational failure, 2 on usage errors.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "tulukit/builtin_packs.hpp"
#include "tulukit/gateway_http.hpp"
#include "tulukit/report_io.hpp"
#include "tulukit/tulukit.hpp"

#include "CLI11.hpp"

namespace fs = std::filesystem;
using namespace tulu;

namespace {

struct GlobalOpts {
    std::string workspace = ".";

    std::string resolve(const std::string& path) const {
        if (path.empty() || fs::path(path).is_absolute()) return path;
        return (fs::path(workspace) / path).string();
    }
};

std::vector<std::string> read_input_lines(const std::string& path) {
    std::vector<std::string> lines;
    std::string line;
    if (path.empty() || path == "-") {
        while (std::getline(std::cin, line)) lines.push_back(line);
        return lines;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open input: " + path);
    while (std::getline(in, line)) lines.push_back(line);
    return lines;
}

// Accepts plain text lines or JSON lines carrying a "response" field.
std::string response_text_of(const std::string& line) {
    if (!line.empty() && line.front() == '{') {
        try {
            auto j = nlohmann::json::parse(line);
            if (j.contains("response")) return j.at("response").get<std::string>();
            if (j.contains("text")) return j.at("text").get<std::string>();
        } catch (const nlohmann::json::exception&) {
            // fall through: treat as plain text
        }
    }
    return line;
}

std::shared_ptr<Transport> transport_for(GatewayMode mode) {
    if (mode == GatewayMode::replay) return nullptr;
    return std::make_shared<HttpTransport>();
}

ExperimentConfig load_config(const GlobalOpts& opts, const std::string& config_path,
                             const std::string& mode_override) {
    ExperimentConfig cfg = load_experiment_config(opts.resolve(config_path), opts.workspace);
    if (!mode_override.empty()) cfg.mode = gateway_mode_from_string(mode_override);
    return cfg;
}

void print_report_summary(const MetricReport& report, const std::vector<std::string>& files) {
    for (const auto& cell : report.cells) {
        std::cout << cell.label << ": ";
        if (cell.failed) {
            std::cout << "FAILED (" << cell.error << ")\n";
            continue;
        }
        std::cout << "gram=";
        if (cell.grammar_pct) std::cout << *cell.grammar_pct;
        else std::cout << "n/a";
        std::cout << " cont=";
        if (cell.contamination_pct) std::cout << *cell.contamination_pct;
        else std::cout << "n/a";
        std::cout << " responses=" << cell.rows.size() << "\n";
    }
    auto json = report_to_json(report);
    std::cout << "determinism_hash: " << json.at("determinism_hash").get<std::string>() << "\n";
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
}

int emit_and_summarize(const MetricReport& report, const ExperimentConfig& cfg) {
    auto files = emit_report_all(report, cfg.output_dir);
    print_report_summary(report, files);
    for (const auto& cell : report.cells)
        if (cell.failed) return 1;
    return 0;
}

// ---------------------------------------------------------------------------

int cmd_pack_validate(const GlobalOpts& opts, const std::vector<std::string>& paths, bool json) {
    std::vector<LanguagePack> packs;
    nlohmann::json out = nlohmann::json::array();
    bool any_violation = false;
    for (const auto& raw_path : paths) {
        std::string path = opts.resolve(raw_path);
        std::ifstream in(path, std::ios::binary);
        if (!in) throw IoError("cannot open pack file: " + path);
        nlohmann::json doc;
        try {
            in >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("pack file " + path + " is not valid JSON: " + e.what());
        }
        LanguagePack pack = pack_from_json(doc);
        auto violations = validate_pack(pack);
        nlohmann::json entry = {{"pack", raw_path}, {"id", pack.id}};
        nlohmann::json vlist = nlohmann::json::array();
        for (const auto& v : violations) {
            vlist.push_back({{"code", v.code}, {"message", v.message}});
            any_violation = true;
            if (!json) std::cout << raw_path << ": " << v.code << ": " << v.message << "\n";
        }
        entry["violations"] = vlist;
        out.push_back(entry);
        packs.push_back(std::move(pack));
    }
    for (const auto& v : validate_workspace(packs)) {
        any_violation = true;
        if (!json) std::cout << v.code << ": " << v.message << "\n";
        out.push_back({{"workspace_violation", {{"code", v.code}, {"message", v.message}}}});
    }
    if (json) std::cout << out.dump(2) << "\n";
    else if (!any_violation) std::cout << "ok: " << paths.size() << " pack(s) valid\n";
    return any_violation ? 1 : 0;
}

int cmd_transliterate(const GlobalOpts& opts, const std::string& pack_path,
                      const std::string& in_path, bool lenient, bool normalize_only,
                      bool classify) {
    LanguagePack pack = load_pack(opts.resolve(pack_path));
    for (const auto& line : read_input_lines(opts.resolve(in_path))) {
        if (classify) {
            std::cout << to_string(classify_script(line, pack.scheme)) << "\n";
        } else if (normalize_only) {
            std::cout << normalize_roman(line, pack.scheme) << "\n";
        } else if (lenient) {
            auto out = transliterate_lenient(line, pack.scheme);
            std::cout << out.text << "\n";
            if (!out.unmapped.empty()) {
                std::cerr << "unmapped:";
                for (char32_t cp : out.unmapped) {
                    char buf[16];
                    std::snprintf(buf, sizeof buf, " U+%04X", static_cast<unsigned>(cp));
                    std::cerr << buf;
                }
                std::cerr << "\n";
            }
        } else {
            std::cout << transliterate(line, pack.scheme) << "\n";
        }
    }
    return 0;
}

int cmd_check_grammar(const GlobalOpts& opts, const std::string& pack_path,
                      const std::string& in_path, bool json) {
    LanguagePack pack = load_pack(opts.resolve(pack_path));
    std::vector<GrammarVerdict> verdicts;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& line : read_input_lines(opts.resolve(in_path))) {
        if (line.empty()) continue;
        std::string text = normalize_roman(uni::compose_canonical(response_text_of(line)), pack.scheme);
        GrammarVerdict v = check_response(text, pack);
        std::string status = !v.applicable() ? "not_applicable" : v.passed() ? "passed" : "failed";
        if (json) {
            nlohmann::json violations = nlohmann::json::array();
            for (const auto& viol : v.violations)
                violations.push_back({{"family", to_string(viol.family)},
                                      {"begin", viol.begin},
                                      {"end", viol.end},
                                      {"message", viol.message}});
            rows.push_back({{"text", text},
                            {"status", status},
                            {"checkable", v.checkable_constructions},
                            {"violations", violations}});
        } else {
            std::cout << status << " (" << v.checkable_constructions << " constructions";
            for (const auto& viol : v.violations)
                std::cout << "; " << to_string(viol.family) << ": " << viol.message;
            std::cout << ")\n";
        }
        verdicts.push_back(std::move(v));
    }
    GrammarAccuracy acc = grammar_accuracy(verdicts);
    if (json) {
        nlohmann::json summary = {{"applicable", acc.applicable}, {"passed", acc.passed}};
        summary["accuracy_pct"] = acc.percent ? nlohmann::json(*acc.percent) : nlohmann::json();
        std::cout << nlohmann::json({{"responses", rows}, {"summary", summary}}).dump(2) << "\n";
    } else if (acc.percent) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f", *acc.percent);
        std::cout << buf << " (" << acc.passed << "/" << acc.applicable << " applicable)\n";
    } else {
        std::cout << "n/a (0 applicable)\n";
    }
    return 0;
}

int cmd_contamination(const GlobalOpts& opts, const std::string& pack_path,
                      const std::string& in_path, bool json, bool fold) {
    LanguagePack pack = load_pack(opts.resolve(pack_path));
    DiacriticMode mode = fold ? DiacriticMode::fold : DiacriticMode::sensitive;
    std::vector<ContaminationResult> results;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& line : read_input_lines(opts.resolve(in_path))) {
        if (line.empty()) continue;
        std::string text = normalize_roman(uni::compose_canonical(response_text_of(line)), pack.scheme);
        ContaminationResult r = detect_contamination(text, pack, mode);
        if (json) {
            nlohmann::json hits = nlohmann::json::array();
            for (const auto& h : r.hits)
                hits.push_back({{"prohibited", h.prohibited},
                                {"replacement", h.replacement},
                                {"begin", h.begin},
                                {"end", h.end}});
            rows.push_back({{"text", text},
                            {"contaminated", r.contaminated},
                            {"hits", hits},
                            {"allowlisted", r.allowlisted_loans}});
        }
        results.push_back(std::move(r));
    }
    if (results.empty()) throw Error("no responses in input");
    double rate = contamination_rate(results);
    if (json) {
        std::cout << nlohmann::json({{"responses", rows}, {"contamination_pct", rate}}).dump(2)
                  << "\n";
    } else {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.1f", rate);
        std::cout << buf << "\n";
    }
    return 0;
}

int cmd_compile_prompt(const GlobalOpts& opts, const std::string& pack_path,
                       const std::string& version, const std::vector<std::string>& ablations,
                       const std::string& order_csv, size_t examples, bool corrupted,
                       bool no_emphasis, const std::string& counter_kind,
                       const std::string& counter_path, bool json, const std::string& out_path) {
    LanguagePack pack = load_pack(opts.resolve(pack_path));
    CounterSpec counter_spec;
    counter_spec.kind = counter_kind;
    counter_spec.path = opts.resolve(counter_path);
    auto counter = make_counter(counter_spec);
    CompileConfig cfg;
    cfg.version = version_from_string(version);
    for (const auto& a : ablations) cfg.ablations.insert(ablation_from_string(a));
    if (!order_csv.empty()) {
        std::vector<LayerKind> order;
        std::stringstream ss(order_csv);
        std::string item;
        while (std::getline(ss, item, ',')) order.push_back(layer_kind_from_string(item));
        cfg.layer_order = order;
    }
    cfg.example_count = examples;
    cfg.corrupted_grammar = corrupted;
    cfg.emphasis = !no_emphasis;
    cfg.counter = counter.get();
    LayeredPrompt prompt = compile_prompt(pack, cfg);
    std::string rendered = json ? prompt_to_json(prompt).dump(2) + "\n" : prompt.text() + "\n";
    if (!out_path.empty()) {
        std::ofstream out(opts.resolve(out_path), std::ios::binary);
        if (!out) throw IoError("cannot write " + out_path);
        out << rendered;
        std::cout << "total_tokens: " << prompt.total_tokens
                  << "\ncontent_hash: " << prompt.content_hash << "\n";
    } else {
        std::cout << rendered;
    }
    return 0;
}

int cmd_generate(const GlobalOpts& opts, const std::string& config_path,
                 const std::string& mode_override, size_t n_override,
                 const std::string& out_path) {
    ExperimentConfig cfg = load_config(opts, config_path, mode_override);
    if (cfg.matrix.empty()) throw Error("generation config needs one matrix cell");
    LanguagePack pack = load_pack(cfg.pack_path);
    auto counter = make_counter(cfg.counter);
    LlmGateway gateway(cfg.mode, cfg.fixture_dir, transport_for(cfg.mode));
    const MatrixCell& cell = cfg.matrix.front();
    LayeredPrompt prompt = compile_prompt(pack, cell.compile.to_config(counter.get()));
    ChatRequest base;
    base.provider_id = cell.provider_id;
    base.model_id = cell.model_id;
    base.temperature = cell.temperature;
    base.top_p = cell.top_p;
    base.seed = cell.seed;
    base.max_output_tokens = cell.max_output_tokens;
    size_t n = n_override ? n_override : cfg.generate_n;
    GenerationResult result = generate_pairs(pack, prompt, n, gateway, base, cfg.max_in_flight);
    auto deduped = dedupe_examples(result.examples, pack.scheme);
    if (!out_path.empty()) save_examples_jsonl(opts.resolve(out_path), deduped);
    std::cout << "generated " << deduped.size() << " examples (" << result.parse_failures
              << " parse failures, " << result.errors.size() << " gateway errors)\n";
    return result.errors.empty() ? 0 : 1;
}

int cmd_filter(const GlobalOpts& opts, const std::string& scores_in, const std::string& raw_in,
               const std::string& config_path, const std::string& mode_override,
               const std::string& out_path, bool per_dimension, bool json) {
    FilterThresholds thresholds;
    if (per_dimension) thresholds.mean_mode = FilterMeanMode::per_dimension;

    std::vector<DatasetExample> scored;
    if (!scores_in.empty()) {
        scored = load_examples_jsonl(opts.resolve(scores_in));
    } else {
        if (raw_in.empty() || config_path.empty())
            throw Error("filter needs either --scores-in or --raw-in with --config");
        ExperimentConfig cfg = load_config(opts, config_path, mode_override);
        if (cfg.judges.size() != kJudgeCount)
            throw Error("config must define exactly 3 judges");
        LlmGateway gateway(cfg.mode, cfg.fixture_dir, transport_for(cfg.mode));
        std::array<ChatRequest, kJudgeCount> judges;
        for (size_t j = 0; j < kJudgeCount; ++j) {
            const MatrixCell& cell = cfg.judges[j];
            judges[j].provider_id = cell.provider_id;
            judges[j].model_id = cell.model_id;
            judges[j].system_prompt = "";
            judges[j].temperature = cell.temperature;
            judges[j].top_p = cell.top_p;
            judges[j].seed = cell.seed;
            judges[j].max_output_tokens = cell.max_output_tokens;
        }
        for (auto ex : load_examples_jsonl(opts.resolve(raw_in))) {
            ex.judge_scores = judge_example(ex, judges, gateway);
            scored.push_back(std::move(ex));
        }
    }

    FilterBatchResult result = filter_examples(scored, thresholds);
    if (!out_path.empty()) save_examples_jsonl(opts.resolve(out_path), result.retained);
    if (json) {
        nlohmann::json decisions = nlohmann::json::array();
        for (const auto& d : result.decisions)
            decisions.push_back({{"retained", d.retained},
                                 {"grand_mean", d.grand_mean},
                                 {"min_score", d.min_score},
                                 {"judge_std", d.judge_std},
                                 {"reasons", d.reasons}});
        nlohmann::json summary = {{"total", result.total}, {"retained", result.retained.size()}};
        summary["retention_pct"] =
            result.retention_percent ? nlohmann::json(*result.retention_percent) : nlohmann::json();
        std::cout << nlohmann::json({{"decisions", decisions}, {"summary", summary}}).dump(2)
                  << "\n";
    } else if (result.retention_percent) {
        std::cout << "retained " << result.retained.size() << "/" << result.total << " ("
                  << *result.retention_percent << "%)\n";
    } else {
        std::cout << "retained 0/0\n";
    }
    return 0;
}

int cmd_agreement(const GlobalOpts& opts, const std::vector<std::string>& files, bool json) {
    std::vector<std::string> resolved;
    for (const auto& f : files) resolved.push_back(opts.resolve(f));
    AgreementReport report = agreement_from_annotations(resolved);
    if (json) {
        std::cout << agreement_to_json(report).dump(2) << "\n";
        return 0;
    }
    std::cout << "items: " << report.items << ", annotators: " << report.annotators << "\n";
    for (const auto& [dim, c] : report.per_dimension)
        std::cout << dim << ": pairwise_kappa=" << c.mean_pairwise_kappa
                  << " fleiss_kappa=" << c.fleiss_kappa << "\n";
    std::cout << "overall: pairwise_kappa=" << report.overall.mean_pairwise_kappa
              << " fleiss_kappa=" << report.overall.fleiss_kappa << "\n";
    return 0;
}

int cmd_report(const GlobalOpts& opts, const std::string& in_path, const std::string& format,
               const std::string& out_dir) {
    MetricReport report = load_report(opts.resolve(in_path));
    auto files = emit_report(report, {report_format_from_string(format)}, opts.resolve(out_dir));
    for (const auto& f : files) std::cout << "wrote " << f << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"low-resource language prompting and evaluation toolkit"};
    app.require_subcommand(1);
    GlobalOpts opts;
    app.add_option("--workspace", opts.workspace, "root for relative paths")->capture_default_str();

    // pack-validate
    auto* pv = app.add_subcommand("pack-validate", "validate language pack files");
    std::vector<std::string> pv_paths;
    bool pv_json = false;
    pv->add_option("packs", pv_paths, "pack files")->required();
    pv->add_flag("--json", pv_json, "machine-readable output");

    // transliterate
    auto* tr = app.add_subcommand("transliterate", "transduce or classify script");
    std::string tr_pack, tr_in;
    bool tr_lenient = false, tr_normalize = false, tr_classify = false;
    tr->add_option("--pack", tr_pack, "language pack")->required();
    tr->add_option("--in", tr_in, "input file (default: stdin)");
    tr->add_flag("--lenient", tr_lenient, "pass through unmapped graphemes with a report");
    tr->add_flag("--normalize", tr_normalize, "normalize naive roman input instead");
    tr->add_flag("--classify", tr_classify, "classify the script condition per line");

    // check-grammar
    auto* cg = app.add_subcommand("check-grammar", "rule-based grammar check");
    std::string cg_pack, cg_in;
    bool cg_json = false;
    cg->add_option("--pack", cg_pack, "language pack")->required();
    cg->add_option("--in", cg_in, "responses (text lines or JSONL; default: stdin)");
    cg->add_flag("--json", cg_json, "machine-readable output");

    // contamination
    auto* ct = app.add_subcommand("contamination", "watchlist contamination detection");
    std::string ct_pack, ct_in;
    bool ct_json = false, ct_fold = false;
    ct->add_option("--pack", ct_pack, "language pack")->required();
    ct->add_option("--in", ct_in, "responses (text lines or JSONL; default: stdin)");
    ct->add_flag("--json", ct_json, "machine-readable output");
    ct->add_flag("--fold-diacritics", ct_fold, "match with diacritics stripped");

    // compile-prompt
    auto* cp = app.add_subcommand("compile-prompt", "compile a layered prompt");
    std::string cp_pack, cp_version = "v4", cp_order, cp_counter_kind = "whitespace",
                cp_counter_path, cp_out;
    std::vector<std::string> cp_ablations;
    size_t cp_examples = 10;
    bool cp_corrupted = false, cp_no_emphasis = false, cp_json = false;
    cp->add_option("--pack", cp_pack, "language pack")->required();
    cp->add_option("--version", cp_version, "prompt version v1..v4")->capture_default_str();
    cp->add_option("--ablate", cp_ablations, "ablations (repeatable)");
    cp->add_option("--order", cp_order, "comma-separated layer order");
    cp->add_option("--examples", cp_examples, "few-shot example count")->capture_default_str();
    cp->add_flag("--corrupted", cp_corrupted, "render the falsified grammar variant");
    cp->add_flag("--no-emphasis", cp_no_emphasis, "plain constraint wording");
    cp->add_option("--counter-kind", cp_counter_kind, "whitespace|greedy|replay")
        ->capture_default_str();
    cp->add_option("--counter-path", cp_counter_path, "counter data file");
    cp->add_flag("--json", cp_json, "emit JSON with per-layer metadata");
    cp->add_option("--out", cp_out, "write prompt to file");

    // generate
    auto* gen = app.add_subcommand("generate", "self-play synthetic pair generation");
    std::string gen_config, gen_mode, gen_out;
    size_t gen_n = 0;
    gen->add_option("--config", gen_config, "experiment config")->required();
    gen->add_option("--mode", gen_mode, "live|record|replay override");
    gen->add_option("--n", gen_n, "number of pairs (default: config generate_n)");
    gen->add_option("--out", gen_out, "output JSONL for raw pairs");

    // filter
    auto* fl = app.add_subcommand("filter", "multi-judge threshold filtering");
    std::string fl_scores, fl_raw, fl_config, fl_mode, fl_out;
    bool fl_per_dimension = false, fl_json = false;
    fl->add_option("--scores-in", fl_scores, "pre-scored examples JSONL");
    fl->add_option("--raw-in", fl_raw, "raw examples JSONL to judge via the gateway");
    fl->add_option("--config", fl_config, "experiment config (for --raw-in judging)");
    fl->add_option("--mode", fl_mode, "live|record|replay override");
    fl->add_option("--out", fl_out, "output JSONL for retained examples");
    fl->add_flag("--per-dimension", fl_per_dimension, "alternate mean reading per dimension");
    fl->add_flag("--json", fl_json, "machine-readable output");

    // run / falsify / script-study / sensitivity
    auto* run = app.add_subcommand("run", "run the configuration matrix");
    std::string run_config, run_mode;
    run->add_option("--config", run_config, "experiment config")->required();
    run->add_option("--mode", run_mode, "live|record|replay override");

    auto* fal = app.add_subcommand("falsify", "run the falsification experiment");
    std::string fal_config, fal_mode;
    fal->add_option("--config", fal_config, "experiment config")->required();
    fal->add_option("--mode", fal_mode, "live|record|replay override");

    auto* ss = app.add_subcommand("script-study", "run the script-condition study");
    std::string ss_config, ss_mode;
    ss->add_option("--config", ss_config, "experiment config")->required();
    ss->add_option("--mode", ss_mode, "live|record|replay override");

    auto* sv = app.add_subcommand("sensitivity", "run a sensitivity sweep");
    std::string sv_config, sv_mode, sv_sweep;
    sv->add_option("--config", sv_config, "experiment config")->required();
    sv->add_option("--sweep", sv_sweep, "temperature|top_p|ordering|seeds")->required();
    sv->add_option("--mode", sv_mode, "live|record|replay override");

    // agreement
    auto* ag = app.add_subcommand("agreement", "inter-annotator agreement from files");
    std::vector<std::string> ag_files;
    bool ag_json = false;
    ag->add_option("--files", ag_files, "annotator JSONL files")->required()->expected(-2);
    ag->add_flag("--json", ag_json, "machine-readable output");

    // report
    auto* rp = app.add_subcommand("report", "re-render a report.json");
    std::string rp_in, rp_format = "markdown", rp_out = ".";
    rp->add_option("--in", rp_in, "report.json path")->required();
    rp->add_option("--format", rp_format, "markdown|json|csv")->capture_default_str();
    rp->add_option("--out", rp_out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (pv->parsed()) return cmd_pack_validate(opts, pv_paths, pv_json);
        if (tr->parsed())
            return cmd_transliterate(opts, tr_pack, tr_in, tr_lenient, tr_normalize, tr_classify);
        if (cg->parsed()) return cmd_check_grammar(opts, cg_pack, cg_in, cg_json);
        if (ct->parsed()) return cmd_contamination(opts, ct_pack, ct_in, ct_json, ct_fold);
        if (cp->parsed())
            return cmd_compile_prompt(opts, cp_pack, cp_version, cp_ablations, cp_order,
                                      cp_examples, cp_corrupted, cp_no_emphasis, cp_counter_kind,
                                      cp_counter_path, cp_json, cp_out);
        if (gen->parsed()) return cmd_generate(opts, gen_config, gen_mode, gen_n, gen_out);
        if (fl->parsed())
            return cmd_filter(opts, fl_scores, fl_raw, fl_config, fl_mode, fl_out,
                              fl_per_dimension, fl_json);
        if (run->parsed()) {
            ExperimentConfig cfg = load_config(opts, run_config, run_mode);
            return emit_and_summarize(run_matrix(cfg, transport_for(cfg.mode)), cfg);
        }
        if (fal->parsed()) {
            ExperimentConfig cfg = load_config(opts, fal_config, fal_mode);
            MetricReport report = run_falsification(cfg, transport_for(cfg.mode));
            int rc = emit_and_summarize(report, cfg);
            if (report.extra.contains("deltas"))
                std::cout << "deltas: " << report.extra.at("deltas").dump() << "\n";
            return rc;
        }
        if (ss->parsed()) {
            ExperimentConfig cfg = load_config(opts, ss_config, ss_mode);
            MetricReport report = run_script_conditions(cfg, transport_for(cfg.mode));
            int rc = emit_and_summarize(report, cfg);
            if (report.extra.contains("conditions"))
                std::cout << "conditions: " << report.extra.at("conditions").dump() << "\n";
            return rc;
        }
        if (sv->parsed()) {
            ExperimentConfig cfg = load_config(opts, sv_config, sv_mode);
            MetricReport report = run_sensitivity(cfg, sweep_from_string(sv_sweep),
                                                  transport_for(cfg.mode));
            int rc = emit_and_summarize(report, cfg);
            if (report.extra.contains("summary"))
                std::cout << "summary: " << report.extra.at("summary").dump() << "\n";
            return rc;
        }
        if (ag->parsed()) return cmd_agreement(opts, ag_files, ag_json);
        if (rp->parsed()) return cmd_report(opts, rp_in, rp_format, rp_out);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
