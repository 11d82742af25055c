#pragma once

// Report serialization and emission. Given a report, every emitted byte is a
// pure function of its contents: JSON keys are sorted, floats use nlohmann's
// shortest-round-trip printing, and the determinism hash is computed over
// the canonical JSON with the volatile generated_at field removed.

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "tulukit/harness.hpp"

#include "json.hpp"

namespace tulu {

namespace detail {

inline nlohmann::json opt_json(const std::optional<double>& v) {
    if (v) return *v;
    return nullptr;
}

inline std::optional<double> opt_from_json(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<double>();
}

}  // namespace detail

inline nlohmann::json report_to_json(const MetricReport& report) {
    nlohmann::json j;
    j["experiment"] = report.experiment;
    j["pack_id"] = report.pack_id;
    j["pack_hash"] = report.pack_hash;
    j["mode"] = report.mode;
    j["counter"] = report.counter_name;
    j["stats"] = {{"resamples", report.stats.resamples},
                  {"seed", report.stats.seed},
                  {"alpha", report.stats.alpha}};
    if (!report.generated_at.empty()) j["generated_at"] = report.generated_at;

    nlohmann::json cells = nlohmann::json::array();
    for (const auto& cell : report.cells) {
        nlohmann::json c = {
            {"label", cell.label},
            {"provider", cell.provider_id},
            {"model", cell.model_id},
            {"prompt_hash", cell.prompt_hash},
            {"status", cell.failed ? "failed" : "done"},
            {"aggregates",
             {{"contamination_pct", detail::opt_json(cell.contamination_pct)},
              {"grammar_pct", detail::opt_json(cell.grammar_pct)},
              {"grammar_applicable", cell.grammar_applicable},
              {"coverage_mean", detail::opt_json(cell.coverage_mean)},
              {"tokens_per_word_mean", detail::opt_json(cell.tokens_per_word_mean)}}},
        };
        if (cell.failed) c["error"] = cell.error;
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& row : cell.rows) {
            nlohmann::json r = {
                {"question", row.question},
                {"response", row.response},
                {"response_normalized", row.response_normalized},
                {"contaminated", row.contaminated},
                {"hits", row.hits},
                {"grammar", row.grammar},
                {"checkable", row.checkable},
                {"coverage", detail::opt_json(row.coverage)},
                {"tokens_per_word", detail::opt_json(row.tokens_per_word)},
            };
            if (row.region) r["region"] = *row.region;
            if (!row.script_condition.empty()) r["script_condition"] = row.script_condition;
            rows.push_back(r);
        }
        c["responses"] = rows;
        cells.push_back(c);
    }
    j["cells"] = cells;

    nlohmann::json comparisons = nlohmann::json::array();
    for (const auto& c : report.comparisons)
        comparisons.push_back({{"metric", c.metric},
                               {"cell_a", c.cell_a},
                               {"cell_b", c.cell_b},
                               {"observed_diff", c.observed_diff},
                               {"p_value", c.p_value},
                               {"ci_low", c.ci_low},
                               {"ci_high", c.ci_high},
                               {"adjusted_p", c.adjusted_p},
                               {"rejected", c.rejected},
                               {"n", c.n}});
    j["comparisons"] = comparisons;

    nlohmann::json groups = nlohmann::json::array();
    for (const auto& g : report.groups)
        groups.push_back({{"cell", g.cell},
                          {"group", g.group},
                          {"n", g.n},
                          {"contamination_pct", detail::opt_json(g.contamination_pct)},
                          {"grammar_pct", detail::opt_json(g.grammar_pct)}});
    j["groups"] = groups;
    j["extra"] = report.extra;

    nlohmann::json hashable = j;
    hashable.erase("generated_at");
    j["determinism_hash"] = content_hash(hashable.dump());
    return j;
}

inline MetricReport report_from_json(const nlohmann::json& j) {
    MetricReport report;
    report.experiment = j.at("experiment").get<std::string>();
    report.pack_id = j.value("pack_id", std::string{});
    report.pack_hash = j.value("pack_hash", std::string{});
    report.mode = j.value("mode", std::string{});
    report.counter_name = j.value("counter", std::string{});
    if (j.contains("stats")) {
        report.stats.resamples = j.at("stats").value("resamples", report.stats.resamples);
        report.stats.seed = j.at("stats").value("seed", report.stats.seed);
        report.stats.alpha = j.at("stats").value("alpha", report.stats.alpha);
    }
    report.generated_at = j.value("generated_at", std::string{});
    for (const auto& c : j.value("cells", nlohmann::json::array())) {
        CellResult cell;
        cell.label = c.at("label").get<std::string>();
        cell.provider_id = c.value("provider", std::string{});
        cell.model_id = c.value("model", std::string{});
        cell.prompt_hash = c.value("prompt_hash", std::string{});
        cell.failed = c.value("status", "done") == "failed";
        cell.error = c.value("error", std::string{});
        const auto& agg = c.at("aggregates");
        cell.contamination_pct = detail::opt_from_json(agg, "contamination_pct");
        cell.grammar_pct = detail::opt_from_json(agg, "grammar_pct");
        cell.grammar_applicable = agg.value("grammar_applicable", 0ULL);
        cell.coverage_mean = detail::opt_from_json(agg, "coverage_mean");
        cell.tokens_per_word_mean = detail::opt_from_json(agg, "tokens_per_word_mean");
        for (const auto& r : c.value("responses", nlohmann::json::array())) {
            ResponseRow row;
            row.question = r.at("question").get<std::string>();
            row.response = r.at("response").get<std::string>();
            row.response_normalized = r.value("response_normalized", std::string{});
            row.contaminated = r.value("contaminated", false);
            row.hits = r.value("hits", std::vector<std::string>{});
            row.grammar = r.value("grammar", std::string{});
            row.checkable = r.value("checkable", 0ULL);
            row.coverage = detail::opt_from_json(r, "coverage");
            row.tokens_per_word = detail::opt_from_json(r, "tokens_per_word");
            if (r.contains("region")) row.region = r.at("region").get<std::string>();
            row.script_condition = r.value("script_condition", std::string{});
            cell.rows.push_back(std::move(row));
        }
        report.cells.push_back(std::move(cell));
    }
    for (const auto& c : j.value("comparisons", nlohmann::json::array())) {
        Comparison comp;
        comp.metric = c.at("metric").get<std::string>();
        comp.cell_a = c.at("cell_a").get<std::string>();
        comp.cell_b = c.at("cell_b").get<std::string>();
        comp.observed_diff = c.value("observed_diff", 0.0);
        comp.p_value = c.value("p_value", 1.0);
        comp.ci_low = c.value("ci_low", 0.0);
        comp.ci_high = c.value("ci_high", 0.0);
        comp.adjusted_p = c.value("adjusted_p", 1.0);
        comp.rejected = c.value("rejected", false);
        comp.n = c.value("n", 0ULL);
        report.comparisons.push_back(std::move(comp));
    }
    for (const auto& g : j.value("groups", nlohmann::json::array())) {
        GroupAggregate agg;
        agg.cell = g.at("cell").get<std::string>();
        agg.group = g.at("group").get<std::string>();
        agg.n = g.value("n", 0ULL);
        agg.contamination_pct = detail::opt_from_json(g, "contamination_pct");
        agg.grammar_pct = detail::opt_from_json(g, "grammar_pct");
        report.groups.push_back(std::move(agg));
    }
    report.extra = j.value("extra", nlohmann::json::object());
    return report;
}

inline MetricReport load_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open report: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("report " + path + ": " + e.what());
    }
    return report_from_json(doc);
}

// ---------------------------------------------------------------------------
// Rendering

namespace detail {

inline std::string fmt_pct(const std::optional<double>& v) {
    if (!v) return "—";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", *v);
    return buf;
}

inline std::string fmt_num(double v, const char* spec = "%.4g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

inline std::string csv_escape(const std::string& s) {
    bool needs_quotes = s.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quotes) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

}  // namespace detail

inline std::string render_report_markdown(const MetricReport& report) {
    std::ostringstream md;
    md << "# Experiment report: " << report.experiment << "\n\n";
    md << "- pack: `" << report.pack_id << "` (hash `" << report.pack_hash << "`)\n";
    md << "- mode: " << report.mode << "\n";
    md << "- counter: " << report.counter_name << "\n";
    if (!report.generated_at.empty()) md << "- generated: " << report.generated_at << "\n";
    md << "\n";

    // Model x configuration table with a Gram/Cont column pair per cell label.
    std::vector<std::string> labels;
    std::vector<std::string> models;
    for (const auto& cell : report.cells) {
        std::string model = cell.provider_id + "/" + cell.model_id;
        if (std::find(labels.begin(), labels.end(), cell.label) == labels.end())
            labels.push_back(cell.label);
        if (std::find(models.begin(), models.end(), model) == models.end())
            models.push_back(model);
    }
    md << "## Results\n\n";
    md << "| Model |";
    for (const auto& label : labels) md << " " << label << " Gram | " << label << " Cont |";
    md << "\n|---|";
    for (size_t i = 0; i < labels.size(); ++i) md << "---|---|";
    md << "\n";
    for (const auto& model : models) {
        md << "| " << model << " |";
        for (const auto& label : labels) {
            const CellResult* found = nullptr;
            for (const auto& cell : report.cells)
                if (cell.label == label && cell.provider_id + "/" + cell.model_id == model)
                    found = &cell;
            if (!found) {
                md << " — | — |";
            } else if (found->failed) {
                md << " failed | failed |";
            } else {
                md << " " << detail::fmt_pct(found->grammar_pct) << " | "
                   << detail::fmt_pct(found->contamination_pct) << " |";
            }
        }
        md << "\n";
    }
    md << "\n";

    bool any_extra_metrics = false;
    for (const auto& cell : report.cells)
        if (cell.coverage_mean || cell.tokens_per_word_mean) any_extra_metrics = true;
    if (any_extra_metrics) {
        md << "## Per-cell metrics\n\n";
        md << "| Cell | Gram | Cont | Vocab | Tok/Word | Responses |\n";
        md << "|---|---|---|---|---|---|\n";
        for (const auto& cell : report.cells) {
            md << "| " << cell.label << " | " << detail::fmt_pct(cell.grammar_pct) << " | "
               << detail::fmt_pct(cell.contamination_pct) << " | "
               << detail::fmt_pct(cell.coverage_mean) << " | ";
            if (cell.tokens_per_word_mean)
                md << detail::fmt_num(*cell.tokens_per_word_mean, "%.2f");
            else
                md << "—";
            md << " | " << cell.rows.size() << " |\n";
        }
        md << "\n";
    }

    if (!report.comparisons.empty()) {
        md << "## Pairwise significance (paired bootstrap, Holm-Bonferroni)\n\n";
        md << "| Metric | A | B | Diff (B−A) | p | adj. p | significant | n |\n";
        md << "|---|---|---|---|---|---|---|---|\n";
        for (const auto& c : report.comparisons) {
            md << "| " << c.metric << " | " << c.cell_a << " | " << c.cell_b << " | "
               << detail::fmt_num(c.observed_diff, "%.4f") << " | "
               << detail::fmt_num(c.p_value, "%.4g") << " | "
               << detail::fmt_num(c.adjusted_p, "%.4g") << " | " << (c.rejected ? "yes" : "no")
               << " | " << c.n << " |\n";
        }
        md << "\n";
    }

    if (!report.groups.empty()) {
        md << "## Group breakdown\n\n";
        md << "| Cell | Group | n | Gram | Cont |\n|---|---|---|---|---|\n";
        for (const auto& g : report.groups)
            md << "| " << g.cell << " | " << g.group << " | " << g.n << " | "
               << detail::fmt_pct(g.grammar_pct) << " | " << detail::fmt_pct(g.contamination_pct)
               << " |\n";
        md << "\n";
    }

    if (!report.extra.empty() && !report.extra.is_null()) {
        md << "## Details\n\n```json\n" << report.extra.dump(2) << "\n```\n";
    }
    return md.str();
}

inline std::string render_report_csv(const MetricReport& report) {
    std::ostringstream csv;
    csv << "cell,question,response,contaminated,hits,grammar,checkable,coverage,"
           "tokens_per_word,region,script_condition\n";
    for (const auto& cell : report.cells) {
        for (const auto& row : cell.rows) {
            std::string hits;
            for (size_t i = 0; i < row.hits.size(); ++i) {
                if (i) hits += ";";
                hits += row.hits[i];
            }
            csv << detail::csv_escape(cell.label) << "," << detail::csv_escape(row.question) << ","
                << detail::csv_escape(row.response) << "," << (row.contaminated ? "1" : "0") << ","
                << detail::csv_escape(hits) << "," << row.grammar << "," << row.checkable << ",";
            if (row.coverage) csv << detail::fmt_num(*row.coverage, "%.6g");
            csv << ",";
            if (row.tokens_per_word) csv << detail::fmt_num(*row.tokens_per_word, "%.6g");
            csv << "," << detail::csv_escape(row.region.value_or("")) << ","
                << detail::csv_escape(row.script_condition) << "\n";
        }
    }
    return csv.str();
}

enum class ReportFormat { markdown, json, csv };

inline ReportFormat report_format_from_string(const std::string& s) {
    if (s == "markdown" || s == "md") return ReportFormat::markdown;
    if (s == "json") return ReportFormat::json;
    if (s == "csv") return ReportFormat::csv;
    throw ParseError("unknown report format: " + s);
}

// Writes report.md / report.json / responses.csv into out_dir and returns
// the paths written.
inline std::vector<std::string> emit_report(const MetricReport& report,
                                            const std::vector<ReportFormat>& formats,
                                            const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;
    auto write = [&](const std::string& name, const std::string& contents) {
        std::filesystem::path path = std::filesystem::path(out_dir) / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        out << contents;
        written.push_back(path.string());
    };
    for (ReportFormat f : formats) {
        if (f == ReportFormat::markdown) write("report.md", render_report_markdown(report));
        else if (f == ReportFormat::json) write("report.json", report_to_json(report).dump(2) + "\n");
        else write("responses.csv", render_report_csv(report));
    }
    return written;
}

inline std::vector<std::string> emit_report_all(const MetricReport& report,
                                                const std::string& out_dir) {
    return emit_report(report,
                       {ReportFormat::markdown, ReportFormat::json, ReportFormat::csv}, out_dir);
}

}  // namespace tulu
