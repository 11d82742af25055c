#pragma once

// Self-play synthetic data generation and multi-judge threshold filtering,
// with strict split hygiene: held-out questions may never overlap training
// material, and synthetic examples may never land in the held-out split.

#include <algorithm>
#include <array>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "tulukit/dataset.hpp"
#include "tulukit/gateway.hpp"
#include "tulukit/language_pack.hpp"
#include "tulukit/prompt.hpp"

namespace tulu {

// ---------------------------------------------------------------------------
// Filtering

enum class FilterMeanMode { grand, per_dimension };

struct FilterThresholds {
    double mean_floor = 3.5;      // grand mean must be strictly above
    int min_score = 2;            // every dimension score must be at least
    double judge_std_ceiling = 1.0;  // population std of per-judge means, strictly below
    FilterMeanMode mean_mode = FilterMeanMode::grand;
};

struct FilterDecision {
    bool retained = false;
    double grand_mean = 0.0;
    int min_score = 0;
    double judge_std = 0.0;
    std::vector<std::string> reasons;  // failed criteria; empty iff retained
};

inline FilterDecision filter_example(const JudgeScoreSet& scores,
                                     const FilterThresholds& thresholds = {}) {
    scores.validate();
    FilterDecision d;
    d.grand_mean = scores.grand_mean();
    d.min_score = scores.min_score();

    double mean = 0.0;
    for (size_t j = 0; j < kJudgeCount; ++j) mean += scores.judge_mean(j);
    mean /= static_cast<double>(kJudgeCount);
    double var = 0.0;
    for (size_t j = 0; j < kJudgeCount; ++j) {
        double dev = scores.judge_mean(j) - mean;
        var += dev * dev;
    }
    d.judge_std = std::sqrt(var / static_cast<double>(kJudgeCount));

    if (thresholds.mean_mode == FilterMeanMode::grand) {
        if (!(d.grand_mean > thresholds.mean_floor)) d.reasons.push_back("grand_mean");
    } else {
        // Alternate reading: each dimension's mean across judges clears the floor.
        for (size_t dim = 0; dim < kJudgeDimensions.size(); ++dim) {
            double dim_mean = 0.0;
            for (size_t j = 0; j < kJudgeCount; ++j) dim_mean += scores.scores[j][dim];
            dim_mean /= static_cast<double>(kJudgeCount);
            if (!(dim_mean > thresholds.mean_floor)) {
                d.reasons.push_back("dimension_mean");
                break;
            }
        }
    }
    if (d.min_score < thresholds.min_score) d.reasons.push_back("min_score");
    if (!(d.judge_std < thresholds.judge_std_ceiling)) d.reasons.push_back("judge_std");

    d.retained = d.reasons.empty();
    return d;
}

struct FilterBatchResult {
    std::vector<DatasetExample> retained;  // provenance promoted to synthetic_filtered
    std::vector<FilterDecision> decisions;  // aligned with the input order
    size_t total = 0;
    std::optional<double> retention_percent;
};

inline FilterBatchResult filter_examples(const std::vector<DatasetExample>& scored,
                                         const FilterThresholds& thresholds = {}) {
    FilterBatchResult out;
    out.total = scored.size();
    for (const auto& ex : scored) {
        if (!ex.judge_scores) throw Error("filter_examples: example has no judge scores");
        FilterDecision d = filter_example(*ex.judge_scores, thresholds);
        if (d.retained) {
            DatasetExample kept = ex;
            kept.provenance = Provenance::synthetic_filtered;
            kept.split = Split::train;
            out.retained.push_back(std::move(kept));
        }
        out.decisions.push_back(std::move(d));
    }
    if (out.total > 0)
        out.retention_percent =
            100.0 * static_cast<double>(out.retained.size()) / static_cast<double>(out.total);
    return out;
}

// ---------------------------------------------------------------------------
// Generation

inline std::string render_generation_request(const LanguagePack& pack, size_t index) {
    Category category = static_cast<Category>(index % kCategoryNames.size());
    std::ostringstream out;
    out << "Create one new question-answer pair entirely in " << pack.target_language_name
        << " using the standardized romanization.\n"
        << "Topic category: " << to_string(category) << ".\n"
        << "Output exactly two lines and nothing else:\n"
        << "Q: <the question>\n"
        << "A: <the answer>\n"
        << "Pair number: " << (index + 1) << ".";
    return out.str();
}

inline std::optional<std::pair<std::string, std::string>> parse_generated_pair(
    const std::string& response) {
    std::istringstream in(response);
    std::string line, question, answer;
    auto trimmed = [](std::string s) {
        size_t b = s.find_first_not_of(" \t\r");
        size_t e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        std::string t = trimmed(line);
        if (t.rfind("Q:", 0) == 0 && question.empty()) question = trimmed(t.substr(2));
        else if (t.rfind("A:", 0) == 0 && answer.empty()) answer = trimmed(t.substr(2));
    }
    if (question.empty() || answer.empty()) return std::nullopt;
    return std::make_pair(question, answer);
}

struct GenerationResult {
    std::vector<DatasetExample> examples;  // provenance synthetic_raw
    size_t parse_failures = 0;
    std::vector<GatewayErrorInfo> errors;
};

// One request per pair; unparseable outputs are dropped and counted, gateway
// errors are collected per item.
inline GenerationResult generate_pairs(const LanguagePack& pack, const LayeredPrompt& prompt,
                                       size_t n, LlmGateway& gateway,
                                       const ChatRequest& base_request,
                                       size_t max_in_flight = 4) {
    std::vector<ChatRequest> requests;
    requests.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        ChatRequest r = base_request;
        r.system_prompt = prompt.text();
        r.user_message = render_generation_request(pack, i);
        requests.push_back(std::move(r));
    }
    GenerationResult result;
    for (auto& item : gateway.send_batch(requests, max_in_flight)) {
        if (item.error) {
            result.errors.push_back(*item.error);
            continue;
        }
        auto pair = parse_generated_pair(item.record->response_text);
        if (!pair) {
            ++result.parse_failures;
            continue;
        }
        DatasetExample ex;
        ex.question = uni::compose_canonical(pair->first);
        ex.answer = uni::compose_canonical(pair->second);
        ex.category = static_cast<Category>(result.examples.size() % kCategoryNames.size());
        ex.provenance = Provenance::synthetic_raw;
        ex.split = Split::train;
        result.examples.push_back(std::move(ex));
    }
    return result;
}

// ---------------------------------------------------------------------------
// Judging

inline std::string render_judge_request(const DatasetExample& example) {
    std::ostringstream out;
    out << "Score the following question-answer pair on four dimensions, each as an "
           "integer from 1 to 5.\n"
        << "Reply with exactly four lines, one per dimension, formatted \"dimension: score\".\n"
        << "Dimensions:";
    for (const char* dim : kJudgeDimensions) out << " " << dim;
    out << "\nQ: " << example.question << "\nA: " << example.answer;
    return out.str();
}

// Strict "dimension: score" parsing; a missing dimension or an out-of-range
// integer is an error, never clamped.
inline std::array<int, 4> parse_judge_response(const std::string& response) {
    std::array<int, 4> scores{};
    std::array<bool, 4> seen{};
    std::istringstream in(response);
    std::string line;
    while (std::getline(in, line)) {
        auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string name = line.substr(0, colon);
        name.erase(std::remove_if(name.begin(), name.end(),
                                  [](unsigned char c) { return c == ' ' || c == '\t' || c == '-' || c == '*'; }),
                   name.end());
        std::string folded = uni::fold_case(name);
        for (size_t d = 0; d < kJudgeDimensions.size(); ++d) {
            if (folded != kJudgeDimensions[d]) continue;
            std::string value = line.substr(colon + 1);
            int score = 0;
            try {
                score = std::stoi(value);
            } catch (const std::invalid_argument&) {
                throw ParseError("judge response has a non-integer score for " +
                                 std::string(kJudgeDimensions[d]));
            } catch (const std::out_of_range&) {
                throw ValidationError("judge_score_range",
                                      "judge score out of range for " +
                                          std::string(kJudgeDimensions[d]));
            }
            if (score < 1 || score > 5)
                throw ValidationError("judge_score_range",
                                      "judge score " + std::to_string(score) +
                                          " outside [1,5] for " + kJudgeDimensions[d]);
            scores[d] = score;
            seen[d] = true;
        }
    }
    for (size_t d = 0; d < seen.size(); ++d)
        if (!seen[d])
            throw ParseError("judge response missing dimension " + std::string(kJudgeDimensions[d]));
    return scores;
}

// Three judge configurations score the example; both question and answer are
// shown to each judge.
inline JudgeScoreSet judge_example(const DatasetExample& example,
                                   const std::array<ChatRequest, kJudgeCount>& judges,
                                   LlmGateway& gateway) {
    JudgeScoreSet set;
    for (size_t j = 0; j < kJudgeCount; ++j) {
        ChatRequest r = judges[j];
        r.user_message = render_judge_request(example);
        ResponseRecord rec = gateway.send(r);
        set.scores[j] = parse_judge_response(rec.response_text);
    }
    set.validate();
    return set;
}

// ---------------------------------------------------------------------------
// Assembly

inline std::string normalized_question_key(const std::string& question,
                                           const TransliterationScheme& scheme) {
    return uni::fold_case(normalize_roman(uni::compose_canonical(question), scheme));
}

// Drops repeated synthetic questions (normalized-text equality), keeping the
// first occurrence.
inline std::vector<DatasetExample> dedupe_examples(const std::vector<DatasetExample>& examples,
                                                   const TransliterationScheme& scheme) {
    std::vector<DatasetExample> out;
    std::unordered_set<std::string> seen;
    for (const auto& ex : examples)
        if (seen.insert(normalized_question_key(ex.question, scheme)).second) out.push_back(ex);
    return out;
}

struct DatasetManifest {
    std::string pack_id;
    std::string prompt_hash;
    size_t seed_count = 0;
    size_t synthetic_filtered_count = 0;
    size_t heldout_count = 0;
    std::optional<double> retention_percent;  // absent when nothing was generated
    std::vector<DatasetExample> examples;
};

// Split hygiene is a hard error: held-out questions must not appear in seed
// or filtered material, and held-out entries must be manual.
inline DatasetManifest assemble_dataset(const LanguagePack& pack,
                                        const std::vector<DatasetExample>& seed,
                                        const std::vector<DatasetExample>& filtered,
                                        const std::vector<DatasetExample>& heldout,
                                        size_t raw_generated_count = 0,
                                        const std::string& prompt_hash = "") {
    std::unordered_set<std::string> train_keys;
    for (const auto& ex : seed)
        train_keys.insert(normalized_question_key(ex.question, pack.scheme));
    for (const auto& ex : filtered)
        train_keys.insert(normalized_question_key(ex.question, pack.scheme));

    for (const auto& ex : heldout) {
        if (ex.provenance != Provenance::manual)
            throw ValidationError("heldout_synthetic_provenance",
                                  "held-out example '" + ex.question + "' is synthetic");
        if (train_keys.count(normalized_question_key(ex.question, pack.scheme)))
            throw ValidationError("heldout_overlap",
                                  "held-out question '" + ex.question +
                                      "' also appears in training material");
    }

    DatasetManifest manifest;
    manifest.pack_id = pack.id;
    manifest.prompt_hash = prompt_hash;
    manifest.seed_count = seed.size();
    manifest.synthetic_filtered_count = filtered.size();
    manifest.heldout_count = heldout.size();
    if (raw_generated_count > 0)
        manifest.retention_percent = 100.0 * static_cast<double>(filtered.size()) /
                                     static_cast<double>(raw_generated_count);
    manifest.examples = seed;
    for (auto ex : filtered) {
        ex.split = Split::train;
        manifest.examples.push_back(std::move(ex));
    }
    for (auto ex : heldout) {
        ex.split = Split::heldout;
        manifest.examples.push_back(std::move(ex));
    }
    return manifest;
}

inline nlohmann::json manifest_to_json(const DatasetManifest& m) {
    nlohmann::json j = {
        {"pack_id", m.pack_id},
        {"prompt_hash", m.prompt_hash},
        {"counts",
         {{"seed", m.seed_count},
          {"synthetic_filtered", m.synthetic_filtered_count},
          {"heldout", m.heldout_count},
          {"total", m.examples.size()}}},
    };
    if (m.retention_percent) j["retention_percent"] = *m.retention_percent;
    nlohmann::json examples = nlohmann::json::array();
    for (const auto& ex : m.examples) examples.push_back(example_to_json(ex));
    j["examples"] = examples;
    return j;
}

}  // namespace tulu
