#pragma once

// Dataset example and judge-score types shared by the pack loader, the
// synthetic-data pipeline, and the harness.

#include <array>
#include <optional>
#include <string>

#include "tulukit/errors.hpp"

namespace tulu {

enum class Category { greetings, numbers_time, daily, grammar_demo, cultural };
enum class Provenance { manual, synthetic_raw, synthetic_filtered };
enum class Split { seed, train, heldout };

inline constexpr std::array<const char*, 5> kCategoryNames = {
    "greetings", "numbers_time", "daily", "grammar_demo", "cultural"};

inline std::string to_string(Category c) { return kCategoryNames[static_cast<size_t>(c)]; }

inline Category category_from_string(const std::string& s) {
    for (size_t i = 0; i < kCategoryNames.size(); ++i)
        if (s == kCategoryNames[i]) return static_cast<Category>(i);
    throw ParseError("unknown category: " + s);
}

inline std::string to_string(Provenance p) {
    switch (p) {
        case Provenance::manual: return "manual";
        case Provenance::synthetic_raw: return "synthetic_raw";
        case Provenance::synthetic_filtered: return "synthetic_filtered";
    }
    return "manual";
}

inline Provenance provenance_from_string(const std::string& s) {
    if (s == "manual") return Provenance::manual;
    if (s == "synthetic_raw") return Provenance::synthetic_raw;
    if (s == "synthetic_filtered") return Provenance::synthetic_filtered;
    throw ParseError("unknown provenance: " + s);
}

inline std::string to_string(Split s) {
    switch (s) {
        case Split::seed: return "seed";
        case Split::train: return "train";
        case Split::heldout: return "heldout";
    }
    return "seed";
}

inline Split split_from_string(const std::string& s) {
    if (s == "seed") return Split::seed;
    if (s == "train") return Split::train;
    if (s == "heldout") return Split::heldout;
    throw ParseError("unknown split: " + s);
}

// The four judged dimensions, in canonical order.
inline constexpr std::array<const char*, 4> kJudgeDimensions = {
    "grammaticality", "vocabulary_purity", "naturalness", "semantic_coherence"};
inline constexpr size_t kJudgeCount = 3;

// 3 judges x 4 dimensions, each score an integer in [1, 5].
struct JudgeScoreSet {
    std::array<std::array<int, 4>, kJudgeCount> scores{};

    bool operator==(const JudgeScoreSet&) const = default;

    void validate() const {
        for (const auto& judge : scores)
            for (int s : judge)
                if (s < 1 || s > 5)
                    throw ValidationError("judge_score_range",
                                          "judge score " + std::to_string(s) + " outside [1,5]");
    }

    double judge_mean(size_t judge) const {
        double sum = 0;
        for (int s : scores[judge]) sum += s;
        return sum / 4.0;
    }

    double grand_mean() const {
        double sum = 0;
        for (const auto& judge : scores)
            for (int s : judge) sum += s;
        return sum / 12.0;
    }

    int min_score() const {
        int m = 5;
        for (const auto& judge : scores)
            for (int s : judge) m = s < m ? s : m;
        return m;
    }
};

struct DatasetExample {
    std::string question;  // romanized
    std::string answer;    // romanized
    Category category = Category::daily;
    Provenance provenance = Provenance::manual;
    Split split = Split::seed;
    std::optional<std::string> region;
    std::optional<JudgeScoreSet> judge_scores;

    bool operator==(const DatasetExample&) const = default;
};

}  // namespace tulu
