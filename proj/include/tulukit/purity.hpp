#pragma once

// Vocabulary contamination detection against the watchlist, loanword
// allowance, lexicon coverage, and tokenization efficiency.
//
// Matching is whole-word, case-insensitive, and diacritic-sensitive by
// default; diacritic folding is opt-in because model outputs sometimes drop
// marks. Each watchlist form is matched both as written and in its
// normalized spelling, so naive-spelled entries (e.g. doubled vowels) still
// hit after upstream normalization has rewritten the response.

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "tulukit/grammar_check.hpp"
#include "tulukit/language_pack.hpp"
#include "tulukit/token_counter.hpp"

namespace tulu {

struct ContaminationHit {
    std::string prohibited;   // the watchlist form, as listed in the pack
    size_t begin = 0;         // byte span of the matched token
    size_t end = 0;
    std::string replacement;  // suggested target-language form
};

struct ContaminationResult {
    bool contaminated = false;  // always equals !hits.empty()
    std::vector<ContaminationHit> hits;
    std::vector<std::string> allowlisted_loans;  // tokens excused as loanwords
};

enum class DiacriticMode { sensitive, fold };

inline ContaminationResult detect_contamination(const std::string& text,
                                                const Watchlist& watchlist,
                                                const TransliterationScheme& scheme,
                                                DiacriticMode mode = DiacriticMode::sensitive) {
    auto canon = [&](const std::string& s) {
        std::string folded = uni::fold_case(uni::compose_canonical(s));
        return mode == DiacriticMode::fold ? uni::strip_marks(folded) : folded;
    };

    // pair index by every spelling a prohibited form can take.
    std::unordered_map<std::string, size_t> prohibited_index;
    for (size_t i = 0; i < watchlist.pairs.size(); ++i) {
        const auto& pair = watchlist.pairs[i];
        prohibited_index.emplace(canon(pair.prohibited), i);
        prohibited_index.emplace(canon(normalize_roman(pair.prohibited, scheme)), i);
    }
    std::unordered_map<std::string, std::string> allowlist;
    for (const auto& loan : watchlist.loanword_allowlist) {
        allowlist.emplace(canon(loan), loan);
        allowlist.emplace(canon(normalize_roman(loan, scheme)), loan);
    }

    ContaminationResult result;
    std::string composed = uni::compose_canonical(text);
    for (const auto& word : uni::split_words(composed)) {
        std::string key = canon(word.text);
        if (auto loan = allowlist.find(key); loan != allowlist.end()) {
            result.allowlisted_loans.push_back(word.text);
            continue;
        }
        if (auto hit = prohibited_index.find(key); hit != prohibited_index.end()) {
            const auto& pair = watchlist.pairs[hit->second];
            result.hits.push_back({pair.prohibited, word.begin, word.end, pair.replacement});
        }
    }
    result.contaminated = !result.hits.empty();
    return result;
}

inline ContaminationResult detect_contamination(const std::string& text, const LanguagePack& pack,
                                                DiacriticMode mode = DiacriticMode::sensitive) {
    return detect_contamination(text, pack.watchlist, pack.scheme, mode);
}

inline double contamination_rate(const std::vector<ContaminationResult>& results) {
    if (results.empty()) throw Error("contamination_rate: empty result list");
    size_t contaminated = 0;
    for (const auto& r : results)
        if (r.contaminated) ++contaminated;
    return 100.0 * static_cast<double>(contaminated) / static_cast<double>(results.size());
}

// Share of alphabetic tokens found in the lexicon, counting case-suffixed
// tokens whose stem resolves. Absent for empty text.
inline std::optional<double> vocabulary_coverage(const std::string& text,
                                                 const LanguagePack& pack) {
    std::string composed = uni::compose_canonical(text);
    size_t tokens = 0, known = 0;
    for (const auto& word : uni::split_words(composed)) {
        ++tokens;
        std::string t = uni::fold_case(word.text);
        if (pack.lexicon_has(t)) {
            ++known;
            continue;
        }
        auto decomps = detail::case_decompositions(pack, t);
        for (const auto& d : decomps) {
            if (d.licensed) {
                ++known;
                break;
            }
        }
    }
    if (tokens == 0) return std::nullopt;
    return 100.0 * static_cast<double>(known) / static_cast<double>(tokens);
}

inline double tokens_per_word(const std::string& text, const TokenCounter& counter) {
    size_t words = 0;
    bool in_word = false;
    for (char c : text) {
        bool ws = c == ' ' || c == '\t' || c == '\n' || c == '\r';
        if (!ws && !in_word) ++words;
        in_word = !ws;
    }
    if (words == 0) throw Error("tokens_per_word: text has no words");
    return static_cast<double>(counter.count(text)) / static_cast<double>(words);
}

}  // namespace tulu
