#pragma once

// Deterministic script transduction: Kannada script to a standardized
// romanization, normalization of naive roman input, and script-condition
// classification. The mapping table is data carried by the scheme; the
// engine is a plain leftmost-longest-match transducer.

#include <algorithm>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tulukit/errors.hpp"
#include "tulukit/hash.hpp"
#include "tulukit/unicode.hpp"

#include "json.hpp"

namespace tulu {

struct TranslitRule {
    std::u32string source;  // one or more codepoints
    std::string target;     // romanized UTF-8

    bool operator==(const TranslitRule&) const = default;
};

struct NormalizationRule {
    std::string pattern;
    std::string replacement;
    bool word_internal = false;  // apply only when preceded by a letter

    bool operator==(const NormalizationRule&) const = default;
};

// Base maps from which the composed rule list is derived. Consonant targets
// carry the inherent vowel ("ka"); the sign and virama forms strip it.
struct SyllabaryTables {
    std::vector<std::pair<char32_t, std::string>> consonants;
    std::vector<std::pair<char32_t, std::string>> independent_vowels;
    std::vector<std::pair<char32_t, std::string>> vowel_signs;
    std::vector<std::pair<char32_t, std::string>> standalone;
    char32_t virama = 0;

    bool empty() const {
        return consonants.empty() && independent_vowels.empty() &&
               vowel_signs.empty() && standalone.empty();
    }
    bool operator==(const SyllabaryTables&) const = default;
};

class TransliterationScheme {
public:
    SyllabaryTables tables;
    std::vector<TranslitRule> extra_rules;
    std::vector<std::string> alphabet;  // allowed output graphemes
    std::vector<NormalizationRule> normalization_rules;

    // Derives the composed rule list and lookup structures. Must be called
    // after the data members change; load paths call it for you.
    void compile() {
        rules_.clear();
        auto add = [&](std::u32string src, std::string tgt) {
            rules_.push_back({std::move(src), std::move(tgt)});
        };
        for (const auto& [cp, target] : tables.consonants) {
            add({cp}, target);
            std::string stem = strip_inherent_vowel(target);
            for (const auto& [sign_cp, vowel] : tables.vowel_signs)
                add({cp, sign_cp}, stem + vowel);
            if (tables.virama) add({cp, tables.virama}, stem);
        }
        for (const auto& [cp, target] : tables.independent_vowels) add({cp}, target);
        for (const auto& [cp, target] : tables.standalone) add({cp}, target);
        for (const auto& rule : extra_rules) rules_.push_back(rule);

        by_source_.clear();
        max_source_len_ = 0;
        for (const auto& rule : rules_) {
            by_source_.emplace(rule.source, rule.target);
            max_source_len_ = std::max(max_source_len_, rule.source.size());
        }

        alphabet_graphemes_.clear();
        max_grapheme_len_ = 0;
        diacritic_cps_.clear();
        for (const auto& g : alphabet) {
            std::u32string cps = uni::decode_utf8(g);
            alphabet_graphemes_.insert(cps);
            max_grapheme_len_ = std::max(max_grapheme_len_, cps.size());
            for (char32_t cp : cps)
                if (cp >= 0x80) diacritic_cps_.insert(cp);
        }
    }

    const std::vector<TranslitRule>& rules() const { return rules_; }
    size_t max_source_len() const { return max_source_len_; }

    const std::string* lookup(const std::u32string& source) const {
        auto it = by_source_.find(source);
        return it == by_source_.end() ? nullptr : &it->second;
    }

    bool has_duplicate_sources() const { return by_source_.size() != rules_.size(); }

    // True when the string decomposes into alphabet graphemes.
    bool in_alphabet(std::string_view text) const {
        std::u32string cps = uni::decode_utf8(text);
        size_t pos = 0;
        while (pos < cps.size()) {
            size_t len = std::min(max_grapheme_len_, cps.size() - pos);
            bool matched = false;
            for (; len >= 1; --len) {
                if (alphabet_graphemes_.count(cps.substr(pos, len))) {
                    matched = true;
                    break;
                }
            }
            if (!matched) return false;
            pos += len;
        }
        return true;
    }

    bool is_diacritic_cp(char32_t cp) const { return diacritic_cps_.count(cp) > 0; }

    bool has_diacritic(std::string_view text) const {
        for (char32_t cp : uni::decode_utf8(text))
            if (is_diacritic_cp(cp)) return true;
        return false;
    }

    bool operator==(const TransliterationScheme& other) const {
        return tables == other.tables && extra_rules == other.extra_rules &&
               alphabet == other.alphabet &&
               normalization_rules == other.normalization_rules;
    }

private:
    static std::string strip_inherent_vowel(const std::string& target) {
        if (!target.empty() && target.back() == 'a')
            return target.substr(0, target.size() - 1);
        return target;
    }

    struct U32Hash {
        size_t operator()(const std::u32string& s) const {
            uint64_t h = kFnvOffset;
            for (char32_t c : s) {
                h ^= static_cast<uint64_t>(c);
                h *= kFnvPrime;
            }
            return static_cast<size_t>(h);
        }
    };

    std::vector<TranslitRule> rules_;
    std::unordered_map<std::u32string, std::string, U32Hash> by_source_;
    std::unordered_set<std::u32string, U32Hash> alphabet_graphemes_;
    std::unordered_set<char32_t> diacritic_cps_;
    size_t max_source_len_ = 0;
    size_t max_grapheme_len_ = 0;
};

enum class ScriptCondition { kannada_script, naive_roman, standard_roman, mixed, unknown };

inline std::string to_string(ScriptCondition c) {
    switch (c) {
        case ScriptCondition::kannada_script: return "kannada_script";
        case ScriptCondition::naive_roman: return "naive_roman";
        case ScriptCondition::standard_roman: return "standard_roman";
        case ScriptCondition::mixed: return "mixed";
        case ScriptCondition::unknown: return "unknown";
    }
    return "unknown";
}

class TransliterationError : public Error {
public:
    TransliterationError(std::string msg, std::vector<char32_t> unmapped)
        : Error(std::move(msg)), unmapped_(std::move(unmapped)) {}
    const std::vector<char32_t>& unmapped() const { return unmapped_; }

private:
    std::vector<char32_t> unmapped_;
};

struct TranslitOutput {
    std::string text;
    std::vector<char32_t> unmapped;  // passed through (lenient mode only)
};

namespace detail {

inline TranslitOutput transliterate_impl(std::string_view text,
                                         const TransliterationScheme& scheme,
                                         bool lenient) {
    std::u32string cps = uni::compose_canonical(uni::decode_utf8(text));
    TranslitOutput out;
    out.text.reserve(text.size());
    size_t pos = 0;
    while (pos < cps.size()) {
        size_t len = std::min(scheme.max_source_len(), cps.size() - pos);
        const std::string* target = nullptr;
        for (; len >= 1; --len) {
            if ((target = scheme.lookup(cps.substr(pos, len)))) break;
        }
        if (target) {
            out.text += *target;
            pos += len;
            continue;
        }
        char32_t cp = cps[pos];
        if (!uni::is_word_char(cp)) {
            uni::append_utf8(out.text, cp);  // whitespace / punctuation
        } else if (lenient) {
            uni::append_utf8(out.text, cp);
            out.unmapped.push_back(cp);
        } else {
            std::vector<char32_t> bad;
            for (size_t i = pos; i < cps.size(); ++i) {
                if (uni::is_word_char(cps[i]) && !scheme.lookup({cps[i]})) bad.push_back(cps[i]);
            }
            std::string msg = "unmapped code points:";
            for (char32_t b : bad) {
                char buf[16];
                std::snprintf(buf, sizeof buf, " U+%04X", static_cast<unsigned>(b));
                msg += buf;
            }
            throw TransliterationError(msg, std::move(bad));
        }
        ++pos;
    }
    return out;
}

}  // namespace detail

// Strict: throws TransliterationError on any unmapped letter.
inline std::string transliterate(std::string_view text, const TransliterationScheme& scheme) {
    return detail::transliterate_impl(text, scheme, /*lenient=*/false).text;
}

// Lenient: unmapped letters pass through and are reported.
inline TranslitOutput transliterate_lenient(std::string_view text,
                                            const TransliterationScheme& scheme) {
    return detail::transliterate_impl(text, scheme, /*lenient=*/true);
}

// Applies the scheme's normalization rules in order, one left-to-right pass
// each, after canonical composition. Idempotent for the shipped rule sets.
inline std::string normalize_roman(std::string_view text, const TransliterationScheme& scheme) {
    std::u32string cps = uni::compose_canonical(uni::decode_utf8(text));
    for (const auto& rule : scheme.normalization_rules) {
        std::u32string pattern = uni::decode_utf8(rule.pattern);
        std::u32string replacement = uni::decode_utf8(rule.replacement);
        if (pattern.empty()) continue;
        std::u32string next;
        next.reserve(cps.size());
        size_t pos = 0;
        while (pos < cps.size()) {
            bool at_word_start = pos == 0 || !uni::is_word_char(cps[pos - 1]);
            bool applicable = !rule.word_internal || !at_word_start;
            if (applicable && cps.compare(pos, pattern.size(), pattern) == 0) {
                next += replacement;
                pos += pattern.size();
            } else {
                next.push_back(cps[pos]);
                ++pos;
            }
        }
        cps = std::move(next);
    }
    return uni::encode_utf8(cps);
}

// Script-condition thresholds. The classification treats >=90% Kannada
// letters as Kannada script and >=10% of each as mixed; both constants are
// fixed and documented rather than configurable.
inline constexpr double kKannadaShare = 0.90;
inline constexpr double kMixedShare = 0.10;

inline ScriptCondition classify_script(std::string_view text,
                                       const TransliterationScheme& scheme) {
    std::u32string cps = uni::compose_canonical(uni::decode_utf8(text));
    size_t kannada = 0, roman = 0;
    bool diacritic = false;
    for (char32_t cp : cps) {
        if (uni::is_kannada(cp)) ++kannada;
        else if (uni::is_roman_letter(cp)) ++roman;
        if (scheme.is_diacritic_cp(cp)) diacritic = true;
    }
    size_t total = kannada + roman;
    if (total == 0) return ScriptCondition::unknown;
    double k_share = static_cast<double>(kannada) / static_cast<double>(total);
    double r_share = static_cast<double>(roman) / static_cast<double>(total);
    if (k_share >= kKannadaShare) return ScriptCondition::kannada_script;
    if (k_share >= kMixedShare && r_share >= kMixedShare) return ScriptCondition::mixed;
    if (roman == 0) return ScriptCondition::unknown;
    if (diacritic) return ScriptCondition::standard_roman;
    // No diacritics: standard only if the text is already normalized and
    // every word decomposes into alphabet graphemes.
    std::string composed = uni::encode_utf8(cps);
    if (normalize_roman(composed, scheme) == composed) {
        bool all_words_in_alphabet = true;
        for (const auto& word : uni::split_words(composed)) {
            if (!scheme.in_alphabet(word.text)) {
                all_words_in_alphabet = false;
                break;
            }
        }
        if (all_words_in_alphabet) return ScriptCondition::standard_roman;
    }
    return ScriptCondition::naive_roman;
}

// ---------------------------------------------------------------------------
// Scheme JSON (the `scheme` section of a pack file)

inline nlohmann::json scheme_to_json(const TransliterationScheme& scheme) {
    nlohmann::json j;
    auto dump_map = [](const std::vector<std::pair<char32_t, std::string>>& m) {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [cp, target] : m)
            arr.push_back({uni::encode_utf8(cp), target});
        return arr;
    };
    j["syllabary"] = {
        {"consonants", dump_map(scheme.tables.consonants)},
        {"independent_vowels", dump_map(scheme.tables.independent_vowels)},
        {"vowel_signs", dump_map(scheme.tables.vowel_signs)},
        {"standalone", dump_map(scheme.tables.standalone)},
        {"virama", scheme.tables.virama ? uni::encode_utf8(scheme.tables.virama) : ""},
    };
    nlohmann::json extra = nlohmann::json::array();
    for (const auto& rule : scheme.extra_rules)
        extra.push_back({uni::encode_utf8(rule.source), rule.target});
    j["extra_rules"] = extra;
    j["alphabet"] = scheme.alphabet;
    nlohmann::json norm = nlohmann::json::array();
    for (const auto& rule : scheme.normalization_rules) {
        nlohmann::json r = {{"pattern", rule.pattern}, {"replacement", rule.replacement}};
        if (rule.word_internal) r["position"] = "word_internal";
        norm.push_back(r);
    }
    j["normalization_rules"] = norm;
    return j;
}

inline TransliterationScheme scheme_from_json(const nlohmann::json& j) {
    TransliterationScheme scheme;
    auto parse_cp = [](const nlohmann::json& v, const char* what) -> char32_t {
        std::u32string cps = uni::decode_utf8(v.get<std::string>());
        if (cps.size() != 1)
            throw ParseError(std::string("scheme ") + what + " must be a single code point");
        return cps[0];
    };
    auto load_map = [&](const nlohmann::json& arr, const char* what) {
        std::vector<std::pair<char32_t, std::string>> m;
        for (const auto& entry : arr)
            m.emplace_back(parse_cp(entry.at(0), what), entry.at(1).get<std::string>());
        return m;
    };
    if (j.contains("syllabary")) {
        const auto& syl = j.at("syllabary");
        scheme.tables.consonants = load_map(syl.value("consonants", nlohmann::json::array()), "consonant");
        scheme.tables.independent_vowels =
            load_map(syl.value("independent_vowels", nlohmann::json::array()), "vowel");
        scheme.tables.vowel_signs = load_map(syl.value("vowel_signs", nlohmann::json::array()), "vowel sign");
        scheme.tables.standalone = load_map(syl.value("standalone", nlohmann::json::array()), "mark");
        std::string virama = syl.value("virama", std::string{});
        scheme.tables.virama = virama.empty() ? 0 : parse_cp(virama, "virama");
    }
    for (const auto& entry : j.value("extra_rules", nlohmann::json::array()))
        scheme.extra_rules.push_back(
            {uni::decode_utf8(entry.at(0).get<std::string>()), entry.at(1).get<std::string>()});
    scheme.alphabet = j.value("alphabet", std::vector<std::string>{});
    for (const auto& entry : j.value("normalization_rules", nlohmann::json::array())) {
        NormalizationRule rule;
        rule.pattern = entry.at("pattern").get<std::string>();
        rule.replacement = entry.at("replacement").get<std::string>();
        rule.word_internal = entry.value("position", "") == "word_internal";
        scheme.normalization_rules.push_back(rule);
    }
    scheme.compile();
    return scheme;
}

// ---------------------------------------------------------------------------
// Bundled ISO-15919-style table for the Kannada block, restricted to the
// diacritic inventory of the standardized romanization. Anusvara and
// candrabindu map to "ṃ" and "m̐"; both are provisional choices.

inline TransliterationScheme make_kannada_scheme() {
    TransliterationScheme s;
    s.tables.consonants = {
        {0x0C95, "ka"}, {0x0C96, "kha"}, {0x0C97, "ga"}, {0x0C98, "gha"}, {0x0C99, "ṅa"},
        {0x0C9A, "ca"}, {0x0C9B, "cha"}, {0x0C9C, "ja"}, {0x0C9D, "jha"}, {0x0C9E, "ña"},
        {0x0C9F, "ṭa"}, {0x0CA0, "ṭha"}, {0x0CA1, "ḍa"}, {0x0CA2, "ḍha"}, {0x0CA3, "ṇa"},
        {0x0CA4, "ta"}, {0x0CA5, "tha"}, {0x0CA6, "da"}, {0x0CA7, "dha"}, {0x0CA8, "na"},
        {0x0CAA, "pa"}, {0x0CAB, "pha"}, {0x0CAC, "ba"}, {0x0CAD, "bha"}, {0x0CAE, "ma"},
        {0x0CAF, "ya"}, {0x0CB0, "ra"}, {0x0CB1, "ṟa"}, {0x0CB2, "la"}, {0x0CB3, "ḷa"},
        {0x0CB5, "va"}, {0x0CB6, "śa"}, {0x0CB7, "ṣa"}, {0x0CB8, "sa"}, {0x0CB9, "ha"},
        {0x0CDE, "ḻa"},
    };
    s.tables.independent_vowels = {
        {0x0C85, "a"}, {0x0C86, "ā"}, {0x0C87, "i"}, {0x0C88, "ī"},
        {0x0C89, "u"}, {0x0C8A, "ū"}, {0x0C8B, "ru"}, {0x0C8C, "lu"},
        {0x0C8E, "e"}, {0x0C8F, "ē"}, {0x0C90, "ai"},
        {0x0C92, "o"}, {0x0C93, "ō"}, {0x0C94, "au"},
    };
    s.tables.vowel_signs = {
        {0x0CBE, "ā"}, {0x0CBF, "i"}, {0x0CC0, "ī"}, {0x0CC1, "u"}, {0x0CC2, "ū"},
        {0x0CC3, "ru"}, {0x0CC6, "e"}, {0x0CC7, "ē"}, {0x0CC8, "ai"},
        {0x0CCA, "o"}, {0x0CCB, "ō"}, {0x0CCC, "au"},
    };
    s.tables.standalone = {
        {0x0C82, "ṃ"},   // anusvara (provisional)
        {0x0C81, "m̐"},   // candrabindu (provisional)
        {0x0C83, "ḥ"},   // visarga
        {0x0CE6, "0"}, {0x0CE7, "1"}, {0x0CE8, "2"}, {0x0CE9, "3"}, {0x0CEA, "4"},
        {0x0CEB, "5"}, {0x0CEC, "6"}, {0x0CED, "7"}, {0x0CEE, "8"}, {0x0CEF, "9"},
    };
    s.tables.virama = 0x0CCD;
    s.alphabet = {
        "a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "m",
        "n", "o", "p", "q", "r", "s", "t", "u", "v", "w", "x", "y", "z",
        "0", "1", "2", "3", "4", "5", "6", "7", "8", "9",
        "ā", "ī", "ū", "ē", "ō", "ḷ", "ṇ", "ṭ", "ḍ", "ṅ",
        "ñ", "ś", "ṣ", "ṟ", "ḻ", "ṃ", "ḥ", "m̐",
    };
    s.normalization_rules = {
        {"aa", "ā", false}, {"ii", "ī", false}, {"uu", "ū", false},
        {"ee", "ē", false}, {"oo", "ō", false},
        {"A", "ā", true}, {"I", "ī", true}, {"U", "ū", true},
        {"E", "ē", true}, {"O", "ō", true},
        {"L", "ḷ", true}, {"N", "ṇ", true}, {"T", "ṭ", true}, {"D", "ḍ", true},
    };
    s.compile();
    return s;
}

}  // namespace tulu
