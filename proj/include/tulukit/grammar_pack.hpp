#pragma once

// Declarative grammar rule pack: verb paradigms, case markers, pronoun
// tables, word order, agreement rules. Plus the falsification transform that
// produces an intentionally wrong variant of a pack.

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "tulukit/errors.hpp"
#include "tulukit/hash.hpp"
#include "tulukit/rng.hpp"

namespace tulu {

enum class Case {
    nominative, accusative, dative, genitive,
    locative, ablative, instrumental, vocative,
};

inline const std::vector<std::pair<Case, std::string>>& case_names() {
    static const std::vector<std::pair<Case, std::string>> names = {
        {Case::nominative, "nominative"}, {Case::accusative, "accusative"},
        {Case::dative, "dative"},         {Case::genitive, "genitive"},
        {Case::locative, "locative"},     {Case::ablative, "ablative"},
        {Case::instrumental, "instrumental"}, {Case::vocative, "vocative"},
    };
    return names;
}

inline std::string to_string(Case c) {
    for (const auto& [value, name] : case_names())
        if (value == c) return name;
    return "?";
}

inline std::optional<Case> case_from_string(const std::string& s) {
    for (const auto& [value, name] : case_names())
        if (name == s) return value;
    return std::nullopt;
}

enum class Number { sg, pl };
enum class Gender { m, f, n, none };
enum class Tense { past, present, future };
enum class Formality { formal, informal };

inline std::string to_string(Number n) { return n == Number::sg ? "sg" : "pl"; }
inline std::string to_string(Gender g) {
    switch (g) {
        case Gender::m: return "m";
        case Gender::f: return "f";
        case Gender::n: return "n";
        case Gender::none: return "none";
    }
    return "none";
}
inline std::string to_string(Tense t) {
    switch (t) {
        case Tense::past: return "past";
        case Tense::present: return "present";
        case Tense::future: return "future";
    }
    return "present";
}
inline std::string to_string(Formality f) { return f == Formality::formal ? "formal" : "informal"; }

struct VerbForm {
    std::string surface;
    int person = 3;  // 1 | 2 | 3
    Number number = Number::sg;
    Gender gender = Gender::none;
    Tense tense = Tense::present;
    Formality formality = Formality::informal;

    auto feature_key() const {
        return std::make_tuple(person, static_cast<int>(number), static_cast<int>(gender),
                               static_cast<int>(tense), static_cast<int>(formality));
    }
    bool operator==(const VerbForm&) const = default;
};

struct VerbParadigm {
    std::string lemma;
    std::string stem;  // family-detection prefix, e.g. "pōp" for pōpuni
    std::vector<VerbForm> forms;

    bool operator==(const VerbParadigm&) const = default;
};

struct CaseSuffix {
    std::string stem_class;  // "any", "vowel_final", "consonant_final"
    std::string suffix;

    bool operator==(const CaseSuffix&) const = default;
};

struct MarkerRule {
    Case grammatical_case = Case::nominative;
    std::vector<CaseSuffix> suffixes;

    bool operator==(const MarkerRule&) const = default;
};

struct PronounKey {
    int person = 1;
    Number number = Number::sg;
    Formality formality = Formality::informal;

    auto tie() const { return std::make_tuple(person, static_cast<int>(number), static_cast<int>(formality)); }
    bool operator<(const PronounKey& o) const { return tie() < o.tie(); }
    bool operator==(const PronounKey&) const = default;
};

// A partial feature constraint; unset fields match anything. Agreement rules
// pair a subject constraint with the features the verb must then carry.
struct FeatureConstraint {
    std::optional<int> person;
    std::optional<Number> number;
    std::optional<Gender> gender;

    bool operator==(const FeatureConstraint&) const = default;
};

struct AgreementRule {
    FeatureConstraint subject;
    FeatureConstraint verb;

    bool operator==(const AgreementRule&) const = default;
};

enum class WordOrder { sov };

struct GrammarRulePack {
    std::map<std::string, VerbParadigm> verb_paradigms;
    std::map<Case, MarkerRule> case_markers;
    std::map<PronounKey, std::vector<std::string>> pronouns;
    WordOrder word_order = WordOrder::sov;
    std::vector<AgreementRule> agreement_rules;

    bool operator==(const GrammarRulePack&) const = default;

    bool pronoun_form_exists(const std::string& surface) const {
        for (const auto& [key, forms] : pronouns)
            if (std::find(forms.begin(), forms.end(), surface) != forms.end()) return true;
        return false;
    }
};

namespace detail {

inline Gender flip_gender(Gender g) {
    if (g == Gender::m) return Gender::f;
    if (g == Gender::f) return Gender::m;
    return g;
}

}  // namespace detail

// Falsification transform: swaps the dative and accusative suffix lists,
// exchanges m/f everywhere, and rotates each paradigm's surfaces one step
// along a seed-shuffled cycle of its feature bundles. The input pack is not
// modified. Requires both dative and accusative markers to be present.
inline GrammarRulePack corrupt_grammar(const GrammarRulePack& pack, uint64_t seed) {
    auto dat = pack.case_markers.find(Case::dative);
    auto acc = pack.case_markers.find(Case::accusative);
    if (dat == pack.case_markers.end() || acc == pack.case_markers.end())
        throw Error("corrupt_grammar requires both dative and accusative markers");

    GrammarRulePack out = pack;
    out.case_markers[Case::dative].suffixes = acc->second.suffixes;
    out.case_markers[Case::accusative].suffixes = dat->second.suffixes;

    for (auto& [lemma, paradigm] : out.verb_paradigms) {
        for (auto& form : paradigm.forms) form.gender = detail::flip_gender(form.gender);
        if (paradigm.forms.size() < 2) continue;
        std::vector<size_t> order(paradigm.forms.size());
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return paradigm.forms[a].feature_key() < paradigm.forms[b].feature_key();
        });
        SplitMix64 rng(seed ^ fnv1a(lemma));
        rng.shuffle(order);
        std::vector<std::string> surfaces(order.size());
        for (size_t i = 0; i < order.size(); ++i)
            surfaces[i] = paradigm.forms[order[(i + 1) % order.size()]].surface;
        for (size_t i = 0; i < order.size(); ++i)
            paradigm.forms[order[i]].surface = surfaces[i];
    }

    for (auto& rule : out.agreement_rules) {
        if (rule.subject.gender) rule.subject.gender = detail::flip_gender(*rule.subject.gender);
        if (rule.verb.gender) rule.verb.gender = detail::flip_gender(*rule.verb.gender);
    }
    return out;
}

}  // namespace tulu
