#pragma once

// Rule-based grammatical checking of romanized responses against a pack:
// verb conjugation, case marking, pronoun usage, S-O-V order, and
// subject-verb agreement. Identification is lexicon lookup only; tokens the
// pack cannot identify are skipped, never flagged. Input is expected to be
// standardized roman (normalize_roman upstream).

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tulukit/language_pack.hpp"

namespace tulu {

enum class RuleFamily { verb, case_marking, pronoun, order };

inline std::string to_string(RuleFamily f) {
    switch (f) {
        case RuleFamily::verb: return "verb";
        case RuleFamily::case_marking: return "case";
        case RuleFamily::pronoun: return "pronoun";
        case RuleFamily::order: return "order";
    }
    return "?";
}

struct GrammarViolation {
    RuleFamily family = RuleFamily::verb;
    size_t begin = 0;  // byte span in the checked text
    size_t end = 0;
    std::string message;
};

// Tri-state verdict: passed, failed, or not applicable when the text
// contains nothing the pack can check.
struct GrammarVerdict {
    size_t checkable_constructions = 0;
    std::vector<GrammarViolation> violations;

    bool applicable() const { return checkable_constructions > 0; }
    bool passed() const { return applicable() && violations.empty(); }
};

namespace detail {

// Noun stem phonology, the hinge for morphophonological alternation.
inline std::string stem_class_of(const std::string& stem) {
    std::u32string cps = uni::decode_utf8(stem);
    if (cps.empty()) return "consonant_final";
    char32_t last = cps.back();
    switch (last) {
        case U'a': case U'e': case U'i': case U'o': case U'u':
        case 0x0101: case 0x012B: case 0x016B: case 0x0113: case 0x014D:
            return "vowel_final";
        default:
            return "consonant_final";
    }
}

inline bool suffix_class_matches(const std::string& suffix_class, const std::string& stem) {
    return suffix_class == "any" || suffix_class == stem_class_of(stem);
}

struct VerbHit {
    bool listed = false;  // surface appears in a paradigm (or is a lemma)
    std::vector<VerbForm> bundles;  // all feature bundles carried by the surface
};

inline VerbHit find_verb(const GrammarRulePack& grammar, const std::string& token) {
    VerbHit hit;
    for (const auto& [lemma, paradigm] : grammar.verb_paradigms) {
        if (token == lemma) hit.listed = true;  // citation form
        for (const auto& form : paradigm.forms) {
            if (form.surface == token) {
                hit.listed = true;
                hit.bundles.push_back(form);
            }
        }
    }
    return hit;
}

inline bool stem_prefix_match(const GrammarRulePack& grammar, const std::string& token) {
    for (const auto& [lemma, paradigm] : grammar.verb_paradigms) {
        if (!paradigm.stem.empty() && token.size() > paradigm.stem.size() &&
            token.compare(0, paradigm.stem.size(), paradigm.stem) == 0)
            return true;
    }
    return false;
}

inline std::optional<PronounKey> pronoun_key_for(const GrammarRulePack& grammar,
                                                 const std::string& token) {
    for (const auto& [key, forms] : grammar.pronouns)
        if (std::find(forms.begin(), forms.end(), token) != forms.end()) return key;
    return std::nullopt;
}

inline bool pronoun_prefix_match(const GrammarRulePack& grammar, const std::string& token) {
    for (const auto& [key, forms] : grammar.pronouns)
        for (const auto& form : forms)
            if (form.size() >= 3 && token.size() > form.size() &&
                token.compare(0, form.size(), form) == 0)
                return true;
    return false;
}

struct CaseDecomposition {
    Case grammatical_case = Case::nominative;
    std::string stem;
    std::string suffix;
    bool licensed = false;
};

// All decompositions token = stem + known case suffix with the stem in the
// lexicon as a noun or pronoun, longest suffix first.
inline std::vector<CaseDecomposition> case_decompositions(const LanguagePack& pack,
                                                          const std::string& token) {
    std::vector<CaseDecomposition> out;
    for (const auto& [c, marker] : pack.grammar.case_markers) {
        for (const auto& s : marker.suffixes) {
            if (s.suffix.empty() || token.size() <= s.suffix.size()) continue;
            if (token.compare(token.size() - s.suffix.size(), s.suffix.size(), s.suffix) != 0)
                continue;
            std::string stem = token.substr(0, token.size() - s.suffix.size());
            if (!pack.lexicon_has(stem, Pos::noun) && !pack.lexicon_has(stem, Pos::pronoun))
                continue;
            out.push_back({c, stem, s.suffix, suffix_class_matches(s.stem_class, stem)});
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
        return a.suffix.size() > b.suffix.size();
    });
    return out;
}

inline bool constraint_matches(const FeatureConstraint& c, int person, Number number,
                               std::optional<Gender> gender) {
    if (c.person && *c.person != person) return false;
    if (c.number && *c.number != number) return false;
    if (c.gender && (!gender || *c.gender != *gender)) return false;
    return true;
}

inline bool verb_satisfies(const FeatureConstraint& c, const VerbForm& form) {
    if (c.person && *c.person != form.person) return false;
    if (c.number && *c.number != form.number) return false;
    if (c.gender && *c.gender != form.gender) return false;
    return true;
}

}  // namespace detail

inline GrammarVerdict check_response(const std::string& text, const LanguagePack& pack) {
    GrammarVerdict verdict;
    std::string composed = uni::compose_canonical(text);

    struct TokenInfo {
        uni::WordSpan span;
        std::string folded;
        bool is_subject_candidate = false;
        bool is_object_candidate = false;
        bool is_verb = false;
        std::vector<VerbForm> verb_bundles;
        std::optional<PronounKey> pronoun;
    };

    // Sentence segmentation for the order and agreement checks.
    std::vector<std::pair<size_t, size_t>> sentences;
    {
        size_t start = 0;
        for (size_t i = 0; i < composed.size(); ++i) {
            char c = composed[i];
            if (c == '.' || c == '?' || c == '!') {
                sentences.emplace_back(start, i + 1);
                start = i + 1;
            }
        }
        if (start < composed.size()) sentences.emplace_back(start, composed.size());
    }
    if (sentences.empty()) return verdict;

    for (const auto& [sent_begin, sent_end] : sentences) {
        std::string sentence = composed.substr(sent_begin, sent_end - sent_begin);
        std::vector<TokenInfo> tokens;
        for (const auto& word : uni::split_words(sentence)) {
            TokenInfo info;
            info.span = word;
            info.span.begin += sent_begin;
            info.span.end += sent_begin;
            info.folded = uni::fold_case(word.text);
            tokens.push_back(std::move(info));
        }

        for (auto& tok : tokens) {
            const std::string& t = tok.folded;

            if (auto key = detail::pronoun_key_for(pack.grammar, t)) {
                ++verdict.checkable_constructions;
                tok.pronoun = key;
                tok.is_subject_candidate = true;
                continue;
            }

            detail::VerbHit verb = detail::find_verb(pack.grammar, t);
            if (verb.listed) {
                ++verdict.checkable_constructions;
                tok.is_verb = true;
                tok.verb_bundles = std::move(verb.bundles);
                continue;
            }

            if (pack.lexicon_has(t)) {
                // Bare lexicon word; nouns are subject candidates for the
                // order check but carry no checkable construction themselves.
                if (pack.lexicon_has(t, Pos::noun)) tok.is_subject_candidate = true;
                continue;
            }

            auto decomps = detail::case_decompositions(pack, t);
            if (!decomps.empty()) {
                ++verdict.checkable_constructions;
                auto licensed = std::find_if(decomps.begin(), decomps.end(),
                                             [](const auto& d) { return d.licensed; });
                if (licensed != decomps.end()) {
                    if (licensed->grammatical_case == Case::accusative ||
                        licensed->grammatical_case == Case::dative)
                        tok.is_object_candidate = true;
                } else {
                    verdict.violations.push_back(
                        {RuleFamily::case_marking, tok.span.begin, tok.span.end,
                         "suffix -" + decomps.front().suffix + " is not licensed for stem '" +
                             decomps.front().stem + "' (" +
                             detail::stem_class_of(decomps.front().stem) + ")"});
                }
                continue;
            }

            if (detail::stem_prefix_match(pack.grammar, t)) {
                ++verdict.checkable_constructions;
                tok.is_verb = true;  // identified as a verb, just not a valid form
                verdict.violations.push_back({RuleFamily::verb, tok.span.begin, tok.span.end,
                                              "'" + t + "' is not a listed form of its paradigm"});
                continue;
            }

            if (detail::pronoun_prefix_match(pack.grammar, t)) {
                ++verdict.checkable_constructions;
                verdict.violations.push_back({RuleFamily::pronoun, tok.span.begin, tok.span.end,
                                              "'" + t + "' is not in the pronoun table"});
                continue;
            }
            // Unrecognized token: skipped, not a violation.
        }

        // Order: requires subject, object, and verb all identified.
        const TokenInfo* subject = nullptr;
        const TokenInfo* object = nullptr;
        const TokenInfo* verb = nullptr;
        size_t subject_pos = 0, object_pos = 0, verb_pos = 0;
        for (size_t i = 0; i < tokens.size(); ++i) {
            if (!subject && tokens[i].is_subject_candidate) { subject = &tokens[i]; subject_pos = i; }
            if (!object && tokens[i].is_object_candidate) { object = &tokens[i]; object_pos = i; }
            if (!verb && tokens[i].is_verb) { verb = &tokens[i]; verb_pos = i; }
        }
        if (subject && object && verb) {
            ++verdict.checkable_constructions;
            if (!(subject_pos < object_pos && object_pos < verb_pos))
                verdict.violations.push_back({RuleFamily::order, subject->span.begin,
                                              verb->span.end,
                                              "surface order is not subject-object-verb"});
        }

        // Agreement: first pronoun subject against the first verb with known
        // feature bundles; passes if any bundle satisfies every firing rule.
        if (subject && subject->pronoun && verb && !verb->verb_bundles.empty()) {
            const PronounKey& key = *subject->pronoun;
            bool any_bundle_ok = false;
            for (const auto& bundle : verb->verb_bundles) {
                bool ok = true;
                for (const auto& rule : pack.grammar.agreement_rules) {
                    if (!detail::constraint_matches(rule.subject, key.person, key.number,
                                                    std::nullopt))
                        continue;
                    if (!detail::verb_satisfies(rule.verb, bundle)) ok = false;
                }
                if (ok) { any_bundle_ok = true; break; }
            }
            if (!any_bundle_ok)
                verdict.violations.push_back(
                    {RuleFamily::verb, verb->span.begin, verb->span.end,
                     "verb does not agree with subject '" + subject->folded + "'"});
        }
    }

    return verdict;
}

// Percentage of applicable verdicts that passed; not-applicable verdicts are
// excluded from the denominator, which is reported alongside.
struct GrammarAccuracy {
    std::optional<double> percent;  // absent when no verdict was applicable
    size_t applicable = 0;
    size_t passed = 0;
};

inline GrammarAccuracy grammar_accuracy(const std::vector<GrammarVerdict>& verdicts) {
    GrammarAccuracy acc;
    for (const auto& v : verdicts) {
        if (!v.applicable()) continue;
        ++acc.applicable;
        if (v.passed()) ++acc.passed;
    }
    if (acc.applicable > 0)
        acc.percent = 100.0 * static_cast<double>(acc.passed) / static_cast<double>(acc.applicable);
    return acc;
}

// Precision/recall of the checker's "violation present" decision against
// human labels. Vacuous denominators count as 1.0 so that a checker matching
// the labels exactly always scores (1, 1).
struct PrecisionRecall {
    double precision = 1.0;
    double recall = 1.0;
};

inline PrecisionRecall validate_checker(const std::vector<std::pair<std::string, bool>>& labeled,
                                        const LanguagePack& pack) {
    if (labeled.empty()) throw Error("validate_checker: empty labeled set");
    size_t tp = 0, fp = 0, fn = 0;
    for (const auto& [text, human_positive] : labeled) {
        bool predicted = !check_response(text, pack).violations.empty();
        if (predicted && human_positive) ++tp;
        else if (predicted && !human_positive) ++fp;
        else if (!predicted && human_positive) ++fn;
    }
    PrecisionRecall pr;
    if (tp + fp > 0) pr.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0) pr.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    return pr;
}

// Per-family share of family-relevant constructions the pack can analyze.
struct CoverageStat {
    size_t relevant = 0;
    size_t analyzable = 0;
    std::optional<double> percent;
};

inline std::map<RuleFamily, CoverageStat> rule_coverage(const LanguagePack& pack,
                                                        const std::vector<std::string>& sentences) {
    std::map<RuleFamily, CoverageStat> cov;
    for (RuleFamily f : {RuleFamily::verb, RuleFamily::case_marking, RuleFamily::pronoun,
                         RuleFamily::order})
        cov[f] = {};

    for (const auto& sentence : sentences) {
        std::string composed = uni::compose_canonical(sentence);
        bool any_verb = false, order_complete_subject = false, order_complete_object = false,
             order_complete_verb = false;
        for (const auto& word : uni::split_words(composed)) {
            std::string t = uni::fold_case(word.text);

            bool verb_relevant = pack.lexicon_has(t, Pos::verb) ||
                                 detail::find_verb(pack.grammar, t).listed ||
                                 detail::stem_prefix_match(pack.grammar, t);
            if (verb_relevant) {
                ++cov[RuleFamily::verb].relevant;
                if (detail::find_verb(pack.grammar, t).listed) {
                    ++cov[RuleFamily::verb].analyzable;
                    any_verb = true;
                    order_complete_verb = true;
                }
            }

            bool pronoun_relevant =
                pack.lexicon_has(t, Pos::pronoun) || detail::pronoun_key_for(pack.grammar, t).has_value();
            if (pronoun_relevant) {
                ++cov[RuleFamily::pronoun].relevant;
                if (detail::pronoun_key_for(pack.grammar, t)) {
                    ++cov[RuleFamily::pronoun].analyzable;
                    order_complete_subject = true;
                }
            }

            if (!pack.lexicon_has(t)) {
                bool ends_with_known_suffix = false;
                for (const auto& [c, marker] : pack.grammar.case_markers)
                    for (const auto& s : marker.suffixes)
                        if (!s.suffix.empty() && t.size() > s.suffix.size() &&
                            t.compare(t.size() - s.suffix.size(), s.suffix.size(), s.suffix) == 0)
                            ends_with_known_suffix = true;
                if (ends_with_known_suffix) {
                    ++cov[RuleFamily::case_marking].relevant;
                    auto decomps = detail::case_decompositions(pack, t);
                    bool licensed = std::any_of(decomps.begin(), decomps.end(),
                                                [](const auto& d) { return d.licensed; });
                    if (licensed) {
                        ++cov[RuleFamily::case_marking].analyzable;
                        for (const auto& d : decomps)
                            if (d.licensed && (d.grammatical_case == Case::accusative ||
                                               d.grammatical_case == Case::dative))
                                order_complete_object = true;
                    }
                }
            } else if (pack.lexicon_has(t, Pos::noun)) {
                order_complete_subject = true;
            }
        }
        if (any_verb) {
            ++cov[RuleFamily::order].relevant;
            if (order_complete_subject && order_complete_object && order_complete_verb)
                ++cov[RuleFamily::order].analyzable;
        }
    }

    for (auto& [family, stat] : cov)
        if (stat.relevant > 0)
            stat.percent =
                100.0 * static_cast<double>(stat.analyzable) / static_cast<double>(stat.relevant);
    return cov;
}

}  // namespace tulu
