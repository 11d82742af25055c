#pragma once

// The declarative linguistic payload: romanization scheme, lexicon,
// watchlist, grammar rule pack, seed examples, verification checklist.
// One JSON document per pack, schema-versioned, all strings NFC-composed at
// load. Packs are immutable after load and safe to share across threads.

#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "tulukit/dataset.hpp"
#include "tulukit/errors.hpp"
#include "tulukit/grammar_pack.hpp"
#include "tulukit/transliterator.hpp"

#include "json.hpp"

namespace tulu {

inline constexpr int kPackFormatVersion = 1;

enum class Pos { noun, verb, pronoun, adjective, postposition, particle, other };

inline std::string to_string(Pos p) {
    switch (p) {
        case Pos::noun: return "noun";
        case Pos::verb: return "verb";
        case Pos::pronoun: return "pronoun";
        case Pos::adjective: return "adjective";
        case Pos::postposition: return "postposition";
        case Pos::particle: return "particle";
        case Pos::other: return "other";
    }
    return "other";
}

inline Pos pos_from_string(const std::string& s) {
    if (s == "noun") return Pos::noun;
    if (s == "verb") return Pos::verb;
    if (s == "pronoun") return Pos::pronoun;
    if (s == "adjective") return Pos::adjective;
    if (s == "postposition") return Pos::postposition;
    if (s == "particle") return Pos::particle;
    if (s == "other") return Pos::other;
    throw ParseError("unknown part of speech: " + s);
}

struct LexEntry {
    std::string surface;  // romanized, standardized
    std::string gloss;
    Pos pos = Pos::other;
    std::optional<int> frequency_rank;

    bool operator==(const LexEntry&) const = default;
};

struct WatchPair {
    std::string prohibited;   // contaminant-language form
    std::string replacement;  // target-language form, must exist in lexicon
    std::string gloss;

    bool operator==(const WatchPair&) const = default;
};

struct Watchlist {
    std::vector<WatchPair> pairs;
    std::vector<std::string> loanword_allowlist;

    bool operator==(const Watchlist&) const = default;
};

struct Violation {
    std::string code;     // machine-readable
    std::string message;  // human-readable
};

class LanguagePack {
public:
    std::string id;
    std::string target_language_name;
    std::string contaminant_language_name;
    TransliterationScheme scheme;
    std::vector<LexEntry> lexicon;
    Watchlist watchlist;
    GrammarRulePack grammar;
    std::vector<DatasetExample> seed_examples;
    std::vector<std::string> verification_checklist;

    // Rebuilds derived lookup structures. Load paths call this; code that
    // assembles a pack by hand must call it before use.
    void finalize() {
        scheme.compile();
        lexicon_index_.clear();
        for (size_t i = 0; i < lexicon.size(); ++i)
            lexicon_index_[lexicon[i].surface].push_back(i);
    }

    bool lexicon_has(const std::string& surface) const {
        return lexicon_index_.count(surface) > 0;
    }

    bool lexicon_has(const std::string& surface, Pos pos) const {
        auto it = lexicon_index_.find(surface);
        if (it == lexicon_index_.end()) return false;
        for (size_t i : it->second)
            if (lexicon[i].pos == pos) return true;
        return false;
    }

    std::vector<const LexEntry*> lexicon_entries(const std::string& surface) const {
        std::vector<const LexEntry*> out;
        auto it = lexicon_index_.find(surface);
        if (it == lexicon_index_.end()) return out;
        for (size_t i : it->second) out.push_back(&lexicon[i]);
        return out;
    }

    bool operator==(const LanguagePack& other) const {
        return id == other.id && target_language_name == other.target_language_name &&
               contaminant_language_name == other.contaminant_language_name &&
               scheme == other.scheme && lexicon == other.lexicon &&
               watchlist == other.watchlist && grammar == other.grammar &&
               seed_examples == other.seed_examples &&
               verification_checklist == other.verification_checklist;
    }

private:
    std::unordered_map<std::string, std::vector<size_t>> lexicon_index_;
};

// ---------------------------------------------------------------------------
// Validation. Violations are data, not errors; load_pack turns the first one
// into a ValidationError.

inline std::vector<Violation> validate_pack(const LanguagePack& pack) {
    std::vector<Violation> v;
    auto add = [&](std::string code, std::string msg) {
        v.push_back({std::move(code), std::move(msg)});
    };

    if (pack.id.empty()) add("pack_id_empty", "pack id must be nonempty");

    // Scheme invariants.
    if (pack.scheme.has_duplicate_sources())
        add("scheme_duplicate_rule_source", "two transliteration rules share a source sequence");
    for (const auto& rule : pack.scheme.rules()) {
        if (!pack.scheme.in_alphabet(rule.target)) {
            add("scheme_target_not_in_alphabet",
                "rule target '" + rule.target + "' uses graphemes outside the alphabet");
            break;  // one report is enough; the table is data
        }
    }

    // Lexicon invariants.
    for (const auto& entry : pack.lexicon) {
        if (entry.surface.empty()) {
            add("lexicon_surface_empty", "lexicon entry with empty surface");
            continue;
        }
        if (!pack.scheme.in_alphabet(uni::fold_case(entry.surface)))
            add("lexicon_surface_not_in_alphabet",
                "lexicon surface '" + entry.surface + "' is not valid under the alphabet");
        if (entry.frequency_rank && *entry.frequency_rank <= 0)
            add("lexicon_rank_not_positive",
                "frequency rank for '" + entry.surface + "' must be positive");
    }

    // Watchlist invariants.
    std::unordered_set<std::string> prohibited_seen;
    for (const auto& pair : pack.watchlist.pairs) {
        if (pair.prohibited.empty() || pair.replacement.empty())
            add("watchlist_empty_form", "watchlist pair with empty form");
        if (pair.prohibited == pair.replacement)
            add("watchlist_self_replacement",
                "prohibited form '" + pair.prohibited + "' equals its replacement");
        if (!prohibited_seen.insert(pair.prohibited).second)
            add("watchlist_duplicate_prohibited",
                "prohibited form '" + pair.prohibited + "' appears twice");
        if (!pack.lexicon_has(pair.replacement))
            add("replacement_not_in_lexicon",
                "replacement '" + pair.replacement + "' missing from lexicon");
    }
    for (const auto& loan : pack.watchlist.loanword_allowlist)
        if (prohibited_seen.count(loan))
            add("watchlist_allowlist_overlap",
                "allowlisted loanword '" + loan + "' is also prohibited");

    // Grammar invariants.
    for (const auto& [lemma, paradigm] : pack.grammar.verb_paradigms) {
        std::set<decltype(VerbForm{}.feature_key())> keys;
        for (const auto& form : paradigm.forms) {
            if (form.surface.empty())
                add("verb_form_empty_surface", "empty verb form in paradigm '" + lemma + "'");
            if (form.person < 1 || form.person > 3)
                add("verb_form_bad_person", "person outside 1..3 in paradigm '" + lemma + "'");
            if (!keys.insert(form.feature_key()).second)
                add("verb_form_duplicate_features",
                    "duplicate feature bundle in paradigm '" + lemma + "'");
        }
    }
    for (const auto& [c, marker] : pack.grammar.case_markers)
        if (marker.suffixes.empty())
            add("case_marker_no_suffixes", "case " + to_string(c) + " has no suffixes");

    // Seed example invariants.
    for (const auto& ex : pack.seed_examples)
        if (ex.split == Split::heldout && ex.provenance != Provenance::manual)
            add("heldout_synthetic_provenance",
                "held-out example '" + ex.question + "' has synthetic provenance");

    return v;
}

// Pack ids must be unique across a workspace of packs.
inline std::vector<Violation> validate_workspace(const std::vector<LanguagePack>& packs) {
    std::vector<Violation> v;
    std::unordered_set<std::string> ids;
    for (const auto& pack : packs)
        if (!ids.insert(pack.id).second)
            v.push_back({"pack_id_duplicate", "duplicate pack id '" + pack.id + "'"});
    return v;
}

// ---------------------------------------------------------------------------
// JSON (de)serialization

inline nlohmann::json example_to_json(const DatasetExample& ex) {
    nlohmann::json j = {
        {"question", ex.question},
        {"answer", ex.answer},
        {"category", to_string(ex.category)},
        {"provenance", to_string(ex.provenance)},
        {"split", to_string(ex.split)},
    };
    if (ex.region) j["region"] = *ex.region;
    if (ex.judge_scores) {
        nlohmann::json scores = nlohmann::json::array();
        for (const auto& judge : ex.judge_scores->scores) scores.push_back(judge);
        j["judge_scores"] = scores;
    }
    return j;
}

inline DatasetExample example_from_json(const nlohmann::json& j) {
    DatasetExample ex;
    ex.question = uni::compose_canonical(j.at("question").get<std::string>());
    ex.answer = uni::compose_canonical(j.at("answer").get<std::string>());
    ex.category = category_from_string(j.at("category").get<std::string>());
    ex.provenance = provenance_from_string(j.value("provenance", "manual"));
    ex.split = split_from_string(j.value("split", "seed"));
    if (j.contains("region")) ex.region = j.at("region").get<std::string>();
    if (j.contains("judge_scores")) {
        JudgeScoreSet set;
        const auto& scores = j.at("judge_scores");
        if (scores.size() != kJudgeCount)
            throw ParseError("judge_scores must have exactly 3 judges");
        for (size_t judge = 0; judge < kJudgeCount; ++judge) {
            if (scores[judge].size() != 4)
                throw ParseError("each judge must score exactly 4 dimensions");
            for (size_t d = 0; d < 4; ++d) set.scores[judge][d] = scores[judge][d].get<int>();
        }
        set.validate();
        ex.judge_scores = set;
    }
    return ex;
}

inline nlohmann::json grammar_to_json(const GrammarRulePack& g) {
    nlohmann::json j;
    j["word_order"] = "sov";
    nlohmann::json paradigms = nlohmann::json::array();
    for (const auto& [lemma, paradigm] : g.verb_paradigms) {
        nlohmann::json forms = nlohmann::json::array();
        for (const auto& f : paradigm.forms)
            forms.push_back({{"surface", f.surface},
                             {"person", f.person},
                             {"number", to_string(f.number)},
                             {"gender", to_string(f.gender)},
                             {"tense", to_string(f.tense)},
                             {"formality", to_string(f.formality)}});
        paradigms.push_back({{"lemma", paradigm.lemma}, {"stem", paradigm.stem}, {"forms", forms}});
    }
    j["verb_paradigms"] = paradigms;
    nlohmann::json markers = nlohmann::json::array();
    for (const auto& [c, marker] : g.case_markers) {
        nlohmann::json suffixes = nlohmann::json::array();
        for (const auto& s : marker.suffixes)
            suffixes.push_back({{"stem_class", s.stem_class}, {"suffix", s.suffix}});
        markers.push_back({{"case", to_string(c)}, {"suffixes", suffixes}});
    }
    j["case_markers"] = markers;
    nlohmann::json pronouns = nlohmann::json::array();
    for (const auto& [key, forms] : g.pronouns)
        pronouns.push_back({{"person", key.person},
                            {"number", to_string(key.number)},
                            {"formality", to_string(key.formality)},
                            {"forms", forms}});
    j["pronouns"] = pronouns;
    auto constraint_to_json = [](const FeatureConstraint& c) {
        nlohmann::json out = nlohmann::json::object();
        if (c.person) out["person"] = *c.person;
        if (c.number) out["number"] = to_string(*c.number);
        if (c.gender) out["gender"] = to_string(*c.gender);
        return out;
    };
    nlohmann::json agreement = nlohmann::json::array();
    for (const auto& rule : g.agreement_rules)
        agreement.push_back(
            {{"subject", constraint_to_json(rule.subject)}, {"verb", constraint_to_json(rule.verb)}});
    j["agreement_rules"] = agreement;
    return j;
}

namespace detail {

inline Number number_from_string(const std::string& s) {
    if (s == "sg") return Number::sg;
    if (s == "pl") return Number::pl;
    throw ParseError("unknown number: " + s);
}

inline Gender gender_from_string(const std::string& s) {
    if (s == "m") return Gender::m;
    if (s == "f") return Gender::f;
    if (s == "n") return Gender::n;
    if (s == "none") return Gender::none;
    throw ParseError("unknown gender: " + s);
}

inline Tense tense_from_string(const std::string& s) {
    if (s == "past") return Tense::past;
    if (s == "present") return Tense::present;
    if (s == "future") return Tense::future;
    throw ParseError("unknown tense: " + s);
}

inline Formality formality_from_string(const std::string& s) {
    if (s == "formal") return Formality::formal;
    if (s == "informal") return Formality::informal;
    throw ParseError("unknown formality: " + s);
}

}  // namespace detail

inline GrammarRulePack grammar_from_json(const nlohmann::json& j) {
    GrammarRulePack g;
    if (j.value("word_order", "sov") != "sov")
        throw ParseError("only sov word order is supported");
    for (const auto& p : j.value("verb_paradigms", nlohmann::json::array())) {
        VerbParadigm paradigm;
        paradigm.lemma = uni::compose_canonical(p.at("lemma").get<std::string>());
        paradigm.stem = uni::compose_canonical(p.value("stem", std::string{}));
        for (const auto& f : p.value("forms", nlohmann::json::array())) {
            VerbForm form;
            form.surface = uni::compose_canonical(f.at("surface").get<std::string>());
            form.person = f.at("person").get<int>();
            form.number = detail::number_from_string(f.value("number", "sg"));
            form.gender = detail::gender_from_string(f.value("gender", "none"));
            form.tense = detail::tense_from_string(f.value("tense", "present"));
            form.formality = detail::formality_from_string(f.value("formality", "informal"));
            paradigm.forms.push_back(std::move(form));
        }
        g.verb_paradigms[paradigm.lemma] = std::move(paradigm);
    }
    for (const auto& m : j.value("case_markers", nlohmann::json::array())) {
        auto c = case_from_string(m.at("case").get<std::string>());
        if (!c) throw ParseError("unknown case: " + m.at("case").get<std::string>());
        if (g.case_markers.count(*c))
            throw ParseError("case " + to_string(*c) + " appears twice in case_markers");
        MarkerRule rule;
        rule.grammatical_case = *c;
        for (const auto& s : m.value("suffixes", nlohmann::json::array()))
            rule.suffixes.push_back({s.at("stem_class").get<std::string>(),
                                     uni::compose_canonical(s.at("suffix").get<std::string>())});
        g.case_markers[*c] = std::move(rule);
    }
    for (const auto& p : j.value("pronouns", nlohmann::json::array())) {
        PronounKey key;
        key.person = p.at("person").get<int>();
        key.number = detail::number_from_string(p.value("number", "sg"));
        key.formality = detail::formality_from_string(p.value("formality", "informal"));
        std::vector<std::string> forms;
        for (const auto& f : p.at("forms"))
            forms.push_back(uni::compose_canonical(f.get<std::string>()));
        g.pronouns[key] = std::move(forms);
    }
    auto constraint_from_json = [](const nlohmann::json& c) {
        FeatureConstraint out;
        if (c.contains("person")) out.person = c.at("person").get<int>();
        if (c.contains("number")) out.number = detail::number_from_string(c.at("number"));
        if (c.contains("gender")) out.gender = detail::gender_from_string(c.at("gender"));
        return out;
    };
    for (const auto& r : j.value("agreement_rules", nlohmann::json::array()))
        g.agreement_rules.push_back({constraint_from_json(r.value("subject", nlohmann::json::object())),
                                     constraint_from_json(r.value("verb", nlohmann::json::object()))});
    return g;
}

inline nlohmann::json pack_to_json(const LanguagePack& pack) {
    nlohmann::json j;
    j["format_version"] = kPackFormatVersion;
    j["id"] = pack.id;
    j["target_language"] = pack.target_language_name;
    j["contaminant_language"] = pack.contaminant_language_name;
    j["scheme"] = scheme_to_json(pack.scheme);
    nlohmann::json lexicon = nlohmann::json::array();
    for (const auto& e : pack.lexicon) {
        nlohmann::json entry = {
            {"surface", e.surface}, {"gloss", e.gloss}, {"pos", to_string(e.pos)}};
        if (e.frequency_rank) entry["frequency_rank"] = *e.frequency_rank;
        lexicon.push_back(entry);
    }
    j["lexicon"] = lexicon;
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : pack.watchlist.pairs)
        pairs.push_back(
            {{"prohibited", p.prohibited}, {"replacement", p.replacement}, {"gloss", p.gloss}});
    j["watchlist"] = {{"pairs", pairs},
                      {"loanword_allowlist", pack.watchlist.loanword_allowlist}};
    j["grammar"] = grammar_to_json(pack.grammar);
    nlohmann::json examples = nlohmann::json::array();
    for (const auto& ex : pack.seed_examples) examples.push_back(example_to_json(ex));
    j["seed_examples"] = examples;
    j["verification_checklist"] = pack.verification_checklist;
    return j;
}

inline LanguagePack pack_from_json(const nlohmann::json& j) {
    int version = j.value("format_version", 0);
    if (version != kPackFormatVersion)
        throw ParseError("unsupported pack format_version " + std::to_string(version));
    LanguagePack pack;
    pack.id = j.at("id").get<std::string>();
    pack.target_language_name = j.value("target_language", std::string{});
    pack.contaminant_language_name = j.value("contaminant_language", std::string{});
    pack.scheme = scheme_from_json(j.value("scheme", nlohmann::json::object()));
    for (const auto& e : j.value("lexicon", nlohmann::json::array())) {
        LexEntry entry;
        entry.surface = uni::compose_canonical(e.at("surface").get<std::string>());
        entry.gloss = e.value("gloss", std::string{});
        entry.pos = pos_from_string(e.at("pos").get<std::string>());
        if (e.contains("frequency_rank")) entry.frequency_rank = e.at("frequency_rank").get<int>();
        pack.lexicon.push_back(std::move(entry));
    }
    if (j.contains("watchlist")) {
        const auto& w = j.at("watchlist");
        for (const auto& p : w.value("pairs", nlohmann::json::array()))
            pack.watchlist.pairs.push_back(
                {uni::compose_canonical(p.at("prohibited").get<std::string>()),
                 uni::compose_canonical(p.at("replacement").get<std::string>()),
                 p.value("gloss", std::string{})});
        for (const auto& loan : w.value("loanword_allowlist", nlohmann::json::array()))
            pack.watchlist.loanword_allowlist.push_back(
                uni::compose_canonical(loan.get<std::string>()));
    }
    pack.grammar = grammar_from_json(j.value("grammar", nlohmann::json::object()));
    for (const auto& ex : j.value("seed_examples", nlohmann::json::array()))
        pack.seed_examples.push_back(example_from_json(ex));
    for (const auto& item : j.value("verification_checklist", nlohmann::json::array()))
        pack.verification_checklist.push_back(uni::compose_canonical(item.get<std::string>()));
    pack.finalize();
    return pack;
}

inline std::string serialize_pack(const LanguagePack& pack) { return pack_to_json(pack).dump(2) + "\n"; }

// Loads, parses, and fully validates a pack; the first violated invariant is
// reported by code in the ValidationError.
inline LanguagePack load_pack(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open pack file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("pack file " + path + " is not valid JSON: " + e.what());
    }
    LanguagePack pack;
    try {
        pack = pack_from_json(doc);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("pack file " + path + ": " + e.what());
    }
    auto violations = validate_pack(pack);
    if (!violations.empty())
        throw ValidationError(violations.front().code, violations.front().message);
    return pack;
}

// ---------------------------------------------------------------------------

inline std::map<Category, size_t> audit_seed_categories(const std::vector<DatasetExample>& examples) {
    std::map<Category, size_t> counts;
    for (size_t i = 0; i < kCategoryNames.size(); ++i) counts[static_cast<Category>(i)] = 0;
    for (const auto& ex : examples) ++counts[ex.category];
    return counts;
}

// JSON-lines of DatasetExample, used for held-out sets and dataset exports.
inline std::vector<DatasetExample> load_examples_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open examples file: " + path);
    std::vector<DatasetExample> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            out.push_back(example_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

inline void save_examples_jsonl(const std::string& path, const std::vector<DatasetExample>& examples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write examples file: " + path);
    for (const auto& ex : examples) out << example_to_json(ex).dump() << "\n";
}

}  // namespace tulu
