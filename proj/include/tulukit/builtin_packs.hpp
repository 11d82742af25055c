#pragma once

// The bundled "tulu-mini" starter pack, assembled in code and serialized to
// data/tulu-mini.pack.json by the fixture generator. It carries the word
// pairs, pronouns, verbs, and case markers that are documented for the
// language, filled out with clearly-labeled placeholder paradigm cells so
// the pipelines have something runnable. Pack completeness is user data:
// replace this with community-validated material for real use.

#include <string>
#include <vector>

#include "tulukit/language_pack.hpp"

namespace tulu {

namespace detail {

inline VerbParadigm make_demo_paradigm(const std::string& lemma, const std::string& stem,
                                       bool include_past) {
    // Regular demo conjugation: stem + tense infix + person ending.
    struct Ending {
        const char* suffix;
        int person;
        Number number;
        Gender gender;
        Formality formality;
    };
    static const Ending endings[] = {
        {"e", 1, Number::sg, Gender::none, Formality::informal},
        {"a", 2, Number::sg, Gender::none, Formality::informal},
        {"ar", 2, Number::sg, Gender::none, Formality::formal},
        {"u", 3, Number::sg, Gender::m, Formality::informal},
        {"aḷ", 3, Number::sg, Gender::f, Formality::informal},
        {"o", 1, Number::pl, Gender::none, Formality::informal},
        {"er", 3, Number::pl, Gender::none, Formality::informal},
    };
    VerbParadigm paradigm;
    paradigm.lemma = lemma;
    paradigm.stem = stem;
    for (const auto& e : endings) {
        VerbForm present;
        present.surface = stem + e.suffix;
        present.person = e.person;
        present.number = e.number;
        present.gender = e.gender;
        present.tense = Tense::present;
        present.formality = e.formality;
        paradigm.forms.push_back(present);
        if (include_past) {
            VerbForm past = present;
            past.surface = stem + "iy" + e.suffix;
            past.tense = Tense::past;
            paradigm.forms.push_back(past);
        }
    }
    return paradigm;
}

}  // namespace detail

inline LanguagePack make_tulu_mini_pack() {
    LanguagePack pack;
    pack.id = "tulu-mini";
    pack.target_language_name = "Tulu";
    pack.contaminant_language_name = "Kannada";
    pack.scheme = make_kannada_scheme();

    auto lex = [&](const std::string& surface, const std::string& gloss, Pos pos,
                   std::optional<int> rank = std::nullopt) {
        LexEntry e;
        e.surface = surface;
        e.gloss = gloss;
        e.pos = pos;
        e.frequency_rank = rank;
        pack.lexicon.push_back(std::move(e));
    };
    lex("yān", "I", Pos::pronoun, 1);
    lex("īr", "you", Pos::pronoun, 2);
    lex("aye", "he", Pos::pronoun, 3);
    lex("āḷ", "she", Pos::pronoun, 4);
    lex("nama", "we", Pos::pronoun, 5);
    lex("pōpuni", "to go", Pos::verb, 6);
    lex("maltuni", "to do", Pos::verb, 7);
    lex("yena", "what", Pos::other, 8);
    lex("enge", "where", Pos::other, 9);
    lex("encha", "how", Pos::other, 10);
    lex("appe", "mother", Pos::noun, 11);
    lex("amme", "father", Pos::noun, 12);
    lex("illu", "house", Pos::noun, 13);
    lex("kai", "hand", Pos::noun, 14);
    lex("mara", "tree", Pos::noun, 15);
    lex("nīr", "water", Pos::noun, 16);
    lex("ūru", "village", Pos::noun, 17);
    lex("eḍḍe", "good", Pos::adjective, 18);
    lex("namaskāra", "greetings", Pos::other, 19);

    pack.watchlist.pairs = {
        {"naanu", "yān", "I"},
        {"nīnu", "īr", "you"},
        {"yenu", "yena", "what"},
        {"yelli", "enge", "where"},
        {"hēge", "encha", "how"},
    };
    pack.watchlist.loanword_allowlist = {"computer", "internet", "mobile"};

    pack.grammar.word_order = WordOrder::sov;
    auto popuni = detail::make_demo_paradigm("pōpuni", "pōp", /*include_past=*/true);
    auto maltuni = detail::make_demo_paradigm("maltuni", "malt", /*include_past=*/false);
    pack.grammar.verb_paradigms[popuni.lemma] = popuni;
    pack.grammar.verb_paradigms[maltuni.lemma] = maltuni;

    pack.grammar.case_markers[Case::genitive] = {
        Case::genitive, {{"vowel_final", "ḍa"}, {"consonant_final", "da"}}};
    pack.grammar.case_markers[Case::dative] = {
        Case::dative, {{"vowel_final", "k"}, {"consonant_final", "ku"}}};
    pack.grammar.case_markers[Case::locative] = {Case::locative, {{"any", "d"}}};
    pack.grammar.case_markers[Case::accusative] = {
        Case::accusative, {{"vowel_final", "n"}, {"consonant_final", "nu"}}};

    pack.grammar.pronouns[{1, Number::sg, Formality::informal}] = {"yān"};
    pack.grammar.pronouns[{2, Number::sg, Formality::formal}] = {"īr"};
    pack.grammar.pronouns[{3, Number::sg, Formality::informal}] = {"aye", "āḷ"};
    pack.grammar.pronouns[{1, Number::pl, Formality::informal}] = {"nama"};

    auto person_number_rule = [](int person, Number number) {
        AgreementRule rule;
        rule.subject.person = person;
        rule.subject.number = number;
        rule.verb.person = person;
        rule.verb.number = number;
        return rule;
    };
    pack.grammar.agreement_rules = {
        person_number_rule(1, Number::sg), person_number_rule(2, Number::sg),
        person_number_rule(3, Number::sg), person_number_rule(1, Number::pl),
        person_number_rule(3, Number::pl),
    };
    AgreementRule masculine;
    masculine.subject.gender = Gender::m;
    masculine.verb.gender = Gender::m;
    AgreementRule feminine;
    feminine.subject.gender = Gender::f;
    feminine.verb.gender = Gender::f;
    pack.grammar.agreement_rules.push_back(masculine);
    pack.grammar.agreement_rules.push_back(feminine);

    pack.verification_checklist = {
        "Avoided prohibited words?",       "Correct pronouns?",
        "Accurate verb conjugations?",     "SOV word order?",
        "Appropriate case markers?",       "Natural-sounding?",
    };

    pack.finalize();
    return pack;
}

// ---------------------------------------------------------------------------
// Demo corpus enumeration. Sentences are assembled from the mini pack's own
// vocabulary in subject-object-verb order with licensed case suffixes, so
// every generated answer passes the grammar checker by construction. Two
// disjoint shapes keep the seed, held-out, and synthetic slices from ever
// sharing a question.

struct DemoSentence {
    std::string question;
    std::string answer;
};

namespace detail {

struct DemoVocab {
    std::vector<std::string> qwords = {"yena", "enge", "encha"};
    std::vector<std::string> subjects = {"yān", "īr", "aye", "āḷ", "nama"};
    // Verb choices agree with the subject at the same index row.
    std::vector<std::vector<std::string>> verbs = {
        {"pōpe", "malte", "pōpiye"},    {"pōpar", "maltar", "pōpiyar"},
        {"pōpu", "maltu", "pōpiyu"},    {"pōpaḷ", "maltaḷ", "pōpiyaḷ"},
        {"pōpo", "malto", "pōpiyo"},
    };
    std::vector<std::string> nouns = {"appe", "amme", "illu", "kai", "mara", "nīr", "ūru"};

    static bool vowel_final(const std::string& noun) { return noun != "nīr"; }
    static std::string accusative(const std::string& noun) {
        return noun + (vowel_final(noun) ? "n" : "nu");
    }
    static std::string dative(const std::string& noun) {
        return noun + (vowel_final(noun) ? "k" : "ku");
    }
    static std::string genitive(const std::string& noun) {
        return noun + (vowel_final(noun) ? "ḍa" : "da");
    }
};

}  // namespace detail

// Shape A: "<qword> <subject> <noun+dative> <verb>?"  (315 distinct)
inline DemoSentence demo_sentence_a(size_t index) {
    static const detail::DemoVocab v;
    size_t qword = index % v.qwords.size();
    size_t subject = (index / 3) % v.subjects.size();
    size_t noun = (index / 15) % v.nouns.size();
    size_t verb = (index / 105) % 3;
    DemoSentence s;
    s.question = v.qwords[qword] + " " + v.subjects[subject] + " " +
                 detail::DemoVocab::dative(v.nouns[noun]) + " " + v.verbs[subject][verb] + "?";
    s.answer = v.subjects[subject] + " " + detail::DemoVocab::accusative(v.nouns[noun]) + " " +
               v.verbs[subject][verb] + ".";
    return s;
}

// Shape B: "<qword> <subject> <nounA+genitive> <nounB+accusative> <verb>?"  (1890 distinct)
inline DemoSentence demo_sentence_b(size_t index) {
    static const detail::DemoVocab v;
    size_t qword = index % v.qwords.size();
    size_t subject = (index / 3) % v.subjects.size();
    size_t noun_a = (index / 15) % v.nouns.size();
    size_t noun_b = (noun_a + 1 + (index / 105) % (v.nouns.size() - 1)) % v.nouns.size();
    size_t verb = (index / 630) % 3;
    DemoSentence s;
    s.question = v.qwords[qword] + " " + v.subjects[subject] + " " +
                 detail::DemoVocab::genitive(v.nouns[noun_a]) + " " +
                 detail::DemoVocab::accusative(v.nouns[noun_b]) + " " + v.verbs[subject][verb] +
                 "?";
    s.answer = v.subjects[subject] + " " + detail::DemoVocab::genitive(v.nouns[noun_a]) + " " +
               detail::DemoVocab::accusative(v.nouns[noun_b]) + " " + v.verbs[subject][verb] + ".";
    return s;
}

// The 200 bundled seed examples with the category allocation the seed set is
// audited against: greetings 40, numbers_time 30, daily 50, grammar_demo 40,
// cultural 40.
inline std::vector<DatasetExample> make_demo_seed_examples() {
    std::vector<DatasetExample> out;
    auto category_for = [](size_t i) {
        if (i < 40) return Category::greetings;
        if (i < 70) return Category::numbers_time;
        if (i < 120) return Category::daily;
        if (i < 160) return Category::grammar_demo;
        return Category::cultural;
    };
    for (size_t i = 0; i < 200; ++i) {
        DemoSentence s = demo_sentence_a(i);
        DatasetExample ex;
        ex.question = s.question;
        ex.answer = s.answer;
        ex.category = category_for(i);
        ex.provenance = Provenance::manual;
        ex.split = Split::seed;
        ex.region = i % 2 == 0 ? "mangalore" : "udupi";
        out.push_back(std::move(ex));
    }
    return out;
}

// 100 held-out questions (shape B, disjoint from every shape-A seed).
inline std::vector<DatasetExample> make_demo_heldout() {
    std::vector<DatasetExample> out;
    for (size_t i = 0; i < 100; ++i) {
        DemoSentence s = demo_sentence_b(i);
        DatasetExample ex;
        ex.question = s.question;
        ex.answer = s.answer;
        ex.category = static_cast<Category>(i % kCategoryNames.size());
        ex.provenance = Provenance::manual;
        ex.split = Split::heldout;
        ex.region = i % 2 == 0 ? "mangalore" : "udupi";
        out.push_back(std::move(ex));
    }
    return out;
}

inline LanguagePack make_tulu_mini_pack_with_seeds() {
    LanguagePack pack = make_tulu_mini_pack();
    pack.seed_examples = make_demo_seed_examples();
    pack.finalize();
    return pack;
}

}  // namespace tulu
