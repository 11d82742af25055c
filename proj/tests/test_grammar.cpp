#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "tulukit/builtin_packs.hpp"
#include "tulukit/grammar_check.hpp"
#include "tulukit/rng.hpp"

using namespace tulu;

namespace {

const LanguagePack& mini() {
    static const LanguagePack pack = make_tulu_mini_pack();
    return pack;
}

GrammarVerdict synthetic_verdict(bool applicable, bool passed) {
    GrammarVerdict v;
    if (applicable) {
        v.checkable_constructions = 1;
        if (!passed) v.violations.push_back({RuleFamily::verb, 0, 1, "x"});
    }
    return v;
}

}  // namespace

TEST_CASE("a pronoun plus a listed verb form passes with two constructions") {
    GrammarVerdict v = check_response("yān pōpe", mini());
    CHECK(v.passed());
    CHECK(v.checkable_constructions == 2);
    CHECK(v.violations.empty());
}

TEST_CASE("empty text is not applicable") {
    GrammarVerdict v = check_response("", mini());
    CHECK_FALSE(v.applicable());
    CHECK(v.checkable_constructions == 0);
    CHECK_FALSE(v.passed());
}

TEST_CASE("verb before object violates SOV order") {
    GrammarVerdict v = check_response("pōpe yān appen.", mini());
    CHECK(v.applicable());
    REQUIRE(v.violations.size() == 1);
    CHECK(v.violations[0].family == RuleFamily::order);
}

TEST_CASE("unlisted verb form from a known stem is a verb violation") {
    GrammarVerdict v = check_response("yān appen pōpinna.", mini());
    bool found = false;
    for (const auto& viol : v.violations)
        if (viol.family == RuleFamily::verb) found = true;
    CHECK(found);
}

TEST_CASE("unlicensed case suffix for the stem class is a case violation") {
    // nīr is consonant-final; -ḍa licenses only vowel-final stems.
    GrammarVerdict v = check_response("yān nīrḍa pōpe", mini());
    REQUIRE(v.violations.size() == 1);
    CHECK(v.violations[0].family == RuleFamily::case_marking);
}

TEST_CASE("subject-verb disagreement is flagged") {
    // pōpu is third person; yān is first person.
    GrammarVerdict v = check_response("yān appen pōpu.", mini());
    REQUIRE(v.violations.size() == 1);
    CHECK(v.violations[0].family == RuleFamily::verb);
}

TEST_CASE("unknown pronoun inflection is a pronoun violation") {
    GrammarVerdict v = check_response("yāninna pōpe", mini());
    bool found = false;
    for (const auto& viol : v.violations)
        if (viol.family == RuleFamily::pronoun) found = true;
    CHECK(found);
}

TEST_CASE("unrecognized tokens are skipped, not violations") {
    GrammarVerdict v = check_response("zzz qqq", mini());
    CHECK_FALSE(v.applicable());
    CHECK(v.violations.empty());
}

TEST_CASE("grammar accuracy excludes not-applicable verdicts") {
    SUBCASE("85 of 100, all applicable") {
        std::vector<GrammarVerdict> verdicts;
        for (int i = 0; i < 100; ++i) verdicts.push_back(synthetic_verdict(true, i < 85));
        auto acc = grammar_accuracy(verdicts);
        REQUIRE(acc.percent.has_value());
        CHECK(*acc.percent == doctest::Approx(85.0).epsilon(1e-12));
        CHECK(acc.applicable == 100);
    }
    SUBCASE("all not applicable reports absent with denominator zero") {
        std::vector<GrammarVerdict> verdicts(5);
        auto acc = grammar_accuracy(verdicts);
        CHECK_FALSE(acc.percent.has_value());
        CHECK(acc.applicable == 0);
    }
    SUBCASE("3 of 4 applicable with one n/a") {
        std::vector<GrammarVerdict> verdicts;
        verdicts.push_back(synthetic_verdict(true, true));
        verdicts.push_back(synthetic_verdict(true, true));
        verdicts.push_back(synthetic_verdict(true, true));
        verdicts.push_back(synthetic_verdict(true, false));
        verdicts.push_back(synthetic_verdict(false, false));
        auto acc = grammar_accuracy(verdicts);
        REQUIRE(acc.percent.has_value());
        CHECK(*acc.percent == doctest::Approx(75.0).epsilon(1e-12));
        CHECK(acc.applicable == 4);
    }
}

TEST_CASE("validate_checker against human labels") {
    const std::string flagged = "pōpe yān appen.";   // order violation
    const std::string clean = "yān appen pōpe.";     // passes

    SUBCASE("checker matching labels exactly scores (1, 1)") {
        std::vector<std::pair<std::string, bool>> labeled = {
            {flagged, true}, {clean, false}, {flagged, true}, {clean, false}};
        auto pr = validate_checker(labeled, mini());
        CHECK(pr.precision == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(pr.recall == doctest::Approx(1.0).epsilon(1e-12));
    }

    SUBCASE("confusion fixture TP=8 FP=1 FN=2") {
        std::vector<std::pair<std::string, bool>> labeled;
        for (int i = 0; i < 8; ++i) labeled.push_back({flagged, true});   // TP
        labeled.push_back({flagged, false});                              // FP
        for (int i = 0; i < 2; ++i) labeled.push_back({clean, true});     // FN
        for (int i = 0; i < 4; ++i) labeled.push_back({clean, false});    // TN
        auto pr = validate_checker(labeled, mini());
        CHECK(pr.precision == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
        CHECK(pr.recall == doctest::Approx(0.8).epsilon(1e-12));
    }

    SUBCASE("empty input is an error") {
        CHECK_THROWS_AS(validate_checker({}, mini()), Error);
    }
}

TEST_CASE("corrupt_grammar swaps case lists deterministically") {
    const GrammarRulePack& original = mini().grammar;
    GrammarRulePack corrupted = corrupt_grammar(original, 42);
    CHECK(corrupted.case_markers.at(Case::dative).suffixes ==
          original.case_markers.at(Case::accusative).suffixes);
    CHECK(corrupted.case_markers.at(Case::accusative).suffixes ==
          original.case_markers.at(Case::dative).suffixes);
    // untouched markers stay put
    CHECK(corrupted.case_markers.at(Case::genitive).suffixes ==
          original.case_markers.at(Case::genitive).suffixes);

    GrammarRulePack again = corrupt_grammar(original, 42);
    CHECK(again == corrupted);  // same seed, identical pack

    GrammarRulePack twice = corrupt_grammar(corrupted, 42);
    CHECK(twice.case_markers.at(Case::dative).suffixes ==
          original.case_markers.at(Case::dative).suffixes);
    CHECK(twice.case_markers.at(Case::accusative).suffixes ==
          original.case_markers.at(Case::accusative).suffixes);
}

TEST_CASE("corrupt_grammar exchanges genders and requires both markers") {
    GrammarRulePack corrupted = corrupt_grammar(mini().grammar, 1);
    for (const auto& [lemma, paradigm] : mini().grammar.verb_paradigms) {
        const auto& corrupted_forms = corrupted.verb_paradigms.at(lemma).forms;
        for (size_t i = 0; i < paradigm.forms.size(); ++i) {
            Gender g = paradigm.forms[i].gender;
            Gender expected = g == Gender::m ? Gender::f : g == Gender::f ? Gender::m : g;
            CHECK(corrupted_forms[i].gender == expected);
        }
    }
    GrammarRulePack no_dative = mini().grammar;
    no_dative.case_markers.erase(Case::dative);
    CHECK_THROWS_AS(corrupt_grammar(no_dative, 1), Error);
}

TEST_CASE("a sentence correct under the original pack fails under the corrupted one") {
    // Micro pack: the two-form paradigm makes the surface rotation a swap,
    // so pōpe always lands on the third-person bundle.
    LanguagePack pack = testsupport::make_micro_pack();
    REQUIRE(check_response("yān appen pōpe.", pack).passed());
    LanguagePack corrupted = pack;
    corrupted.grammar = corrupt_grammar(pack.grammar, 7);
    corrupted.finalize();
    GrammarVerdict v = check_response("yān appen pōpe.", corrupted);
    CHECK_FALSE(v.passed());
    CHECK_FALSE(v.violations.empty());
}

TEST_CASE("adding a stem-sharing verb form never increases the violation count") {
    SplitMix64 rng(23);
    const LanguagePack& base = mini();
    std::vector<std::string> token_pool = {"yān",  "īr",   "appen", "appe",  "nīrḍa", "pōpe",
                                           "pōpu", "mara", "malte", "pōpinna", "zzz",  "enge"};
    for (int iter = 0; iter < 300; ++iter) {
        std::string text;
        size_t len = 1 + rng.bounded(6);
        for (size_t i = 0; i < len; ++i) {
            if (i) text += ' ';
            text += token_pool[rng.bounded(token_pool.size())];
        }
        text += ".";
        size_t before = check_response(text, base).violations.size();

        LanguagePack extended = base;
        VerbForm extra;
        extra.surface = "pōpinna";  // extends the pōpuni paradigm with its stem
        extra.person = static_cast<int>(1 + rng.bounded(3));
        extra.number = rng.bounded(2) ? Number::sg : Number::pl;
        extra.tense = Tense::future;
        extended.grammar.verb_paradigms["pōpuni"].forms.push_back(extra);
        extended.finalize();
        size_t after = check_response(text, extended).violations.size();
        CAPTURE(text);
        CHECK(after <= before);
    }
}

TEST_CASE("generative property: pack-sampled SOV sentences always pass") {
    SplitMix64 rng(29);
    const LanguagePack& pack = mini();
    std::vector<std::pair<PronounKey, std::string>> subjects;
    for (const auto& [key, forms] : pack.grammar.pronouns)
        for (const auto& form : forms) subjects.emplace_back(key, form);
    std::vector<std::string> nouns;
    for (const auto& e : pack.lexicon)
        if (e.pos == Pos::noun) nouns.push_back(e.surface);

    for (int iter = 0; iter < 300; ++iter) {
        const auto& [key, subject] = subjects[rng.bounded(subjects.size())];
        // verb form agreeing with the sampled subject
        std::vector<std::string> agreeing;
        for (const auto& [lemma, paradigm] : pack.grammar.verb_paradigms)
            for (const auto& form : paradigm.forms)
                if (form.person == key.person && form.number == key.number)
                    agreeing.push_back(form.surface);
        REQUIRE(!agreeing.empty());
        std::string verb = agreeing[rng.bounded(agreeing.size())];
        const std::string& noun = nouns[rng.bounded(nouns.size())];
        // licensed suffix for the noun's stem class, any case
        std::vector<std::string> licensed;
        for (const auto& [c, marker] : pack.grammar.case_markers)
            for (const auto& s : marker.suffixes)
                if (s.stem_class == "any" || s.stem_class == detail::stem_class_of(noun))
                    licensed.push_back(s.suffix);
        REQUIRE(!licensed.empty());
        std::string object = noun + licensed[rng.bounded(licensed.size())];
        std::string sentence = subject + " " + object + " " + verb + ".";
        GrammarVerdict v = check_response(sentence, pack);
        CAPTURE(sentence);
        CHECK(v.passed());
    }
}

TEST_CASE("rule coverage per family") {
    SUBCASE("fully analyzable sentences score 100 in every relevant family") {
        std::vector<std::string> sentences = {"yān appen pōpe.", "īr marak pōpar."};
        auto cov = rule_coverage(mini(), sentences);
        for (const auto& [family, stat] : cov) {
            if (stat.relevant == 0) continue;
            REQUIRE(stat.percent.has_value());
            CHECK(*stat.percent == doctest::Approx(100.0).epsilon(1e-12));
        }
        CHECK(cov[RuleFamily::verb].relevant > 0);
        CHECK(cov[RuleFamily::pronoun].relevant > 0);
        CHECK(cov[RuleFamily::case_marking].relevant > 0);
        CHECK(cov[RuleFamily::order].relevant > 0);
    }

    SUBCASE("9 of 10 verbs in paradigms gives 90% verb coverage") {
        LanguagePack pack;
        pack.id = "coverage";
        pack.scheme = make_kannada_scheme();
        std::string verbs;
        for (int i = 0; i < 10; ++i) {
            std::string surface = "nadap" + std::string(1, static_cast<char>('a' + i));
            pack.lexicon.push_back({surface, "v", Pos::verb, std::nullopt});
            if (i < 9) {
                VerbParadigm p;
                p.lemma = surface;
                p.stem = surface;
                p.forms = {{surface, 1, Number::sg, Gender::none, Tense::present,
                            Formality::informal}};
                pack.grammar.verb_paradigms[surface] = p;
            }
            if (i) verbs += ' ';
            verbs += surface;
        }
        pack.finalize();
        auto cov = rule_coverage(pack, {verbs});
        REQUIRE(cov[RuleFamily::verb].percent.has_value());
        CHECK(cov[RuleFamily::verb].relevant == 10);
        CHECK(cov[RuleFamily::verb].analyzable == 9);
        CHECK(*cov[RuleFamily::verb].percent == doctest::Approx(90.0).epsilon(1e-12));
    }
}

TEST_CASE("check_response is pure and deterministic") {
    const std::string text = "yān nīrḍa pōpinna zzz.";
    auto v1 = check_response(text, mini());
    auto v2 = check_response(text, mini());
    CHECK(v1.checkable_constructions == v2.checkable_constructions);
    REQUIRE(v1.violations.size() == v2.violations.size());
    for (size_t i = 0; i < v1.violations.size(); ++i) {
        CHECK(v1.violations[i].family == v2.violations[i].family);
        CHECK(v1.violations[i].begin == v2.violations[i].begin);
        CHECK(v1.violations[i].message == v2.violations[i].message);
    }
}
