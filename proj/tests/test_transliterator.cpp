#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "tulukit/rng.hpp"
#include "tulukit/transliterator.hpp"

using namespace tulu;

namespace {

const TransliterationScheme& scheme() {
    static const TransliterationScheme s = make_kannada_scheme();
    return s;
}

// Structured random Kannada text: consonant clusters, vowel signs, virama
// codas, independent vowels, digits, marks, spaces, punctuation.
std::string random_kannada(SplitMix64& rng) {
    const auto& t = scheme().tables;
    std::string out;
    size_t units = 1 + rng.bounded(12);
    for (size_t i = 0; i < units; ++i) {
        switch (rng.bounded(7)) {
            case 0:
                uni::append_utf8(out, t.consonants[rng.bounded(t.consonants.size())].first);
                break;
            case 1:
                uni::append_utf8(out, t.consonants[rng.bounded(t.consonants.size())].first);
                uni::append_utf8(out, t.vowel_signs[rng.bounded(t.vowel_signs.size())].first);
                break;
            case 2:
                uni::append_utf8(out, t.consonants[rng.bounded(t.consonants.size())].first);
                uni::append_utf8(out, t.virama);
                break;
            case 3:
                uni::append_utf8(out,
                                 t.independent_vowels[rng.bounded(t.independent_vowels.size())].first);
                break;
            case 4:
                uni::append_utf8(out, t.standalone[rng.bounded(t.standalone.size())].first);
                break;
            case 5:
                out += ' ';
                break;
            default:
                out += ".,?!"[rng.bounded(4)];
                break;
        }
    }
    return out;
}

std::string random_naive_roman(SplitMix64& rng) {
    static const char* pieces[] = {"aa", "ii", "uu", "ee", "oo", "a", "e", "i", "o", "u",
                                   "k",  "g",  "p",  "n",  "m",  "r", "l", "t", "d", "y"};
    static const char* caps[] = {"A", "I", "U", "E", "O", "L", "N", "T", "D"};
    std::string out;
    size_t words = 1 + rng.bounded(5);
    for (size_t w = 0; w < words; ++w) {
        if (w) out += ' ';
        size_t units = 1 + rng.bounded(6);
        for (size_t i = 0; i < units; ++i) {
            if (rng.bounded(4) == 0) out += caps[rng.bounded(9)];
            else out += pieces[rng.bounded(20)];
        }
    }
    return out;
}

}  // namespace

TEST_CASE("ka with aa-sign transduces to kā") {
    // U+0C95 (ka) + U+0CBE (ā sign), checked against the Unicode Kannada chart.
    std::string input;
    uni::append_utf8(input, 0x0C95);
    uni::append_utf8(input, 0x0CBE);
    CHECK(transliterate(input, scheme()) == "kā");
}

TEST_CASE("empty input transduces to empty output") {
    CHECK(transliterate("", scheme()) == "");
}

TEST_CASE("retroflex consonants carry their diacritic, never the plain letter") {
    // Independent oracle: the chart rows for the retroflex series.
    const std::vector<std::pair<char32_t, std::string>> retroflex = {
        {0x0C9F, "ṭa"}, {0x0CA1, "ḍa"}, {0x0CA3, "ṇa"}, {0x0CB3, "ḷa"},
    };
    for (const auto& [cp, expected] : retroflex) {
        std::string input;
        uni::append_utf8(input, 0x0C95);  // ka prefix
        uni::append_utf8(input, cp);
        std::string out = transliterate(input, scheme());
        CHECK(out == "ka" + expected);
    }
    // A sentence containing the retroflex ḷ sign sequence keeps ḷ distinct from l.
    std::string sentence;
    uni::append_utf8(sentence, 0x0CB3);  // ḷa
    uni::append_utf8(sentence, 0x0CBF);  // i sign
    std::string out = transliterate(sentence, scheme());
    CHECK(out.find("ḷ") != std::string::npos);
    CHECK(out.find('l') == std::string::npos);
}

TEST_CASE("virama handling: clusters and trailing codas") {
    // na ma sa+virama ka+ā ra -> namaskāra
    std::string input;
    for (char32_t cp : {0x0CA8u, 0x0CAEu, 0x0CB8u, 0x0CCDu, 0x0C95u, 0x0CBEu, 0x0CB0u})
        uni::append_utf8(input, static_cast<char32_t>(cp));
    CHECK(transliterate(input, scheme()) == "namaskāra");
    // trailing virama yields the bare consonant
    std::string coda;
    uni::append_utf8(coda, 0x0CA8);
    uni::append_utf8(coda, 0x0CCD);
    CHECK(transliterate(coda, scheme()) == "n");
}

TEST_CASE("strict mode reports unmapped code points, lenient passes through") {
    std::string mixed = "ಕx";
    CHECK_THROWS_AS(transliterate(mixed, scheme()), TransliterationError);
    try {
        transliterate(mixed, scheme());
    } catch (const TransliterationError& e) {
        CHECK(std::string(e.what()).find("U+0078") != std::string::npos);
        REQUIRE(e.unmapped().size() == 1);
        CHECK(e.unmapped()[0] == U'x');
    }
    auto lenient = transliterate_lenient(mixed, scheme());
    CHECK(lenient.text == "kax");
    REQUIRE(lenient.unmapped.size() == 1);
    CHECK(lenient.unmapped[0] == U'x');
}

TEST_CASE("normalize_roman rewrites naive conventions") {
    CHECK(normalize_roman("pOpunu", scheme()) == "pōpunu");
    CHECK(normalize_roman("pōpunu", scheme()) == "pōpunu");  // already standard
    CHECK(normalize_roman("namaskAra", scheme()) == "namaskāra");
    CHECK(normalize_roman("naanu", scheme()) == "nānu");
    CHECK(normalize_roman("appaDa", scheme()) == "appaḍa");
    // word-initial capitals are left alone (position rule)
    CHECK(normalize_roman("Ir", scheme()) == "Ir");
}

TEST_CASE("normalize_roman is idempotent over random naive input") {
    SplitMix64 rng(11);
    for (int i = 0; i < 2000; ++i) {
        std::string text = random_naive_roman(rng);
        std::string once = normalize_roman(text, scheme());
        CHECK(normalize_roman(once, scheme()) == once);
    }
}

TEST_CASE("transliterate is deterministic") {
    SplitMix64 rng(13);
    for (int i = 0; i < 200; ++i) {
        std::string text = random_kannada(rng);
        CHECK(transliterate(text, scheme()) == transliterate(text, scheme()));
    }
}

TEST_CASE("alphabet closure over structured random Kannada text") {
    SplitMix64 rng(17);
    for (int i = 0; i < 1000; ++i) {
        std::string out = transliterate(random_kannada(rng), scheme());
        for (const auto& word : uni::split_words(out)) CHECK(scheme().in_alphabet(word.text));
    }
}

TEST_CASE("vowel length contrast is preserved for every pair in the table") {
    const std::vector<std::pair<char32_t, char32_t>> sign_pairs = {
        {0x0CBF, 0x0CC0}, {0x0CC1, 0x0CC2}, {0x0CC6, 0x0CC7}, {0x0CCA, 0x0CCB},
    };
    for (const auto& [cons, target] : scheme().tables.consonants) {
        (void)target;
        // bare consonant (inherent a) vs ā sign
        std::string short_a, long_a;
        uni::append_utf8(short_a, cons);
        uni::append_utf8(long_a, cons);
        uni::append_utf8(long_a, 0x0CBE);
        CHECK(transliterate(short_a, scheme()) != transliterate(long_a, scheme()));
        for (const auto& [s, l] : sign_pairs) {
            std::string with_short, with_long;
            uni::append_utf8(with_short, cons);
            uni::append_utf8(with_short, s);
            uni::append_utf8(with_long, cons);
            uni::append_utf8(with_long, l);
            CHECK(transliterate(with_short, scheme()) != transliterate(with_long, scheme()));
        }
    }
    const std::vector<std::pair<char32_t, char32_t>> vowel_pairs = {
        {0x0C85, 0x0C86}, {0x0C87, 0x0C88}, {0x0C89, 0x0C8A}, {0x0C8E, 0x0C8F}, {0x0C92, 0x0C93},
    };
    for (const auto& [s, l] : vowel_pairs)
        CHECK(transliterate(uni::encode_utf8(s), scheme()) !=
              transliterate(uni::encode_utf8(l), scheme()));
}

TEST_CASE("classify_script covers the defined conditions") {
    CHECK(classify_script("ಕನಡ ಪದ", scheme()) == ScriptCondition::kannada_script);
    CHECK(classify_script("yān pōpe", scheme()) == ScriptCondition::standard_roman);
    CHECK(classify_script("naanu hogutini", scheme()) == ScriptCondition::naive_roman);
    CHECK(classify_script("ಕನಡ word ಪದ roman", scheme()) == ScriptCondition::mixed);
    CHECK(classify_script("", scheme()) == ScriptCondition::unknown);
    CHECK(classify_script("123 !?", scheme()) == ScriptCondition::unknown);
    // all-alphabet text with no diacritics and no naive patterns is standard
    CHECK(classify_script("aye mara", scheme()) == ScriptCondition::standard_roman);
}

TEST_CASE("scheme json round trip preserves the table") {
    auto json = scheme_to_json(scheme());
    TransliterationScheme back = scheme_from_json(json);
    CHECK(back == scheme());
    CHECK(back.rules().size() == scheme().rules().size());
}
