#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "support.hpp"
#include "tulukit/builtin_packs.hpp"
#include "tulukit/purity.hpp"
#include "tulukit/rng.hpp"

using namespace tulu;

namespace {

const LanguagePack& mini() {
    static const LanguagePack pack = make_tulu_mini_pack();
    return pack;
}

ContaminationResult contaminated_result(bool c) {
    ContaminationResult r;
    r.contaminated = c;
    if (c) r.hits.push_back({"x", 0, 1, "y"});
    return r;
}

}  // namespace

TEST_CASE("watchlist hit with suggested replacement") {
    auto r = detect_contamination("naanu pōpe", mini());
    CHECK(r.contaminated);
    REQUIRE(r.hits.size() == 1);
    CHECK(r.hits[0].prohibited == "naanu");
    CHECK(r.hits[0].replacement == "yān");
    CHECK(r.hits[0].begin == 0);
    CHECK(r.hits[0].end == 5);
}

TEST_CASE("clean target-language text has no hits") {
    auto r = detect_contamination("yān pōpe", mini());
    CHECK_FALSE(r.contaminated);
    CHECK(r.hits.empty());
}

TEST_CASE("allowlisted loanwords never count as hits") {
    auto r = detect_contamination("yān computer galasuve", mini());
    CHECK_FALSE(r.contaminated);
    REQUIRE(r.allowlisted_loans.size() == 1);
    CHECK(r.allowlisted_loans[0] == "computer");
}

TEST_CASE("normalized spellings of prohibited forms still match") {
    // upstream normalization rewrites naanu -> nānu; the pair must still hit
    std::string normalized = normalize_roman("naanu pōpe", mini().scheme);
    CHECK(normalized == "nānu pōpe");
    auto r = detect_contamination(normalized, mini());
    CHECK(r.contaminated);
    REQUIRE(r.hits.size() == 1);
    CHECK(r.hits[0].prohibited == "naanu");
}

TEST_CASE("matching is case-insensitive") {
    auto r = detect_contamination("Naanu pōpe", mini());
    CHECK(r.contaminated);
    auto r2 = detect_contamination("HĒGE", mini());
    CHECK(r2.contaminated);
}

TEST_CASE("matching is whole-word only") {
    auto r = detect_contamination("naanuprefix pōpe", mini());
    CHECK_FALSE(r.contaminated);
}

TEST_CASE("diacritic sensitivity is the default; folding is opt-in") {
    Watchlist watchlist;
    watchlist.pairs = {{"yan", "x", ""}};
    auto sensitive = detect_contamination("yān", watchlist, mini().scheme);
    CHECK_FALSE(sensitive.contaminated);
    auto folded = detect_contamination("yān", watchlist, mini().scheme, DiacriticMode::fold);
    CHECK(folded.contaminated);
}

TEST_CASE("contamination rate arithmetic") {
    SUBCASE("5 of 100") {
        std::vector<ContaminationResult> results;
        for (int i = 0; i < 100; ++i) results.push_back(contaminated_result(i < 5));
        CHECK(contamination_rate(results) == doctest::Approx(5.0).epsilon(1e-12));
    }
    SUBCASE("all clean") {
        std::vector<ContaminationResult> results(10);
        CHECK(contamination_rate(results) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("13 of 20") {
        std::vector<ContaminationResult> results;
        for (int i = 0; i < 20; ++i) results.push_back(contaminated_result(i < 13));
        CHECK(contamination_rate(results) == doctest::Approx(65.0).epsilon(1e-12));
    }
    SUBCASE("empty list is an error") {
        CHECK_THROWS_AS(contamination_rate({}), Error);
    }
    SUBCASE("permutation invariant and bounded") {
        SplitMix64 rng(3);
        std::vector<ContaminationResult> results;
        for (int i = 0; i < 37; ++i) results.push_back(contaminated_result(rng.bounded(2)));
        double rate = contamination_rate(results);
        CHECK(rate >= 0.0);
        CHECK(rate <= 100.0);
        for (int shuffle = 0; shuffle < 10; ++shuffle) {
            rng.shuffle(results);
            CHECK(contamination_rate(results) == doctest::Approx(rate).epsilon(1e-12));
        }
    }
}

TEST_CASE("appending a clean sentence never removes hits; concatenation unions them") {
    SplitMix64 rng(5);
    std::vector<std::string> dirty = {"naanu pōpe", "yelli uppu", "hēge encha"};
    std::vector<std::string> clean = {"yān pōpe", "appe illu", "eḍḍe mara"};
    for (int iter = 0; iter < 100; ++iter) {
        std::string a = dirty[rng.bounded(dirty.size())];
        std::string b = clean[rng.bounded(clean.size())];
        auto hits_a = detect_contamination(a, mini()).hits.size();
        auto appended = detect_contamination(a + ". " + b, mini()).hits.size();
        CHECK(appended >= hits_a);
        std::string c = dirty[rng.bounded(dirty.size())];
        auto union_size = detect_contamination(a + " " + c, mini()).hits.size();
        auto parts = detect_contamination(a, mini()).hits.size() +
                     detect_contamination(c, mini()).hits.size();
        CHECK(union_size == parts);
    }
}

TEST_CASE("vocabulary coverage counts lexicon tokens after suffix stripping") {
    SUBCASE("all tokens known") {
        // appen resolves via accusative stripping; the rest are lexicon entries
        auto cov = vocabulary_coverage("yān appen encha", mini());
        REQUIRE(cov.has_value());
        CHECK(*cov == doctest::Approx(100.0).epsilon(1e-12));
    }
    SUBCASE("3 of 4 known") {
        auto cov = vocabulary_coverage("yān appe encha zzz", mini());
        REQUIRE(cov.has_value());
        CHECK(*cov == doctest::Approx(75.0).epsilon(1e-12));
    }
    SUBCASE("verb forms outside the lexicon do not count as vocabulary") {
        // coverage is lexicon membership, not paradigm membership
        auto cov = vocabulary_coverage("yān pōpe", mini());
        REQUIRE(cov.has_value());
        CHECK(*cov == doctest::Approx(50.0).epsilon(1e-12));
    }
    SUBCASE("empty text reports absent") {
        CHECK_FALSE(vocabulary_coverage("", mini()).has_value());
        CHECK_FALSE(vocabulary_coverage("  ... ", mini()).has_value());
    }
}

TEST_CASE("tokens_per_word with the pluggable counters") {
    SUBCASE("single word counted as one token") {
        WhitespaceCounter counter;
        CHECK(tokens_per_word("pōpe", counter) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("recorded external count of 16 over 5 words gives 3.2") {
        auto counter = ReplayTokenCounter::from_file("data/fixtures/token_counts.json");
        CHECK(tokens_per_word("yān appe illu kai mara", counter) ==
              doctest::Approx(3.2).epsilon(1e-12));
    }
    SUBCASE("greedy counter with whole words in vocabulary gives 1.0") {
        GreedySubwordCounter counter("test", {"yān", "pōpe"});
        CHECK(tokens_per_word("yān pōpe", counter) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("zero words is an error") {
        WhitespaceCounter counter;
        CHECK_THROWS_AS(tokens_per_word("", counter), Error);
    }
    SUBCASE("replay miss is an error") {
        ReplayTokenCounter counter({});
        CHECK_THROWS_AS(tokens_per_word("unseen text", counter), Error);
    }
}

TEST_CASE("greedy counter properties") {
    GreedySubwordCounter counter("test", {"pō", "pe", "yā", "n", "a", "b", "c"});
    SUBCASE("count of empty text is zero") { CHECK(counter.count("") == 0); }
    SUBCASE("duplicating the text leaves the ratio unchanged") {
        std::string text = "yān pōpe abc";
        double once = tokens_per_word(text, counter);
        double twice = tokens_per_word(text + " " + text, counter);
        CHECK(once == doctest::Approx(twice).epsilon(1e-12));
    }
    SUBCASE("ratio is at least one over the longest subword") {
        SplitMix64 rng(9);
        for (int iter = 0; iter < 100; ++iter) {
            std::string text;
            size_t words = 1 + rng.bounded(4);
            for (size_t w = 0; w < words; ++w) {
                if (w) text += ' ';
                size_t len = 1 + rng.bounded(8);
                for (size_t i = 0; i < len; ++i)
                    text += static_cast<char>('a' + rng.bounded(4));
            }
            double ratio = tokens_per_word(text, counter);
            CHECK(ratio >= 1.0 / static_cast<double>(counter.max_subword_length()) - 1e-12);
        }
    }
    SUBCASE("unknown codepoints count as single tokens") {
        CHECK(counter.count("zzz") == 3);
    }
}
