// Regenerates every bundled data file under data/: the mini pack, held-out
// and script-study sets, the replay fixture corpus, judge score fixtures,
// annotation demos, the subword vocabulary, and the experiment configs.
// Fully deterministic: rerunning produces byte-identical files.
//
// Replay fixtures are synthesized responses whose per-cell contamination and
// grammar-failure counts are fixed constants, so the bundled experiments
// always reproduce the same aggregate numbers. Requests are built through
// the same harness helpers the runner uses, which keeps recorded hashes in
// lockstep with replay-time hashes.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "tulukit/builtin_packs.hpp"
#include "tulukit/datagen.hpp"
#include "tulukit/harness.hpp"
#include "tulukit/tulukit.hpp"

#include "CLI11.hpp"

namespace fs = std::filesystem;
using namespace tulu;

namespace {

constexpr const char* kFixtureTimestamp = "2026-08-08T00:00:00Z";

void write_file(const fs::path& path, const std::string& contents) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << contents;
}

// ---------------------------------------------------------------------------
// Reverse transliteration (fixture-authoring only): builds the Kannada-script
// rendering of demo roman text from the same syllabary tables, then asserts
// the forward transducer maps it back exactly.

class ReverseTransliterator {
public:
    explicit ReverseTransliterator(const TransliterationScheme& scheme) : scheme_(scheme) {
        for (const auto& [cp, target] : scheme.tables.consonants) {
            std::string stem = target.substr(0, target.size() - 1);  // strip inherent 'a'
            consonants_.emplace_back(stem, cp);
        }
        std::sort(consonants_.begin(), consonants_.end(),
                  [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
        for (const auto& [cp, target] : scheme.tables.vowel_signs) signs_.emplace_back(target, cp);
        signs_.emplace_back("a", 0);  // inherent vowel: no sign
        std::sort(signs_.begin(), signs_.end(),
                  [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
        for (const auto& [cp, target] : scheme.tables.independent_vowels)
            independents_.emplace_back(target, cp);
        std::sort(independents_.begin(), independents_.end(),
                  [](const auto& a, const auto& b) { return a.first.size() > b.first.size(); });
    }

    std::string to_kannada(const std::string& roman) const {
        std::u32string cps = uni::decode_utf8(roman);
        std::string out;
        size_t pos = 0;
        while (pos < cps.size()) {
            if (!uni::is_roman_letter(cps[pos])) {
                uni::append_utf8(out, cps[pos]);
                ++pos;
                continue;
            }
            size_t consumed = 0;
            if (const auto* consonant = match(consonants_, cps, pos, consumed)) {
                uni::append_utf8(out, *consonant);
                pos += consumed;
                size_t vowel_len = 0;
                if (const auto* sign = match(signs_, cps, pos, vowel_len)) {
                    if (*sign != 0) uni::append_utf8(out, *sign);
                    pos += vowel_len;
                } else {
                    uni::append_utf8(out, scheme_.tables.virama);
                }
                continue;
            }
            size_t vowel_len = 0;
            if (const auto* vowel = match(independents_, cps, pos, vowel_len)) {
                uni::append_utf8(out, *vowel);
                pos += vowel_len;
                continue;
            }
            throw Error("cannot reverse-transliterate: " + roman);
        }
        return out;
    }

private:
    static const char32_t* match(const std::vector<std::pair<std::string, char32_t>>& table,
                                 const std::u32string& cps, size_t pos, size_t& consumed) {
        for (const auto& [target, cp] : table) {
            std::u32string t = uni::decode_utf8(target);
            if (t.empty() || pos + t.size() > cps.size()) continue;
            if (cps.compare(pos, t.size(), t) == 0) {
                consumed = t.size();
                return &cp;
            }
        }
        return nullptr;
    }

    const TransliterationScheme& scheme_;
    std::vector<std::pair<std::string, char32_t>> consonants_;
    std::vector<std::pair<std::string, char32_t>> signs_;
    std::vector<std::pair<std::string, char32_t>> independents_;
};

// ---------------------------------------------------------------------------
// Synthesized model responses. Four behaviors, assigned per question index so
// that each cell hits its fixed contamination / grammar-failure counts.

enum class ResponseKind { clean, contaminated, ungrammatical, both };

struct CellMix {
    size_t both = 0;          // contaminated and ungrammatical
    size_t contaminated = 0;  // contaminated only
    size_t ungrammatical = 0; // ungrammatical only
};

ResponseKind kind_for(const CellMix& mix, size_t index) {
    if (index < mix.both) return ResponseKind::both;
    if (index < mix.both + mix.contaminated) return ResponseKind::contaminated;
    if (index < mix.both + mix.contaminated + mix.ungrammatical)
        return ResponseKind::ungrammatical;
    return ResponseKind::clean;
}

std::string ungrammatical_variant(const DatasetExample& ex, size_t index) {
    // The answers are "<subject> <middle...> <verb>."; rotate three failure
    // flavors: verb-first order, an unlisted verb form, an unlicensed suffix.
    std::vector<std::string> tokens;
    std::istringstream in(ex.answer);
    std::string t;
    while (in >> t) tokens.push_back(t);
    std::string verb = tokens.back();
    if (!verb.empty() && verb.back() == '.') verb.pop_back();
    switch (index % 3) {
        case 0: {
            std::string rest;
            for (size_t i = 0; i + 1 < tokens.size(); ++i) rest += " " + tokens[i];
            return verb + rest + ".";
        }
        case 1: {
            std::string out;
            for (size_t i = 0; i + 1 < tokens.size(); ++i) out += tokens[i] + " ";
            return out + verb + "nna.";
        }
        default: {
            std::string out = tokens.front();
            out += " nīrḍa ";
            out += verb;
            out += ".";
            return out;
        }
    }
}

std::string response_for(const LanguagePack& pack, const DatasetExample& ex, size_t index,
                         ResponseKind kind) {
    const auto& prohibited = pack.watchlist.pairs[index % pack.watchlist.pairs.size()].prohibited;
    switch (kind) {
        case ResponseKind::clean: return ex.answer;
        case ResponseKind::contaminated: return prohibited + " " + ex.answer;
        case ResponseKind::ungrammatical: return ungrammatical_variant(ex, index);
        case ResponseKind::both:
            return prohibited + " " + ungrammatical_variant(ex, index);
    }
    return ex.answer;
}

void store_response(FixtureStore& store, const ChatRequest& request, const std::string& text,
                    size_t index) {
    ResponseRecord rec;
    rec.request_hash = request.hash();
    rec.response_text = text;
    rec.latency_ms = 40 + (index * 7) % 60;
    rec.timestamp = kFixtureTimestamp;
    store.save(request, rec);
}

// ---------------------------------------------------------------------------

nlohmann::json base_cell_json(const std::string& label, const std::string& version) {
    return {
        {"label", label},
        {"provider", "gemini"},
        {"model", "gemini-2.0-flash"},
        {"compile", {{"version", version}}},
        {"temperature", 0.3},
        {"top_p", 0.9},
        {"max_output_tokens", 256},
    };
}

void write_configs(const fs::path& root) {
    nlohmann::json common = {
        {"pack", "data/tulu-mini.pack.json"},
        {"test_set", "data/heldout.jsonl"},
        {"mode", "replay"},
        {"fixture_dir", "data/fixtures/replay"},
        {"counter", {{"kind", "greedy"}, {"path", "data/subword_vocab.txt"}}},
        {"stats", {{"resamples", 10000}, {"seed", 20260800}, {"alpha", 0.05}}},
        {"max_in_flight", 4},
    };

    nlohmann::json main_cfg = common;
    main_cfg["output_dir"] = "out/main";
    main_cfg["group_by"] = "region";
    main_cfg["matrix"] = {base_cell_json("baseline", "v1"), base_cell_json("grammar", "v2"),
                          base_cell_json("grammar_constraints", "v3"),
                          base_cell_json("full_system", "v4")};
    write_file(root / "experiments" / "main.json", main_cfg.dump(2) + "\n");

    nlohmann::json falsify_cfg = common;
    falsify_cfg["output_dir"] = "out/falsify";
    falsify_cfg["matrix"] = {base_cell_json("full_system", "v4")};
    write_file(root / "experiments" / "falsify.json", falsify_cfg.dump(2) + "\n");

    nlohmann::json script_cfg = common;
    script_cfg["output_dir"] = "out/script_study";
    script_cfg["script_questions"] = "data/script_study.jsonl";
    script_cfg["matrix"] = {base_cell_json("script_study", "v1")};
    write_file(root / "experiments" / "script_study.json", script_cfg.dump(2) + "\n");

    nlohmann::json sens_cfg = common;
    sens_cfg["output_dir"] = "out/sensitivity";
    nlohmann::json sens_cell = base_cell_json("full_system", "v4");
    sens_cell["max_output_tokens"] = 300;  // separates sweep fixtures from the main corpus
    sens_cfg["matrix"] = {sens_cell};
    sens_cfg["sweeps"] = {{"temperatures", {0.3, 0.7, 1.0}},
                          {"top_ps", {0.8, 0.9, 0.95}},
                          {"orderings", 5},
                          {"ordering_seed", 7},
                          {"seeds", {1, 2, 3, 4, 5}},
                          {"questions", 10}};
    write_file(root / "experiments" / "sensitivity.json", sens_cfg.dump(2) + "\n");

    nlohmann::json datagen_cfg = common;
    datagen_cfg["output_dir"] = "out/datagen";
    datagen_cfg["generate_n"] = 10;
    nlohmann::json gen_cell = base_cell_json("self_play", "v4");
    gen_cell["temperature"] = 0.9;
    datagen_cfg["matrix"] = {gen_cell};
    nlohmann::json judges = nlohmann::json::array();
    for (int j = 0; j < 3; ++j) {
        nlohmann::json judge = base_cell_json("judge", "v1");
        judge["temperature"] = 0.0;
        judge["seed"] = 101 + j;
        judges.push_back(judge);
    }
    datagen_cfg["judges"] = judges;
    write_file(root / "experiments" / "datagen.json", datagen_cfg.dump(2) + "\n");
}

void write_vocab(const fs::path& root, const LanguagePack& pack) {
    std::set<std::string> vocab;
    for (const auto& e : pack.lexicon) vocab.insert(e.surface);
    for (const auto& [lemma, paradigm] : pack.grammar.verb_paradigms) {
        vocab.insert(lemma);
        for (const auto& f : paradigm.forms) vocab.insert(f.surface);
    }
    for (const auto& [key, forms] : pack.grammar.pronouns)
        for (const auto& f : forms) vocab.insert(f);
    for (const auto& [c, marker] : pack.grammar.case_markers)
        for (const auto& s : marker.suffixes) vocab.insert(s.suffix);
    for (const auto& pair : pack.watchlist.pairs) vocab.insert(pair.prohibited);
    for (const auto& loan : pack.watchlist.loanword_allowlist) vocab.insert(loan);
    for (char c = 'a'; c <= 'z'; ++c) vocab.insert(std::string(1, c));
    for (const char* g : {"ā", "ī", "ū", "ē", "ō", "ḷ", "ṇ", "ṭ", "ḍ", "ṅ", ".", ",", "?", "!"})
        vocab.insert(g);
    std::string contents = "# greedy longest-match subword vocabulary (one piece per line)\n";
    for (const auto& piece : vocab) contents += piece + "\n";
    write_file(root / "subword_vocab.txt", contents);
}

struct SweepFailures {
    std::string label;
    std::set<size_t> failing;  // question indices answered ungrammatically
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"regenerate bundled data fixtures"};
    std::string out_root = "data";
    app.add_option("--out", out_root, "output root directory");
    CLI11_PARSE(app, argc, argv);

    try {
        fs::path root(out_root);
        LanguagePack pack = make_tulu_mini_pack_with_seeds();
        auto violations = validate_pack(pack);
        if (!violations.empty()) throw Error("builtin pack invalid: " + violations.front().message);

        write_file(root / "tulu-mini.pack.json", serialize_pack(pack));
        write_vocab(root, pack);
        write_configs(root);

        std::vector<DatasetExample> heldout = make_demo_heldout();
        save_examples_jsonl((root / "heldout.jsonl").string(), heldout);

        // Script study: 50 shape-A questions beyond the seed slice, each with
        // its Kannada-script rendering; round-trip checked against the
        // forward transducer.
        ReverseTransliterator reverse(pack.scheme);
        std::vector<ScriptQuestion> script_questions;
        {
            std::string lines;
            for (size_t i = 0; i < 50; ++i) {
                DemoSentence s = demo_sentence_a(200 + i);
                ScriptQuestion q;
                q.id = "sq" + std::to_string(i + 1);
                q.roman = s.question;
                q.kannada = reverse.to_kannada(s.question);
                if (transliterate(q.kannada, pack.scheme) != q.roman)
                    throw Error("script round-trip failed for: " + q.roman);
                q.region = i % 2 == 0 ? "mangalore" : "udupi";
                nlohmann::json j = {{"id", q.id}, {"roman", q.roman}, {"kannada", q.kannada},
                                    {"region", *q.region}};
                lines += j.dump() + "\n";
                script_questions.push_back(std::move(q));
            }
            write_file(root / "script_study.jsonl", lines);
        }

        // Replay corpus.
        fs::path replay_dir = root / "fixtures" / "replay";
        fs::remove_all(replay_dir);
        FixtureStore store(replay_dir);
        GreedySubwordCounter counter =
            GreedySubwordCounter::from_file((root / "subword_vocab.txt").string());

        // Relative paths inside the configs resolve against the repo root,
        // one level above the data directory.
        fs::path workspace = root.parent_path().empty() ? fs::path(".") : root.parent_path();
        ExperimentConfig main_cfg =
            load_experiment_config((root / "experiments" / "main.json").string(), workspace);

        // Per-cell response mixes; the full_system cell pins the regression
        // constants 5% contamination / 85% grammar accuracy.
        std::map<std::string, CellMix> mixes = {
            {"baseline", {60, 15, 15}},
            {"grammar", {20, 8, 17}},
            {"grammar_constraints", {5, 5, 23}},
            {"full_system", {2, 3, 13}},
        };
        for (const auto& cell : main_cfg.matrix) {
            auto requests = make_cell_requests(pack, heldout, cell, counter);
            const CellMix& mix = mixes.at(cell.label);
            std::string response_lines;
            for (size_t i = 0; i < requests.requests.size(); ++i) {
                ResponseKind kind = kind_for(mix, i);
                std::string text = response_for(pack, heldout[i], i, kind);
                store_response(store, requests.requests[i], text, i);
                response_lines += nlohmann::json({{"question", heldout[i].question},
                                                  {"response", text}})
                                      .dump() +
                                  "\n";
            }
            // Standalone response files double as CLI regression fixtures
            // (the full_system file pins the 5.0% contamination constant).
            write_file(root / ("responses_" + cell.label + ".jsonl"), response_lines);
        }

        // Falsified arm of the full_system cell (the clean arm reuses the
        // matrix fixtures above): 32% contamination, 38% grammar accuracy.
        {
            ExperimentConfig falsify_cfg = load_experiment_config(
                (root / "experiments" / "falsify.json").string(), workspace);
            MatrixCell falsified = falsify_cfg.matrix.front();
            falsified.compile.corrupted_grammar = true;
            auto requests = make_cell_requests(pack, heldout, falsified, counter);
            CellMix mix{25, 7, 37};
            for (size_t i = 0; i < requests.requests.size(); ++i) {
                ResponseKind kind = kind_for(mix, i);
                store_response(store, requests.requests[i],
                               response_for(pack, heldout[i], i, kind), i);
            }
        }

        // Script-condition responses. Condition 1 mirrors the documented 88%
        // "entirely Kannada" share (44 of 50).
        {
            ExperimentConfig script_cfg = load_experiment_config(
                (root / "experiments" / "script_study.json").string(), workspace);
            const MatrixCell& base = script_cfg.matrix.front();
            const std::string naive = "naanu maneg hooguve alla adu yenu gottilla.";
            for (const auto& condition : script_study_conditions()) {
                auto requests = make_script_requests(pack, script_questions, base, condition);
                for (size_t i = 0; i < requests.size(); ++i) {
                    DemoSentence s = demo_sentence_a(200 + i);
                    std::string kannada_answer = reverse.to_kannada(s.answer);
                    std::string text;
                    if (condition.label == "kannada_script+target_instruction")
                        text = i < 44 ? kannada_answer : s.answer;
                    else if (condition.label == "kannada_script+contaminant_instruction")
                        text = kannada_answer;
                    else if (condition.label == "roman+target_instruction")
                        text = i < 45 ? s.answer : naive;
                    else
                        text = i < 20 ? kannada_answer : naive;
                    store_response(store, requests[i], text, i);
                }
            }
        }

        // Sensitivity sweeps over the first 10 held-out questions.
        {
            ExperimentConfig sens_cfg = load_experiment_config(
                (root / "experiments" / "sensitivity.json").string(), workspace);
            std::vector<DatasetExample> subset(heldout.begin(), heldout.begin() + 10);
            std::map<std::string, std::set<size_t>> failing = {
                {"T=0.3", {9}},         {"T=0.7", {8, 9}},   {"T=1", {0, 9}},
                {"top_p=0.8", {9}},     {"top_p=0.9", {9}},  {"top_p=0.95", {8, 9}},
                {"ordering#1", {9}},    {"ordering#2", {9}}, {"ordering#3", {9}},
                {"ordering#4", {9}},    {"ordering#5", {9}},
                {"seed=1", {9}},        {"seed=2", {9}},     {"seed=3", {9}},
                {"seed=4", {9}},        {"seed=5", {9}},
            };
            for (SweepKind sweep : {SweepKind::temperature, SweepKind::top_p, SweepKind::ordering,
                                    SweepKind::seeds}) {
                for (const MatrixCell& point : sweep_points(sens_cfg, sweep, pack, counter)) {
                    auto requests = make_cell_requests(pack, subset, point, counter);
                    const auto& fails = failing.at(point.label);
                    for (size_t i = 0; i < requests.requests.size(); ++i) {
                        std::string text = fails.count(i)
                                               ? ungrammatical_variant(subset[i], 0)
                                               : subset[i].answer;
                        store_response(store, requests.requests[i], text, i);
                    }
                }
            }
        }

        // Self-play generation and judging fixtures.
        {
            ExperimentConfig datagen_cfg = load_experiment_config(
                (root / "experiments" / "datagen.json").string(), workspace);
            const MatrixCell& gen_cell = datagen_cfg.matrix.front();
            LayeredPrompt prompt = compile_prompt(pack, gen_cell.compile.to_config(&counter));
            std::vector<DatasetExample> generated;
            for (size_t i = 0; i < datagen_cfg.generate_n; ++i) {
                DemoSentence s = demo_sentence_b(600 + i);
                ChatRequest r;
                r.provider_id = gen_cell.provider_id;
                r.model_id = gen_cell.model_id;
                r.system_prompt = prompt.text();
                r.user_message = render_generation_request(pack, i);
                r.temperature = gen_cell.temperature;
                r.top_p = gen_cell.top_p;
                r.seed = gen_cell.seed;
                r.max_output_tokens = gen_cell.max_output_tokens;
                store_response(store, r, "Q: " + s.question + "\nA: " + s.answer, i);
                DatasetExample ex;
                ex.question = s.question;
                ex.answer = s.answer;
                ex.category = static_cast<Category>(i % kCategoryNames.size());
                ex.provenance = Provenance::synthetic_raw;
                ex.split = Split::train;
                generated.push_back(std::move(ex));
            }
            // Judge scores: examples 3 and 7 fail (a dimension at 1; flat 3s).
            for (size_t i = 0; i < generated.size(); ++i) {
                for (size_t j = 0; j < datagen_cfg.judges.size(); ++j) {
                    const MatrixCell& judge = datagen_cfg.judges[j];
                    ChatRequest r;
                    r.provider_id = judge.provider_id;
                    r.model_id = judge.model_id;
                    r.system_prompt = "";
                    r.user_message = render_judge_request(generated[i]);
                    r.temperature = judge.temperature;
                    r.top_p = judge.top_p;
                    r.seed = judge.seed;
                    r.max_output_tokens = judge.max_output_tokens;
                    std::array<int, 4> scores;
                    if (i == 3) scores = {4, j == 1 ? 1 : 4, 4, 4};
                    else if (i == 7) scores = {3, 3, 3, 3};
                    else scores = {4, 4, static_cast<int>(4 + (i + j) % 2), 4};
                    std::string text;
                    for (size_t d = 0; d < scores.size(); ++d)
                        text += std::string(kJudgeDimensions[d]) + ": " +
                                std::to_string(scores[d]) + "\n";
                    store_response(store, r, text, i * 3 + j);
                }
            }
        }

        // 500 pre-scored synthetic examples: exactly 320 clear every filter
        // threshold (64% retention).
        {
            std::string lines;
            for (size_t i = 0; i < 500; ++i) {
                DemoSentence s = demo_sentence_b(100 + i);
                DatasetExample ex;
                ex.question = s.question;
                ex.answer = s.answer;
                ex.category = static_cast<Category>(i % kCategoryNames.size());
                ex.provenance = Provenance::synthetic_raw;
                ex.split = Split::train;
                JudgeScoreSet scores;
                if (i < 320) {
                    for (size_t j = 0; j < kJudgeCount; ++j)
                        scores.scores[j] = {4, 4, static_cast<int>(4 + (i + j) % 2), 4};
                } else if (i < 380) {
                    for (size_t j = 0; j < kJudgeCount; ++j) scores.scores[j] = {3, 3, 3, 3};
                } else if (i < 440) {
                    scores.scores[0] = {5, 5, 5, 5};
                    scores.scores[1] = {4, 4, 4, 4};
                    scores.scores[2] = {4, 1, 4, 4};
                } else {
                    scores.scores[0] = {5, 5, 5, 5};
                    scores.scores[1] = {3, 3, 3, 3};
                    scores.scores[2] = {3, 3, 2, 2};
                }
                ex.judge_scores = scores;
                lines += example_to_json(ex).dump() + "\n";
            }
            write_file(root / "synthetic_scores.jsonl", lines);
        }

        // Token-count replay fixture: a five-word sentence recorded at 16
        // tokens (3.2 tokens per word).
        {
            nlohmann::json counts = nlohmann::json::object();
            std::string sentence = "yān appe illu kai mara";
            counts[ReplayTokenCounter::key_for(sentence)] = 16;
            write_file(root / "fixtures" / "token_counts.json", counts.dump(2) + "\n");
        }

        // Annotation demo: three annotators, 30 items, three dimensions.
        {
            for (int a = 0; a < 3; ++a) {
                std::string lines;
                for (int i = 0; i < 30; ++i) {
                    int base = 3 + (i % 3);
                    int grammar = base;
                    int vocabulary = 3 + ((i + 1) % 3);
                    int fluency = 2 + (i % 2);
                    if (a == 1 && i % 5 == 0) grammar = std::min(5, grammar + 1);
                    if (a == 2 && i % 7 == 0) fluency = std::min(5, fluency + 1);
                    nlohmann::json j = {{"id", "item" + std::to_string(i + 1)},
                                        {"scores",
                                         {{"grammar", grammar},
                                          {"vocabulary", vocabulary},
                                          {"fluency", fluency}}}};
                    lines += j.dump() + "\n";
                }
                write_file(root / "annotations" / ("annotator" + std::to_string(a + 1) + ".jsonl"),
                           lines);
            }
        }


        size_t fixture_count = 0;
        for (auto it = fs::directory_iterator(replay_dir); it != fs::directory_iterator(); ++it)
            ++fixture_count;
        std::cout << "wrote " << fixture_count << " replay fixtures under " << replay_dir.string()
                  << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "fixture_gen: " << e.what() << "\n";
        return 1;
    }
}
