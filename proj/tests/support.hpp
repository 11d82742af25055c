#pragma once

// Shared test utilities: scratch directories, tiny fixture packs, and a
// scripted transport for gateway tests.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "tulukit/builtin_packs.hpp"
#include "tulukit/gateway.hpp"
#include "tulukit/tulukit.hpp"

namespace testsupport {

namespace fs = std::filesystem;

// Unique scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        path_ = fs::temp_directory_path() /
                ("tulukit_" + tag + "_" + std::to_string(::getpid()) + "_" +
                 std::to_string(counter_++));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }
    std::string str() const { return path_.string(); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    static inline int counter_ = 0;
    fs::path path_;
};

inline void write_file(const std::string& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    out << contents;
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Transport that must never be reached (replay-mode zero-network checks).
struct FailTransport final : tulu::Transport {
    tulu::HttpResponse post(const std::string&,
                            const std::vector<std::pair<std::string, std::string>>&,
                            const std::string&) override {
        throw std::logic_error("network transport invoked");
    }
};

// Scripted transport: returns canned status/body pairs in order, recording
// every request it sees.
struct ScriptedTransport final : tulu::Transport {
    struct Call {
        std::string url;
        std::vector<std::pair<std::string, std::string>> headers;
        std::string body;
    };
    std::vector<tulu::HttpResponse> responses;
    std::vector<Call> calls;
    size_t next = 0;

    tulu::HttpResponse post(const std::string& url,
                            const std::vector<std::pair<std::string, std::string>>& headers,
                            const std::string& body) override {
        calls.push_back({url, headers, body});
        if (next >= responses.size()) return responses.empty() ? tulu::HttpResponse{500, ""}
                                                               : responses.back();
        return responses[next++];
    }
};

inline std::string openai_body(const std::string& text) {
    nlohmann::json j = {{"choices", {{{"message", {{"content", text}}}}}}};
    return j.dump();
}

// A minimal pack: one pronoun, one two-form paradigm, accusative and dative
// markers. Small enough that corruption effects are fully predictable.
inline tulu::LanguagePack make_micro_pack() {
    using namespace tulu;
    LanguagePack pack;
    pack.id = "micro";
    pack.target_language_name = "Tulu";
    pack.contaminant_language_name = "Kannada";
    pack.scheme = make_kannada_scheme();

    auto lex = [&](const std::string& s, const std::string& g, Pos p) {
        pack.lexicon.push_back({s, g, p, std::nullopt});
    };
    lex("yān", "I", Pos::pronoun);
    lex("appe", "mother", Pos::noun);
    lex("pōpuni", "to go", Pos::verb);

    VerbParadigm paradigm;
    paradigm.lemma = "pōpuni";
    paradigm.stem = "pōp";
    paradigm.forms = {
        {"pōpe", 1, Number::sg, Gender::none, Tense::present, Formality::informal},
        {"pōpu", 3, Number::sg, Gender::none, Tense::present, Formality::informal},
    };
    pack.grammar.verb_paradigms[paradigm.lemma] = paradigm;
    pack.grammar.case_markers[Case::accusative] = {Case::accusative, {{"vowel_final", "n"}}};
    pack.grammar.case_markers[Case::dative] = {Case::dative, {{"vowel_final", "k"}}};
    pack.grammar.pronouns[{1, Number::sg, Formality::informal}] = {"yān"};
    AgreementRule r1;
    r1.subject.person = 1;
    r1.subject.number = Number::sg;
    r1.verb.person = 1;
    r1.verb.number = Number::sg;
    pack.grammar.agreement_rules = {r1};
    pack.verification_checklist = {"Avoided prohibited words?"};
    pack.finalize();
    return pack;
}

}  // namespace testsupport
