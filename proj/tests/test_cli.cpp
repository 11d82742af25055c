#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cstdio>
#include <cstdlib>
#include <string>

#include "support.hpp"

#include "json.hpp"

// End-to-end coverage of every subcommand against bundled fixtures only; the
// binary path is injected by the build.

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

CliResult run_cli(const std::string& args, bool raw_command = false) {
    std::string command =
        (raw_command ? args : std::string(TULUKIT_CLI_PATH) + " " + args) + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult result;
    char buffer[4096];
    while (size_t n = fread(buffer, 1, sizeof buffer, pipe)) result.output.append(buffer, n);
    int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

bool contains(const std::string& haystack, const std::string& needle) {
    return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("help is available for the tool and every subcommand") {
    CHECK(run_cli("--help").exit_code == 0);
    for (const char* sub :
         {"pack-validate", "transliterate", "check-grammar", "contamination", "compile-prompt",
          "generate", "filter", "run", "falsify", "script-study", "sensitivity", "agreement",
          "report"}) {
        CliResult r = run_cli(std::string(sub) + " --help");
        CAPTURE(sub);
        CHECK(r.exit_code == 0);
    }
}

TEST_CASE("usage errors exit with code 2") {
    CHECK(run_cli("").exit_code == 2);
    CHECK(run_cli("no-such-subcommand").exit_code == 2);
    CHECK(run_cli("pack-validate data/tulu-mini.pack.json --definitely-unknown-flag").exit_code == 2);
    CHECK(run_cli("run").exit_code == 2);  // missing required --config
}

TEST_CASE("pack-validate") {
    CHECK(run_cli("pack-validate data/tulu-mini.pack.json").exit_code == 0);
    CliResult json = run_cli("pack-validate data/tulu-mini.pack.json --json");
    CHECK(json.exit_code == 0);
    auto parsed = nlohmann::json::parse(json.output);
    CHECK(parsed[0].at("violations").empty());

    testsupport::TempDir dir("clibad");
    tulu::LanguagePack pack = tulu::make_tulu_mini_pack();
    pack.watchlist.pairs.push_back({"dupe", "yān", ""});
    pack.watchlist.pairs.push_back({"dupe", "encha", ""});
    testsupport::write_file(dir.file("bad.json"), tulu::serialize_pack(pack));
    CliResult bad = run_cli("pack-validate " + dir.file("bad.json"));
    CHECK(bad.exit_code == 1);
    CHECK(contains(bad.output, "watchlist_duplicate_prohibited"));
    CHECK(run_cli("pack-validate /nonexistent/pack.json").exit_code == 1);
}

TEST_CASE("transliterate reads files and classifies") {
    testsupport::TempDir dir("clitr");
    testsupport::write_file(dir.file("kn.txt"), "ನಮಸ್ಕಾರ\n");
    CliResult r = run_cli("transliterate --pack data/tulu-mini.pack.json --in " + dir.file("kn.txt"));
    CHECK(r.exit_code == 0);
    CHECK(contains(r.output, "namaskāra"));

    testsupport::write_file(dir.file("naive.txt"), "pOpunu\n");
    CliResult n = run_cli("transliterate --pack data/tulu-mini.pack.json --normalize --in " +
                          dir.file("naive.txt"));
    CHECK(contains(n.output, "pōpunu"));

    testsupport::write_file(dir.file("mixed.txt"), "yān pōpe\nnaanu hogutini\n");
    CliResult c = run_cli("transliterate --pack data/tulu-mini.pack.json --classify --in " +
                          dir.file("mixed.txt"));
    CHECK(contains(c.output, "standard_roman"));
    CHECK(contains(c.output, "naive_roman"));
}

TEST_CASE("check-grammar") {
    testsupport::TempDir dir("clicg");
    testsupport::write_file(dir.file("r.txt"), "yān appen pōpe.\npōpe yān appen.\n");
    CliResult r = run_cli("check-grammar --pack data/tulu-mini.pack.json --in " + dir.file("r.txt"));
    CHECK(r.exit_code == 0);
    CHECK(contains(r.output, "passed"));
    CHECK(contains(r.output, "failed"));
    CHECK(contains(r.output, "50.0"));
    CliResult j = run_cli("check-grammar --pack data/tulu-mini.pack.json --json --in " +
                          dir.file("r.txt"));
    auto parsed = nlohmann::json::parse(j.output);
    CHECK(parsed.at("summary").at("accuracy_pct").get<double>() == 50.0);
}

TEST_CASE("contamination prints the regression rate") {
    CliResult r = run_cli(
        "contamination --pack data/tulu-mini.pack.json --in data/responses_full_system.jsonl");
    CHECK(r.exit_code == 0);
    CHECK(r.output == "5.0\n");
    CliResult j = run_cli(
        "contamination --pack data/tulu-mini.pack.json --json --in data/responses_full_system.jsonl");
    auto parsed = nlohmann::json::parse(j.output);
    CHECK(parsed.at("contamination_pct").get<double>() == 5.0);
    CHECK(parsed.at("responses").size() == 100);
}

TEST_CASE("compile-prompt renders text and json") {
    CliResult v1 = run_cli("compile-prompt --pack data/tulu-mini.pack.json --version v1");
    CHECK(v1.exit_code == 0);
    CHECK(contains(v1.output, "Respond in Tulu"));
    CliResult v4 = run_cli("compile-prompt --pack data/tulu-mini.pack.json --version v4 --json");
    auto parsed = nlohmann::json::parse(v4.output);
    CHECK(parsed.at("layers").size() == 5);
    CHECK(contains(parsed.at("layers")[1].at("text").get<std::string>(), "yenu → yena"));
    CliResult bad = run_cli(
        "compile-prompt --pack data/tulu-mini.pack.json --version v3 --ablate no_constraints");
    CHECK(bad.exit_code == 1);
}

TEST_CASE("generate and filter run offline end to end") {
    testsupport::TempDir dir("cligen");
    CliResult gen = run_cli("generate --config data/experiments/datagen.json --out " +
                            dir.file("raw.jsonl"));
    CHECK(gen.exit_code == 0);
    CHECK(contains(gen.output, "generated 10 examples"));

    CliResult judged = run_cli("filter --raw-in " + dir.file("raw.jsonl") +
                               " --config data/experiments/datagen.json --out " +
                               dir.file("filtered.jsonl"));
    CHECK(judged.exit_code == 0);
    CHECK(contains(judged.output, "retained 8/10"));

    CliResult scored = run_cli("filter --scores-in data/synthetic_scores.jsonl");
    CHECK(scored.exit_code == 0);
    CHECK(contains(scored.output, "retained 320/500 (64%)"));

    CliResult json = run_cli("filter --scores-in data/synthetic_scores.jsonl --json");
    auto parsed = nlohmann::json::parse(json.output);
    CHECK(parsed.at("summary").at("retention_pct").get<double>() == 64.0);
}

TEST_CASE("run produces identical reports across invocations") {
    testsupport::TempDir dir("clirun");
    std::string out1 = dir.file("r1");
    std::string out2 = dir.file("r2");
    // copy the bundled config with a different output dir
    auto cfg = nlohmann::json::parse(testsupport::read_file("data/experiments/main.json"));
    cfg["output_dir"] = out1;
    testsupport::write_file(dir.file("cfg1.json"), cfg.dump());
    cfg["output_dir"] = out2;
    testsupport::write_file(dir.file("cfg2.json"), cfg.dump());

    CliResult r1 = run_cli("run --config " + dir.file("cfg1.json") + " --mode replay");
    CHECK(r1.exit_code == 0);
    CHECK(contains(r1.output, "full_system: gram=85 cont=5"));
    CliResult r2 = run_cli("run --config " + dir.file("cfg2.json") + " --mode replay");
    CHECK(r2.exit_code == 0);
    CHECK(testsupport::read_file(out1 + "/report.json") ==
          testsupport::read_file(out2 + "/report.json"));

    // determinism hash is printed and equal across runs
    auto hash_line = [](const std::string& output) {
        auto pos = output.find("determinism_hash: ");
        REQUIRE(pos != std::string::npos);
        return output.substr(pos, output.find('\n', pos) - pos);
    };
    CHECK(hash_line(r1.output) == hash_line(r2.output));
}

TEST_CASE("falsify, script-study, and sensitivity run from bundled fixtures") {
    CliResult fal = run_cli("falsify --config data/experiments/falsify.json");
    CHECK(fal.exit_code == 0);
    CHECK(contains(fal.output, "\"grammar\":-47.0"));
    CliResult ss = run_cli("script-study --config data/experiments/script_study.json");
    CHECK(ss.exit_code == 0);
    CHECK(contains(ss.output, "\"kannada_share\":88.0"));
    CliResult sv = run_cli("sensitivity --config data/experiments/sensitivity.json --sweep seeds");
    CHECK(sv.exit_code == 0);
    CHECK(contains(sv.output, "\"std\":0.0"));
    CliResult badsweep =
        run_cli("sensitivity --config data/experiments/sensitivity.json --sweep nope");
    CHECK(badsweep.exit_code == 1);
}

TEST_CASE("agreement and report subcommands") {
    CliResult ag = run_cli(
        "agreement --files data/annotations/annotator1.jsonl data/annotations/annotator2.jsonl "
        "data/annotations/annotator3.jsonl --json");
    CHECK(ag.exit_code == 0);
    auto parsed = nlohmann::json::parse(ag.output);
    CHECK(parsed.at("annotators") == 3);
    CHECK(parsed.at("per_dimension").contains("grammar"));

    testsupport::TempDir dir("clirep");
    CliResult run = run_cli("run --config data/experiments/main.json");
    REQUIRE(run.exit_code == 0);
    CliResult rep = run_cli("report --in out/main/report.json --format md --out " + dir.str());
    CHECK(rep.exit_code == 0);
    CHECK(contains(testsupport::read_file(dir.file("report.md")), "full_system Gram"));
}

TEST_CASE("replay mode works without provider credentials") {
    // scrub credential variables for this check
    CliResult r = run_cli("run --config data/experiments/main.json --mode replay");
    CHECK(r.exit_code == 0);
}

TEST_CASE("a failed cell makes run exit nonzero without aborting the matrix") {
    testsupport::TempDir dir("clifail");
    auto cfg = nlohmann::json::parse(testsupport::read_file("data/experiments/main.json"));
    cfg["output_dir"] = dir.file("out");
    cfg["matrix"][1]["model"] = "model-without-fixtures";
    testsupport::write_file(dir.file("cfg.json"), cfg.dump());
    CliResult r = run_cli("run --config " + dir.file("cfg.json"));
    CHECK(r.exit_code == 1);
    CHECK(contains(r.output, "FAILED"));
    CHECK(contains(r.output, "full_system: gram=85 cont=5"));  // later cells still ran
}

TEST_CASE("live mode without credentials fails per cell before any network use") {
    testsupport::TempDir dir("clilive");
    auto cfg = nlohmann::json::parse(testsupport::read_file("data/experiments/main.json"));
    cfg["output_dir"] = dir.file("out");
    cfg["matrix"] = {cfg["matrix"][0]};
    testsupport::write_file(dir.file("cfg.json"), cfg.dump());
    // credentials are resolved before the transport is touched, so this is
    // offline-safe: the adapter rejects the request for the missing key
    CliResult r = run_cli("env -u GEMINI_API_KEY " + std::string(TULUKIT_CLI_PATH) +
                              " run --config " + dir.file("cfg.json") + " --mode live",
                          /*raw_command=*/true);
    CHECK(r.exit_code == 1);
    CHECK(contains(r.output, "FAILED"));
    CHECK(contains(r.output, "GEMINI_API_KEY"));
}
