#include <doctest.h>

#include <string>

#include "reversemath/forge.hpp"

using namespace reversemath;
using namespace reversemath::forge;

namespace {

corpus::ProblemRecord tom() {
    return {"p1", "Tom has 5 apples and eats 2 of them. How many are left?",
            "3", "demo"};
}

numext::MaskCandidate first_candidate(const corpus::ProblemRecord& p) {
    auto cands = numext::extract_values(
        p.question, {numext::builtin_english_lexicon()});
    REQUIRE(!cands.empty());
    return cands[0];
}

}  // namespace

TEST_CASE("build_intermediate glues mask, condition and query") {
    auto p = tom();
    ForgeConfig cfg;
    CHECK(build_intermediate(p, first_candidate(p), cfg) ==
          "Tom has [MASK] apples and eats 2 of them. How many are left? "
          "It is known that the answer to the question above is 3. "
          "What is the value of [MASK]?");

    cfg.mask_token = "X";
    cfg.condition_template = "Given that the result is {answer}.";
    cfg.query_template = "Find {mask}.";
    CHECK(build_intermediate(p, first_candidate(p), cfg) ==
          "Tom has X apples and eats 2 of them. How many are left? "
          "Given that the result is 3. Find X.");
}

TEST_CASE("prompts carry the expected sections and slot values") {
    auto gen = render_generator_prompt("ORIG", "ANS", "MASKED");
    for (const char* part :
         {"Original problem:", "Correct answer:", "Problem with hidden marker:",
          "Rewritten problem:", "<<<\nORIG\n>>>", "<<<\nANS\n>>>",
          "<<<\nMASKED\n>>>"})
        CHECK(gen.find(part) != std::string::npos);
    CHECK(gen.find("{original_problem}") == std::string::npos);

    auto ver = render_verifier_prompt("PROB");
    for (const char* part : {"LEAK", "NO_UNIQUE_ANSWER", "output \\boxed{...}",
                             "Problem:", "<<<\nPROB\n>>>", "Final answer:"})
        CHECK(ver.find(part) != std::string::npos);
    CHECK(ver.find("{problem}") == std::string::npos);
}

TEST_CASE("parse_verdict covers the three outcomes") {
    auto v = parse_verdict("LEAK");
    CHECK(v.status == VerifierVerdict::Status::leak);
    v = parse_verdict("some thoughts\n  LEAK  \nmore text");
    CHECK(v.status == VerifierVerdict::Status::leak);

    v = parse_verdict("NO_UNIQUE_ANSWER");
    CHECK(v.status == VerifierVerdict::Status::no_unique_answer);

    v = parse_verdict("The value works out to \\boxed{42}.");
    CHECK(v.status == VerifierVerdict::Status::answer);
    CHECK(v.predicted == "42");

    // LEAK wins even when an answer is also present
    v = parse_verdict("\\boxed{42}\nLEAK");
    CHECK(v.status == VerifierVerdict::Status::leak);

    // nothing extractable degrades to no_unique_answer
    v = parse_verdict("  \n \n");
    CHECK(v.status == VerifierVerdict::Status::no_unique_answer);
}

TEST_CASE("forge_one accepts a consistent rewrite") {
    auto p = tom();
    ForgeConfig cfg;
    cfg.seed = 7;
    cfg.generator_model = "gen";
    cfg.verifier_model = "ver";
    gateway::FixtureGateway gw;
    // scripted so either candidate order reaches a consistent verdict
    gw.add("rewrite:p1", 0, "REWRITTEN PROBLEM");
    gw.add("rewrite:p1", 1, "REWRITTEN PROBLEM");
    gw.add("verify:p1", 0, "\\boxed{5}");
    gw.add("verify:p1", 1, "\\boxed{2}");

    auto outcome = forge_one(p, gw, cfg);
    auto* rev = std::get_if<corpus::ReversedProblem>(&outcome);
    REQUIRE(rev != nullptr);
    CHECK(rev->id == "p1_rev");
    CHECK(rev->source_id == "p1");
    CHECK(rev->question == "REWRITTEN PROBLEM");
    CHECK(rev->original_answer == "3");
    CHECK((rev->answer == "5" || rev->answer == "2"));
    CHECK(rev->answer == rev->masked_surface);
    CHECK(rev->attempts <= 2);
    CHECK(rev->mode == "rewritten");
    CHECK(rev->generator_model == "gen");
    CHECK(p.question.substr(rev->mask_begin,
                            rev->mask_end - rev->mask_begin) ==
          rev->masked_surface);
}

TEST_CASE("forge_one retries after a mismatch and counts attempts") {
    corpus::ProblemRecord p{"p2", "A crate holds 48 bottles.", "48", "demo"};
    ForgeConfig cfg;
    cfg.rewrites_per_candidate = 3;
    gateway::FixtureGateway gw;
    for (int i = 0; i < 3; ++i)
        gw.add("rewrite:p2", i, "attempt " + std::to_string(i));
    gw.add("verify:p2", 0, "\\boxed{47}");  // inconsistent with masked 48
    gw.add("verify:p2", 1, "NO_UNIQUE_ANSWER");
    gw.add("verify:p2", 2, "\\boxed{48}");

    auto outcome = forge_one(p, gw, cfg);
    auto* rev = std::get_if<corpus::ReversedProblem>(&outcome);
    REQUIRE(rev != nullptr);
    CHECK(rev->attempts == 3);
    CHECK(rev->question == "attempt 2");
    CHECK(rev->answer == "48");
}

TEST_CASE("forge_one rejects after exhausting the budget") {
    corpus::ProblemRecord p{"p3", "A crate holds 48 bottles.", "48", "demo"};
    ForgeConfig cfg;
    cfg.rewrites_per_candidate = 2;
    gateway::FixtureGateway gw;
    for (int i = 0; i < 2; ++i) {
        gw.add("rewrite:p3", i, "leaky rewrite");
        gw.add("verify:p3", i, "LEAK");
    }
    auto outcome = forge_one(p, gw, cfg);
    auto* rej = std::get_if<corpus::RejectionRecord>(&outcome);
    REQUIRE(rej != nullptr);
    CHECK(rej->reason == "exhausted");
    CHECK(rej->attempts == 2);
    CHECK(rej->detail.find("leak") != std::string::npos);
}

TEST_CASE("forge_one rejects problems without numeric values") {
    corpus::ProblemRecord p{"p4", "Name the capital of France.", "Paris", "demo"};
    ForgeConfig cfg;
    gateway::FixtureGateway gw;
    auto outcome = forge_one(p, gw, cfg);
    auto* rej = std::get_if<corpus::RejectionRecord>(&outcome);
    REQUIRE(rej != nullptr);
    CHECK(rej->reason == "no_candidates");
    CHECK(rej->attempts == 0);
}

TEST_CASE("forge_one reports backend failures distinctly") {
    corpus::ProblemRecord p{"p5", "A crate holds 48 bottles.", "48", "demo"};
    ForgeConfig cfg;
    gateway::FixtureGateway gw;  // empty script -> FixtureGapError
    auto outcome = forge_one(p, gw, cfg);
    auto* rej = std::get_if<corpus::RejectionRecord>(&outcome);
    REQUIRE(rej != nullptr);
    CHECK(rej->reason == "backend_error");
}

TEST_CASE("rule-based mode emits the intermediate without rewrite calls") {
    auto p = tom();
    ForgeConfig cfg;
    cfg.rule_based = true;
    cfg.seed = 7;
    gateway::FixtureGateway gw;
    gw.add("verify:p1", 0, "\\boxed{5}");
    gw.add("verify:p1", 1, "\\boxed{2}");

    auto outcome = forge_one(p, gw, cfg);
    auto* rev = std::get_if<corpus::ReversedProblem>(&outcome);
    REQUIRE(rev != nullptr);
    CHECK(rev->mode == "rule_based");
    CHECK(rev->question.find("[MASK]") != std::string::npos);
    CHECK(rev->question.find(
              "It is known that the answer to the question above is 3.") !=
          std::string::npos);
    CHECK(gw.calls_for_tag_prefix("rewrite:") == 0);
}

TEST_CASE("forge_corpus keeps input order and tallies stats") {
    std::vector<corpus::ProblemRecord> problems = {
        {"q1", "There are 12 chairs.", "12", "demo"},
        {"q2", "No numbers here.", "none", "demo"},
        {"q3", "There are 9 desks.", "9", "demo"},
    };
    ForgeConfig cfg;
    gateway::FixtureGateway gw;
    gw.add("rewrite:q1", 0, "rewrite one");
    gw.add("verify:q1", 0, "\\boxed{12}");
    gw.add("rewrite:q3", 0, "rewrite three");
    gw.add("verify:q3", 0, "\\boxed{9}");

    auto run = forge_corpus(problems, gw, cfg, 3);
    REQUIRE(run.reversed.size() == 2);
    CHECK(run.reversed[0].source_id == "q1");
    CHECK(run.reversed[1].source_id == "q3");
    REQUIRE(run.rejections.size() == 1);
    CHECK(run.rejections[0].source_id == "q2");
    CHECK(run.stats.attempted == 3);
    CHECK(run.stats.accepted == 2);
    CHECK(run.stats.rate() == doctest::Approx(100.0 * 2 / 3));
}

TEST_CASE("export_augmentation in both modes") {
    std::vector<corpus::ProblemRecord> problems = {
        {"q1", "orig one", "1", "demo"},
        {"q2", "orig two", "2", "demo"},
    };
    corpus::ReversedProblem rev;
    rev.id = "q1_rev";
    rev.source_id = "q1";
    rev.question = "reversed one";
    rev.answer = "10";

    auto dup = export_augmentation(problems, {rev}, AugmentMode::duplicate);
    REQUIRE(dup.records.size() == 4);
    CHECK(dup.records[0].id == "q1");
    CHECK(dup.records[1].id == "q1_dup");
    CHECK(dup.records[1].question == "orig one");
    CHECK(dup.records[1].meta.at("variant") == "duplicate");
    CHECK(dup.skipped == 0);

    auto mix = export_augmentation(problems, {rev}, AugmentMode::reverse);
    REQUIRE(mix.records.size() == 2);
    CHECK(mix.records[0].id == "q1");
    CHECK(mix.records[0].meta.at("variant") == "original");
    CHECK(mix.records[1].id == "q1_rev");
    CHECK(mix.records[1].answer == "10");
    CHECK(mix.records[1].meta.at("source_id") == "q1");
    CHECK(mix.skipped == 1);  // q2 has no reversal
}
