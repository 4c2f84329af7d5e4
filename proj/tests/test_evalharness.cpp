#include <doctest.h>

#include <algorithm>
#include <map>
#include <string>

#include "reversemath/evalharness.hpp"
#include "reversemath/gateway.hpp"

using namespace reversemath;
using namespace reversemath::evalharness;

namespace {

SampleRecord sample(const std::string& pid, const std::string& variant,
                    const std::string& model, int index, bool correct,
                    const std::string& extracted = "") {
    SampleRecord r;
    r.problem_id = pid;
    r.variant = variant;
    r.model = model;
    r.sample_index = index;
    r.correct = correct;
    r.extracted = extracted;
    return r;
}

std::vector<SampleRecord> flags(const std::string& pid,
                                const std::vector<bool>& outcomes) {
    std::vector<SampleRecord> out;
    for (size_t i = 0; i < outcomes.size(); ++i)
        out.push_back(sample(pid, "original", "m", static_cast<int>(i),
                             outcomes[i]));
    return out;
}

}  // namespace

TEST_CASE("average_at_k over a single problem") {
    auto records = flags("p", {true, true, true, true, true, true, true, false,
                               false, false});
    CHECK(average_at_k(records) == doctest::Approx(0.7));
}

TEST_CASE("average_at_k averages across problems") {
    auto records = flags("p", {true, true, true, true});
    auto more = flags("q", {false, false, false, false});
    records.insert(records.end(), more.begin(), more.end());
    CHECK(average_at_k(records) == doctest::Approx(0.5));
}

TEST_CASE("average_at_k rejects ragged groups naming the problem") {
    auto records = flags("p", {true, true});
    auto more = flags("q", {true});
    records.insert(records.end(), more.begin(), more.end());
    try {
        average_at_k(records);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("q") != std::string::npos);
    }
}

TEST_CASE("majority_outcome requires a strict majority") {
    CHECK(majority_outcome(flags("p", {true, true, false, false, true})));
    CHECK(!majority_outcome(flags("p", {true, true, false, false})));  // tie
    CHECK(!majority_outcome(flags("p", {false, true, false, false})));
    CHECK(majority_outcome(flags("p", {true})));
}

TEST_CASE("classify_transitions labels all four quadrants") {
    std::vector<SampleRecord> records;
    auto add_pair = [&](const std::string& pid, bool orig, bool rev) {
        for (int i = 0; i < 3; ++i) {
            records.push_back(sample(pid, "original", "m", i, orig));
            records.push_back(sample(pid, "reversed", "m", i, rev));
        }
    };
    add_pair("tt", true, true);
    add_pair("tf", true, false);
    add_pair("ft", false, true);
    add_pair("ff", false, false);
    records.push_back(sample("orphan", "original", "m", 0, true));

    auto summary = classify_transitions(records, {});
    CHECK(summary.skipped_missing_variant == 1);
    REQUIRE(summary.outcomes.size() == 4);
    std::map<std::string, std::string> by_id;
    for (const auto& o : summary.outcomes) by_id[o.problem_id] = o.transition;
    CHECK(by_id["tt"] == "TT");
    CHECK(by_id["tf"] == "TF");
    CHECK(by_id["ft"] == "FT");
    CHECK(by_id["ff"] == "FF");
}

TEST_CASE("an anchored reversal classifies as TF with the anchor flag") {
    // original solved correctly; on the reversal the model keeps answering
    // with the original gold (20) although the reversed gold is -1
    std::vector<SampleRecord> records;
    for (int i = 0; i < 5; ++i) {
        records.push_back(sample("h1", "original", "m", i, true, "20"));
        records.push_back(sample("h1", "reversed", "m", i, false, "20"));
    }
    auto summary = classify_transitions(records, {{"h1", "20"}});
    REQUIRE(summary.outcomes.size() == 1);
    const auto& o = summary.outcomes[0];
    CHECK(o.transition == "TF");
    CHECK(o.rev_same_as_original);

    // varied wrong answers do not set the flag
    for (auto& r : records)
        if (r.variant == "reversed") r.extracted = "7";
    summary = classify_transitions(records, {{"h1", "20"}});
    CHECK(!summary.outcomes[0].rev_same_as_original);
}

TEST_CASE("anchoring_rate pools reversed samples") {
    std::vector<SampleRecord> records;
    for (int i = 0; i < 100; ++i)
        records.push_back(sample("p", "reversed", "m", i, false,
                                 i < 2 ? "20" : "7"));
    records.push_back(sample("p", "original", "m", 0, true, "20"));
    std::map<std::string, std::string> gold{{"p", "20"}};
    CHECK(anchoring_rate(records, gold) == doctest::Approx(2.0));

    // excluding coincidentally equal golds removes the problem entirely
    std::map<std::string, std::string> rev_gold{{"p", "20"}};
    CHECK_THROWS_AS(anchoring_rate(records, gold, rev_gold, true),
                    std::invalid_argument);
    rev_gold["p"] = "-1";
    CHECK(anchoring_rate(records, gold, rev_gold, true) ==
          doctest::Approx(2.0));
}

TEST_CASE("sample_and_score scores k completions per variant") {
    PairedProblem p;
    p.original = {"p1", "What is 2 plus 2?", "4", "demo"};
    p.reversed_question = "The sum of 2 and a number is 4. What is the number?";
    p.reversed_gold = "2";
    p.reversed_id = "p1_rev";

    gateway::FixtureGateway gw;
    gw.add("sample:m:p1:original", 0, "thus \\boxed{4}");
    gw.add("sample:m:p1:original", 1, "thus \\boxed{5}");
    gw.add("sample:m:p1:reversed", 0, "thus \\boxed{2}");
    gw.add("sample:m:p1:reversed", 1, "no idea\n\n");

    SamplingConfig cfg;
    cfg.k = 2;
    auto records = sample_and_score({p}, gw, "m", cfg);
    REQUIRE(records.size() == 4);
    CHECK(records[0].variant == "original");
    CHECK(records[0].correct);
    CHECK(records[0].extracted == "4");
    CHECK(!records[1].correct);
    CHECK(records[2].variant == "reversed");
    CHECK(records[2].correct);
    CHECK(!records[3].correct);  // extraction of "no idea" != gold
}

TEST_CASE("sample_and_score output is worker-width independent") {
    std::vector<PairedProblem> problems;
    gateway::FixtureGateway gw;
    for (int i = 0; i < 6; ++i) {
        PairedProblem p;
        p.original = {"p" + std::to_string(i), "question", "1", "demo"};
        p.reversed_question = "reversed question";
        p.reversed_gold = "2";
        p.reversed_id = p.original.id + "_rev";
        problems.push_back(p);
        for (const char* variant : {"original", "reversed"}) {
            for (int s = 0; s < 3; ++s)
                gw.add("sample:m:" + p.original.id + ":" + variant, s,
                       "\\boxed{" + std::to_string(i + s) + "}");
        }
    }
    SamplingConfig cfg;
    cfg.k = 3;
    auto one = sample_and_score(problems, gw, "m", cfg, 1);
    gw.reset_cursors();
    auto eight = sample_and_score(problems, gw, "m", cfg, 8);
    REQUIRE(one.size() == eight.size());
    for (size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].problem_id == eight[i].problem_id);
        CHECK(one[i].variant == eight[i].variant);
        CHECK(one[i].sample_index == eight[i].sample_index);
        CHECK(one[i].response_text == eight[i].response_text);
        CHECK(one[i].correct == eight[i].correct);
    }
}

TEST_CASE("backend failures become incorrect flagged records") {
    PairedProblem p;
    p.original = {"p1", "q", "4", "demo"};
    p.reversed_question = "rq";
    p.reversed_gold = "2";
    gateway::FixtureGateway gw;  // nothing scripted
    SamplingConfig cfg;
    cfg.k = 2;
    auto records = sample_and_score({p}, gw, "m", cfg);
    REQUIRE(records.size() == 4);
    for (const auto& r : records) {
        CHECK(!r.correct);
        CHECK(r.response_text.rfind("[backend_error]", 0) == 0);
    }
}

TEST_CASE("sample records round-trip through files") {
    std::string path = "test_eval_tmp.jsonl";
    std::vector<SampleRecord> in = {
        sample("p1", "original", "m", 0, true, "4"),
        sample("p1", "reversed", "m", 0, false, "5"),
    };
    in[0].response_text = "multi\nline \\boxed{4}";
    write_samples(path, in, nlohmann::json{{"run_id", "x"}, {"seed", 1}});
    auto out = load_samples(path);
    std::remove(path.c_str());
    REQUIRE(out.size() == 2);
    CHECK(out[0].response_text == in[0].response_text);
    CHECK(out[0].correct);
    CHECK(out[1].extracted == "5");
}
