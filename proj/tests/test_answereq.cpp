#include <doctest.h>

#include <string>
#include <tuple>
#include <vector>

#include "reversemath/answereq.hpp"

using namespace reversemath::answereq;

TEST_CASE("make_rational canonicalizes sign and gcd") {
    auto r = make_rational(2, 4);
    REQUIRE(r);
    CHECK(r->num == 1);
    CHECK(r->den == 2);

    r = make_rational(3, -6);
    REQUIRE(r);
    CHECK(r->num == -1);
    CHECK(r->den == 2);

    CHECK(!make_rational(1, 0));
    CHECK(to_string(*make_rational(7, 1)) == "7");
    CHECK(to_string(*make_rational(-3, 4)) == "-3/4");
}

TEST_CASE("normalize parses numeric forms into exact rationals") {
    // (input, num, den) oracle pairs computed by hand
    const std::vector<std::tuple<std::string, long long, long long>> cases = {
        {"42", 42, 1},
        {"-17", -17, 1},
        {"0.1", 1, 10},
        {"3.25", 13, 4},
        {"-0.5", -1, 2},
        {"3/4", 3, 4},
        {"\\frac{3}{4}", 3, 4},
        {"\\dfrac{-1}{8}", -1, 8},
        {"1,000", 1000, 1},
        {"1,250,500", 1250500, 1},
        {"$25", 25, 1},
        {"50%", 50, 1},
        {"  12  ", 12, 1},
        {"three", 3, 1},
        {"twenty one", 21, 1},
        {"Ninety-Nine", 99, 1},
        {"a hundred", 100, 1},
    };
    for (const auto& [input, num, den] : cases) {
        CAPTURE(input);
        auto n = normalize(input);
        REQUIRE(n.is_rational());
        CHECK(n.value.num == num);
        CHECK(n.value.den == den);
    }
}

TEST_CASE("normalize falls back to canonical text") {
    auto n = normalize("  The  Cat  ");
    CHECK(!n.is_rational());
    CHECK(n.text == "the cat");

    // ill-grouped separators are not thousands commas
    CHECK(!normalize("1,00").is_rational());
    CHECK(!normalize("12,34,56").is_rational());
}

TEST_CASE("equivalent matches equal values across representations") {
    CHECK(equivalent("1/2", "0.5"));
    CHECK(equivalent("0.1", "1/10"));
    CHECK(equivalent("\\frac{6}{8}", "3/4"));
    CHECK(equivalent("7", "7.0"));
    CHECK(equivalent("7", "7.00"));
    CHECK(equivalent("1,000", "1000"));
    CHECK(equivalent("$25", "25"));
    CHECK(equivalent("three", "3"));
    CHECK(equivalent("-4", "−4"));  // unicode minus

    CHECK(!equivalent("20", "-1"));
    CHECK(!equivalent("1/3", "0.33"));
    CHECK(!equivalent("7", "seven hundred"));
    CHECK(!equivalent("cat", "3"));  // mixed kinds
    CHECK(equivalent("East", "east"));
    CHECK(!equivalent("", ""));  // empty text never matches
}

TEST_CASE("equivalent is symmetric and normalization idempotent") {
    const std::vector<std::string> pool = {"1/2", "0.5",  "3",   "three",
                                           "cat", "-7",   "7.0", "",
                                           "50%", "1,000"};
    for (const auto& a : pool) {
        for (const auto& b : pool) {
            CAPTURE(a);
            CAPTURE(b);
            CHECK(equivalent(a, b) == equivalent(b, a));
        }
        auto once = normalize(a);
        auto twice = normalize(once.is_rational() ? to_string(once.value)
                                                  : once.text);
        CHECK(once.kind == twice.kind);
        if (once.is_rational()) CHECK(once.value == twice.value);
        else CHECK(once.text == twice.text);
    }
}

TEST_CASE("extract_final prefers the last balanced boxed expression") {
    CHECK(extract_final("First \\boxed{5}, later \\boxed{20}.") == "20");
    CHECK(extract_final("nested \\boxed{\\frac{1}{2}} done") ==
          "\\frac{1}{2}");
    CHECK(extract_final("So the total is 12 apples and 30 pears.") == "30");
    CHECK(extract_final("line one\nThe answer is unknowable\n") ==
          "The answer is unknowable");
    CHECK_THROWS_AS(extract_final("   \n  \n"), ExtractionError);
}

TEST_CASE("parse helpers") {
    auto d = parse_decimal_token("2.5");
    REQUIRE(d);
    CHECK(d->num == 5);
    CHECK(d->den == 2);
    CHECK(!parse_decimal_token("2.5.1"));

    CHECK(number_word_value("forty two") == 42);
    CHECK(number_word_value("zero") == 0);
    CHECK(number_word_value("hundred") == 100);
    CHECK(!number_word_value("eleventy"));
}
