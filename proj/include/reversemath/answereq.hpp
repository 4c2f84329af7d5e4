#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace reversemath::answereq {

// Exact rational, canonical form: den > 0, gcd(|num|, den) == 1.
struct Rational {
    long long num = 0;
    long long den = 1;

    friend bool operator==(const Rational&, const Rational&) = default;
};

// Canonicalize; returns nullopt on den == 0 or overflow during reduction.
std::optional<Rational> make_rational(long long num, long long den);

std::string to_string(const Rational& r);

struct NormalizedAnswer {
    enum class Kind { rational, text };
    Kind kind = Kind::text;
    Rational value;    // kind == rational
    std::string text;  // kind == text, lowercased, whitespace-collapsed
    std::string raw;

    bool is_rational() const { return kind == Kind::rational; }
};

bool operator==(const NormalizedAnswer& a, const NormalizedAnswer& b);

struct ExtractionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Final-answer extraction from a model response:
//   1. content of the last brace-balanced \boxed{...}
//   2. else the last standalone numeric token
//   3. else the trimmed last nonempty line
// Throws ExtractionError when the input holds nothing extractable.
std::string extract_final(std::string_view response);

// Strips wrapping ($, %, currency symbols, whitespace), maps unicode minus,
// drops well-formed thousands separators, then parses integers, decimals,
// a/b, \frac{a}{b} and bare English number words (0-100) into exact
// rationals. Everything else becomes canonical text.
NormalizedAnswer normalize(std::string_view answer);

// Equal kind and equal payload after normalization. Mixed kinds are false.
bool equivalent(std::string_view a, std::string_view b);

// Parse helpers shared with numext.
std::optional<Rational> parse_decimal_token(std::string_view token);
std::optional<long long> number_word_value(std::string_view phrase);

}  // namespace reversemath::answereq
