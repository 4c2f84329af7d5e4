#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "reversemath/answereq.hpp"

namespace reversemath::numext {

struct MaskCandidate {
    size_t begin = 0;  // [begin, end) byte offsets into the source text
    size_t end = 0;
    std::string surface;
    answereq::Rational value;
    enum class Kind { digits, words } kind = Kind::digits;
    std::string language;  // lexicon tag, kind == words only
};

struct NumberLexicon {
    std::string language;
    // phrase (lowercase, space-normalized) -> value in [0, 100]
    std::vector<std::pair<std::string, long long>> entries;
};

NumberLexicon builtin_english_lexicon();

// File format: header line {"language":...}, then {"phrase","value"} lines.
NumberLexicon load_lexicon(const std::string& path);

// All non-overlapping candidates in left-to-right order. Digit spans beat
// overlapping word spans; word phrases match whole tokens, longest first.
std::vector<MaskCandidate> extract_values(
    std::string_view text, const std::vector<NumberLexicon>& lexicons);

struct IntegrityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Replaces candidate.span with mask_token. Throws IntegrityError when the
// candidate does not line up with the text.
std::string mask_value(std::string_view text, const MaskCandidate& candidate,
                       std::string_view mask_token);

// Seeded uniform permutation, stable across platforms for a given seed.
std::vector<MaskCandidate> candidate_order(std::vector<MaskCandidate> candidates,
                                           uint64_t seed);

// splitmix64-based mix used to derive per-problem seeds.
uint64_t mix_seed(uint64_t seed, std::string_view salt);

}  // namespace reversemath::numext
