#include "reversemath/numext.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace reversemath::numext {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

struct Span {
    size_t begin, end;
};

// Digit grammar: optional '-' when preceded by whitespace/start, digits with
// optional well-formed comma groups, optional single '.' fraction.
std::vector<MaskCandidate> scan_digits(std::string_view text) {
    std::vector<MaskCandidate> out;
    size_t i = 0;
    while (i < text.size()) {
        if (!is_digit(text[i])) {
            ++i;
            continue;
        }
        size_t begin = i;
        if (begin > 0 && text[begin - 1] == '-') {
            bool at_start = begin == 1;
            char before = at_start ? ' ' : text[begin - 2];
            if (at_start || std::isspace(static_cast<unsigned char>(before)) ||
                before == '(')
                --begin;
        }
        size_t end = i;
        while (end < text.size() && is_digit(text[end])) ++end;
        // comma groups: accept only digit{1,3}(,digit{3})+
        if (end - i <= 3) {
            size_t j = end;
            while (j + 3 < text.size() && text[j] == ',' && is_digit(text[j + 1]) &&
                   is_digit(text[j + 2]) && is_digit(text[j + 3]) &&
                   (j + 4 >= text.size() || !is_digit(text[j + 4]))) {
                j += 4;
            }
            if (j > end) end = j;
        }
        if (end < text.size() && text[end] == '.' && end + 1 < text.size() &&
            is_digit(text[end + 1])) {
            ++end;
            while (end < text.size() && is_digit(text[end])) ++end;
        }
        std::string surface(text.substr(begin, end - begin));
        std::string cleaned;
        for (char c : surface)
            if (c != ',') cleaned.push_back(c);
        if (auto r = answereq::parse_decimal_token(cleaned)) {
            out.push_back({begin, end, surface, *r, MaskCandidate::Kind::digits, ""});
        }
        i = end;
    }
    return out;
}

struct WordToken {
    size_t begin, end;
    std::string lower;
};

std::vector<WordToken> tokenize_words(std::string_view text) {
    std::vector<WordToken> toks;
    size_t i = 0;
    while (i < text.size()) {
        if (!is_alpha(text[i])) {
            ++i;
            continue;
        }
        size_t begin = i;
        while (i < text.size() && is_alpha(text[i])) ++i;
        std::string lower(text.substr(begin, i - begin));
        for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        toks.push_back({begin, i, std::move(lower)});
    }
    return toks;
}

// Tokens may join into a phrase across a single space or hyphen.
bool joinable(std::string_view text, size_t end_prev, size_t begin_next) {
    if (begin_next != end_prev + 1) return false;
    char c = text[end_prev];
    return c == ' ' || c == '-';
}

bool overlaps(const Span& a, const Span& b) {
    return a.begin < b.end && b.begin < a.end;
}

}  // namespace

NumberLexicon builtin_english_lexicon() {
    NumberLexicon lex;
    lex.language = "en";
    const char* units[] = {"zero", "one", "two",   "three", "four",
                           "five", "six", "seven", "eight", "nine"};
    const char* teens[] = {"ten",      "eleven",  "twelve",  "thirteen",
                           "fourteen", "fifteen", "sixteen", "seventeen",
                           "eighteen", "nineteen"};
    const char* tens[] = {"twenty", "thirty",  "forty",  "fifty",
                          "sixty",  "seventy", "eighty", "ninety"};
    for (int i = 0; i < 10; ++i) lex.entries.emplace_back(units[i], i);
    for (int i = 0; i < 10; ++i) lex.entries.emplace_back(teens[i], 10 + i);
    for (int i = 0; i < 8; ++i) {
        long long t = 20 + 10 * i;
        lex.entries.emplace_back(tens[i], t);
        for (int u = 1; u < 10; ++u)
            lex.entries.emplace_back(std::string(tens[i]) + " " + units[u], t + u);
    }
    lex.entries.emplace_back("one hundred", 100);
    return lex;
}

NumberLexicon load_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lexicon file: " + path);
    NumberLexicon lex;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": malformed lexicon line");
        if (j.contains("language")) {
            lex.language = j.at("language").get<std::string>();
            continue;
        }
        auto phrase = j.at("phrase").get<std::string>();
        auto value = j.at("value").get<long long>();
        if (phrase.empty() || value < 0 || value > 100)
            throw std::runtime_error(path + ":" + std::to_string(lineno) +
                                     ": lexicon entry out of range");
        for (char& c : phrase)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        lex.entries.emplace_back(std::move(phrase), value);
    }
    if (lex.language.empty())
        throw std::runtime_error(path + ": lexicon missing language header");
    return lex;
}

std::vector<MaskCandidate> extract_values(
    std::string_view text, const std::vector<NumberLexicon>& lexicons) {
    std::vector<MaskCandidate> digits = scan_digits(text);

    std::vector<MaskCandidate> words;
    auto toks = tokenize_words(text);
    // longest-phrase-first per start token; lexicon phrases hold <= 3 words
    std::vector<bool> consumed(toks.size(), false);
    for (size_t t = 0; t < toks.size(); ++t) {
        if (consumed[t]) continue;
        const size_t max_words = 3;
        for (size_t n = std::min(max_words, toks.size() - t); n >= 1; --n) {
            bool chain_ok = true;
            std::string phrase = toks[t].lower;
            for (size_t k = 1; k < n; ++k) {
                if (consumed[t + k] ||
                    !joinable(text, toks[t + k - 1].end, toks[t + k].begin)) {
                    chain_ok = false;
                    break;
                }
                phrase += ' ';
                phrase += toks[t + k].lower;
            }
            if (!chain_ok) continue;
            const NumberLexicon* hit = nullptr;
            long long value = 0;
            for (const auto& lex : lexicons) {
                for (const auto& [p, v] : lex.entries) {
                    if (p == phrase) {
                        hit = &lex;
                        value = v;
                        break;
                    }
                }
                if (hit) break;
            }
            if (!hit) continue;
            size_t begin = toks[t].begin;
            size_t end = toks[t + n - 1].end;
            words.push_back({begin, end, std::string(text.substr(begin, end - begin)),
                             answereq::Rational{value, 1},
                             MaskCandidate::Kind::words, hit->language});
            for (size_t k = 0; k < n; ++k) consumed[t + k] = true;
            break;
        }
    }

    // digit spans win over overlapping word spans
    std::vector<MaskCandidate> out = std::move(digits);
    for (auto& w : words) {
        bool clash = false;
        for (const auto& d : out) {
            if (d.kind == MaskCandidate::Kind::digits &&
                overlaps({w.begin, w.end}, {d.begin, d.end})) {
                clash = true;
                break;
            }
        }
        if (!clash) out.push_back(std::move(w));
    }
    std::sort(out.begin(), out.end(),
              [](const MaskCandidate& a, const MaskCandidate& b) {
                  return a.begin < b.begin;
              });
    return out;
}

std::string mask_value(std::string_view text, const MaskCandidate& candidate,
                       std::string_view mask_token) {
    if (candidate.end > text.size() || candidate.begin >= candidate.end)
        throw IntegrityError("mask span out of bounds");
    if (text.substr(candidate.begin, candidate.end - candidate.begin) !=
        candidate.surface)
        throw IntegrityError("mask span does not match candidate surface");
    std::string out;
    out.reserve(text.size() - candidate.surface.size() + mask_token.size());
    out.append(text.substr(0, candidate.begin));
    out.append(mask_token);
    out.append(text.substr(candidate.end));
    return out;
}

namespace {

struct SplitMix64 {
    uint64_t state;
    uint64_t next() {
        uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
};

}  // namespace

uint64_t mix_seed(uint64_t seed, std::string_view salt) {
    uint64_t h = 1469598103934665603ULL;  // FNV-1a
    for (unsigned char c : salt) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    SplitMix64 rng{seed ^ h};
    return rng.next();
}

std::vector<MaskCandidate> candidate_order(std::vector<MaskCandidate> candidates,
                                           uint64_t seed) {
    SplitMix64 rng{seed};
    // Fisher-Yates; modulo bias is negligible at these sizes
    for (size_t i = candidates.size(); i > 1; --i) {
        size_t j = static_cast<size_t>(rng.next() % i);
        std::swap(candidates[i - 1], candidates[j]);
    }
    return candidates;
}

}  // namespace reversemath::numext
