#include "reversemath/answereq.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace reversemath::answereq {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

bool mul_overflows(long long a, long long b, long long& out) {
    return __builtin_mul_overflow(a, b, &out);
}

bool add_overflows(long long a, long long b, long long& out) {
    return __builtin_add_overflow(a, b, &out);
}

// Parses an optionally signed integer of plain digits. Overflow -> nullopt.
std::optional<long long> parse_int(std::string_view s) {
    s = trim(s);
    if (s.empty()) return std::nullopt;
    bool neg = false;
    if (s.front() == '+' || s.front() == '-') {
        neg = s.front() == '-';
        s.remove_prefix(1);
    }
    if (s.empty()) return std::nullopt;
    long long v = 0;
    for (char c : s) {
        if (!is_digit(c)) return std::nullopt;
        if (mul_overflows(v, 10, v)) return std::nullopt;
        if (add_overflows(v, c - '0', v)) return std::nullopt;
    }
    return neg ? -v : v;
}

// Maps U+2212 (minus sign) to '-' and removes currency markers the gold
// answers carry. Leaves everything else untouched.
std::string strip_decorations(std::string_view in) {
    static const std::array<std::string_view, 4> currency = {"€", "£",
                                                             "¥", "−"};
    std::string s;
    s.reserve(in.size());
    size_t i = 0;
    while (i < in.size()) {
        if (in.compare(i, 3, "−") == 0) {
            s.push_back('-');
            i += 3;
            continue;
        }
        bool dropped = false;
        for (auto cur : currency) {
            if (cur != "−" && in.compare(i, cur.size(), cur) == 0) {
                i += cur.size();
                dropped = true;
                break;
            }
        }
        if (dropped) continue;
        char c = in[i];
        if (c == '$' || c == '%') {
            ++i;
            continue;
        }
        s.push_back(c);
        ++i;
    }
    return std::string(trim(s));
}

// Removes commas only when they form well-grouped thousands separators.
std::string strip_thousands(const std::string& s) {
    if (s.find(',') == std::string::npos) return s;
    size_t i = 0;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) ++i;
    size_t lead = 0;
    while (i + lead < s.size() && is_digit(s[i + lead])) ++lead;
    if (lead == 0 || lead > 3) return s;
    size_t j = i + lead;
    bool any_group = false;
    while (j + 3 < s.size() && s[j] == ',') {
        if (!is_digit(s[j + 1]) || !is_digit(s[j + 2]) || !is_digit(s[j + 3]))
            return s;
        j += 4;
        any_group = true;
    }
    if (!any_group) return s;
    // rest must be a decimal fraction or nothing
    if (j < s.size()) {
        if (s[j] != '.') return s;
        for (size_t k = j + 1; k < s.size(); ++k)
            if (!is_digit(s[k])) return s;
    }
    std::string out;
    out.reserve(s.size());
    for (char c : s)
        if (c != ',') out.push_back(c);
    return out;
}

std::string lower_collapse(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    for (char c : s) {
        if (is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

std::optional<Rational> parse_fraction(std::string_view s) {
    auto slash = s.find('/');
    if (slash == std::string_view::npos) return std::nullopt;
    auto num = parse_int(s.substr(0, slash));
    auto den = parse_int(s.substr(slash + 1));
    if (!num || !den) return std::nullopt;
    return make_rational(*num, *den);
}

// \frac{a}{b}, tolerating \dfrac and \tfrac.
std::optional<Rational> parse_latex_frac(std::string_view s) {
    s = trim(s);
    for (std::string_view head : {"\\frac", "\\dfrac", "\\tfrac"}) {
        if (s.substr(0, head.size()) == head) {
            s.remove_prefix(head.size());
            s = trim(s);
            if (s.size() < 2 || s.front() != '{') return std::nullopt;
            auto close = s.find('}');
            if (close == std::string_view::npos) return std::nullopt;
            auto a = parse_int(s.substr(1, close - 1));
            s.remove_prefix(close + 1);
            s = trim(s);
            if (s.size() < 2 || s.front() != '{' || s.back() != '}')
                return std::nullopt;
            auto b = parse_int(s.substr(1, s.size() - 2));
            if (!a || !b) return std::nullopt;
            return make_rational(*a, *b);
        }
    }
    return std::nullopt;
}

const std::unordered_map<std::string, long long>& word_map() {
    static const std::unordered_map<std::string, long long> m = [] {
        std::unordered_map<std::string, long long> w;
        const char* units[] = {"zero", "one", "two",   "three", "four",
                               "five", "six", "seven", "eight", "nine"};
        const char* teens[] = {"ten",      "eleven",  "twelve",  "thirteen",
                               "fourteen", "fifteen", "sixteen", "seventeen",
                               "eighteen", "nineteen"};
        const char* tens[] = {"twenty", "thirty", "forty",  "fifty",
                              "sixty",  "seventy", "eighty", "ninety"};
        for (int i = 0; i < 10; ++i) w[units[i]] = i;
        for (int i = 0; i < 10; ++i) w[teens[i]] = 10 + i;
        for (int i = 0; i < 8; ++i) {
            long long t = 20 + 10 * i;
            w[tens[i]] = t;
            for (int u = 1; u < 10; ++u)
                w[std::string(tens[i]) + " " + units[u]] = t + u;
        }
        w["hundred"] = 100;
        w["one hundred"] = 100;
        w["a hundred"] = 100;
        return w;
    }();
    return m;
}

}  // namespace

std::optional<Rational> make_rational(long long num, long long den) {
    if (den == 0) return std::nullopt;
    if (den < 0) {
        if (num == std::numeric_limits<long long>::min() ||
            den == std::numeric_limits<long long>::min())
            return std::nullopt;
        num = -num;
        den = -den;
    }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
    return Rational{num, den};
}

std::string to_string(const Rational& r) {
    if (r.den == 1) return std::to_string(r.num);
    return std::to_string(r.num) + "/" + std::to_string(r.den);
}

bool operator==(const NormalizedAnswer& a, const NormalizedAnswer& b) {
    if (a.kind != b.kind) return false;
    if (a.kind == NormalizedAnswer::Kind::rational) return a.value == b.value;
    return a.text == b.text;
}

std::optional<Rational> parse_decimal_token(std::string_view token) {
    token = trim(token);
    if (token.empty()) return std::nullopt;
    if (auto i = parse_int(token)) return make_rational(*i, 1);
    auto dot = token.find('.');
    if (dot == std::string_view::npos) return std::nullopt;
    std::string_view whole = token.substr(0, dot);
    std::string_view frac = token.substr(dot + 1);
    bool neg = false;
    if (!whole.empty() && (whole.front() == '+' || whole.front() == '-')) {
        neg = whole.front() == '-';
        whole.remove_prefix(1);
    }
    if (whole.empty() && frac.empty()) return std::nullopt;
    for (char c : whole)
        if (!is_digit(c)) return std::nullopt;
    for (char c : frac)
        if (!is_digit(c)) return std::nullopt;
    long long num = 0;
    for (char c : whole) {
        if (mul_overflows(num, 10, num)) return std::nullopt;
        if (add_overflows(num, c - '0', num)) return std::nullopt;
    }
    long long den = 1;
    for (char c : frac) {
        if (mul_overflows(num, 10, num)) return std::nullopt;
        if (add_overflows(num, c - '0', num)) return std::nullopt;
        if (mul_overflows(den, 10, den)) return std::nullopt;
    }
    return make_rational(neg ? -num : num, den);
}

std::optional<long long> number_word_value(std::string_view phrase) {
    std::string key = lower_collapse(phrase);
    std::replace(key.begin(), key.end(), '-', ' ');
    key = lower_collapse(key);
    auto& m = word_map();
    auto it = m.find(key);
    if (it == m.end()) return std::nullopt;
    return it->second;
}

std::string extract_final(std::string_view response) {
    if (trim(response).empty())
        throw ExtractionError("extract_final: empty response");

    // Last \boxed{...} with balanced braces.
    static constexpr std::string_view kBoxed = "\\boxed";
    size_t best = std::string_view::npos;
    size_t pos = 0;
    while ((pos = response.find(kBoxed, pos)) != std::string_view::npos) {
        best = pos;
        pos += kBoxed.size();
    }
    if (best != std::string_view::npos) {
        size_t open = best + kBoxed.size();
        while (open < response.size() && is_space(response[open])) ++open;
        if (open < response.size() && response[open] == '{') {
            int depth = 0;
            for (size_t i = open; i < response.size(); ++i) {
                if (response[i] == '{') ++depth;
                else if (response[i] == '}' && --depth == 0)
                    return std::string(response.substr(open + 1, i - open - 1));
            }
        }
    }

    // Last standalone numeric token.
    std::optional<std::string> last_num;
    for (size_t i = 0; i < response.size(); ++i) {
        if (!is_digit(response[i])) continue;
        size_t begin = i;
        if (begin > 0 && response[begin - 1] == '-') {
            char before = begin >= 2 ? response[begin - 2] : ' ';
            if (!std::isalnum(static_cast<unsigned char>(before))) --begin;
        }
        // reject digits glued to letters: "x2" is not an answer token
        if (begin > 0 &&
            std::isalpha(static_cast<unsigned char>(response[begin - 1]))) {
            while (i < response.size() && is_digit(response[i])) ++i;
            continue;
        }
        size_t end = i;
        while (end < response.size() && is_digit(response[end])) ++end;
        if (end < response.size() && response[end] == '.' &&
            end + 1 < response.size() && is_digit(response[end + 1])) {
            ++end;
            while (end < response.size() && is_digit(response[end])) ++end;
        }
        if (end >= response.size() ||
            !std::isalpha(static_cast<unsigned char>(response[end]))) {
            last_num = std::string(response.substr(begin, end - begin));
        }
        i = end;
    }
    if (last_num) return *last_num;

    // Trimmed last nonempty line.
    size_t end = response.size();
    while (end > 0) {
        size_t nl = response.rfind('\n', end - 1);
        size_t start = nl == std::string_view::npos ? 0 : nl + 1;
        auto line = trim(response.substr(start, end - start));
        if (!line.empty()) return std::string(line);
        if (nl == std::string_view::npos) break;
        end = nl;
    }
    throw ExtractionError("extract_final: nothing extractable");
}

NormalizedAnswer normalize(std::string_view answer) {
    NormalizedAnswer out;
    out.raw = std::string(answer);

    std::string s = strip_decorations(answer);
    s = strip_thousands(s);

    if (auto r = parse_decimal_token(s)) {
        out.kind = NormalizedAnswer::Kind::rational;
        out.value = *r;
        return out;
    }
    if (auto r = parse_fraction(s)) {
        out.kind = NormalizedAnswer::Kind::rational;
        out.value = *r;
        return out;
    }
    if (auto r = parse_latex_frac(s)) {
        out.kind = NormalizedAnswer::Kind::rational;
        out.value = *r;
        return out;
    }
    if (auto w = number_word_value(s)) {
        out.kind = NormalizedAnswer::Kind::rational;
        out.value = Rational{*w, 1};
        return out;
    }
    out.kind = NormalizedAnswer::Kind::text;
    out.text = lower_collapse(s);
    return out;
}

bool equivalent(std::string_view a, std::string_view b) {
    NormalizedAnswer na = normalize(a);
    NormalizedAnswer nb = normalize(b);
    if (na.kind == NormalizedAnswer::Kind::text && na.text.empty()) return false;
    return na == nb;
}

}  // namespace reversemath::answereq
