#include "reversemath/stats.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>

namespace reversemath::stats {

namespace {

double mean(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// midranks for the pooled sample; returns (ranks, tie term sum t^3 - t)
std::pair<std::vector<double>, double> midrank(const std::vector<double>& pooled) {
    const size_t n = pooled.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return pooled[a] < pooled[b]; });
    std::vector<double> ranks(n);
    double tie_sum = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j + 1 < n && pooled[order[j + 1]] == pooled[order[i]]) ++j;
        double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        double t = static_cast<double>(j - i + 1);
        tie_sum += t * t * t - t;
        i = j + 1;
    }
    return {ranks, tie_sum};
}

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

}  // namespace

ModelFamilyMap propose_family_map(const std::vector<std::string>& models) {
    ModelFamilyMap out;
    for (const auto& m : models) {
        size_t cut = m.size();
        for (size_t i = 0; i < m.size(); ++i) {
            if (std::isdigit(static_cast<unsigned char>(m[i])) || m[i] == '-' ||
                m[i] == '_') {
                cut = i;
                break;
            }
        }
        std::string family = m.substr(0, cut);
        for (char& c : family)
            c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        out[m] = family.empty() ? m : family;
    }
    return out;
}

std::optional<double> jaccard(const std::set<std::string>& a,
                              const std::set<std::string>& b) {
    if (a.empty() && b.empty()) return std::nullopt;
    size_t inter = 0;
    for (const auto& x : a)
        if (b.count(x)) ++inter;
    size_t uni = a.size() + b.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

OverlapResult pairwise_tf_overlap(
    const std::vector<evalharness::PairedOutcome>& outcomes,
    const ModelFamilyMap& families, const std::string& dataset) {
    std::map<std::string, std::set<std::string>> tf_sets;
    for (const auto& o : outcomes) {
        tf_sets.try_emplace(o.model);
        if (o.transition == "TF") tf_sets[o.model].insert(o.problem_id);
    }
    OverlapResult out;
    std::vector<std::string> models;
    for (const auto& [m, _] : tf_sets) models.push_back(m);
    for (size_t i = 0; i < models.size(); ++i) {
        for (size_t j = i + 1; j < models.size(); ++j) {
            auto jac = jaccard(tf_sets[models[i]], tf_sets[models[j]]);
            if (!jac) {
                ++out.excluded_empty_pairs;
                continue;
            }
            OverlapRow row;
            row.dataset = dataset;
            row.model_a = models[i];
            row.model_b = models[j];
            row.jaccard = *jac;
            auto fa = families.find(models[i]);
            auto fb = families.find(models[j]);
            row.same_family = fa != families.end() && fb != families.end() &&
                              fa->second == fb->second;
            out.rows.push_back(std::move(row));
        }
    }
    return out;
}

UTestResult mann_whitney_one_sided(const std::vector<double>& same,
                                   const std::vector<double>& cross) {
    if (same.empty() || cross.empty())
        throw std::invalid_argument("mann_whitney: both groups must be nonempty");

    const size_t ns = same.size();
    const size_t nc = cross.size();
    const size_t n = ns + nc;

    std::vector<double> pooled = same;
    pooled.insert(pooled.end(), cross.begin(), cross.end());
    auto [ranks, tie_sum] = midrank(pooled);

    double rank_same = 0.0;
    for (size_t i = 0; i < ns; ++i) rank_same += ranks[i];
    const double u = rank_same - 0.5 * static_cast<double>(ns) *
                                     static_cast<double>(ns + 1);

    UTestResult result;
    result.u_statistic = u;
    result.n_same = ns;
    result.n_cross = nc;
    result.mean_same = mean(same);
    result.mean_cross = mean(cross);

    const bool has_ties = tie_sum > 0.0;
    if (n <= 12 && !has_ties) {
        // exact p over all C(n, ns) assignments of pooled ranks to "same"
        std::vector<double> sorted = pooled;
        std::sort(sorted.begin(), sorted.end());
        long long count_ge = 0;
        long long total = 0;
        const uint32_t limit = 1u << n;
        for (uint32_t mask = 0; mask < limit; ++mask) {
            if (static_cast<size_t>(__builtin_popcount(mask)) != ns) continue;
            ++total;
            double rs = 0.0;
            for (size_t i = 0; i < n; ++i)
                if (mask & (1u << i)) rs += static_cast<double>(i + 1);
            double u_perm = rs - 0.5 * static_cast<double>(ns) *
                                     static_cast<double>(ns + 1);
            if (u_perm >= u - 1e-9) ++count_ge;
        }
        result.method = "exact";
        result.p_value =
            static_cast<double>(count_ge) / static_cast<double>(total);
        return result;
    }

    result.method = "normal_approx";
    const double dn = static_cast<double>(n);
    const double mu = 0.5 * static_cast<double>(ns) * static_cast<double>(nc);
    double var = (static_cast<double>(ns) * static_cast<double>(nc) / 12.0) *
                 (dn + 1.0 - tie_sum / (dn * (dn - 1.0)));
    if (var <= 0.0) {
        result.p_value = 1.0;
        result.degenerate = true;
        return result;
    }
    const double z = (u - mu - 0.5) / std::sqrt(var);
    result.p_value = normal_sf(z);
    return result;
}

UTestResult family_overlap_test_single(const std::vector<OverlapRow>& rows) {
    std::vector<double> same, cross;
    for (const auto& r : rows)
        (r.same_family ? same : cross).push_back(r.jaccard);
    if (same.empty() || cross.empty())
        throw std::invalid_argument(
            "family_overlap_test: need both same- and cross-family pairs");
    return mann_whitney_one_sided(same, cross);
}

UTestResult family_overlap_test_all_datasets(const std::vector<OverlapRow>& rows) {
    // per-pair means across datasets; repeated observations are not
    // independent samples
    struct Acc {
        double sum = 0.0;
        size_t n = 0;
        bool same_family = false;
    };
    std::map<std::pair<std::string, std::string>, Acc> pairs;
    for (const auto& r : rows) {
        auto key = r.model_a < r.model_b ? std::make_pair(r.model_a, r.model_b)
                                         : std::make_pair(r.model_b, r.model_a);
        auto& acc = pairs[key];
        acc.sum += r.jaccard;
        acc.n += 1;
        acc.same_family = r.same_family;
    }
    std::vector<double> same, cross;
    for (const auto& [key, acc] : pairs) {
        double m = acc.sum / static_cast<double>(acc.n);
        (acc.same_family ? same : cross).push_back(m);
    }
    if (same.empty() || cross.empty())
        throw std::invalid_argument(
            "family_overlap_test: need both same- and cross-family pairs");
    return mann_whitney_one_sided(same, cross);
}

double difficulty(const std::map<std::string, bool>& correct_by_model) {
    if (correct_by_model.empty())
        throw std::invalid_argument("difficulty: no models");
    size_t correct = 0;
    for (const auto& [m, c] : correct_by_model)
        if (c) ++correct;
    return 1.0 - static_cast<double>(correct) /
                     static_cast<double>(correct_by_model.size());
}

std::optional<double> lofo_difficulty(
    const std::map<std::string, bool>& correct_by_model,
    const ModelFamilyMap& families, const std::string& excluded_family) {
    std::map<std::string, bool> kept;
    for (const auto& [m, c] : correct_by_model) {
        auto it = families.find(m);
        if (it != families.end() && it->second == excluded_family) continue;
        kept.emplace(m, c);
    }
    if (kept.empty()) return std::nullopt;
    return difficulty(kept);
}

DecompositionRow decompose_failures(
    const std::vector<evalharness::PairedOutcome>& outcomes,
    const std::vector<evalharness::SampleRecord>& samples,
    const ModelFamilyMap& families, const std::string& dataset,
    const std::string& analyzed_family) {
    DecompositionRow row;
    row.dataset = dataset;

    auto in_scope = [&](const std::string& model) {
        if (analyzed_family.empty()) return true;
        auto it = families.find(model);
        return it != families.end() && it->second == analyzed_family;
    };

    // pooled average@k per variant, percent
    std::vector<evalharness::SampleRecord> orig_samples, rev_samples;
    for (const auto& s : samples) {
        if (!in_scope(s.model)) continue;
        (s.variant == "reversed" ? rev_samples : orig_samples).push_back(s);
    }
    // pool across models by qualifying the problem key with the model
    for (auto* group : {&orig_samples, &rev_samples})
        for (auto& s : *group) s.problem_id = s.model + "#" + s.problem_id;
    if (!orig_samples.empty())
        row.original_acc = 100.0 * evalharness::average_at_k(orig_samples);
    if (!rev_samples.empty())
        row.reversed_acc = 100.0 * evalharness::average_at_k(rev_samples);

    // reversed majority correctness per (instance, model), all models
    std::map<std::string, std::map<std::string, bool>> rev_correct;
    for (const auto& o : outcomes)
        rev_correct[o.problem_id][o.model] = o.rev_correct_majority;

    size_t paired = 0;
    size_t tf = 0;
    size_t tf_anchored = 0;
    std::vector<double> tf_difficulties;
    for (const auto& o : outcomes) {
        if (!in_scope(o.model)) continue;
        ++paired;
        if (o.transition != "TF") continue;
        ++tf;
        if (o.rev_same_as_original) ++tf_anchored;
        const auto& by_model = rev_correct.at(o.problem_id);
        std::optional<double> d =
            analyzed_family.empty()
                ? std::optional<double>(difficulty(by_model))
                : lofo_difficulty(by_model, families, analyzed_family);
        if (d) tf_difficulties.push_back(*d);
    }
    if (paired > 0)  // percent over paired problems in scope
        row.tf_rate = 100.0 * static_cast<double>(tf) / static_cast<double>(paired);
    if (!tf_difficulties.empty()) row.tf_difficulty = mean(tf_difficulties);
    if (tf > 0)
        row.tf_anchoring_rate =
            100.0 * static_cast<double>(tf_anchored) / static_cast<double>(tf);
    return row;
}

}  // namespace reversemath::stats
