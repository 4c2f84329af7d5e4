#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "reversemath/evalharness.hpp"

namespace reversemath::stats {

// model -> family tag; every analyzed model needs an entry.
using ModelFamilyMap = std::map<std::string, std::string>;

// Proposes a grouping by the prefix before the first digit run or size
// suffix; a starting point for explicit configuration, not a substitute.
ModelFamilyMap propose_family_map(const std::vector<std::string>& models);

struct UTestResult {
    double u_statistic = 0.0;
    double p_value = 1.0;
    std::string method;  // "exact" | "normal_approx"
    size_t n_same = 0;
    size_t n_cross = 0;
    double mean_same = 0.0;
    double mean_cross = 0.0;
    bool degenerate = false;
};

// |a ∩ b| / |a ∪ b|; nullopt when both sets are empty.
std::optional<double> jaccard(const std::set<std::string>& a,
                              const std::set<std::string>& b);

struct OverlapRow {
    std::string dataset;
    std::string model_a;
    std::string model_b;
    double jaccard = 0.0;
    bool same_family = false;
};

struct OverlapResult {
    std::vector<OverlapRow> rows;
    size_t excluded_empty_pairs = 0;
};

// TF set per model = problem ids with transition TF; one row per unordered
// model pair with a defined Jaccard.
OverlapResult pairwise_tf_overlap(
    const std::vector<evalharness::PairedOutcome>& outcomes,
    const ModelFamilyMap& families, const std::string& dataset = "");

// One-sided: alternative is same-family values stochastically greater than
// cross-family. Exact enumeration when n_same + n_cross <= 12 and no ties,
// otherwise normal approximation with tie-corrected variance and continuity
// correction.
UTestResult mann_whitney_one_sided(const std::vector<double>& same,
                                   const std::vector<double>& cross);

// scope "" = single pooled set of rows; otherwise rows are grouped per
// dataset, per-pair Jaccard means taken across datasets first, then tested.
UTestResult family_overlap_test_single(const std::vector<OverlapRow>& rows);
UTestResult family_overlap_test_all_datasets(const std::vector<OverlapRow>& rows);

// 1 - mean of per-model correctness indicators.
double difficulty(const std::map<std::string, bool>& correct_by_model);

// Same, over models outside the excluded family. Nullopt when no model
// remains.
std::optional<double> lofo_difficulty(
    const std::map<std::string, bool>& correct_by_model,
    const ModelFamilyMap& families, const std::string& excluded_family);

struct DecompositionRow {
    std::string dataset;
    double original_acc = 0.0;  // percent
    double reversed_acc = 0.0;  // percent
    double tf_rate = 0.0;       // percent of paired problems
    std::optional<double> tf_difficulty;      // [0, 1]
    std::optional<double> tf_anchoring_rate;  // percent of TF cases
};

// Pooled over all models when analyzed_family is empty; otherwise TF cases
// and anchoring come from that family's models and difficulty is
// leave-one-family-out.
DecompositionRow decompose_failures(
    const std::vector<evalharness::PairedOutcome>& outcomes,
    const std::vector<evalharness::SampleRecord>& samples,
    const ModelFamilyMap& families, const std::string& dataset,
    const std::string& analyzed_family = "");

}  // namespace reversemath::stats
