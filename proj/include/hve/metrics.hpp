#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hve/binary_index.hpp"
#include "hve/embedding.hpp"

// Evaluation machinery: median-threshold baseline binarization, cosine
// similarity, rank correlation, the average-absolute-correlation
// redundancy metric, and the weighted k-NN classifier.

namespace hve {

// Thresholds each dimension at its median (midpoint for even n); bit
// set iff value >= threshold. Returns the codes and the thresholds.
std::pair<CodeIndex, Vec> median_binarize(const EmbeddingSet& E);

double cosine(const Vec& a, const Vec& b);

// Sample Pearson correlation; nullopt when either input is constant.
std::optional<double> pearson(const Vec& x, const Vec& y);

// Pearson correlation of average ranks (ties share their mean rank).
std::optional<double> spearman(const Vec& x, const Vec& y);

// Average ranks, 1-based, ties averaged.
Vec average_ranks(const Vec& x);

struct CorrelationReport {
    Mat rho;  // d x d, 0 where undefined
    double avg_abs = 0.0;
    std::vector<std::size_t> constant_dims;
};

// Mean of |rho(i,j)| over all dimension pairs including the diagonal;
// undefined pairs (constant dimensions) contribute 0.
CorrelationReport avg_abs_correlation(const EmbeddingSet& E);
CorrelationReport avg_abs_correlation(const CodeIndex& codes);  // bits as 0/1 dims

struct VoteResult {
    std::string label;
    std::map<std::string, double> tally;  // class -> summed 1/sqrt(rank)
    std::vector<Neighbor> neighbors;
};

// Weighted vote over the k nearest codes; rank r contributes 1/sqrt(r).
// Ties between classes go to the class of the best-ranked neighbor
// among the tied classes.
VoteResult knn_classify(const CodeIndex& train, const BinaryCode& query, std::size_t k = 10);

// Spearman's rho between ground-truth scores and computed similarity
// scores (distances must be negated by the caller).
std::optional<double> eval_similarity(const Vec& ground_truth, const Vec& computed);

double classification_error(const std::vector<std::string>& predictions,
                            const std::vector<std::string>& truth);

}  // namespace hve
