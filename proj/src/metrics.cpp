#include "hve/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace hve {

std::pair<CodeIndex, Vec> median_binarize(const EmbeddingSet& E) {
    if (E.n < 1) throw std::invalid_argument("median_binarize: empty embedding set");

    Vec thresholds(E.d);
    std::vector<double> column(E.n);
    for (std::size_t j = 0; j < E.d; ++j) {
        for (std::size_t i = 0; i < E.n; ++i) column[i] = E.row(i)[j];
        std::sort(column.begin(), column.end());
        if (E.n % 2 == 1)
            thresholds[j] = column[E.n / 2];
        else
            thresholds[j] = 0.5 * (column[E.n / 2 - 1] + column[E.n / 2]);
    }

    CodeIndex index;
    for (std::size_t i = 0; i < E.n; ++i) {
        BinaryCode code(E.d);
        const auto row = E.row(i);
        for (std::size_t j = 0; j < E.d; ++j)
            if (row[j] >= thresholds[j]) code.set(j, true);
        index.codes.push_back(std::move(code));
    }
    index.ids = E.ids;
    index.labels = E.labels;
    return {std::move(index), std::move(thresholds)};
}

double cosine(const Vec& a, const Vec& b) {
    const double na = norm2(a);
    const double nb = norm2(b);
    if (na == 0.0 || nb == 0.0) throw std::invalid_argument("cosine: zero-norm input");
    return dot(a, b) / (na * nb);
}

std::optional<double> pearson(const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw_shape_error("pearson", x.size(), y.size());
    if (x.size() < 2) throw std::invalid_argument("pearson: need at least 2 samples");

    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) return std::nullopt;
    return sxy / std::sqrt(sxx * syy);
}

Vec average_ranks(const Vec& x) {
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&x](std::size_t a, std::size_t b) { return x[a] < x[b]; });

    Vec ranks(x.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
        // positions i..j share the mean of ranks i+1..j+1
        const double r = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

std::optional<double> spearman(const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw_shape_error("spearman", x.size(), y.size());
    if (x.size() < 2) throw std::invalid_argument("spearman: need at least 2 samples");
    return pearson(average_ranks(x), average_ranks(y));
}

namespace {

CorrelationReport correlation_of_matrix(const std::vector<double>& data, std::size_t n,
                                        std::size_t d) {
    if (n < 2) throw std::invalid_argument("avg_abs_correlation: need at least 2 rows");

    Vec mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += data[i * d + j];
    for (double& m : mean) m /= static_cast<double>(n);

    // centered second-moment matrix, upper triangle
    Mat cov(d, d);
    std::vector<double> centered(d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) centered[j] = data[i * d + j] - mean[j];
        for (std::size_t a = 0; a < d; ++a) {
            const double ca = centered[a];
            for (std::size_t b = a; b < d; ++b) cov(a, b) += ca * centered[b];
        }
    }

    CorrelationReport report;
    report.rho = Mat(d, d);
    for (std::size_t j = 0; j < d; ++j)
        if (cov(j, j) == 0.0) report.constant_dims.push_back(j);

    double sum_abs = 0.0;
    for (std::size_t a = 0; a < d; ++a) {
        for (std::size_t b = a; b < d; ++b) {
            const double va = cov(a, a);
            const double vb = cov(b, b);
            double r = 0.0;  // undefined pairs contribute 0
            if (va > 0.0 && vb > 0.0) r = cov(a, b) / std::sqrt(va * vb);
            r = std::clamp(r, -1.0, 1.0);
            report.rho(a, b) = r;
            report.rho(b, a) = r;
            sum_abs += (a == b) ? std::abs(r) : 2.0 * std::abs(r);
        }
    }
    report.avg_abs = sum_abs / (static_cast<double>(d) * static_cast<double>(d));
    return report;
}

}  // namespace

CorrelationReport avg_abs_correlation(const EmbeddingSet& E) {
    return correlation_of_matrix(E.data, E.n, E.d);
}

CorrelationReport avg_abs_correlation(const CodeIndex& codes) {
    const std::size_t n = codes.size();
    const std::size_t d = codes.nbits();
    std::vector<double> data(n * d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) data[i * d + j] = codes.codes[i].get(j) ? 1.0 : 0.0;
    return correlation_of_matrix(data, n, d);
}

VoteResult knn_classify(const CodeIndex& train, const BinaryCode& query, std::size_t k) {
    if (train.size() == 0) throw std::invalid_argument("knn_classify: empty training index");
    if (!train.has_labels()) throw std::invalid_argument("knn_classify: training index has no labels");
    if (k < 1) throw std::invalid_argument("knn_classify: k must be >= 1");

    VoteResult result;
    result.neighbors = knn_search(train, query, k);

    std::map<std::string, std::size_t> best_rank;  // class -> best neighbor rank
    for (const Neighbor& nb : result.neighbors) {
        const std::string& label = train.labels[nb.pos];
        result.tally[label] += 1.0 / std::sqrt(static_cast<double>(nb.rank));
        auto [it, inserted] = best_rank.try_emplace(label, nb.rank);
        if (!inserted) it->second = std::min(it->second, nb.rank);
    }

    double best_score = -1.0;
    std::size_t winner_rank = 0;
    for (const auto& [label, score] : result.tally) {
        const std::size_t rank = best_rank[label];
        const bool wins = score > best_score ||
                          (score == best_score && rank < winner_rank);
        if (wins) {
            best_score = score;
            winner_rank = rank;
            result.label = label;
        }
    }
    return result;
}

std::optional<double> eval_similarity(const Vec& ground_truth, const Vec& computed) {
    if (ground_truth.size() != computed.size())
        throw_shape_error("eval_similarity", ground_truth.size(), computed.size());
    if (ground_truth.empty()) throw std::invalid_argument("eval_similarity: no pairs");
    return spearman(ground_truth, computed);
}

double classification_error(const std::vector<std::string>& predictions,
                            const std::vector<std::string>& truth) {
    if (predictions.size() != truth.size())
        throw_shape_error("classification_error", predictions.size(), truth.size());
    if (predictions.empty()) throw std::invalid_argument("classification_error: empty input");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] != truth[i]) ++wrong;
    return static_cast<double>(wrong) / static_cast<double>(predictions.size());
}

}  // namespace hve
