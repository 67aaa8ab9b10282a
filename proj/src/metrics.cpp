#include "apa/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include "apa/common.hpp"

namespace apa {

namespace {

// Compact arbitrary ids to 0..k-1 in first-appearance order.
std::vector<std::size_t> compact(std::span<const std::size_t> labels, std::size_t& k_out) {
    std::unordered_map<std::size_t, std::size_t> map;
    std::vector<std::size_t> out;
    out.reserve(labels.size());
    for (std::size_t l : labels) {
        auto [it, fresh] = map.emplace(l, map.size());
        (void)fresh;
        out.push_back(it->second);
    }
    k_out = map.size();
    return out;
}

double comb2(std::size_t x) {
    return 0.5 * static_cast<double>(x) * static_cast<double>(x - 1);
}

} // namespace

ContingencyTable contingency_table(std::span<const std::size_t> pred,
                                   std::span<const std::size_t> truth) {
    if (pred.size() != truth.size())
        fail(ErrorKind::invalid_argument, "label lists differ in length");
    if (pred.empty())
        fail(ErrorKind::invalid_argument, "empty label lists");

    ContingencyTable t;
    std::vector<std::size_t> p = compact(pred, t.n_pred);
    std::vector<std::size_t> q = compact(truth, t.n_truth);
    t.counts.assign(t.n_pred * t.n_truth, 0);
    t.row_marginals.assign(t.n_pred, 0);
    t.col_marginals.assign(t.n_truth, 0);
    t.total = pred.size();
    for (std::size_t i = 0; i < p.size(); ++i) {
        ++t.counts[p[i] * t.n_truth + q[i]];
        ++t.row_marginals[p[i]];
        ++t.col_marginals[q[i]];
    }
    return t;
}

double adjusted_rand_index(std::span<const std::size_t> pred,
                           std::span<const std::size_t> truth) {
    if (pred.size() < 2)
        fail(ErrorKind::invalid_argument, "need at least two items");
    ContingencyTable t = contingency_table(pred, truth);

    double sum_ij = 0.0;
    for (std::size_t c : t.counts)
        sum_ij += comb2(c);
    double sum_a = 0.0, sum_b = 0.0;
    for (std::size_t a : t.row_marginals)
        sum_a += comb2(a);
    for (std::size_t b : t.col_marginals)
        sum_b += comb2(b);
    const double pairs = comb2(t.total);
    const double expected = sum_a * sum_b / pairs;
    const double max_index = 0.5 * (sum_a + sum_b);
    const double denom = max_index - expected;
    if (denom == 0.0)
        return 1.0; // both partitions trivial: agreement is perfect by convention
    return (sum_ij - expected) / denom;
}

double fowlkes_mallows(std::span<const std::size_t> pred,
                       std::span<const std::size_t> truth) {
    if (pred.size() < 2)
        fail(ErrorKind::invalid_argument, "need at least two items");
    ContingencyTable t = contingency_table(pred, truth);

    double tp = 0.0;
    for (std::size_t c : t.counts)
        tp += comb2(c);
    double tp_fp = 0.0, tp_fn = 0.0;
    for (std::size_t a : t.row_marginals)
        tp_fp += comb2(a);
    for (std::size_t b : t.col_marginals)
        tp_fn += comb2(b);
    if (tp_fp == 0.0 || tp_fn == 0.0)
        return 0.0;
    return tp / std::sqrt(tp_fp * tp_fn);
}

double adjusted_mutual_information(std::span<const std::size_t> pred,
                                   std::span<const std::size_t> truth) {
    if (pred.size() < 2)
        fail(ErrorKind::invalid_argument, "need at least two items");
    ContingencyTable t = contingency_table(pred, truth);
    if (t.n_pred == 1 && t.n_truth == 1)
        return 1.0;

    const double n = static_cast<double>(t.total);

    double mi = 0.0;
    for (std::size_t i = 0; i < t.n_pred; ++i) {
        for (std::size_t j = 0; j < t.n_truth; ++j) {
            std::size_t nij = t.at(i, j);
            if (nij == 0)
                continue;
            double pij = nij / n;
            mi += pij * std::log(n * nij /
                                 (static_cast<double>(t.row_marginals[i]) *
                                  static_cast<double>(t.col_marginals[j])));
        }
    }

    double hu = 0.0, hv = 0.0;
    for (std::size_t a : t.row_marginals)
        if (a > 0)
            hu -= (a / n) * std::log(a / n);
    for (std::size_t b : t.col_marginals)
        if (b > 0)
            hv -= (b / n) * std::log(b / n);

    // E[MI] under the hypergeometric permutation model
    double emi = 0.0;
    const std::size_t N = t.total;
    for (std::size_t i = 0; i < t.n_pred; ++i) {
        const std::size_t a = t.row_marginals[i];
        for (std::size_t j = 0; j < t.n_truth; ++j) {
            const std::size_t b = t.col_marginals[j];
            const std::size_t lo = (a + b > N) ? a + b - N : 1;
            const std::size_t hi = std::min(a, b);
            for (std::size_t nij = std::max<std::size_t>(lo, 1); nij <= hi; ++nij) {
                double log_term =
                    std::lgamma(static_cast<double>(a + 1)) +
                    std::lgamma(static_cast<double>(b + 1)) +
                    std::lgamma(static_cast<double>(N - a + 1)) +
                    std::lgamma(static_cast<double>(N - b + 1)) -
                    std::lgamma(static_cast<double>(N + 1)) -
                    std::lgamma(static_cast<double>(nij + 1)) -
                    std::lgamma(static_cast<double>(a - nij + 1)) -
                    std::lgamma(static_cast<double>(b - nij + 1)) -
                    std::lgamma(static_cast<double>(N - a - b + nij + 1));
                emi += (nij / n) *
                       std::log(n * nij / (static_cast<double>(a) * static_cast<double>(b))) *
                       std::exp(log_term);
            }
        }
    }

    const double normalizer = 0.5 * (hu + hv) - emi;
    if (std::fabs(normalizer) < 1e-15)
        return 0.0;
    return (mi - emi) / normalizer;
}

VotingResult voting_accuracy(std::span<const std::size_t> pred,
                             std::span<const std::size_t> truth) {
    if (pred.size() != truth.size() || pred.empty())
        fail(ErrorKind::invalid_argument, "label lists must be non-empty and equal length");

    std::size_t n_pred = 0, n_truth = 0;
    std::vector<std::size_t> p = compact(pred, n_pred);
    std::vector<std::size_t> q = compact(truth, n_truth);

    std::vector<std::vector<std::size_t>> counts(n_pred, std::vector<std::size_t>(n_truth, 0));
    for (std::size_t i = 0; i < p.size(); ++i)
        ++counts[p[i]][q[i]];

    VotingResult r;
    r.n_classes = n_truth;
    r.voted_class.resize(n_pred);
    for (std::size_t c = 0; c < n_pred; ++c) {
        std::size_t best = 0;
        for (std::size_t j = 1; j < n_truth; ++j)
            if (counts[c][j] > counts[c][best])
                best = j; // ties keep the smaller class index
        r.voted_class[c] = best;
    }

    r.confusion.assign(n_truth * n_truth, 0);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        std::size_t voted = r.voted_class[p[i]];
        ++r.confusion[voted * n_truth + q[i]];
        if (voted == q[i])
            ++correct;
    }
    r.accuracy = static_cast<double>(correct) / static_cast<double>(p.size());
    return r;
}

std::string VotingResult::confusion_csv() const {
    std::ostringstream out;
    out << "voted\\truth";
    for (std::size_t j = 0; j < n_classes; ++j)
        out << ",class" << j;
    out << '\n';
    for (std::size_t i = 0; i < n_classes; ++i) {
        out << "class" << i;
        for (std::size_t j = 0; j < n_classes; ++j)
            out << ',' << confusion[i * n_classes + j];
        out << '\n';
    }
    return out.str();
}

EvaluationScores evaluate(std::span<const std::size_t> pred,
                          std::span<const std::size_t> truth) {
    EvaluationScores s;
    s.ari = adjusted_rand_index(pred, truth);
    s.fms = fowlkes_mallows(pred, truth);
    s.ami = adjusted_mutual_information(pred, truth);
    s.voting_accuracy = voting_accuracy(pred, truth).accuracy;
    s.satisfactory = s.ari >= 0.4;
    return s;
}

} // namespace apa
