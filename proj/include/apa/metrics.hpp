#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace apa {

struct ContingencyTable {
    std::size_t n_pred = 0;
    std::size_t n_truth = 0;
    std::vector<std::size_t> counts; // n_pred x n_truth, row-major
    std::vector<std::size_t> row_marginals;
    std::vector<std::size_t> col_marginals;
    std::size_t total = 0;

    std::size_t at(std::size_t i, std::size_t j) const { return counts[i * n_truth + j]; }
};

// Labels are arbitrary non-negative ids; they are compacted internally.
ContingencyTable contingency_table(std::span<const std::size_t> pred,
                                   std::span<const std::size_t> truth);

double adjusted_rand_index(std::span<const std::size_t> pred,
                           std::span<const std::size_t> truth);

double fowlkes_mallows(std::span<const std::size_t> pred,
                       std::span<const std::size_t> truth);

// Hypergeometric expected-MI adjustment, natural logs, arithmetic-mean
// entropy normalizer.
double adjusted_mutual_information(std::span<const std::size_t> pred,
                                   std::span<const std::size_t> truth);

struct VotingResult {
    double accuracy = 0.0;
    std::vector<std::size_t> voted_class;     // per predicted cluster
    std::vector<std::size_t> confusion;       // voted class x truth class, row-major
    std::size_t n_classes = 0;
    std::string confusion_csv() const;
};

// Majority-vote relabeling; modal ties go to the smaller class index.
// Kept as a diagnostic only: it is trivially gameable by over-clustering.
VotingResult voting_accuracy(std::span<const std::size_t> pred,
                             std::span<const std::size_t> truth);

struct EvaluationScores {
    double ari = 0.0;
    double fms = 0.0;
    double ami = 0.0;
    double voting_accuracy = 0.0;
    bool satisfactory = false; // ari >= 0.4
};

EvaluationScores evaluate(std::span<const std::size_t> pred,
                          std::span<const std::size_t> truth);

} // namespace apa
