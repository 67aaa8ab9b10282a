#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "apa/common.hpp"
#include "apa/tokenize.hpp"

namespace apa {

enum class FeatureKind { tf_counts, lda_posterior, alignment_similarity };

struct FeatureMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values; // row-major
    FeatureKind kind = FeatureKind::tf_counts;

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    std::span<const double> row(std::size_t r) const {
        return std::span<const double>(values).subspan(r * cols, cols);
    }
};

struct LDAModel {
    std::size_t K = 0;
    std::size_t V = 0;
    std::vector<double> beta;  // K x V topic-token weights, counts + eta
    std::vector<double> theta; // docs x K posteriors, rows sum to 1
    std::size_t docs = 0;
    double alpha = 0.0;
    double eta = 0.0;
    std::uint64_t seed = 0;
    std::size_t iters = 0;

    double beta_at(std::size_t k, std::size_t v) const { return beta[k * V + v]; }
    double theta_at(std::size_t d, std::size_t k) const { return theta[d * K + k]; }
};

struct AlignmentScoring {
    int match = 1;
    int mismatch = -1;
    int gap = -1;
};

FeatureMatrix build_tf_matrix(const TokenCorpus& c);

// Collapsed Gibbs sampler. alpha <= 0 selects the 50/K default.
LDAModel fit_lda(const TokenCorpus& c, std::size_t K, double alpha, double eta,
                 std::size_t iters, std::uint64_t seed);

FeatureMatrix doc_topic_features(const LDAModel& m);

// Classic Needleman-Wunsch global alignment score over byte sequences.
long long nwsa_score(const byte_vec& a, const byte_vec& b, const AlignmentScoring& s);

struct NwsaResult {
    FeatureMatrix scores;               // p x p, kind = alignment_similarity
    std::size_t alignments_performed = 0; // off-diagonal upper triangle only
};

// Pairwise score matrix; self scores are len * match by construction.
NwsaResult nwsa_matrix(const std::vector<byte_vec>& seqs, const AlignmentScoring& s);

// dist(i,j) = 1 - score(i,j) / max(score(i,i), score(j,j))
std::vector<double> nwsa_dissimilarity(const FeatureMatrix& scores);

void write_feature_csv(const FeatureMatrix& f, const std::string& path,
                       const std::vector<std::string>* col_names = nullptr);
std::string feature_csv_string(const FeatureMatrix& f,
                               const std::vector<std::string>* col_names = nullptr);

} // namespace apa
