#pragma once

#include <cstdint>
#include <vector>

#include "apa/capture.hpp"
#include "apa/features.hpp"
#include "apa/tokenize.hpp"

namespace apa {

struct TopicSizeScore {
    std::size_t K = 0;
    double mean_exclusivity = 0.0;
    double mean_coherence = 0.0;
    double norm_excl = 0.0;
    double norm_coh = 0.0;
    double origin_distance = 0.0;
};

struct HeaderLengthScore {
    std::size_t length = 0;
    std::size_t best_K = 0;
    double isolation = 0.0;
};

struct OptimizeConfig {
    double alpha = 0.0; // <= 0 means 50/K
    double eta = 0.01;
    std::size_t iters = 500;
    std::uint64_t seed = 1;
    double omega = 0.7;    // FREX weight
    std::size_t top_m = 10; // tokens per topic for FREX and coherence
    std::size_t gram_bytes = 3;
    std::size_t len_tag = 0; // header length baked into job seeds, 0 = full payload
    unsigned jobs = 1;
};

// Every Gibbs chain in a sweep gets its own stream derived from
// (base seed, header length, K), so sweep results are identical no
// matter how the jobs are scheduled.
std::uint64_t lda_job_seed(std::uint64_t base, std::size_t header_len_or_zero,
                           std::size_t K);

// Weighted harmonic mean of the exclusivity and frequency ECDF ranks of
// token v inside topic k. ECDF uses average ranks for ties.
double frex(const LDAModel& m, std::size_t k, std::size_t v, double omega);

// Co-occurrence coherence over the topic's M highest-beta tokens;
// document counts come from the corpus.
double semantic_coherence(const LDAModel& m, std::size_t k, std::size_t M,
                          const TokenCorpus& corpus);

// Fits one LDA and averages FREX / coherence over topics. Normalized
// fields are filled in later by select_topic_size.
TopicSizeScore score_topic_size(const TokenCorpus& c, std::size_t K,
                                const OptimizeConfig& cfg);

struct TopicSizeSelection {
    std::size_t best_K = 0;
    std::vector<TopicSizeScore> scores; // ordered by K
    bool degenerate = false;            // all scores identical, fell back to min K
};

// Min-max normalizes both axes across the candidate set and picks the K
// with the greatest Euclidean distance from the origin; ties take the
// smaller K.
TopicSizeSelection select_topic_size(const TokenCorpus& c,
                                     const std::vector<std::size_t>& k_range,
                                     const OptimizeConfig& cfg);

// Mean gap in origin distance between the optimum and its existing
// neighbours in K order (one neighbour at the endpoints).
double isolation(const std::vector<TopicSizeScore>& scores, std::size_t opt_index);

struct HeaderLengthSelection {
    std::size_t best_length = 0;
    std::size_t best_K = 0;
    std::vector<HeaderLengthScore> sweep;                 // ordered by length
    std::vector<std::vector<TopicSizeScore>> topic_sweeps; // per length, same order
};

// Re-extracts headers at every candidate length, runs the topic-size
// selection per length and keeps the length whose optimum is the most
// isolated. Sweep points are independent jobs seeded from (seed, L, K).
HeaderLengthSelection select_header_length(const Dataset& d,
                                           const std::vector<std::size_t>& len_range,
                                           const std::vector<std::size_t>& k_range,
                                           const OptimizeConfig& cfg,
                                           warning_list* warnings = nullptr);

// Kneedle knee detector for a decreasing-returns curve. Throws when no
// knee exists (flat or monotone difference curve).
std::size_t kneedle_elbow(const std::vector<double>& xs, const std::vector<double>& ys);

} // namespace apa
