#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "apa/features.hpp"

namespace apa {

// Every knob of the pipeline with the tuned defaults baked in. A full
// snapshot is embedded in each report so runs can be audited and replayed.
struct RunConfig {
    std::uint64_t seed = 1;
    std::size_t gram_bytes = 3;
    double sigma = 0.5;          // NEMESYS congruence smoothing
    std::size_t max_field = 40;  // NEMESYS token cap, bytes
    double upgma_threshold = 0.5;
    double lda_alpha = 0.0;      // <= 0 selects 50/K
    double lda_eta = 0.01;
    std::size_t lda_iters = 500;
    std::vector<std::size_t> k_range;   // topic sizes / k-means elbow range
    std::vector<std::size_t> len_range; // candidate header lengths, bytes
    double frex_omega = 0.7;
    std::size_t coherence_m = 10;
    double text_threshold = 0.75;
    std::optional<std::size_t> header_len; // explicit length skips the sweep
    std::optional<std::size_t> topic_size; // explicit K skips the sweep
    std::optional<std::size_t> kmeans_k;   // explicit K skips the elbow
    std::string hybrid_textual_features = "tf"; // "tf" or "lda" over field tokens
    AlignmentScoring nwsa;
    unsigned jobs = 1;

    RunConfig();

    std::string to_json() const;
    static RunConfig from_json(const std::string& json_text);

    // Merge a (possibly partial) JSON object over the defaults.
    void apply_json(const std::string& json_text);
};

} // namespace apa
