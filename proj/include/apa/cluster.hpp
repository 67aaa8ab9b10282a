#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "apa/features.hpp"

namespace apa {

enum class ClusterMethod { upgma, kmeans };

struct ClusterAssignment {
    std::vector<std::size_t> labels; // contiguous ids 0..k-1, one per packet
    std::size_t k = 0;
    ClusterMethod method = ClusterMethod::upgma;
    double threshold = 0.0;  // upgma
    std::size_t kmeans_k = 0;
    std::uint64_t seed = 0;
};

struct DendrogramMerge {
    std::size_t cluster_a = 0; // ids: 0..n-1 originals, then n, n+1, ... per merge
    std::size_t cluster_b = 0;
    double dissimilarity = 0.0;
    std::size_t new_size = 0;
};

struct Dendrogram {
    std::vector<DendrogramMerge> merges;
    std::string csv() const; // cluster_a,cluster_b,dissimilarity,size
};

double cosine_similarity(std::span<const double> u, std::span<const double> v);

// Pairwise 1 - cosine over matrix rows. Zero rows get dissimilarity 1
// against everything and a warning instead of an error.
std::vector<double> cosine_dissimilarity_matrix(const FeatureMatrix& f,
                                                warning_list* warnings = nullptr);

struct UpgmaResult {
    ClusterAssignment assignment;
    Dendrogram dendrogram;
};

// Average-linkage agglomeration over a symmetric dissimilarity matrix,
// stopping before any merge whose linkage exceeds the threshold. Equal
// linkages merge the lexicographically smallest cluster-id pair.
UpgmaResult upgma(const std::vector<double>& dissim, std::size_t n, double threshold);

// Seeded k-means++ with Lloyd iterations; an emptied cluster is reseeded
// with the farthest point.
ClusterAssignment kmeans(const FeatureMatrix& f, std::size_t K, std::uint64_t seed,
                         std::size_t max_iters = 100);

double kmeans_wss(const FeatureMatrix& f, const ClusterAssignment& a);

// Elbow of the WSS curve via Kneedle, falling back to the smallest K
// when the curve has no knee.
std::size_t select_k_kmeans(const FeatureMatrix& f, const std::vector<std::size_t>& k_range,
                            std::uint64_t seed, warning_list* warnings = nullptr);

} // namespace apa
