#pragma once

#include <optional>
#include <string>
#include <vector>

#include "apa/capture.hpp"
#include "apa/cluster.hpp"
#include "apa/config.hpp"
#include "apa/metrics.hpp"
#include "apa/optimize.hpp"

namespace apa {

enum class TokenizerKind { ngram3, nemesys };
enum class FeatureMethod { tf, lda, nwsa };

struct Strategy {
    TokenizerKind tokenizer = TokenizerKind::ngram3;
    FeatureMethod features = FeatureMethod::tf;
    ClusterMethod clusterer = ClusterMethod::upgma;
    std::string name;
};

// The five evaluated combinations. "HYBRID" resolves per dataset at run
// time via method_for.
Strategy strategy_netzob();
Strategy strategy_lda_kmeans();
Strategy strategy_lda_upgma();
Strategy strategy_tf_upgma();
Strategy strategy_hybrid();
Strategy strategy_by_name(const std::string& name); // accepts CLI aliases
std::vector<Strategy> all_strategies();

// Hybrid selection rule: TF+UPGMA by default, LDA features for binary
// application payloads, NEMESYS field tokens for textual ones.
Strategy method_for(const Dataset& d, double text_threshold = 0.75);

struct AnalysisReport {
    std::string dataset_name;
    std::string strategy_name;  // as requested (HYBRID stays HYBRID)
    Strategy resolved;          // what actually ran
    OsiLayer layer = OsiLayer::link;
    std::size_t packets_in = 0;
    std::size_t packets_analyzed = 0;
    std::vector<std::size_t> excluded_packets; // original indices
    std::optional<std::string> payload_class;  // application layer only
    std::optional<std::size_t> header_len;
    bool header_len_optimized = false;
    std::optional<double> header_isolation;
    std::optional<std::size_t> topic_size;
    bool topic_size_optimized = false;
    ClusterAssignment assignment;
    std::optional<Dendrogram> dendrogram;
    std::optional<EvaluationScores> scores;
    std::optional<VotingResult> voting;
    std::vector<std::string> class_names; // truth classes, first-appearance order
    FeatureMatrix features;               // in-memory only, not serialized
    std::vector<std::string> feature_names;
    std::size_t nwsa_alignments = 0;
    std::string header_sweep_csv; // empty when no sweep ran
    std::string topic_sweep_csv;
    double seconds = 0.0;
    std::uint64_t seed = 0;
    RunConfig config;
    warning_list warnings;

    std::string to_json() const; // stable key order
    std::string confusion_csv() const; // empty without ground truth
};

// Full pipeline: strip, header handling, tokenize, features, cluster,
// and evaluation when ground truth is available. Truth defaults to the
// packets' own labels when every packet carries one.
AnalysisReport run_pipeline(const Dataset& d, const Strategy& s, const RunConfig& cfg,
                            const std::vector<std::string>* truth = nullptr);

struct SweepReport {
    std::string kind;        // "topics" or "header"
    std::size_t chosen = 0;  // K or length
    std::string csv;
    bool has_ari = false;
};

// CSV traces behind the optimizer decisions; when labels exist every
// sweep point also gets the ARI it would score.
SweepReport sweep_topics_report(const Dataset& d, const RunConfig& cfg);
SweepReport sweep_header_report(const Dataset& d, const RunConfig& cfg);

struct BenchmarkCell {
    std::string dataset;
    std::string strategy;
    bool ok = false;
    std::string error;
    EvaluationScores scores;
    std::size_t k = 0;
    std::optional<std::size_t> header_len;
    std::optional<std::size_t> topic_size;
    double seconds = 0.0;
};

struct BenchmarkGrid {
    std::vector<BenchmarkCell> cells; // dataset-major, strategy order preserved
    std::string csv() const;
    std::string summary() const; // per-dataset winner + hybrid win count
};

// ARI grid across datasets and strategies. A failing cell is recorded
// and the run continues.
BenchmarkGrid run_benchmark(const std::vector<Dataset>& datasets,
                            const std::vector<Strategy>& strategies,
                            const RunConfig& cfg);

const char* to_string(TokenizerKind t);
const char* to_string(FeatureMethod f);
const char* to_string(ClusterMethod m);

} // namespace apa
