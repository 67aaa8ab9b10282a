// Command-line front end. Everything goes through the C API in apa.h; the
// flags below mirror the RunConfig fields and get serialized to a config
// JSON object. Every flag can also be set through an APA_* environment
// variable (e.g. APA_SEED).

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "apa.h"

namespace {

struct ConfigFlags {
    uint64_t seed = 1;
    std::size_t gram_bytes = 3;
    double sigma = 0.5;
    std::size_t max_field = 40;
    double upgma_threshold = 0.5;
    double lda_alpha = 0.0;
    double lda_eta = 0.01;
    std::size_t lda_iters = 500;
    std::string k_range = "2:20";
    std::string len_range = "4:64:2";
    double frex_omega = 0.7;
    std::size_t coherence_m = 10;
    double text_threshold = 0.75;
    std::optional<std::size_t> header_len;
    std::optional<std::size_t> topic_size;
    std::optional<std::size_t> kmeans_k;
    std::string hybrid_textual_features = "tf";
    int nwsa_match = 1;
    int nwsa_mismatch = -1;
    int nwsa_gap = -1;
    unsigned jobs = 1;
};

std::vector<std::size_t> parse_range(const std::string& text) {
    // "lo:hi", "lo:hi:step" or a comma list
    std::vector<std::size_t> out;
    if (text.find(':') != std::string::npos) {
        std::size_t lo = 0, hi = 0, step = 1;
        char c1 = 0, c2 = 0;
        std::istringstream ss(text);
        ss >> lo >> c1 >> hi;
        if (ss >> c2 >> step) {
        }
        if (c1 != ':' || lo > hi || step == 0)
            throw CLI::ValidationError("range", "expected lo:hi[:step], got " + text);
        for (std::size_t v = lo; v <= hi; v += step)
            out.push_back(v);
        return out;
    }
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty())
            out.push_back(std::stoull(tok));
    if (out.empty())
        throw CLI::ValidationError("range", "empty range: " + text);
    return out;
}

std::string config_json(const ConfigFlags& f) {
    nlohmann::json j;
    j["seed"] = f.seed;
    j["gram_bytes"] = f.gram_bytes;
    j["sigma"] = f.sigma;
    j["max_field"] = f.max_field;
    j["upgma_threshold"] = f.upgma_threshold;
    j["lda_alpha"] = f.lda_alpha;
    j["lda_eta"] = f.lda_eta;
    j["lda_iters"] = f.lda_iters;
    j["k_range"] = parse_range(f.k_range);
    j["len_range"] = parse_range(f.len_range);
    j["frex_omega"] = f.frex_omega;
    j["coherence_m"] = f.coherence_m;
    j["text_threshold"] = f.text_threshold;
    if (f.header_len)
        j["header_len"] = *f.header_len;
    if (f.topic_size)
        j["topic_size"] = *f.topic_size;
    if (f.kmeans_k)
        j["kmeans_k"] = *f.kmeans_k;
    j["hybrid_textual_features"] = f.hybrid_textual_features;
    j["nwsa_match"] = f.nwsa_match;
    j["nwsa_mismatch"] = f.nwsa_mismatch;
    j["nwsa_gap"] = f.nwsa_gap;
    j["jobs"] = f.jobs;
    return j.dump();
}

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
    cmd->add_option("--seed", f.seed, "Master seed; every random choice derives from it")
        ->envname("APA_SEED");
    cmd->add_option("--gram-bytes", f.gram_bytes, "n-gram window in bytes")
        ->envname("APA_GRAM_BYTES");
    cmd->add_option("--sigma", f.sigma, "Bit-congruence smoothing sigma")->envname("APA_SIGMA");
    cmd->add_option("--max-field", f.max_field, "Longest field token in bytes")
        ->envname("APA_MAX_FIELD");
    cmd->add_option("--upgma-threshold", f.upgma_threshold, "UPGMA dissimilarity cutoff")
        ->envname("APA_UPGMA_THRESHOLD");
    cmd->add_option("--lda-alpha", f.lda_alpha, "Dirichlet doc-topic prior; <=0 means 50/K")
        ->envname("APA_LDA_ALPHA");
    cmd->add_option("--lda-eta", f.lda_eta, "Dirichlet topic-token prior")
        ->envname("APA_LDA_ETA");
    cmd->add_option("--lda-iters", f.lda_iters, "Gibbs sweeps")->envname("APA_LDA_ITERS");
    cmd->add_option("--k-range", f.k_range, "Topic sizes to sweep, lo:hi[:step] or list")
        ->envname("APA_K_RANGE");
    cmd->add_option("--len-range", f.len_range, "Header lengths to sweep, lo:hi[:step] or list")
        ->envname("APA_LEN_RANGE");
    cmd->add_option("--frex-omega", f.frex_omega, "FREX exclusivity weight")
        ->envname("APA_FREX_OMEGA");
    cmd->add_option("--coherence-m", f.coherence_m, "Top tokens per topic for scoring")
        ->envname("APA_COHERENCE_M");
    cmd->add_option("--text-threshold", f.text_threshold,
                    "Median printable ratio for textual detection")
        ->envname("APA_TEXT_THRESHOLD");
    cmd->add_option("--header-len", f.header_len, "Fixed header length; skips the sweep")
        ->envname("APA_HEADER_LEN");
    cmd->add_option("--topic-size", f.topic_size, "Fixed LDA topic count; skips the sweep")
        ->envname("APA_TOPIC_SIZE");
    cmd->add_option("--kmeans-k", f.kmeans_k, "Fixed k-means K; skips the elbow")
        ->envname("APA_KMEANS_K");
    cmd->add_option("--hybrid-textual-features", f.hybrid_textual_features,
                    "Feature extractor on the hybrid textual path: tf or lda")
        ->check(CLI::IsMember({"tf", "lda"}))
        ->envname("APA_HYBRID_TEXTUAL_FEATURES");
    cmd->add_option("--nwsa-match", f.nwsa_match, "Alignment match score")
        ->envname("APA_NWSA_MATCH");
    cmd->add_option("--nwsa-mismatch", f.nwsa_mismatch, "Alignment mismatch score")
        ->envname("APA_NWSA_MISMATCH");
    cmd->add_option("--nwsa-gap", f.nwsa_gap, "Alignment gap score")->envname("APA_NWSA_GAP");
    cmd->add_option("--jobs", f.jobs, "Worker threads for sweeps and benchmarks")
        ->envname("APA_JOBS");
}

int die(const char* context) {
    std::cerr << "error: " << context << ": " << apa_last_error() << "\n";
    return 1;
}

bool write_file(const std::string& path, const char* content) {
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    if (!out)
        return false;
    out << (content ? content : "");
    return static_cast<bool>(out);
}

struct DatasetGuard {
    apa_dataset* ds = nullptr;
    ~DatasetGuard() { apa_dataset_close(ds); }
};

struct ResultGuard {
    apa_result* res = nullptr;
    ~ResultGuard() { apa_result_free(res); }
};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"apa - unsupervised clustering of unknown protocol captures"};
    app.require_subcommand(1);

    // analyze
    auto* analyze = app.add_subcommand("analyze", "Cluster one capture and write a report");
    std::string an_pcap, an_labels, an_strategy = "hybrid", an_layer = "application";
    std::string an_out = "report.json", an_dendro, an_confusion, an_features, an_name;
    std::size_t an_cap = 0;
    bool an_require_eval = false;
    ConfigFlags an_cfg;
    analyze->add_option("pcap", an_pcap, "Capture file (classic pcap)")->required();
    analyze->add_option("--labels", an_labels, "Ground-truth CSV (packet_index,label)");
    analyze->add_option("--layer", an_layer, "OSI layer of the unknown protocol")
        ->check(CLI::IsMember({"link", "transport", "application"}));
    analyze->add_option("--strategy", an_strategy,
                        "hybrid, netzob, lda-kmeans, lda-upgma or tf-upgma");
    analyze->add_option("--name", an_name, "Dataset name recorded in the report");
    analyze->add_option("--out", an_out, "Report JSON path");
    analyze->add_option("--dendrogram-out", an_dendro, "Write UPGMA merges as CSV");
    analyze->add_option("--confusion-out", an_confusion, "Write the voting confusion matrix");
    analyze->add_option("--features-out", an_features, "Write the feature matrix as CSV");
    analyze->add_option("--cap", an_cap, "Stratified-sample down to this many packets");
    analyze->add_flag("--require-eval", an_require_eval,
                      "Exit with status 2 when no labels are given");
    add_config_flags(analyze, an_cfg);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Trace a hyperparameter sweep as CSV");
    std::string sw_pcap, sw_labels, sw_kind = "topics", sw_layer = "link", sw_out = "sweep.csv";
    std::string sw_meta;
    ConfigFlags sw_cfg;
    sweep->add_option("pcap", sw_pcap, "Capture file")->required();
    sweep->add_option("--labels", sw_labels, "Ground-truth CSV; adds an ari column");
    sweep->add_option("--sweep", sw_kind, "topics or header")
        ->check(CLI::IsMember({"topics", "header"}));
    sweep->add_option("--layer", sw_layer, "OSI layer of the unknown protocol")
        ->check(CLI::IsMember({"link", "transport", "application"}));
    sweep->add_option("--out", sw_out, "Sweep CSV path");
    auto* sw_meta_opt = sweep->add_option(
        "--meta-out", sw_meta,
        "Chosen value + effective config JSON (default <out>.meta.json, empty disables)");
    add_config_flags(sweep, sw_cfg);

    // generate
    auto* generate = app.add_subcommand("generate", "Emit a synthetic labeled capture");
    std::string gen_spec, gen_pcap = "synthetic.pcap", gen_labels = "synthetic_labels.csv";
    uint64_t gen_seed = 1;
    generate->add_option("spec", gen_spec, "Generator spec JSON")->required();
    generate->add_option("--out-pcap", gen_pcap, "Output capture path");
    generate->add_option("--out-labels", gen_labels, "Output labels CSV path");
    generate->add_option("--seed", gen_seed, "Generator seed")->envname("APA_SEED");

    // benchmark
    auto* benchmark = app.add_subcommand("benchmark", "ARI grid across datasets x strategies");
    std::string bm_manifest, bm_strategies, bm_out = "grid.csv", bm_meta;
    ConfigFlags bm_cfg;
    benchmark->add_option("manifest", bm_manifest, "JSON array of {name,pcap,labels,layer}")
        ->required();
    benchmark->add_option("--strategies", bm_strategies,
                          "Comma-separated subset (default: all five)");
    benchmark->add_option("--out", bm_out, "Grid CSV path");
    auto* bm_meta_opt = benchmark->add_option(
        "--meta-out", bm_meta,
        "Datasets, strategies and effective config JSON (default <out>.meta.json, empty disables)");
    add_config_flags(benchmark, bm_cfg);

    CLI11_PARSE(app, argc, argv);

    if (analyze->parsed()) {
        if (an_require_eval && an_labels.empty()) {
            std::cerr << "error: --require-eval set but no --labels given\n";
            return 2;
        }
        DatasetGuard ds;
        if (apa_dataset_open(an_pcap.c_str(), an_labels.empty() ? nullptr : an_labels.c_str(),
                             an_layer.c_str(), an_name.c_str(), &ds.ds) != APA_OK)
            return die("open");
        if (an_cap > 0 &&
            apa_dataset_sample(ds.ds, static_cast<uint32_t>(an_cap), an_cfg.seed) != APA_OK)
            return die("sample");
        ResultGuard res;
        if (apa_analyze(ds.ds, an_strategy.c_str(), config_json(an_cfg).c_str(), &res.res) !=
            APA_OK)
            return die("analyze");
        if (!write_file(an_out, apa_result_get(res.res, "report"))) {
            std::cerr << "error: cannot write " << an_out << "\n";
            return 1;
        }
        if (!an_dendro.empty()) {
            const char* csv = apa_result_get(res.res, "dendrogram_csv");
            if (csv && !write_file(an_dendro, csv)) {
                std::cerr << "error: cannot write " << an_dendro << "\n";
                return 1;
            }
        }
        if (!an_confusion.empty()) {
            const char* csv = apa_result_get(res.res, "confusion_csv");
            if (csv && !write_file(an_confusion, csv)) {
                std::cerr << "error: cannot write " << an_confusion << "\n";
                return 1;
            }
        }
        if (!an_features.empty()) {
            const char* csv = apa_result_get(res.res, "features_csv");
            if (csv && !write_file(an_features, csv)) {
                std::cerr << "error: cannot write " << an_features << "\n";
                return 1;
            }
        }
        std::cout << apa_result_get(res.res, "summary") << "\n";
        return 0;
    }

    if (sweep->parsed()) {
        DatasetGuard ds;
        if (apa_dataset_open(sw_pcap.c_str(), sw_labels.empty() ? nullptr : sw_labels.c_str(),
                             sw_layer.c_str(), "", &ds.ds) != APA_OK)
            return die("open");
        ResultGuard res;
        if (apa_sweep(ds.ds, sw_kind.c_str(), config_json(sw_cfg).c_str(), &res.res) != APA_OK)
            return die("sweep");
        if (!write_file(sw_out, apa_result_get(res.res, "sweep_csv"))) {
            std::cerr << "error: cannot write " << sw_out << "\n";
            return 1;
        }
        if (!sw_meta_opt->count())
            sw_meta = sw_out + ".meta.json";
        if (!sw_meta.empty() && !write_file(sw_meta, apa_result_get(res.res, "report"))) {
            std::cerr << "error: cannot write " << sw_meta << "\n";
            return 1;
        }
        std::cout << apa_result_get(res.res, "summary") << "\n";
        return 0;
    }

    if (generate->parsed()) {
        if (apa_generate(gen_spec.c_str(), gen_seed, gen_pcap.c_str(), gen_labels.c_str()) !=
            APA_OK)
            return die("generate");
        std::cout << "wrote " << gen_pcap << " and " << gen_labels << "\n";
        return 0;
    }

    if (benchmark->parsed()) {
        ResultGuard res;
        if (apa_benchmark(bm_manifest.c_str(),
                          bm_strategies.empty() ? nullptr : bm_strategies.c_str(),
                          config_json(bm_cfg).c_str(), &res.res) != APA_OK)
            return die("benchmark");
        if (!write_file(bm_out, apa_result_get(res.res, "grid_csv"))) {
            std::cerr << "error: cannot write " << bm_out << "\n";
            return 1;
        }
        if (!bm_meta_opt->count())
            bm_meta = bm_out + ".meta.json";
        if (!bm_meta.empty() && !write_file(bm_meta, apa_result_get(res.res, "report"))) {
            std::cerr << "error: cannot write " << bm_meta << "\n";
            return 1;
        }
        std::cout << apa_result_get(res.res, "summary");
        return 0;
    }
    return 0;
}
