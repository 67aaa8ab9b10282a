#include "apa/hybrid.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "apa/parallel.hpp"
#include "apa/rng.hpp"

namespace apa {

using ordered_json = nlohmann::ordered_json;

const char* to_string(TokenizerKind t) {
    switch (t) {
    case TokenizerKind::ngram3: return "ngram";
    case TokenizerKind::nemesys: return "nemesys";
    }
    return "?";
}

const char* to_string(FeatureMethod f) {
    switch (f) {
    case FeatureMethod::tf: return "tf";
    case FeatureMethod::lda: return "lda";
    case FeatureMethod::nwsa: return "nwsa";
    }
    return "?";
}

const char* to_string(ClusterMethod m) {
    switch (m) {
    case ClusterMethod::upgma: return "upgma";
    case ClusterMethod::kmeans: return "kmeans";
    }
    return "?";
}

Strategy strategy_netzob() {
    return {TokenizerKind::ngram3, FeatureMethod::nwsa, ClusterMethod::upgma, "NETZOB-like"};
}
Strategy strategy_lda_kmeans() {
    return {TokenizerKind::ngram3, FeatureMethod::lda, ClusterMethod::kmeans, "LDA+KMEANS"};
}
Strategy strategy_lda_upgma() {
    return {TokenizerKind::ngram3, FeatureMethod::lda, ClusterMethod::upgma, "LDA+UPGMA"};
}
Strategy strategy_tf_upgma() {
    return {TokenizerKind::ngram3, FeatureMethod::tf, ClusterMethod::upgma, "TF+UPGMA"};
}
Strategy strategy_hybrid() {
    return {TokenizerKind::ngram3, FeatureMethod::tf, ClusterMethod::upgma, "HYBRID"};
}

std::vector<Strategy> all_strategies() {
    return {strategy_netzob(), strategy_lda_kmeans(), strategy_lda_upgma(),
            strategy_tf_upgma(), strategy_hybrid()};
}

Strategy strategy_by_name(const std::string& name) {
    std::string n;
    for (char c : name)
        n.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (n == "netzob" || n == "netzob-like")
        return strategy_netzob();
    if (n == "lda-kmeans" || n == "lda+kmeans")
        return strategy_lda_kmeans();
    if (n == "lda-upgma" || n == "lda+upgma")
        return strategy_lda_upgma();
    if (n == "tf-upgma" || n == "tf+upgma")
        return strategy_tf_upgma();
    if (n == "hybrid")
        return strategy_hybrid();
    fail(ErrorKind::invalid_argument, "unknown strategy: " + name);
}

Strategy method_for(const Dataset& d, double text_threshold) {
    if (d.osi_target != OsiLayer::application) {
        Strategy s = strategy_tf_upgma();
        return s;
    }
    if (detect_text_protocol(d, text_threshold) == PayloadClass::binary)
        return strategy_lda_upgma();
    // textual: field-based tokenization feeding the default TF+UPGMA path
    Strategy s = strategy_tf_upgma();
    s.tokenizer = TokenizerKind::nemesys;
    s.name = "HYBRID";
    return s;
}

namespace {

OptimizeConfig make_optimize_config(const RunConfig& cfg, std::size_t len_tag) {
    OptimizeConfig o;
    o.alpha = cfg.lda_alpha;
    o.eta = cfg.lda_eta;
    o.iters = cfg.lda_iters;
    o.seed = cfg.seed;
    o.omega = cfg.frex_omega;
    o.top_m = cfg.coherence_m;
    o.gram_bytes = cfg.gram_bytes;
    o.len_tag = len_tag;
    o.jobs = cfg.jobs;
    return o;
}

std::string topic_sweep_csv(const std::vector<TopicSizeScore>& scores,
                            const std::vector<double>* ari) {
    std::ostringstream out;
    out << "K,mean_exclusivity,mean_coherence,norm_excl,norm_coh,origin_distance";
    if (ari)
        out << ",ari";
    out << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < scores.size(); ++i) {
        const auto& s = scores[i];
        out << s.K << ',' << s.mean_exclusivity << ',' << s.mean_coherence << ','
            << s.norm_excl << ',' << s.norm_coh << ',' << s.origin_distance;
        if (ari)
            out << ',' << (*ari)[i];
        out << '\n';
    }
    return out.str();
}

std::string header_sweep_csv_str(const std::vector<HeaderLengthScore>& sweep,
                                 const std::vector<double>* ari) {
    std::ostringstream out;
    out << "length,isolation,best_K";
    if (ari)
        out << ",ari";
    out << '\n';
    out.precision(17);
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        out << sweep[i].length << ',' << sweep[i].isolation << ',' << sweep[i].best_K;
        if (ari)
            out << ',' << (*ari)[i];
        out << '\n';
    }
    return out.str();
}

// Failures abort with the pipeline stage in the message.
template <typename Fn>
auto stage(const char* name, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.kind(), std::string(name) + ": " + e.what());
    }
}

// Truth ids aligned to the analyzed packet subset, or empty when any
// packet is unlabeled.
std::vector<std::size_t> truth_ids_for(const Dataset& d,
                                       const std::vector<std::size_t>& origins,
                                       const std::vector<std::string>* truth_override,
                                       std::vector<std::string>& class_names) {
    std::vector<std::size_t> ids;
    std::unordered_map<std::string, std::size_t> map;
    auto label_of = [&](std::size_t orig) -> const std::string* {
        if (truth_override) {
            if (orig >= truth_override->size())
                return nullptr;
            return &(*truth_override)[orig];
        }
        if (!d.packets[orig].truth_label)
            return nullptr;
        return &*d.packets[orig].truth_label;
    };
    for (std::size_t orig : origins) {
        const std::string* l = label_of(orig);
        if (!l) {
            class_names.clear();
            return {};
        }
        auto [it, fresh] = map.emplace(*l, map.size());
        if (fresh)
            class_names.push_back(*l);
        ids.push_back(it->second);
    }
    return ids;
}

} // namespace

AnalysisReport run_pipeline(const Dataset& d, const Strategy& requested,
                            const RunConfig& cfg, const std::vector<std::string>* truth) {
    const auto t0 = std::chrono::steady_clock::now();
    if (d.packets.empty())
        fail(ErrorKind::invalid_argument, "empty dataset");

    AnalysisReport rep;
    rep.dataset_name = d.name;
    rep.strategy_name = requested.name;
    rep.layer = d.osi_target;
    rep.packets_in = d.packets.size();
    rep.seed = cfg.seed;
    rep.config = cfg;

    Strategy s = requested;
    if (requested.name == "HYBRID") {
        s = method_for(d, cfg.text_threshold);
        s.name = "HYBRID";
        if (d.osi_target == OsiLayer::application) {
            bool textual = s.tokenizer == TokenizerKind::nemesys;
            rep.payload_class = textual ? "textual" : "binary";
            if (textual && cfg.hybrid_textual_features == "lda")
                s.features = FeatureMethod::lda;
        }
    }
    if (s.features == FeatureMethod::nwsa && s.clusterer == ClusterMethod::kmeans)
        fail(ErrorKind::invalid_argument, "alignment features only combine with UPGMA");
    rep.resolved = s;

    // strip to the target layer, skipping packets that do not dissect
    std::vector<byte_vec> payloads;
    std::vector<std::size_t> origins;
    for (std::size_t i = 0; i < d.packets.size(); ++i) {
        try {
            payloads.push_back(strip_lower_layers(d.packets[i], d.osi_target));
            origins.push_back(i);
        } catch (const Error& e) {
            rep.excluded_packets.push_back(i);
            rep.warnings.push_back("packet " + std::to_string(i) + " excluded: " + e.what());
        }
    }
    if (payloads.size() < 2)
        fail(ErrorKind::runtime, "pre-processing: fewer than two packets survived");
    rep.packets_analyzed = payloads.size();

    // header length: full payload on the application layer, otherwise the
    // configured value or the isolation-driven sweep
    std::size_t used_len = 0;
    if (d.osi_target != OsiLayer::application) {
        if (cfg.header_len) {
            used_len = *cfg.header_len;
        } else {
            stage("header-length optimization", [&] {
                HeaderLengthSelection hsel = select_header_length(
                    d, cfg.len_range, cfg.k_range, make_optimize_config(cfg, 0),
                    &rep.warnings);
                used_len = hsel.best_length;
                rep.header_len_optimized = true;
                for (const auto& row : hsel.sweep)
                    if (row.length == hsel.best_length)
                        rep.header_isolation = row.isolation;
                rep.header_sweep_csv = header_sweep_csv_str(hsel.sweep, nullptr);
            });
        }
        rep.header_len = used_len;
    }

    std::vector<HeaderSlice> headers;
    headers.reserve(payloads.size());
    stage("header extraction", [&] {
        for (std::size_t i = 0; i < payloads.size(); ++i)
            headers.push_back(
                extract_header(payloads[i],
                               d.osi_target == OsiLayer::application ? 0 : used_len,
                               d.osi_target, origins[i]));
    });

    FeatureMatrix features;
    std::vector<double> dissim; // for upgma
    stage("feature extraction", [&] {
        if (s.features == FeatureMethod::nwsa) {
            std::vector<byte_vec> seqs;
            seqs.reserve(headers.size());
            for (auto& h : headers)
                seqs.push_back(h.bytes);
            NwsaResult nr = nwsa_matrix(seqs, cfg.nwsa);
            rep.nwsa_alignments = nr.alignments_performed;
            dissim = nwsa_dissimilarity(nr.scores);
            features = std::move(nr.scores);
            for (std::size_t i = 0; i < features.cols; ++i)
                rep.feature_names.push_back("packet" + std::to_string(i));
        } else {
            TokenCorpus corpus = s.tokenizer == TokenizerKind::nemesys
                                     ? build_field_corpus(headers, cfg.sigma, cfg.max_field)
                                     : build_ngram_corpus(headers, cfg.gram_bytes);
            if (s.features == FeatureMethod::lda) {
                std::size_t K;
                if (cfg.topic_size) {
                    K = *cfg.topic_size;
                } else {
                    TopicSizeSelection tsel = select_topic_size(
                        corpus, cfg.k_range, make_optimize_config(cfg, used_len));
                    K = tsel.best_K;
                    rep.topic_size_optimized = true;
                    rep.topic_sweep_csv = topic_sweep_csv(tsel.scores, nullptr);
                    if (tsel.degenerate)
                        rep.warnings.push_back(
                            "topic scores were flat across the sweep; using the smallest K");
                }
                rep.topic_size = K;
                LDAModel model = fit_lda(corpus, K, cfg.lda_alpha, cfg.lda_eta, cfg.lda_iters,
                                         lda_job_seed(cfg.seed, used_len, K));
                features = doc_topic_features(model);
                for (std::size_t k = 0; k < K; ++k)
                    rep.feature_names.push_back("topic" + std::to_string(k));
            } else {
                features = build_tf_matrix(corpus);
                rep.feature_names = corpus.vocab;
            }
            if (s.clusterer == ClusterMethod::upgma)
                dissim = cosine_dissimilarity_matrix(features, &rep.warnings);
        }
    });

    stage("clustering", [&] {
        if (s.clusterer == ClusterMethod::upgma) {
            UpgmaResult ur = upgma(dissim, features.rows, cfg.upgma_threshold);
            rep.assignment = std::move(ur.assignment);
            rep.dendrogram = std::move(ur.dendrogram);
        } else {
            std::size_t K = cfg.kmeans_k ? *cfg.kmeans_k
                                         : select_k_kmeans(features, cfg.k_range, cfg.seed,
                                                           &rep.warnings);
            rep.assignment = kmeans(features, K, cfg.seed);
        }
    });

    stage("evaluation", [&] {
        std::vector<std::size_t> truth_ids = truth_ids_for(d, origins, truth, rep.class_names);
        if (!truth_ids.empty()) {
            rep.scores = evaluate(rep.assignment.labels, truth_ids);
            rep.voting = voting_accuracy(rep.assignment.labels, truth_ids);
        }
    });
    rep.features = std::move(features);

    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

std::string AnalysisReport::to_json() const {
    ordered_json j;
    j["dataset"] = dataset_name;
    j["strategy"] = strategy_name;
    j["resolved"] = {{"tokenizer", apa::to_string(resolved.tokenizer)},
                     {"features", apa::to_string(resolved.features)},
                     {"clusterer", apa::to_string(resolved.clusterer)}};
    j["layer"] = apa::to_string(layer);
    j["packets_in"] = packets_in;
    j["packets_analyzed"] = packets_analyzed;
    j["excluded_packets"] = excluded_packets;
    j["payload_class"] = payload_class ? ordered_json(*payload_class) : ordered_json(nullptr);
    j["header_len"] = header_len ? ordered_json(*header_len) : ordered_json(nullptr);
    j["header_len_optimized"] = header_len_optimized;
    j["header_isolation"] =
        header_isolation ? ordered_json(*header_isolation) : ordered_json(nullptr);
    j["topic_size"] = topic_size ? ordered_json(*topic_size) : ordered_json(nullptr);
    j["topic_size_optimized"] = topic_size_optimized;
    j["clusters"] = assignment.k;
    j["labels"] = assignment.labels;
    if (dendrogram) {
        ordered_json merges = ordered_json::array();
        for (const auto& m : dendrogram->merges)
            merges.push_back({m.cluster_a, m.cluster_b, m.dissimilarity, m.new_size});
        j["dendrogram"] = merges;
    } else {
        j["dendrogram"] = nullptr;
    }
    if (scores) {
        j["scores"] = {{"ari", scores->ari},
                       {"fms", scores->fms},
                       {"ami", scores->ami},
                       {"voting_accuracy", scores->voting_accuracy},
                       {"satisfactory", scores->satisfactory}};
    } else {
        j["scores"] = nullptr;
    }
    j["class_names"] = class_names;
    j["nwsa_alignments"] = nwsa_alignments;
    j["header_sweep_csv"] = header_sweep_csv;
    j["topic_sweep_csv"] = topic_sweep_csv;
    j["seed"] = seed;
    j["config"] = nlohmann::ordered_json::parse(config.to_json());
    j["warnings"] = warnings;
    j["seconds"] = seconds;
    return j.dump(2) + "\n";
}

std::string AnalysisReport::confusion_csv() const {
    if (!voting)
        return {};
    std::ostringstream out;
    out << "voted\\truth";
    for (const auto& name : class_names)
        out << ',' << name;
    out << '\n';
    const std::size_t n = voting->n_classes;
    for (std::size_t i = 0; i < n; ++i) {
        out << class_names[i];
        for (std::size_t jx = 0; jx < n; ++jx)
            out << ',' << voting->confusion[i * n + jx];
        out << '\n';
    }
    return out.str();
}

namespace {

// LDA features + UPGMA at a fixed (length, K), scored against truth.
// Used to annotate sweep CSVs with the ARI each point would achieve.
double ari_at_point(const Dataset& d, const RunConfig& cfg, std::size_t header_len,
                    std::size_t K) {
    RunConfig point = cfg;
    point.header_len = d.osi_target == OsiLayer::application
                           ? std::optional<std::size_t>{}
                           : std::optional<std::size_t>{header_len};
    point.topic_size = K;
    point.jobs = 1;
    AnalysisReport r = run_pipeline(d, strategy_lda_upgma(), point);
    if (!r.scores)
        fail(ErrorKind::runtime, "dataset has no ground truth");
    return r.scores->ari;
}

bool fully_labeled(const Dataset& d) {
    for (const auto& p : d.packets)
        if (!p.truth_label)
            return false;
    return !d.packets.empty();
}

} // namespace

SweepReport sweep_topics_report(const Dataset& d, const RunConfig& cfg) {
    // fix the header length the same way the pipeline would
    std::size_t used_len = 0;
    RunConfig local = cfg;
    if (d.osi_target != OsiLayer::application) {
        if (cfg.header_len) {
            used_len = *cfg.header_len;
        } else {
            warning_list warn;
            HeaderLengthSelection hsel = select_header_length(
                d, cfg.len_range, cfg.k_range, make_optimize_config(cfg, 0), &warn);
            used_len = hsel.best_length;
        }
        local.header_len = used_len;
    }

    std::vector<byte_vec> payloads;
    for (const auto& p : d.packets) {
        try {
            payloads.push_back(strip_lower_layers(p, d.osi_target));
        } catch (const Error&) {
        }
    }
    if (payloads.size() < 2)
        fail(ErrorKind::runtime, "fewer than two packets survived pre-processing");
    std::vector<HeaderSlice> headers;
    for (std::size_t i = 0; i < payloads.size(); ++i)
        headers.push_back(extract_header(payloads[i],
                                         d.osi_target == OsiLayer::application ? 0 : used_len,
                                         d.osi_target, i));
    TokenCorpus corpus = build_ngram_corpus(headers, cfg.gram_bytes);

    TopicSizeSelection tsel =
        select_topic_size(corpus, cfg.k_range, make_optimize_config(cfg, used_len));

    SweepReport rep;
    rep.kind = "topics";
    rep.chosen = tsel.best_K;
    if (fully_labeled(d)) {
        std::vector<double> aris(tsel.scores.size());
        run_jobs(tsel.scores.size(), cfg.jobs, [&](std::size_t i) {
            aris[i] = ari_at_point(d, local, used_len, tsel.scores[i].K);
        });
        rep.csv = topic_sweep_csv(tsel.scores, &aris);
        rep.has_ari = true;
    } else {
        rep.csv = topic_sweep_csv(tsel.scores, nullptr);
    }
    return rep;
}

SweepReport sweep_header_report(const Dataset& d, const RunConfig& cfg) {
    if (d.osi_target == OsiLayer::application)
        fail(ErrorKind::invalid_argument,
             "header sweep does not apply to the application layer (full payload is used)");

    warning_list warn;
    HeaderLengthSelection hsel = select_header_length(
        d, cfg.len_range, cfg.k_range, make_optimize_config(cfg, 0), &warn);

    SweepReport rep;
    rep.kind = "header";
    rep.chosen = hsel.best_length;
    if (fully_labeled(d)) {
        std::vector<double> aris(hsel.sweep.size());
        run_jobs(hsel.sweep.size(), cfg.jobs, [&](std::size_t i) {
            aris[i] = ari_at_point(d, cfg, hsel.sweep[i].length, hsel.sweep[i].best_K);
        });
        rep.csv = header_sweep_csv_str(hsel.sweep, &aris);
        rep.has_ari = true;
    } else {
        rep.csv = header_sweep_csv_str(hsel.sweep, nullptr);
    }
    return rep;
}

std::string BenchmarkGrid::csv() const {
    std::ostringstream out;
    out << "dataset,strategy,ari,fms,ami,voting_accuracy,k,header_len,topic_size,seconds\n";
    out.precision(17);
    for (const auto& c : cells) {
        out << c.dataset << ',' << c.strategy << ',';
        if (c.ok) {
            out << c.scores.ari << ',' << c.scores.fms << ',' << c.scores.ami << ','
                << c.scores.voting_accuracy << ',' << c.k << ',';
            if (c.header_len)
                out << *c.header_len;
            out << ',';
            if (c.topic_size)
                out << *c.topic_size;
            out << ',' << c.seconds;
        } else {
            out << ",,,,,,,";
        }
        out << '\n';
    }
    return out.str();
}

std::string BenchmarkGrid::summary() const {
    // group by dataset in order of first appearance
    std::vector<std::string> datasets;
    for (const auto& c : cells)
        if (std::find(datasets.begin(), datasets.end(), c.dataset) == datasets.end())
            datasets.push_back(c.dataset);

    std::ostringstream out;
    std::size_t hybrid_wins = 0;
    for (const auto& ds : datasets) {
        const BenchmarkCell* best = nullptr;
        for (const auto& c : cells)
            if (c.dataset == ds && c.ok && (!best || c.scores.ari > best->scores.ari))
                best = &c;
        if (best) {
            out << ds << ": best " << best->strategy << " (ari=" << best->scores.ari << ")\n";
            if (best->strategy == "HYBRID")
                ++hybrid_wins;
        } else {
            out << ds << ": all strategies failed\n";
        }
    }
    out << "HYBRID wins " << hybrid_wins << " of " << datasets.size() << " datasets\n";
    return out.str();
}

BenchmarkGrid run_benchmark(const std::vector<Dataset>& datasets,
                            const std::vector<Strategy>& strategies,
                            const RunConfig& cfg) {
    if (datasets.empty() || strategies.empty())
        fail(ErrorKind::invalid_argument, "benchmark needs datasets and strategies");
    for (const auto& d : datasets)
        if (!fully_labeled(d))
            fail(ErrorKind::invalid_argument,
                 "benchmark dataset " + d.name + " is missing ground truth");

    BenchmarkGrid grid;
    grid.cells.resize(datasets.size() * strategies.size());

    RunConfig cell_cfg = cfg;
    if (cfg.jobs > 1)
        cell_cfg.jobs = 1; // parallelism moves to the cell level

    run_jobs(grid.cells.size(), cfg.jobs, [&](std::size_t i) {
        const Dataset& d = datasets[i / strategies.size()];
        const Strategy& s = strategies[i % strategies.size()];
        BenchmarkCell& cell = grid.cells[i];
        cell.dataset = d.name;
        cell.strategy = s.name;
        try {
            AnalysisReport r = run_pipeline(d, s, cell_cfg);
            if (!r.scores)
                fail(ErrorKind::runtime, "no evaluation scores");
            cell.ok = true;
            cell.scores = *r.scores;
            cell.k = r.assignment.k;
            cell.header_len = r.header_len;
            cell.topic_size = r.topic_size;
            cell.seconds = r.seconds;
        } catch (const std::exception& e) {
            cell.ok = false;
            cell.error = e.what();
        }
    });
    return grid;
}

} // namespace apa
