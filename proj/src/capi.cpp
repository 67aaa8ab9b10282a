#include "apa.h"

#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include <json.hpp>

#include "apa/capture.hpp"
#include "apa/hybrid.hpp"
#include "apa/synth.hpp"

using namespace apa;

struct apa_dataset {
    Dataset data;
};

struct apa_result {
    std::map<std::string, std::string> artifacts;
};

namespace {

thread_local std::string g_last_error;

apa_status status_of(const Error& e) {
    switch (e.kind()) {
    case ErrorKind::invalid_argument: return APA_ERR_INVALID_ARGUMENT;
    case ErrorKind::io: return APA_ERR_IO;
    case ErrorKind::format: return APA_ERR_FORMAT;
    case ErrorKind::runtime: return APA_ERR_RUNTIME;
    }
    return APA_ERR_RUNTIME;
}

template <typename Fn>
apa_status guarded(Fn&& fn) {
    try {
        fn();
        return APA_OK;
    } catch (const Error& e) {
        g_last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return APA_ERR_RUNTIME;
    } catch (...) {
        g_last_error = "unknown error";
        return APA_ERR_RUNTIME;
    }
}

RunConfig config_from(const char* config_json) {
    RunConfig cfg;
    if (config_json && *config_json)
        cfg.apply_json(config_json);
    return cfg;
}

} // namespace

extern "C" {

const char* apa_version(void) { return "1.0.0"; }

const char* apa_last_error(void) { return g_last_error.c_str(); }

apa_status apa_dataset_open(const char* pcap_path, const char* labels_csv,
                            const char* layer, const char* name, apa_dataset** out) {
    if (!pcap_path || !layer || !out) {
        g_last_error = "pcap_path, layer and out are required";
        return APA_ERR_INVALID_ARGUMENT;
    }
    *out = nullptr;
    return guarded([&]() {
        auto ds = std::make_unique<apa_dataset>();
        ds->data.packets = load_pcap(pcap_path);
        if (labels_csv && *labels_csv)
            apply_labels(ds->data.packets, load_labels_csv(labels_csv));
        ds->data.osi_target = osi_layer_from_string(layer);
        ds->data.name = name && *name ? name : pcap_path;
        *out = ds.release();
    });
}

apa_status apa_dataset_sample(apa_dataset* ds, uint32_t cap, uint64_t seed) {
    if (!ds) {
        g_last_error = "null dataset";
        return APA_ERR_INVALID_ARGUMENT;
    }
    return guarded([&]() {
        ds->data = stratified_sample(ds->data.packets, cap, seed, ds->data.osi_target,
                                     ds->data.name);
    });
}

size_t apa_dataset_size(const apa_dataset* ds) {
    return ds ? ds->data.packets.size() : 0;
}

int apa_dataset_is_textual(const apa_dataset* ds, double threshold) {
    if (!ds)
        return -1;
    try {
        return detect_text_protocol(ds->data, threshold) == PayloadClass::textual ? 1 : 0;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return -1;
    }
}

void apa_dataset_close(apa_dataset* ds) { delete ds; }

apa_status apa_analyze(const apa_dataset* ds, const char* strategy,
                       const char* config_json, apa_result** out) {
    if (!ds || !out) {
        g_last_error = "dataset and out are required";
        return APA_ERR_INVALID_ARGUMENT;
    }
    *out = nullptr;
    return guarded([&]() {
        RunConfig cfg = config_from(config_json);
        Strategy s = strategy_by_name(strategy && *strategy ? strategy : "hybrid");
        AnalysisReport rep = run_pipeline(ds->data, s, cfg);

        auto res = std::make_unique<apa_result>();
        res->artifacts["report"] = rep.to_json();
        std::ostringstream summary;
        summary.precision(6);
        summary << "clusters=" << rep.assignment.k;
        if (rep.scores)
            summary << " ari=" << rep.scores->ari
                    << " satisfactory=" << (rep.scores->satisfactory ? "true" : "false");
        res->artifacts["summary"] = summary.str();
        if (rep.dendrogram)
            res->artifacts["dendrogram_csv"] = rep.dendrogram->csv();
        if (rep.voting)
            res->artifacts["confusion_csv"] = rep.confusion_csv();
        if (rep.features.rows > 0)
            res->artifacts["features_csv"] = feature_csv_string(
                rep.features, rep.feature_names.empty() ? nullptr : &rep.feature_names);
        *out = res.release();
    });
}

apa_status apa_sweep(const apa_dataset* ds, const char* kind, const char* config_json,
                     apa_result** out) {
    if (!ds || !kind || !out) {
        g_last_error = "dataset, kind and out are required";
        return APA_ERR_INVALID_ARGUMENT;
    }
    *out = nullptr;
    return guarded([&]() {
        RunConfig cfg = config_from(config_json);
        std::string k = kind;
        SweepReport rep;
        if (k == "topics")
            rep = sweep_topics_report(ds->data, cfg);
        else if (k == "header")
            rep = sweep_header_report(ds->data, cfg);
        else
            fail(ErrorKind::invalid_argument, "sweep kind must be topics or header");

        auto res = std::make_unique<apa_result>();
        res->artifacts["sweep_csv"] = rep.csv;
        res->artifacts["summary"] =
            "chosen " + (rep.kind == "topics" ? std::string("K=") : std::string("length=")) +
            std::to_string(rep.chosen);
        nlohmann::ordered_json j;
        j["kind"] = rep.kind;
        j["chosen"] = rep.chosen;
        j["has_ari"] = rep.has_ari;
        j["config"] = nlohmann::ordered_json::parse(cfg.to_json());
        res->artifacts["report"] = j.dump(2) + "\n";
        *out = res.release();
    });
}

apa_status apa_benchmark(const char* manifest_json_path, const char* strategies,
                         const char* config_json, apa_result** out) {
    if (!manifest_json_path || !out) {
        g_last_error = "manifest path and out are required";
        return APA_ERR_INVALID_ARGUMENT;
    }
    *out = nullptr;
    return guarded([&]() {
        std::ifstream in(manifest_json_path);
        if (!in)
            fail(ErrorKind::io, std::string("cannot open manifest: ") + manifest_json_path);
        nlohmann::json manifest;
        try {
            in >> manifest;
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorKind::format, std::string("bad manifest JSON: ") + e.what());
        }
        if (!manifest.is_array() || manifest.empty())
            fail(ErrorKind::format, "manifest must be a non-empty array of datasets");

        std::vector<Dataset> datasets;
        for (const auto& entry : manifest) {
            Dataset d;
            d.name = entry.value("name", "");
            std::string pcap = entry.value("pcap", "");
            std::string labels = entry.value("labels", "");
            if (pcap.empty() || labels.empty())
                fail(ErrorKind::format, "manifest entries need pcap and labels paths");
            if (d.name.empty())
                d.name = pcap;
            d.osi_target = osi_layer_from_string(entry.value("layer", "link"));
            d.packets = load_pcap(pcap);
            apply_labels(d.packets, load_labels_csv(labels));
            datasets.push_back(std::move(d));
        }

        std::vector<Strategy> strats;
        if (strategies && *strategies) {
            std::stringstream ss(strategies);
            std::string tok;
            while (std::getline(ss, tok, ','))
                if (!tok.empty())
                    strats.push_back(strategy_by_name(tok));
        } else {
            strats = all_strategies();
        }

        RunConfig cfg = config_from(config_json);
        BenchmarkGrid grid = run_benchmark(datasets, strats, cfg);

        auto res = std::make_unique<apa_result>();
        res->artifacts["grid_csv"] = grid.csv();
        res->artifacts["summary"] = grid.summary();
        nlohmann::ordered_json j;
        j["datasets"] = nlohmann::ordered_json::array();
        for (const auto& d : datasets)
            j["datasets"].push_back(d.name);
        j["strategies"] = nlohmann::ordered_json::array();
        for (const auto& s : strats)
            j["strategies"].push_back(s.name);
        j["config"] = nlohmann::ordered_json::parse(cfg.to_json());
        res->artifacts["report"] = j.dump(2) + "\n";
        *out = res.release();
    });
}

apa_status apa_generate(const char* spec_json_path, uint64_t seed,
                        const char* out_pcap_path, const char* out_labels_path) {
    if (!spec_json_path || !out_pcap_path || !out_labels_path) {
        g_last_error = "spec, pcap and labels paths are required";
        return APA_ERR_INVALID_ARGUMENT;
    }
    return guarded([&]() {
        SyntheticSpec spec = SyntheticSpec::from_json_file(spec_json_path);
        GeneratedCapture cap = generate_capture(spec, seed);
        write_generated(cap, out_pcap_path, out_labels_path);
    });
}

const char* apa_result_get(const apa_result* r, const char* key) {
    if (!r || !key)
        return nullptr;
    auto it = r->artifacts.find(key);
    return it == r->artifacts.end() ? nullptr : it->second.c_str();
}

void apa_result_free(apa_result* r) { delete r; }

} // extern "C"
