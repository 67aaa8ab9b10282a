// Exercises the extern-C surface the way an external consumer would:
// through apa.h and the shared library only.

#include <doctest.h>

#include <cstring>
#include <fstream>
#include <string>

#include "apa.h"
#include "helpers.hpp"

using testutil::tmp_path;

namespace {

std::string write_spec() {
    std::string path = tmp_path("capi_spec.json");
    std::ofstream f(path);
    f << R"({
      "name": "capi-mix",
      "layer": "transport",
      "classes": [
        {"label": "a", "support": 12, "pattern": "01 02 ?? aa", "tail": [2, 8]},
        {"label": "b", "support": 9,  "pattern": "03 04 ?? bb", "tail": [2, 8]},
        {"label": "c", "support": 7,  "pattern": "05 06 ?? cc", "tail": [2, 8]}
      ]
    })";
    return path;
}

const char* kFastConfig =
    R"({"seed": 5, "header_len": 4, "lda_iters": 80, "k_range": [2,3,4,5]})";

} // namespace

TEST_CASE("capi: generate, open, analyze, free") {
    std::string spec = write_spec();
    std::string pcap = tmp_path("capi.pcap");
    std::string labels = tmp_path("capi_labels.csv");

    REQUIRE(apa_generate(spec.c_str(), 42, pcap.c_str(), labels.c_str()) == APA_OK);

    apa_dataset* ds = nullptr;
    REQUIRE(apa_dataset_open(pcap.c_str(), labels.c_str(), "transport", "capi-mix", &ds) ==
            APA_OK);
    REQUIRE(ds != nullptr);
    CHECK(apa_dataset_size(ds) == 28);

    apa_result* res = nullptr;
    REQUIRE(apa_analyze(ds, "hybrid", kFastConfig, &res) == APA_OK);
    REQUIRE(res != nullptr);

    const char* report = apa_result_get(res, "report");
    REQUIRE(report != nullptr);
    CHECK(std::string(report).find("\"strategy\": \"HYBRID\"") != std::string::npos);
    CHECK(std::string(report).find("\"scores\"") != std::string::npos);

    const char* summary = apa_result_get(res, "summary");
    REQUIRE(summary != nullptr);
    CHECK(std::string(summary).find("ari=") != std::string::npos);

    CHECK(apa_result_get(res, "dendrogram_csv") != nullptr);
    CHECK(apa_result_get(res, "confusion_csv") != nullptr);
    CHECK(apa_result_get(res, "no_such_key") == nullptr);

    apa_result_free(res);
    apa_dataset_close(ds);
}

TEST_CASE("capi: analyze is deterministic for a fixed seed") {
    std::string spec = write_spec();
    std::string pcap = tmp_path("capi_det.pcap");
    std::string labels = tmp_path("capi_det.csv");
    REQUIRE(apa_generate(spec.c_str(), 7, pcap.c_str(), labels.c_str()) == APA_OK);

    auto run_once = [&]() {
        apa_dataset* ds = nullptr;
        REQUIRE(apa_dataset_open(pcap.c_str(), labels.c_str(), "transport", "x", &ds) ==
                APA_OK);
        apa_result* res = nullptr;
        REQUIRE(apa_analyze(ds, "tf-upgma", kFastConfig, &res) == APA_OK);
        std::string report = apa_result_get(res, "report");
        apa_result_free(res);
        apa_dataset_close(ds);
        return report.substr(0, report.find("\"seconds\""));
    };
    CHECK(run_once() == run_once());
}

TEST_CASE("capi: sampling and textual detection") {
    std::string spec = write_spec();
    std::string pcap = tmp_path("capi_s.pcap");
    std::string labels = tmp_path("capi_s.csv");
    REQUIRE(apa_generate(spec.c_str(), 9, pcap.c_str(), labels.c_str()) == APA_OK);

    apa_dataset* ds = nullptr;
    REQUIRE(apa_dataset_open(pcap.c_str(), labels.c_str(), "transport", "", &ds) == APA_OK);
    REQUIRE(apa_dataset_sample(ds, 15, 3) == APA_OK);
    CHECK(apa_dataset_size(ds) == 15);

    // wrong layer for textual detection reports an error
    CHECK(apa_dataset_is_textual(ds, 0.75) == -1);
    CHECK(std::strlen(apa_last_error()) > 0);
    apa_dataset_close(ds);
}

TEST_CASE("capi: sweep artifacts") {
    std::string spec = write_spec();
    std::string pcap = tmp_path("capi_sw.pcap");
    std::string labels = tmp_path("capi_sw.csv");
    REQUIRE(apa_generate(spec.c_str(), 21, pcap.c_str(), labels.c_str()) == APA_OK);

    apa_dataset* ds = nullptr;
    REQUIRE(apa_dataset_open(pcap.c_str(), labels.c_str(), "transport", "", &ds) == APA_OK);
    apa_result* res = nullptr;
    REQUIRE(apa_sweep(ds, "topics", kFastConfig, &res) == APA_OK);
    const char* csv = apa_result_get(res, "sweep_csv");
    REQUIRE(csv != nullptr);
    CHECK(std::string(csv).find("K,mean_exclusivity") == 0);
    apa_result_free(res);

    CHECK(apa_sweep(ds, "bogus", kFastConfig, &res) == APA_ERR_INVALID_ARGUMENT);
    apa_dataset_close(ds);
}

TEST_CASE("capi: benchmark over a manifest") {
    std::string spec = write_spec();
    std::string pcap = tmp_path("capi_bm.pcap");
    std::string labels = tmp_path("capi_bm.csv");
    REQUIRE(apa_generate(spec.c_str(), 33, pcap.c_str(), labels.c_str()) == APA_OK);

    std::string manifest = tmp_path("capi_manifest.json");
    {
        std::ofstream f(manifest);
        f << R"([{"name": "m1", "pcap": ")" << pcap << R"(", "labels": ")" << labels
          << R"(", "layer": "transport"}])";
    }

    apa_result* res = nullptr;
    REQUIRE(apa_benchmark(manifest.c_str(), "tf-upgma,netzob", kFastConfig, &res) == APA_OK);
    const char* grid = apa_result_get(res, "grid_csv");
    REQUIRE(grid != nullptr);
    std::string g(grid);
    CHECK(g.find("dataset,strategy,") == 0);
    CHECK(g.find("m1,TF+UPGMA,") != std::string::npos);
    CHECK(g.find("m1,NETZOB-like,") != std::string::npos);
    apa_result_free(res);
}

TEST_CASE("capi: error paths set codes and a message") {
    apa_dataset* ds = nullptr;
    CHECK(apa_dataset_open("/definitely/not/here.pcap", nullptr, "link", "", &ds) ==
          APA_ERR_IO);
    CHECK(ds == nullptr);
    CHECK(std::strlen(apa_last_error()) > 0);

    std::string spec = write_spec();
    std::string pcap = tmp_path("capi_err.pcap");
    std::string labels = tmp_path("capi_err.csv");
    REQUIRE(apa_generate(spec.c_str(), 1, pcap.c_str(), labels.c_str()) == APA_OK);
    CHECK(apa_dataset_open(pcap.c_str(), nullptr, "mezzanine", "", &ds) ==
          APA_ERR_INVALID_ARGUMENT);

    CHECK(apa_dataset_open(nullptr, nullptr, "link", "", &ds) == APA_ERR_INVALID_ARGUMENT);
    CHECK(apa_generate("nope.json", 1, "a.pcap", "b.csv") == APA_ERR_IO);
    CHECK(apa_version() != nullptr);
}
