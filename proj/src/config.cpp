#include "apa/config.hpp"

#include <json.hpp>

#include "apa/common.hpp"

namespace apa {

using ordered_json = nlohmann::ordered_json;

RunConfig::RunConfig() {
    for (std::size_t k = 2; k <= 20; ++k)
        k_range.push_back(k);
    for (std::size_t l = 4; l <= 64; l += 2)
        len_range.push_back(l);
}

std::string RunConfig::to_json() const {
    ordered_json j;
    j["seed"] = seed;
    j["gram_bytes"] = gram_bytes;
    j["sigma"] = sigma;
    j["max_field"] = max_field;
    j["upgma_threshold"] = upgma_threshold;
    j["lda_alpha"] = lda_alpha;
    j["lda_eta"] = lda_eta;
    j["lda_iters"] = lda_iters;
    j["k_range"] = k_range;
    j["len_range"] = len_range;
    j["frex_omega"] = frex_omega;
    j["coherence_m"] = coherence_m;
    j["text_threshold"] = text_threshold;
    if (header_len)
        j["header_len"] = *header_len;
    else
        j["header_len"] = nullptr;
    if (topic_size)
        j["topic_size"] = *topic_size;
    else
        j["topic_size"] = nullptr;
    if (kmeans_k)
        j["kmeans_k"] = *kmeans_k;
    else
        j["kmeans_k"] = nullptr;
    j["hybrid_textual_features"] = hybrid_textual_features;
    j["nwsa_match"] = nwsa.match;
    j["nwsa_mismatch"] = nwsa.mismatch;
    j["nwsa_gap"] = nwsa.gap;
    j["jobs"] = jobs;
    return j.dump();
}

void RunConfig::apply_json(const std::string& json_text) {
    if (json_text.empty())
        return;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::format, std::string("bad config JSON: ") + e.what());
    }
    if (!j.is_object())
        fail(ErrorKind::format, "config JSON must be an object");

    auto get = [&](const char* key, auto& field) {
        if (j.contains(key) && !j[key].is_null())
            field = j[key].get<std::decay_t<decltype(field)>>();
    };
    get("seed", seed);
    get("gram_bytes", gram_bytes);
    get("sigma", sigma);
    get("max_field", max_field);
    get("upgma_threshold", upgma_threshold);
    get("lda_alpha", lda_alpha);
    get("lda_eta", lda_eta);
    get("lda_iters", lda_iters);
    get("k_range", k_range);
    get("len_range", len_range);
    get("frex_omega", frex_omega);
    get("coherence_m", coherence_m);
    get("text_threshold", text_threshold);
    get("hybrid_textual_features", hybrid_textual_features);
    get("nwsa_match", nwsa.match);
    get("nwsa_mismatch", nwsa.mismatch);
    get("nwsa_gap", nwsa.gap);
    get("jobs", jobs);
    if (j.contains("header_len") && !j["header_len"].is_null())
        header_len = j["header_len"].get<std::size_t>();
    if (j.contains("topic_size") && !j["topic_size"].is_null())
        topic_size = j["topic_size"].get<std::size_t>();
    if (j.contains("kmeans_k") && !j["kmeans_k"].is_null())
        kmeans_k = j["kmeans_k"].get<std::size_t>();
}

RunConfig RunConfig::from_json(const std::string& json_text) {
    RunConfig cfg;
    cfg.apply_json(json_text);
    return cfg;
}

} // namespace apa
