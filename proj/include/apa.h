/* C API for the apa protocol-clustering library.
 *
 * All functions return an apa_status; on failure apa_last_error() carries a
 * human-readable message for the calling thread. Handles are opaque and must
 * be released with their matching close/free function. Strings returned by
 * apa_result_get() are owned by the result handle and stay valid until it is
 * freed.
 */

#ifndef APA_H
#define APA_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum apa_status {
    APA_OK = 0,
    APA_ERR_INVALID_ARGUMENT = 1,
    APA_ERR_IO = 2,
    APA_ERR_FORMAT = 3,
    APA_ERR_RUNTIME = 4,
} apa_status;

typedef struct apa_dataset apa_dataset;
typedef struct apa_result apa_result;

const char* apa_version(void);

/* Thread-local message for the most recent failure on this thread. */
const char* apa_last_error(void);

/* Load a classic pcap capture, optionally attach a packet_index,label CSV,
 * and fix the OSI layer the unknown protocol sits at.
 * layer: "link" | "transport" | "application". labels_csv may be NULL. */
apa_status apa_dataset_open(const char* pcap_path, const char* labels_csv,
                            const char* layer, const char* name,
                            apa_dataset** out);

/* Stratified downsample to at most cap packets (requires labels). */
apa_status apa_dataset_sample(apa_dataset* ds, uint32_t cap, uint64_t seed);

size_t apa_dataset_size(const apa_dataset* ds);

/* 1 = textual, 0 = binary, -1 = error (wrong layer / empty dataset). */
int apa_dataset_is_textual(const apa_dataset* ds, double threshold);

void apa_dataset_close(apa_dataset* ds);

/* strategy: "hybrid" | "netzob" | "lda-kmeans" | "lda-upgma" | "tf-upgma".
 * config_json: JSON object overriding RunConfig defaults; NULL or "" keeps
 * them. Result keys: "report" (JSON), "summary", and when applicable
 * "dendrogram_csv", "confusion_csv", "features_csv". */
apa_status apa_analyze(const apa_dataset* ds, const char* strategy,
                       const char* config_json, apa_result** out);

/* kind: "topics" | "header". Result keys: "sweep_csv", "summary", "report". */
apa_status apa_sweep(const apa_dataset* ds, const char* kind,
                     const char* config_json, apa_result** out);

/* manifest_json_path: JSON array of {name, pcap, labels, layer} objects.
 * strategies: comma-separated list, NULL for all five.
 * Result keys: "grid_csv", "summary". */
apa_status apa_benchmark(const char* manifest_json_path, const char* strategies,
                         const char* config_json, apa_result** out);

/* Deterministic synthetic capture + label sidecar from a generator spec. */
apa_status apa_generate(const char* spec_json_path, uint64_t seed,
                        const char* out_pcap_path, const char* out_labels_path);

/* NULL when the key does not exist for this result. */
const char* apa_result_get(const apa_result* r, const char* key);

void apa_result_free(apa_result* r);

#ifdef __cplusplus
}
#endif

#endif /* APA_H */
