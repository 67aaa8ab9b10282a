#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "apa/capture.hpp"
#include "apa/common.hpp"

namespace apa {

enum class TokenMethod { ngram, field };

struct TokenCorpus {
    std::vector<std::vector<std::string>> docs; // one token sequence per packet
    std::vector<std::string> vocab;             // distinct tokens, first-seen order
    std::unordered_map<std::string, std::size_t> vocab_index;
    TokenMethod method = TokenMethod::ngram;

    std::size_t add_token(const std::string& tok);
};

struct FieldBoundaries {
    // Exclusive end offsets of fields, strictly increasing, last == payload size.
    std::vector<std::size_t> cut_points;
};

// Sliding window of gram_bytes, stride 1, rendered as lowercase hex.
// A payload shorter than the window becomes a single token.
std::vector<std::string> ngram_tokenize(const HeaderSlice& h, std::size_t gram_bytes);

// Fraction of equal bit positions between consecutive bytes.
std::vector<double> bit_congruence(const byte_vec& payload);

// Field segmentation from the smoothed bit-congruence delta: a cut lands
// where the delta turns negative or where its magnitude exceeds the mean
// absolute delta. Fields longer than max_field are chunked.
FieldBoundaries nemesys_boundaries(const byte_vec& payload, double sigma,
                                   std::size_t max_field);

// One hex token per field.
std::vector<std::string> field_tokenize(const HeaderSlice& h, const FieldBoundaries& b);

// Corpus assembly over a set of header slices.
TokenCorpus build_ngram_corpus(const std::vector<HeaderSlice>& headers, std::size_t gram_bytes);
TokenCorpus build_field_corpus(const std::vector<HeaderSlice>& headers, double sigma,
                               std::size_t max_field);

} // namespace apa
