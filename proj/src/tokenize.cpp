#include "apa/tokenize.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace apa {

std::size_t TokenCorpus::add_token(const std::string& tok) {
    auto it = vocab_index.find(tok);
    if (it != vocab_index.end())
        return it->second;
    std::size_t id = vocab.size();
    vocab.push_back(tok);
    vocab_index.emplace(tok, id);
    return id;
}

std::vector<std::string> ngram_tokenize(const HeaderSlice& h, std::size_t gram_bytes) {
    if (gram_bytes < 1)
        fail(ErrorKind::invalid_argument, "gram size must be at least 1 byte");
    const byte_vec& b = h.bytes;
    std::vector<std::string> tokens;
    if (b.empty())
        return tokens;
    if (b.size() < gram_bytes) {
        tokens.push_back(to_hex(b));
        return tokens;
    }
    tokens.reserve(b.size() - gram_bytes + 1);
    for (std::size_t i = 0; i + gram_bytes <= b.size(); ++i)
        tokens.push_back(to_hex(b.data() + i, gram_bytes));
    return tokens;
}

std::vector<double> bit_congruence(const byte_vec& payload) {
    if (payload.size() < 2)
        fail(ErrorKind::invalid_argument, "bit congruence needs at least two bytes");
    std::vector<double> out;
    out.reserve(payload.size() - 1);
    for (std::size_t i = 0; i + 1 < payload.size(); ++i) {
        unsigned diff = payload[i] ^ payload[i + 1];
        int equal_bits = 8 - std::popcount(diff);
        out.push_back(equal_bits / 8.0);
    }
    return out;
}

namespace {

// Gaussian smoothing with kernel radius ceil(3*sigma); the kernel is
// renormalized where it hangs over the series edge.
std::vector<double> gaussian_smooth(const std::vector<double>& xs, double sigma) {
    const int radius = static_cast<int>(std::ceil(3.0 * sigma));
    std::vector<double> kernel(2 * radius + 1);
    for (int k = -radius; k <= radius; ++k)
        kernel[k + radius] = std::exp(-(k * k) / (2.0 * sigma * sigma));

    const int n = static_cast<int>(xs.size());
    std::vector<double> out(xs.size());
    for (int i = 0; i < n; ++i) {
        double acc = 0.0, wsum = 0.0;
        for (int k = -radius; k <= radius; ++k) {
            int j = i + k;
            if (j < 0 || j >= n)
                continue;
            double w = kernel[k + radius];
            acc += w * xs[j];
            wsum += w;
        }
        out[i] = acc / wsum;
    }
    return out;
}

} // namespace

FieldBoundaries nemesys_boundaries(const byte_vec& payload, double sigma,
                                   std::size_t max_field) {
    if (payload.empty())
        fail(ErrorKind::invalid_argument, "cannot segment an empty payload");
    if (sigma <= 0.0)
        fail(ErrorKind::invalid_argument, "sigma must be positive");
    if (max_field < 1)
        fail(ErrorKind::invalid_argument, "max_field must be at least 1");

    const std::size_t n = payload.size();
    std::vector<std::size_t> cuts;

    if (n >= 3) {
        std::vector<double> congruence = bit_congruence(payload);
        std::vector<double> smooth = gaussian_smooth(congruence, sigma);

        // delta[i] = smooth[i+1] - smooth[i]; congruence index i sits
        // between bytes i and i+1
        std::vector<double> delta(smooth.size() - 1);
        double abs_sum = 0.0;
        for (std::size_t i = 0; i + 1 < smooth.size(); ++i) {
            delta[i] = smooth[i + 1] - smooth[i];
            abs_sum += std::fabs(delta[i]);
        }
        const double mean_abs = abs_sum / static_cast<double>(delta.size());

        for (std::size_t i = 0; i < delta.size(); ++i) {
            bool crossing = delta[i] < 0.0 && (i == 0 || delta[i - 1] >= 0.0);
            bool extremum = std::fabs(delta[i]) > mean_abs;
            if (crossing || extremum)
                cuts.push_back(i + 1);
        }
    }
    cuts.push_back(n);

    // chunk any field that exceeds max_field
    FieldBoundaries b;
    std::size_t start = 0;
    for (std::size_t cut : cuts) {
        while (cut - start > max_field) {
            start += max_field;
            b.cut_points.push_back(start);
        }
        b.cut_points.push_back(cut);
        start = cut;
    }
    return b;
}

std::vector<std::string> field_tokenize(const HeaderSlice& h, const FieldBoundaries& b) {
    if (b.cut_points.empty())
        fail(ErrorKind::invalid_argument, "empty boundary list");
    if (b.cut_points.back() != h.bytes.size())
        fail(ErrorKind::invalid_argument, "boundaries do not cover the payload");
    std::vector<std::string> tokens;
    tokens.reserve(b.cut_points.size());
    std::size_t start = 0;
    for (std::size_t cut : b.cut_points) {
        if (cut <= start || cut > h.bytes.size())
            fail(ErrorKind::invalid_argument, "boundary beyond payload or not increasing");
        tokens.push_back(to_hex(h.bytes.data() + start, cut - start));
        start = cut;
    }
    return tokens;
}

TokenCorpus build_ngram_corpus(const std::vector<HeaderSlice>& headers,
                               std::size_t gram_bytes) {
    TokenCorpus c;
    c.method = TokenMethod::ngram;
    c.docs.reserve(headers.size());
    for (const auto& h : headers) {
        auto toks = ngram_tokenize(h, gram_bytes);
        for (const auto& t : toks)
            c.add_token(t);
        c.docs.push_back(std::move(toks));
    }
    return c;
}

TokenCorpus build_field_corpus(const std::vector<HeaderSlice>& headers, double sigma,
                               std::size_t max_field) {
    TokenCorpus c;
    c.method = TokenMethod::field;
    c.docs.reserve(headers.size());
    for (const auto& h : headers) {
        auto bounds = nemesys_boundaries(h.bytes, sigma, max_field);
        auto toks = field_tokenize(h, bounds);
        for (const auto& t : toks)
            c.add_token(t);
        c.docs.push_back(std::move(toks));
    }
    return c;
}

} // namespace apa
