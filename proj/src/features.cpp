#include "apa/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "apa/rng.hpp"

namespace apa {

FeatureMatrix build_tf_matrix(const TokenCorpus& c) {
    if (c.docs.empty())
        fail(ErrorKind::invalid_argument, "empty corpus");
    FeatureMatrix f;
    f.rows = c.docs.size();
    f.cols = c.vocab.size();
    f.kind = FeatureKind::tf_counts;
    f.values.assign(f.rows * f.cols, 0.0);
    for (std::size_t d = 0; d < c.docs.size(); ++d) {
        for (const auto& tok : c.docs[d]) {
            auto it = c.vocab_index.find(tok);
            if (it == c.vocab_index.end())
                fail(ErrorKind::runtime, "token missing from vocabulary: " + tok);
            f.at(d, it->second) += 1.0;
        }
    }
    return f;
}

LDAModel fit_lda(const TokenCorpus& c, std::size_t K, double alpha, double eta,
                 std::size_t iters, std::uint64_t seed) {
    if (K < 2)
        fail(ErrorKind::invalid_argument, "topic count must be at least 2");
    if (K > 255)
        fail(ErrorKind::invalid_argument, "topic count above 255 is not supported");
    if (iters < 1)
        fail(ErrorKind::invalid_argument, "need at least one sweep");
    const std::size_t D = c.docs.size();
    const std::size_t V = c.vocab.size();
    if (D == 0 || V == 0)
        fail(ErrorKind::invalid_argument, "empty corpus");
    if (alpha <= 0.0)
        alpha = 50.0 / static_cast<double>(K);
    if (eta <= 0.0)
        fail(ErrorKind::invalid_argument, "eta must be positive");

    // flatten docs to token ids
    std::vector<std::uint32_t> word_id;
    std::vector<std::uint32_t> doc_of;
    std::vector<std::size_t> doc_len(D, 0);
    for (std::size_t d = 0; d < D; ++d) {
        if (c.docs[d].empty())
            fail(ErrorKind::invalid_argument,
                 "document " + std::to_string(d) + " is empty; drop it before fitting");
        for (const auto& tok : c.docs[d]) {
            word_id.push_back(static_cast<std::uint32_t>(c.vocab_index.at(tok)));
            doc_of.push_back(static_cast<std::uint32_t>(d));
        }
        doc_len[d] = c.docs[d].size();
    }
    const std::size_t N = word_id.size();
    if (K > N)
        fail(ErrorKind::invalid_argument,
             "topic count exceeds total token occurrences (" + std::to_string(N) + ")");

    std::vector<std::uint32_t> n_dk(D * K, 0);
    std::vector<std::uint32_t> n_kv(K * V, 0);
    std::vector<std::uint32_t> n_k(K, 0);
    std::vector<std::uint8_t> z(N);

    Rng rng(derive_seed(seed, {0x4c4441ull})); // "LDA"
    for (std::size_t i = 0; i < N; ++i) {
        std::uint8_t k = static_cast<std::uint8_t>(rng.bounded(K));
        z[i] = k;
        ++n_dk[doc_of[i] * K + k];
        ++n_kv[static_cast<std::size_t>(k) * V + word_id[i]];
        ++n_k[k];
    }

    const double v_eta = static_cast<double>(V) * eta;
    std::vector<double> weights(K);
    for (std::size_t sweep = 0; sweep < iters; ++sweep) {
        for (std::size_t i = 0; i < N; ++i) {
            const std::uint32_t d = doc_of[i];
            const std::uint32_t v = word_id[i];
            const std::uint8_t old_k = z[i];
            --n_dk[d * K + old_k];
            --n_kv[static_cast<std::size_t>(old_k) * V + v];
            --n_k[old_k];

            double total = 0.0;
            for (std::size_t k = 0; k < K; ++k) {
                double w = (n_dk[d * K + k] + alpha) * (n_kv[k * V + v] + eta) /
                           (n_k[k] + v_eta);
                total += w;
                weights[k] = total;
            }
            const double u = rng.next_double() * total;
            std::size_t k = 0;
            while (k + 1 < K && weights[k] < u)
                ++k;

            z[i] = static_cast<std::uint8_t>(k);
            ++n_dk[d * K + k];
            ++n_kv[k * V + v];
            ++n_k[k];
        }
    }

    LDAModel m;
    m.K = K;
    m.V = V;
    m.docs = D;
    m.alpha = alpha;
    m.eta = eta;
    m.seed = seed;
    m.iters = iters;
    m.beta.resize(K * V);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t v = 0; v < V; ++v)
            m.beta[k * V + v] = n_kv[k * V + v] + eta;
    m.theta.resize(D * K);
    for (std::size_t d = 0; d < D; ++d) {
        const double denom = static_cast<double>(doc_len[d]) + static_cast<double>(K) * alpha;
        for (std::size_t k = 0; k < K; ++k)
            m.theta[d * K + k] = (n_dk[d * K + k] + alpha) / denom;
    }
    return m;
}

FeatureMatrix doc_topic_features(const LDAModel& m) {
    if (m.K == 0 || m.docs == 0)
        fail(ErrorKind::invalid_argument, "model not fitted");
    FeatureMatrix f;
    f.rows = m.docs;
    f.cols = m.K;
    f.kind = FeatureKind::lda_posterior;
    f.values = m.theta;
    return f;
}

long long nwsa_score(const byte_vec& a, const byte_vec& b, const AlignmentScoring& s) {
    if (a.empty() || b.empty())
        fail(ErrorKind::invalid_argument, "alignment requires non-empty sequences");
    if (s.match <= s.mismatch || s.match <= s.gap)
        fail(ErrorKind::invalid_argument, "scoring must satisfy match > mismatch and match > gap");

    const std::size_t n = a.size(), m = b.size();
    // two-row DP
    std::vector<long long> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j)
        prev[j] = static_cast<long long>(j) * s.gap;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<long long>(i) * s.gap;
        for (std::size_t j = 1; j <= m; ++j) {
            long long diag = prev[j - 1] + (a[i - 1] == b[j - 1] ? s.match : s.mismatch);
            long long up = prev[j] + s.gap;
            long long left = cur[j - 1] + s.gap;
            cur[j] = std::max({diag, up, left});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

NwsaResult nwsa_matrix(const std::vector<byte_vec>& seqs, const AlignmentScoring& s) {
    if (seqs.size() < 2)
        fail(ErrorKind::invalid_argument, "need at least two sequences");
    const std::size_t p = seqs.size();
    NwsaResult r;
    r.scores.rows = p;
    r.scores.cols = p;
    r.scores.kind = FeatureKind::alignment_similarity;
    r.scores.values.assign(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i)
        r.scores.at(i, i) = static_cast<double>(seqs[i].size()) * s.match;
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j) {
            double v = static_cast<double>(nwsa_score(seqs[i], seqs[j], s));
            r.scores.at(i, j) = v;
            r.scores.at(j, i) = v;
            ++r.alignments_performed;
        }
    }
    return r;
}

std::vector<double> nwsa_dissimilarity(const FeatureMatrix& scores) {
    if (scores.rows != scores.cols)
        fail(ErrorKind::invalid_argument, "score matrix must be square");
    const std::size_t p = scores.rows;
    std::vector<double> d(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j) {
            double self = std::max(scores.at(i, i), scores.at(j, j));
            double v = self > 0.0 ? 1.0 - scores.at(i, j) / self : 1.0;
            d[i * p + j] = v;
            d[j * p + i] = v;
        }
    }
    return d;
}

std::string feature_csv_string(const FeatureMatrix& f,
                               const std::vector<std::string>* col_names) {
    std::ostringstream out;
    out << "packet";
    if (col_names) {
        for (const auto& c : *col_names)
            out << ',' << c;
    } else {
        for (std::size_t c = 0; c < f.cols; ++c)
            out << ",f" << c;
    }
    out << '\n';
    out.precision(17);
    for (std::size_t r = 0; r < f.rows; ++r) {
        out << r;
        for (std::size_t c = 0; c < f.cols; ++c)
            out << ',' << f.at(r, c);
        out << '\n';
    }
    return out.str();
}

void write_feature_csv(const FeatureMatrix& f, const std::string& path,
                       const std::vector<std::string>* col_names) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        fail(ErrorKind::io, "cannot write " + path);
    out << feature_csv_string(f, col_names);
}

} // namespace apa
