#include "apa/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_set>

#include "apa/parallel.hpp"
#include "apa/rng.hpp"

namespace apa {

std::uint64_t lda_job_seed(std::uint64_t base, std::size_t header_len_or_zero,
                           std::size_t K) {
    return derive_seed(base, {static_cast<std::uint64_t>(header_len_or_zero),
                              static_cast<std::uint64_t>(K)});
}

namespace {

// ECDF with average ranks for ties, evaluated at index v: rank/V in (0,1].
double ecdf_at(const std::vector<double>& values, std::size_t v) {
    const double x = values[v];
    std::size_t below = 0, equal = 0;
    for (double y : values) {
        if (y < x)
            ++below;
        else if (y == x)
            ++equal;
    }
    double avg_rank = static_cast<double>(below) + (static_cast<double>(equal) + 1.0) / 2.0;
    return avg_rank / static_cast<double>(values.size());
}

std::vector<double> exclusivity_values(const LDAModel& m, std::size_t k) {
    std::vector<double> e(m.V);
    for (std::size_t v = 0; v < m.V; ++v) {
        double col = 0.0;
        for (std::size_t j = 0; j < m.K; ++j)
            col += m.beta_at(j, v);
        e[v] = m.beta_at(k, v) / col;
    }
    return e;
}

// Top-M token indices of a topic by beta, ties resolved by vocab order.
std::vector<std::size_t> top_tokens(const LDAModel& m, std::size_t k, std::size_t M) {
    std::vector<std::size_t> idx(m.V);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        return m.beta_at(k, a) > m.beta_at(k, b);
    });
    idx.resize(std::min(M, m.V));
    return idx;
}

} // namespace

double frex(const LDAModel& m, std::size_t k, std::size_t v, double omega) {
    if (k >= m.K || v >= m.V)
        fail(ErrorKind::invalid_argument, "topic or token index out of range");
    if (omega < 0.0 || omega > 1.0)
        fail(ErrorKind::invalid_argument, "omega must lie in [0,1]");
    std::vector<double> excl = exclusivity_values(m, k);
    std::vector<double> freq(m.V);
    for (std::size_t t = 0; t < m.V; ++t)
        freq[t] = m.beta_at(k, t);
    const double e_excl = ecdf_at(excl, v);
    const double e_freq = ecdf_at(freq, v);
    return 1.0 / (omega / e_excl + (1.0 - omega) / e_freq);
}

double semantic_coherence(const LDAModel& m, std::size_t k, std::size_t M,
                          const TokenCorpus& corpus) {
    if (M < 2)
        fail(ErrorKind::invalid_argument, "coherence needs at least two top tokens");
    if (M > m.V)
        fail(ErrorKind::invalid_argument, "M exceeds vocabulary size");
    if (k >= m.K)
        fail(ErrorKind::invalid_argument, "topic index out of range");

    std::vector<std::size_t> top = top_tokens(m, k, M);

    // document sets for the tokens we need
    std::vector<std::unordered_set<std::size_t>> docs_with(top.size());
    for (std::size_t d = 0; d < corpus.docs.size(); ++d) {
        for (const auto& tok : corpus.docs[d]) {
            auto it = corpus.vocab_index.find(tok);
            if (it == corpus.vocab_index.end())
                continue;
            for (std::size_t t = 0; t < top.size(); ++t)
                if (top[t] == it->second)
                    docs_with[t].insert(d);
        }
    }

    double c = 0.0;
    for (std::size_t i = 1; i < top.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const auto& di = docs_with[i];
            const auto& dj = docs_with[j];
            std::size_t both = 0;
            for (std::size_t d : di)
                if (dj.count(d))
                    ++both;
            if (dj.empty())
                fail(ErrorKind::runtime,
                     "top token never appears in the corpus (token " +
                         corpus.vocab[top[j]] + ")");
            c += std::log((static_cast<double>(both) + 1.0) / static_cast<double>(dj.size()));
        }
    }
    return c;
}

TopicSizeScore score_topic_size(const TokenCorpus& c, std::size_t K,
                                const OptimizeConfig& cfg) {
    LDAModel m = fit_lda(c, K, cfg.alpha, cfg.eta, cfg.iters,
                         lda_job_seed(cfg.seed, cfg.len_tag, K));
    const std::size_t M = std::max<std::size_t>(2, std::min(cfg.top_m, m.V));

    TopicSizeScore s;
    s.K = K;
    double excl_sum = 0.0, coh_sum = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
        std::vector<std::size_t> top = top_tokens(m, k, M);
        std::vector<double> excl = exclusivity_values(m, k);
        std::vector<double> freq(m.V);
        for (std::size_t v = 0; v < m.V; ++v)
            freq[v] = m.beta_at(k, v);
        double topic_frex = 0.0;
        for (std::size_t v : top) {
            double e1 = ecdf_at(excl, v);
            double e2 = ecdf_at(freq, v);
            topic_frex += 1.0 / (cfg.omega / e1 + (1.0 - cfg.omega) / e2);
        }
        excl_sum += topic_frex / static_cast<double>(top.size());
        coh_sum += semantic_coherence(m, k, M, c);
    }
    s.mean_exclusivity = excl_sum / static_cast<double>(K);
    s.mean_coherence = coh_sum / static_cast<double>(K);
    return s;
}

namespace {

// Min-max over the candidate set; a flat axis normalizes to zero.
void normalize_scores(std::vector<TopicSizeScore>& scores) {
    double e_min = scores.front().mean_exclusivity, e_max = e_min;
    double c_min = scores.front().mean_coherence, c_max = c_min;
    for (const auto& s : scores) {
        e_min = std::min(e_min, s.mean_exclusivity);
        e_max = std::max(e_max, s.mean_exclusivity);
        c_min = std::min(c_min, s.mean_coherence);
        c_max = std::max(c_max, s.mean_coherence);
    }
    for (auto& s : scores) {
        s.norm_excl = e_max > e_min ? (s.mean_exclusivity - e_min) / (e_max - e_min) : 0.0;
        s.norm_coh = c_max > c_min ? (s.mean_coherence - c_min) / (c_max - c_min) : 0.0;
        s.origin_distance = std::hypot(s.norm_excl, s.norm_coh);
    }
}

std::vector<std::size_t> sorted_unique(const std::vector<std::size_t>& xs) {
    std::vector<std::size_t> out = xs;
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

TopicSizeSelection select_topic_size(const TokenCorpus& c,
                                     const std::vector<std::size_t>& k_range,
                                     const OptimizeConfig& cfg) {
    std::vector<std::size_t> ks = sorted_unique(k_range);
    if (ks.size() < 3)
        fail(ErrorKind::invalid_argument, "topic size sweep needs at least 3 candidates");

    TopicSizeSelection sel;
    sel.scores.resize(ks.size());
    run_jobs(ks.size(), cfg.jobs,
             [&](std::size_t i) { sel.scores[i] = score_topic_size(c, ks[i], cfg); });

    normalize_scores(sel.scores);

    bool all_same = true;
    for (const auto& s : sel.scores) {
        if (s.mean_exclusivity != sel.scores.front().mean_exclusivity ||
            s.mean_coherence != sel.scores.front().mean_coherence)
            all_same = false;
    }
    if (all_same) {
        sel.best_K = ks.front();
        sel.degenerate = true;
        return sel;
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < sel.scores.size(); ++i)
        if (sel.scores[i].origin_distance > sel.scores[best].origin_distance)
            best = i;
    sel.best_K = sel.scores[best].K;
    return sel;
}

double isolation(const std::vector<TopicSizeScore>& scores, std::size_t opt_index) {
    if (scores.size() < 2)
        fail(ErrorKind::invalid_argument, "isolation needs at least two sweep points");
    if (opt_index >= scores.size())
        fail(ErrorKind::invalid_argument, "optimum index out of range");
    const double d_opt = scores[opt_index].origin_distance;
    double sum = 0.0;
    int neighbors = 0;
    if (opt_index > 0) {
        sum += d_opt - scores[opt_index - 1].origin_distance;
        ++neighbors;
    }
    if (opt_index + 1 < scores.size()) {
        sum += d_opt - scores[opt_index + 1].origin_distance;
        ++neighbors;
    }
    return sum / neighbors;
}

HeaderLengthSelection select_header_length(const Dataset& d,
                                           const std::vector<std::size_t>& len_range,
                                           const std::vector<std::size_t>& k_range,
                                           const OptimizeConfig& cfg,
                                           warning_list* warnings) {
    if (d.osi_target == OsiLayer::application)
        fail(ErrorKind::invalid_argument,
             "header length does not apply to the application layer (full payload is used)");
    if (len_range.empty())
        fail(ErrorKind::invalid_argument, "empty header length range");

    // Fixed packet set across lengths: strip once, skip bad packets.
    std::vector<byte_vec> payloads;
    for (std::size_t i = 0; i < d.packets.size(); ++i) {
        try {
            payloads.push_back(strip_lower_layers(d.packets[i], d.osi_target));
        } catch (const Error& e) {
            if (warnings)
                warnings->push_back("packet " + std::to_string(i) +
                                    " skipped in header sweep: " + e.what());
        }
    }
    if (payloads.empty())
        fail(ErrorKind::runtime, "no packets survived lower-layer stripping");

    std::vector<std::size_t> lens = sorted_unique(len_range);
    std::vector<std::size_t> ks = sorted_unique(k_range);
    if (ks.size() < 3)
        fail(ErrorKind::invalid_argument, "topic size sweep needs at least 3 candidates");

    std::vector<TokenCorpus> corpora(lens.size());
    for (std::size_t li = 0; li < lens.size(); ++li) {
        std::vector<HeaderSlice> headers;
        headers.reserve(payloads.size());
        for (std::size_t i = 0; i < payloads.size(); ++i)
            headers.push_back(extract_header(payloads[i], lens[li], d.osi_target, i));
        corpora[li] = build_ngram_corpus(headers, cfg.gram_bytes);
    }

    // One job per (length, K) point.
    HeaderLengthSelection sel;
    sel.topic_sweeps.assign(lens.size(), std::vector<TopicSizeScore>(ks.size()));
    run_jobs(lens.size() * ks.size(), cfg.jobs, [&](std::size_t j) {
        const std::size_t li = j / ks.size();
        const std::size_t ki = j % ks.size();
        OptimizeConfig job_cfg = cfg;
        job_cfg.len_tag = lens[li];
        sel.topic_sweeps[li][ki] = score_topic_size(corpora[li], ks[ki], job_cfg);
    });

    sel.sweep.resize(lens.size());
    for (std::size_t li = 0; li < lens.size(); ++li) {
        auto& scores = sel.topic_sweeps[li];
        normalize_scores(scores);
        std::size_t best = 0;
        for (std::size_t i = 1; i < scores.size(); ++i)
            if (scores[i].origin_distance > scores[best].origin_distance)
                best = i;
        sel.sweep[li].length = lens[li];
        sel.sweep[li].best_K = scores[best].K;
        sel.sweep[li].isolation = isolation(scores, best);
    }

    std::size_t best_li = 0;
    for (std::size_t li = 1; li < lens.size(); ++li)
        if (sel.sweep[li].isolation > sel.sweep[best_li].isolation)
            best_li = li;
    sel.best_length = sel.sweep[best_li].length;
    sel.best_K = sel.sweep[best_li].best_K;
    return sel;
}

std::size_t kneedle_elbow(const std::vector<double>& xs, const std::vector<double>& ys) {
    if (xs.size() < 3 || xs.size() != ys.size())
        fail(ErrorKind::invalid_argument, "knee detection needs at least 3 (x,y) points");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (xs[i] <= xs[i - 1])
            fail(ErrorKind::invalid_argument, "x values must be strictly increasing");

    const double y_min = *std::min_element(ys.begin(), ys.end());
    const double y_max = *std::max_element(ys.begin(), ys.end());
    if (y_max - y_min <= 0.0)
        fail(ErrorKind::runtime, "flat curve has no knee");

    const double x_min = xs.front(), x_max = xs.back();
    const bool decreasing = ys.front() > ys.back();
    std::vector<double> diff(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double xn = (xs[i] - x_min) / (x_max - x_min);
        double yn = decreasing ? (y_max - ys[i]) / (y_max - y_min)
                               : (ys[i] - y_min) / (y_max - y_min);
        diff[i] = yn - xn;
    }

    std::size_t knee = 0;
    for (std::size_t i = 1; i < diff.size(); ++i)
        if (diff[i] > diff[knee])
            knee = i;
    if (knee == 0 || knee + 1 == diff.size() ||
        diff[knee] <= diff.front() + 1e-12 || diff[knee] <= diff.back() + 1e-12)
        fail(ErrorKind::runtime, "difference curve is monotone; no knee");
    return knee;
}

} // namespace apa
