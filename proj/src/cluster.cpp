#include "apa/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "apa/optimize.hpp"
#include "apa/rng.hpp"

namespace apa {

std::string Dendrogram::csv() const {
    std::ostringstream out;
    out << "cluster_a,cluster_b,dissimilarity,size\n";
    out.precision(17);
    for (const auto& m : merges)
        out << m.cluster_a << ',' << m.cluster_b << ',' << m.dissimilarity << ','
            << m.new_size << '\n';
    return out.str();
}

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size() || u.empty())
        fail(ErrorKind::invalid_argument, "vectors must be non-empty and of equal dimension");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0)
        fail(ErrorKind::invalid_argument, "cosine similarity undefined for a zero vector");
    double c = dot / (std::sqrt(nu) * std::sqrt(nv));
    return std::clamp(c, -1.0, 1.0);
}

std::vector<double> cosine_dissimilarity_matrix(const FeatureMatrix& f,
                                                warning_list* warnings) {
    const std::size_t p = f.rows;
    if (p == 0)
        fail(ErrorKind::invalid_argument, "empty feature matrix");

    std::vector<double> norms(p);
    for (std::size_t i = 0; i < p; ++i) {
        double n = 0.0;
        for (std::size_t c = 0; c < f.cols; ++c)
            n += f.at(i, c) * f.at(i, c);
        norms[i] = std::sqrt(n);
        if (norms[i] == 0.0 && warnings)
            warnings->push_back("packet " + std::to_string(i) +
                                " has a zero feature vector; dissimilarity forced to 1");
    }

    std::vector<double> d(p * p, 0.0);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j) {
            double v;
            if (norms[i] == 0.0 || norms[j] == 0.0) {
                v = 1.0;
            } else {
                double dot = 0.0;
                for (std::size_t c = 0; c < f.cols; ++c)
                    dot += f.at(i, c) * f.at(j, c);
                v = 1.0 - std::clamp(dot / (norms[i] * norms[j]), -1.0, 1.0);
            }
            d[i * p + j] = v;
            d[j * p + i] = v;
        }
    }
    return d;
}

UpgmaResult upgma(const std::vector<double>& dissim, std::size_t n, double threshold) {
    if (n == 0 || dissim.size() != n * n)
        fail(ErrorKind::invalid_argument, "dissimilarity matrix size mismatch");
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (dissim[i * n + j] != dissim[j * n + i])
                fail(ErrorKind::invalid_argument, "dissimilarity matrix is not symmetric");
            if (dissim[i * n + j] < 0.0)
                fail(ErrorKind::invalid_argument, "dissimilarities must be non-negative");
        }
    }

    struct Active {
        std::size_t id;
        std::size_t size;
        std::vector<std::size_t> members;
    };
    std::vector<Active> active(n);
    for (std::size_t i = 0; i < n; ++i)
        active[i] = {i, 1, {i}};

    UpgmaResult res;
    std::size_t next_id = n;

    // rows of the working linkage matrix; merged rows drop out of `slot`
    std::vector<double> work = dissim;
    auto work_at = [&](std::size_t a, std::size_t b) -> double& { return work[a * n + b]; };

    std::size_t alive = n;
    std::vector<std::size_t> slot(n); // slot -> row index
    std::iota(slot.begin(), slot.end(), std::size_t{0});

    while (alive > 1) {
        // find minimal linkage; ties take the lexicographically smallest id pair
        double best = std::numeric_limits<double>::infinity();
        std::size_t bi = 0, bj = 0;
        bool found = false;
        for (std::size_t i = 0; i < alive; ++i) {
            for (std::size_t j = i + 1; j < alive; ++j) {
                double v = work_at(slot[i], slot[j]);
                std::size_t id_a = std::min(active[slot[i]].id, active[slot[j]].id);
                std::size_t id_b = std::max(active[slot[i]].id, active[slot[j]].id);
                if (!found || v < best ||
                    (v == best &&
                     (id_a < std::min(active[slot[bi]].id, active[slot[bj]].id) ||
                      (id_a == std::min(active[slot[bi]].id, active[slot[bj]].id) &&
                       id_b < std::max(active[slot[bi]].id, active[slot[bj]].id))))) {
                    best = v;
                    bi = i;
                    bj = j;
                    found = true;
                }
            }
        }
        if (!found || best > threshold)
            break;

        std::size_t ra = slot[bi], rb = slot[bj];
        Active& A = active[ra];
        Active& B = active[rb];
        DendrogramMerge m;
        m.cluster_a = std::min(A.id, B.id);
        m.cluster_b = std::max(A.id, B.id);
        m.dissimilarity = best;
        m.new_size = A.size + B.size;
        res.dendrogram.merges.push_back(m);

        // UPGMA update: d(A+B, C) = (|A| d(A,C) + |B| d(B,C)) / (|A|+|B|)
        const double sa = static_cast<double>(A.size), sb = static_cast<double>(B.size);
        for (std::size_t i = 0; i < alive; ++i) {
            std::size_t rc = slot[i];
            if (rc == ra || rc == rb)
                continue;
            double v = (sa * work_at(ra, rc) + sb * work_at(rb, rc)) / (sa + sb);
            work_at(ra, rc) = v;
            work_at(rc, ra) = v;
        }

        A.id = next_id++;
        A.size += B.size;
        A.members.insert(A.members.end(), B.members.begin(), B.members.end());

        // drop row rb from the active set
        slot.erase(slot.begin() + static_cast<std::ptrdiff_t>(bj));
        --alive;
    }

    // final clusters ordered by smallest original member
    std::vector<const Active*> finals;
    for (std::size_t i = 0; i < alive; ++i)
        finals.push_back(&active[slot[i]]);
    std::sort(finals.begin(), finals.end(), [](const Active* a, const Active* b) {
        return *std::min_element(a->members.begin(), a->members.end()) <
               *std::min_element(b->members.begin(), b->members.end());
    });

    res.assignment.labels.assign(n, 0);
    res.assignment.k = finals.size();
    res.assignment.method = ClusterMethod::upgma;
    res.assignment.threshold = threshold;
    for (std::size_t c = 0; c < finals.size(); ++c)
        for (std::size_t member : finals[c]->members)
            res.assignment.labels[member] = c;
    return res;
}

namespace {

double sq_dist(const FeatureMatrix& f, std::size_t row, const std::vector<double>& center,
               std::size_t dim) {
    double d = 0.0;
    for (std::size_t c = 0; c < dim; ++c) {
        double diff = f.at(row, c) - center[c];
        d += diff * diff;
    }
    return d;
}

} // namespace

ClusterAssignment kmeans(const FeatureMatrix& f, std::size_t K, std::uint64_t seed,
                         std::size_t max_iters) {
    const std::size_t p = f.rows, dim = f.cols;
    if (K == 0)
        fail(ErrorKind::invalid_argument, "K must be positive");
    if (K > p)
        fail(ErrorKind::invalid_argument, "K exceeds the number of points");

    Rng rng(derive_seed(seed, {0x4b4d45414e53ull})); // "KMEANS"

    // k-means++ seeding
    std::vector<std::vector<double>> centers;
    centers.reserve(K);
    {
        std::size_t first = static_cast<std::size_t>(rng.bounded(p));
        centers.emplace_back(f.row(first).begin(), f.row(first).end());
        std::vector<double> d2(p);
        while (centers.size() < K) {
            double total = 0.0;
            for (std::size_t i = 0; i < p; ++i) {
                double best = std::numeric_limits<double>::infinity();
                for (const auto& c : centers)
                    best = std::min(best, sq_dist(f, i, c, dim));
                d2[i] = best;
                total += best;
            }
            std::size_t pick;
            if (total > 0.0) {
                double u = rng.next_double() * total;
                double acc = 0.0;
                pick = p - 1;
                for (std::size_t i = 0; i < p; ++i) {
                    acc += d2[i];
                    if (u < acc) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = static_cast<std::size_t>(rng.bounded(p));
            }
            centers.emplace_back(f.row(pick).begin(), f.row(pick).end());
        }
    }

    std::vector<std::size_t> labels(p, K); // K = unassigned sentinel
    std::vector<std::size_t> counts(K, 0);
    for (std::size_t iter = 0; iter < max_iters; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < p; ++i) {
            std::size_t best_k = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < K; ++k) {
                double d = sq_dist(f, i, centers[k], dim);
                if (d < best_d) {
                    best_d = d;
                    best_k = k;
                }
            }
            if (labels[i] != best_k) {
                labels[i] = best_k;
                changed = true;
            }
        }
        if (!changed)
            break;

        // recompute means
        for (auto& c : centers)
            std::fill(c.begin(), c.end(), 0.0);
        std::fill(counts.begin(), counts.end(), std::size_t{0});
        for (std::size_t i = 0; i < p; ++i) {
            ++counts[labels[i]];
            for (std::size_t c = 0; c < dim; ++c)
                centers[labels[i]][c] += f.at(i, c);
        }
        for (std::size_t k = 0; k < K; ++k) {
            if (counts[k] == 0) {
                // reseed the empty cluster with the point farthest from its centroid
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < p; ++i) {
                    double d = sq_dist(f, i, centers[labels[i]], dim);
                    if (d > far_d) {
                        far_d = d;
                        far = i;
                    }
                }
                centers[k].assign(f.row(far).begin(), f.row(far).end());
            } else {
                for (std::size_t c = 0; c < dim; ++c)
                    centers[k][c] /= static_cast<double>(counts[k]);
            }
        }
    }

    // compact ids in first-appearance order
    std::vector<std::size_t> remap(K, K);
    std::size_t next = 0;
    for (std::size_t i = 0; i < p; ++i) {
        if (remap[labels[i]] == K)
            remap[labels[i]] = next++;
        labels[i] = remap[labels[i]];
    }

    ClusterAssignment a;
    a.labels = std::move(labels);
    a.k = next;
    a.method = ClusterMethod::kmeans;
    a.kmeans_k = K;
    a.seed = seed;
    return a;
}

double kmeans_wss(const FeatureMatrix& f, const ClusterAssignment& a) {
    if (a.labels.size() != f.rows)
        fail(ErrorKind::invalid_argument, "assignment does not match matrix");
    const std::size_t k = a.k, dim = f.cols;
    std::vector<std::vector<double>> centers(k, std::vector<double>(dim, 0.0));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < f.rows; ++i) {
        ++counts[a.labels[i]];
        for (std::size_t c = 0; c < dim; ++c)
            centers[a.labels[i]][c] += f.at(i, c);
    }
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t c = 0; c < dim; ++c)
            centers[j][c] /= static_cast<double>(counts[j]);
    double wss = 0.0;
    for (std::size_t i = 0; i < f.rows; ++i)
        wss += sq_dist(f, i, centers[a.labels[i]], dim);
    return wss;
}

std::size_t select_k_kmeans(const FeatureMatrix& f, const std::vector<std::size_t>& k_range,
                            std::uint64_t seed, warning_list* warnings) {
    std::vector<std::size_t> ks = k_range;
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end()), ks.end());
    while (!ks.empty() && ks.back() > f.rows)
        ks.pop_back();
    if (ks.size() < 3)
        fail(ErrorKind::invalid_argument, "elbow detection needs at least 3 candidate K");

    std::vector<double> xs, ys;
    for (std::size_t K : ks) {
        ClusterAssignment a = kmeans(f, K, derive_seed(seed, {0x454c424f57ull, K}));
        xs.push_back(static_cast<double>(K));
        ys.push_back(kmeans_wss(f, a));
    }
    try {
        return ks[kneedle_elbow(xs, ys)];
    } catch (const Error& e) {
        if (warnings)
            warnings->push_back(std::string("no elbow found (") + e.what() +
                                "); falling back to K=" + std::to_string(ks.front()));
        return ks.front();
    }
}

} // namespace apa
