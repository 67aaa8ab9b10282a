#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "apa/metrics.hpp"
#include "apa/common.hpp"
#include "apa/rng.hpp"
#include "oracles.hpp"

using namespace apa;

namespace {

std::vector<std::size_t> random_labels(Rng& rng, std::size_t n, std::size_t k) {
    std::vector<std::size_t> out(n);
    for (auto& x : out)
        x = rng.bounded(k);
    return out;
}

} // namespace

TEST_CASE("contingency table marginals add up") {
    std::vector<std::size_t> pred = {0, 0, 1, 1, 2};
    std::vector<std::size_t> truth = {0, 1, 1, 1, 0};
    ContingencyTable t = contingency_table(pred, truth);
    CHECK(t.total == 5);
    CHECK(std::accumulate(t.counts.begin(), t.counts.end(), std::size_t{0}) == 5);
    CHECK(std::accumulate(t.row_marginals.begin(), t.row_marginals.end(), std::size_t{0}) == 5);
    CHECK(std::accumulate(t.col_marginals.begin(), t.col_marginals.end(), std::size_t{0}) == 5);
}

TEST_CASE("adjusted_rand_index: perfect, relabeled and hand case") {
    std::vector<std::size_t> truth = {0, 0, 1, 1, 2, 2};
    CHECK(adjusted_rand_index(truth, truth) == 1.0);

    std::vector<std::size_t> relabeled = {5, 5, 9, 9, 7, 7};
    CHECK(adjusted_rand_index(relabeled, truth) == 1.0);

    std::vector<std::size_t> pred = {0, 0, 1, 1};
    std::vector<std::size_t> t2 = {0, 0, 0, 1};
    CHECK(adjusted_rand_index(pred, t2) ==
          doctest::Approx(oracle::ari_pairs(pred, t2)).epsilon(1e-12));

    std::vector<std::size_t> short_list = {0};
    CHECK_THROWS_AS(adjusted_rand_index(short_list, short_list), Error);
    std::vector<std::size_t> mismatched = {0, 1, 2};
    CHECK_THROWS_AS(adjusted_rand_index(pred, mismatched), Error);
}

TEST_CASE("fowlkes_mallows: perfect, singleton collapse, hand case") {
    std::vector<std::size_t> truth = {0, 0, 1, 1};
    CHECK(fowlkes_mallows(truth, truth) == 1.0);

    std::vector<std::size_t> singletons = {0, 1, 2, 3};
    CHECK(fowlkes_mallows(singletons, truth) == 0.0);

    std::vector<std::size_t> pred = {0, 0, 1, 1};
    std::vector<std::size_t> cross = {0, 1, 0, 1};
    CHECK(fowlkes_mallows(pred, cross) ==
          doctest::Approx(oracle::fms_pairs(pred, cross)).epsilon(1e-12));
}

TEST_CASE("adjusted_mutual_information: conventions and oracle match") {
    std::vector<std::size_t> truth = {0, 0, 1, 1, 2, 2};
    CHECK(adjusted_mutual_information(truth, truth) == doctest::Approx(1.0).epsilon(1e-9));

    std::vector<std::size_t> constant(6, 0);
    std::vector<std::size_t> anything = {0, 1, 2, 0, 1, 2};
    CHECK(adjusted_mutual_information(anything, constant) == 0.0);
    CHECK(adjusted_mutual_information(constant, constant) == 1.0);

    Rng rng(404);
    for (int trial = 0; trial < 40; ++trial) {
        auto pred = random_labels(rng, 12, 1 + rng.bounded(5));
        auto truth12 = random_labels(rng, 12, 1 + rng.bounded(5));
        double got = adjusted_mutual_information(pred, truth12);
        double want = oracle::ami_sum(pred, truth12);
        CHECK(got == doctest::Approx(want).epsilon(1e-9));
    }
}

TEST_CASE("metric trio agrees with pair/summation oracles on random partitions") {
    Rng rng(2718);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t n = 2 + rng.bounded(29);
        auto pred = random_labels(rng, n, 1 + rng.bounded(6));
        auto truth = random_labels(rng, n, 1 + rng.bounded(6));
        CHECK(adjusted_rand_index(pred, truth) ==
              doctest::Approx(oracle::ari_pairs(pred, truth)).epsilon(1e-9));
        CHECK(fowlkes_mallows(pred, truth) ==
              doctest::Approx(oracle::fms_pairs(pred, truth)).epsilon(1e-9));
        CHECK(adjusted_mutual_information(pred, truth) ==
              doctest::Approx(oracle::ami_sum(pred, truth)).epsilon(1e-9));
    }
}

TEST_CASE("metrics are invariant to id and item permutations") {
    Rng rng(99);
    auto pred = random_labels(rng, 20, 4);
    auto truth = random_labels(rng, 20, 3);

    double ari = adjusted_rand_index(pred, truth);
    double fms = fowlkes_mallows(pred, truth);
    double ami = adjusted_mutual_information(pred, truth);

    // relabel predicted cluster ids
    auto relabeled = pred;
    for (auto& x : relabeled)
        x = (x + 7) * 13;
    CHECK(adjusted_rand_index(relabeled, truth) == doctest::Approx(ari).epsilon(1e-12));
    CHECK(fowlkes_mallows(relabeled, truth) == doctest::Approx(fms).epsilon(1e-12));
    CHECK(adjusted_mutual_information(relabeled, truth) ==
          doctest::Approx(ami).epsilon(1e-12));

    // permute items consistently
    std::vector<std::size_t> perm(20);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    rng.shuffle(perm);
    std::vector<std::size_t> p2(20), t2(20);
    for (std::size_t i = 0; i < 20; ++i) {
        p2[i] = pred[perm[i]];
        t2[i] = truth[perm[i]];
    }
    CHECK(adjusted_rand_index(p2, t2) == doctest::Approx(ari).epsilon(1e-12));
    CHECK(fowlkes_mallows(p2, t2) == doctest::Approx(fms).epsilon(1e-12));
    CHECK(adjusted_mutual_information(p2, t2) == doctest::Approx(ami).epsilon(1e-12));
}

TEST_CASE("random predictions score near zero ARI on average") {
    Rng rng(31415);
    std::vector<std::size_t> truth = random_labels(rng, 30, 3);
    double sum = 0.0;
    const int trials = 1000;
    for (int i = 0; i < trials; ++i)
        sum += adjusted_rand_index(random_labels(rng, 30, 3), truth);
    CHECK(std::fabs(sum / trials) < 0.05);
}

TEST_CASE("fms stays within [0,1]; ari never exceeds 1") {
    Rng rng(8);
    for (int t = 0; t < 50; ++t) {
        auto pred = random_labels(rng, 15, 1 + rng.bounded(5));
        auto truth = random_labels(rng, 15, 1 + rng.bounded(5));
        double v = fowlkes_mallows(pred, truth);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(adjusted_rand_index(pred, truth) <= 1.0);
    }
}

TEST_CASE("voting_accuracy: majority labels and the gaming critique") {
    // one cluster: 30 of class 0, 10 of class 1 -> voted 0, the 10 count as wrong
    std::vector<std::size_t> pred(40, 0);
    std::vector<std::size_t> truth(40, 0);
    for (int i = 0; i < 10; ++i)
        truth[30 + i] = 1;
    VotingResult r = voting_accuracy(pred, truth);
    CHECK(r.voted_class == std::vector<std::size_t>{0});
    CHECK(r.accuracy == doctest::Approx(0.75));

    // all singletons are always "right": accuracy 1.0 despite useless output
    std::vector<std::size_t> singles(12);
    std::iota(singles.begin(), singles.end(), std::size_t{0});
    Rng rng(5);
    auto truth12 = random_labels(rng, 12, 3);
    CHECK(voting_accuracy(singles, truth12).accuracy == 1.0);

    // single cluster inherits the majority proportion
    std::vector<std::size_t> one_cluster(10, 0);
    std::vector<std::size_t> truth70 = {0, 0, 0, 0, 0, 0, 0, 1, 1, 1};
    CHECK(voting_accuracy(one_cluster, truth70).accuracy == doctest::Approx(0.7));

    // ties resolve to the smaller class index
    std::vector<std::size_t> tied_pred(4, 0);
    std::vector<std::size_t> tied_truth = {1, 1, 0, 0}; // class ids compact to 0,1 by appearance
    VotingResult tie = voting_accuracy(tied_pred, tied_truth);
    CHECK(tie.voted_class == std::vector<std::size_t>{0});
}

TEST_CASE("voting accuracy of one cluster equals the max class share") {
    Rng rng(64);
    for (int t = 0; t < 20; ++t) {
        std::size_t n = 5 + rng.bounded(30);
        auto truth = random_labels(rng, n, 1 + rng.bounded(4));
        std::vector<std::size_t> one(n, 0);
        std::vector<std::size_t> counts(5, 0);
        for (auto x : truth)
            ++counts[x];
        double max_share =
            static_cast<double>(*std::max_element(counts.begin(), counts.end())) / n;
        CHECK(voting_accuracy(one, truth).accuracy == doctest::Approx(max_share));
    }
}

TEST_CASE("evaluate bundles the scores with the 0.4 bar") {
    std::vector<std::size_t> truth = {0, 0, 0, 1, 1, 1};
    EvaluationScores s = evaluate(truth, truth);
    CHECK(s.ari == 1.0);
    CHECK(s.fms == 1.0);
    CHECK(s.satisfactory);

    Rng rng(2);
    auto noise = random_labels(rng, 6, 6);
    EvaluationScores bad = evaluate(noise, truth);
    CHECK(bad.satisfactory == (bad.ari >= 0.4));
}

TEST_CASE("confusion csv shape") {
    std::vector<std::size_t> pred = {0, 0, 1, 1};
    std::vector<std::size_t> truth = {0, 0, 1, 1};
    VotingResult r = voting_accuracy(pred, truth);
    std::string csv = r.confusion_csv();
    CHECK(csv.find("voted\\truth") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}
