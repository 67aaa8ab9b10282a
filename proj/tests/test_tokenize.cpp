#include <doctest.h>

#include <algorithm>

#include "apa/rng.hpp"
#include "apa/tokenize.hpp"
#include "helpers.hpp"

using namespace apa;

namespace {

HeaderSlice slice(const byte_vec& b) {
    HeaderSlice h;
    h.bytes = b;
    h.declared_len = b.size();
    return h;
}

} // namespace

TEST_CASE("ngram_tokenize: sliding window in hex") {
    auto t = ngram_tokenize(slice({0xaa, 0xbb, 0xcc, 0xdd}), 3);
    CHECK(t == std::vector<std::string>{"aabbcc", "bbccdd"});

    CHECK(ngram_tokenize(slice({0x01}), 3) == std::vector<std::string>{"01"});

    auto rep = ngram_tokenize(slice(byte_vec(5, 0x00)), 2);
    CHECK(rep == std::vector<std::string>(4, "0000"));

    CHECK(ngram_tokenize(slice({}), 3).empty());
    CHECK_THROWS_AS(ngram_tokenize(slice({1, 2}), 0), Error);
}

TEST_CASE("ngram_tokenize: token count is max(1, len - g + 1)") {
    Rng rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t len = 1 + rng.bounded(30);
        std::size_t gram = 1 + rng.bounded(6);
        byte_vec b(len);
        for (auto& x : b)
            x = rng.next_byte();
        auto t = ngram_tokenize(slice(b), gram);
        std::size_t expect = len >= gram ? len - gram + 1 : 1;
        CHECK(t.size() == expect);
        for (const auto& tok : t)
            CHECK(tok.size() % 2 == 0);
    }
}

TEST_CASE("bit_congruence: equal-bit fractions") {
    CHECK(bit_congruence({0xff, 0xff}) == std::vector<double>{1.0});
    CHECK(bit_congruence({0xff, 0x00}) == std::vector<double>{0.0});
    CHECK(bit_congruence({0xf0, 0xff}) == std::vector<double>{0.5});
    CHECK_THROWS_AS(bit_congruence({0x42}), Error);
}

TEST_CASE("bit_congruence: invariant under whole-payload complement") {
    Rng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        byte_vec b(2 + rng.bounded(40));
        for (auto& x : b)
            x = rng.next_byte();
        byte_vec inv = b;
        for (auto& x : inv)
            x = static_cast<std::uint8_t>(~x);
        CHECK(bit_congruence(b) == bit_congruence(inv));
    }
}

TEST_CASE("nemesys_boundaries: single byte, run junction, max-field chunking") {
    auto single = nemesys_boundaries({0x7f}, 0.5, 40);
    CHECK(single.cut_points == std::vector<std::size_t>{1});

    // 8 zero bytes then 8 ones: congruence dips to 0 exactly between the
    // runs, so a boundary must land at offset 8
    byte_vec runs(16, 0x00);
    std::fill(runs.begin() + 8, runs.end(), 0xff);
    auto b = nemesys_boundaries(runs, 0.5, 40);
    CHECK(std::find(b.cut_points.begin(), b.cut_points.end(), 8) != b.cut_points.end());
    CHECK(b.cut_points.back() == 16);
    for (std::size_t i = 1; i < b.cut_points.size(); ++i)
        CHECK(b.cut_points[i] > b.cut_points[i - 1]);

    auto uniform = nemesys_boundaries(byte_vec(100, 0x41), 0.5, 40);
    CHECK(uniform.cut_points == std::vector<std::size_t>{40, 80, 100});

    CHECK_THROWS_AS(nemesys_boundaries({}, 0.5, 40), Error);
    CHECK_THROWS_AS(nemesys_boundaries({1, 2}, -1.0, 40), Error);
    CHECK_THROWS_AS(nemesys_boundaries({1, 2}, 0.5, 0), Error);
}

TEST_CASE("field_tokenize: tokens follow the cut points") {
    auto t = field_tokenize(slice({0x01, 0x02, 0x03}), FieldBoundaries{{1, 3}});
    CHECK(t == std::vector<std::string>{"01", "0203"});

    auto whole = field_tokenize(slice({0x01, 0x02, 0x03}), FieldBoundaries{{3}});
    CHECK(whole == std::vector<std::string>{"010203"});

    CHECK_THROWS_AS(field_tokenize(slice({1, 2, 3}), FieldBoundaries{}), Error);
    CHECK_THROWS_AS(field_tokenize(slice({1, 2, 3}), FieldBoundaries{{1, 5}}), Error);
}

TEST_CASE("field tokens reassemble the payload and respect max_field") {
    Rng rng(17);
    const std::size_t max_field = 10;
    for (int trial = 0; trial < 30; ++trial) {
        byte_vec b(1 + rng.bounded(120));
        for (auto& x : b)
            x = rng.next_byte();
        auto bounds = nemesys_boundaries(b, 0.5, max_field);
        auto tokens = field_tokenize(slice(b), bounds);

        std::string rejoined;
        for (const auto& tok : tokens) {
            CHECK(tok.size() <= 2 * max_field);
            rejoined += tok;
        }
        CHECK(from_hex(rejoined) == b);
    }
}

TEST_CASE("corpus assembly records vocabulary and per-doc tokens") {
    std::vector<HeaderSlice> headers = {slice({0xaa, 0xbb, 0xcc, 0xdd}),
                                        slice({0xaa, 0xbb, 0xcc})};
    TokenCorpus c = build_ngram_corpus(headers, 3);
    CHECK(c.docs.size() == 2);
    CHECK(c.method == TokenMethod::ngram);
    CHECK(c.vocab == std::vector<std::string>{"aabbcc", "bbccdd"});
    CHECK(c.docs[1] == std::vector<std::string>{"aabbcc"});

    TokenCorpus fc = build_field_corpus(headers, 0.5, 40);
    CHECK(fc.method == TokenMethod::field);
    CHECK(fc.docs.size() == 2);
    for (const auto& doc : fc.docs)
        for (const auto& tok : doc)
            CHECK(fc.vocab_index.count(tok) == 1);
}
