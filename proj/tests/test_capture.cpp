#include <doctest.h>

#include <algorithm>
#include <map>

#include "apa/capture.hpp"
#include "apa/rng.hpp"
#include "helpers.hpp"

using namespace apa;
using namespace testutil;

namespace {

RawPacket packet(const byte_vec& bytes, LinkType lt = LinkType::ethernet,
                 const char* label = nullptr) {
    RawPacket p;
    p.bytes = bytes;
    p.link_type = lt;
    if (label)
        p.truth_label = label;
    return p;
}

} // namespace

TEST_CASE("load_pcap: empty capture yields an empty list") {
    std::string path = tmp_path("empty.pcap");
    write_pcap(path, {}, 1);
    CHECK(load_pcap(path).empty());
}

TEST_CASE("load_pcap: three ethernet frames round-trip") {
    std::vector<RawPacket> in;
    for (int i = 0; i < 3; ++i)
        in.push_back(packet(byte_vec(20, static_cast<std::uint8_t>(i + 1))));
    in[0].capture_ts = 1600000000ull * 1000000ull + 42;
    std::string path = tmp_path("three.pcap");
    write_pcap(path, in, 1);

    auto out = load_pcap(path);
    REQUIRE(out.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(out[i].link_type == LinkType::ethernet);
        CHECK(out[i].bytes == in[i].bytes);
    }
    CHECK(out[0].capture_ts == in[0].capture_ts);
}

TEST_CASE("load_pcap: byte-swapped capture equals native load") {
    std::vector<RawPacket> frames;
    frames.push_back(packet(byte_vec{0xde, 0xad, 0xbe, 0xef}));
    frames.push_back(packet(byte_vec(33, 0x55)));
    frames[0].capture_ts = 1234567;
    frames[1].capture_ts = 7654321;

    std::string native = tmp_path("native.pcap");
    std::string swapped = tmp_path("swapped.pcap");
    write_pcap(native, frames, 1);
    write_pcap_swapped(swapped, frames, 1);

    auto a = load_pcap(native);
    auto b = load_pcap(swapped);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].bytes == b[i].bytes);
        CHECK(a[i].capture_ts == b[i].capture_ts);
        CHECK(a[i].link_type == b[i].link_type);
    }
}

TEST_CASE("load_pcap: bad magic and truncated records fail") {
    std::string path = tmp_path("garbage.pcap");
    {
        std::ofstream f(path, std::ios::binary);
        f << "this is not a capture at all........";
    }
    CHECK_THROWS_AS(load_pcap(path), Error);

    // valid header, then a record header that promises more bytes than exist
    std::string trunc = tmp_path("trunc.pcap");
    write_pcap(trunc, {packet(byte_vec(10, 1))}, 1);
    {
        auto content = slurp(trunc);
        std::ofstream f(trunc, std::ios::binary);
        f.write(content.data(), static_cast<std::streamsize>(content.size() - 4));
    }
    try {
        load_pcap(trunc);
        FAIL("expected a format error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::format);
        CHECK(std::string(e.what()).find("record 0") != std::string::npos);
    }

    CHECK_THROWS_AS(load_pcap(tmp_path("missing.pcap")), Error);
}

TEST_CASE("strip_lower_layers: link target is the identity") {
    auto p = packet(byte_vec{1, 2, 3, 4, 5}, LinkType::raw);
    CHECK(strip_lower_layers(p, OsiLayer::link) == p.bytes);
    auto q = packet(byte_vec(64, 0xab), LinkType::ieee80211);
    CHECK(strip_lower_layers(q, OsiLayer::link) == q.bytes);
}

TEST_CASE("strip_lower_layers: ethernet/ipv4/tcp transport starts at byte 34") {
    byte_vec payload = {0xca, 0xfe, 0xba, 0xbe};
    auto frame = eth_frame(0x0800, ipv4_packet(5, 6, tcp_segment(5, payload)));
    auto p = packet(frame);

    auto transport = strip_lower_layers(p, OsiLayer::transport);
    CHECK(transport.size() == frame.size() - 34);
    CHECK(byte_vec(frame.begin() + 34, frame.end()) == transport);

    auto app = strip_lower_layers(p, OsiLayer::application);
    CHECK(app == payload);
}

TEST_CASE("strip_lower_layers: ipv4 options and udp put application at byte 46") {
    byte_vec payload = {9, 8, 7};
    // IHL=6: one 4-byte option word; 14 + 24 + 8 = 46
    auto frame = eth_frame(0x0800, ipv4_packet(6, 17, udp_datagram(payload)));
    auto p = packet(frame);
    auto app = strip_lower_layers(p, OsiLayer::application);
    CHECK(byte_vec(frame.begin() + 46, frame.end()) == app);
    CHECK(app == payload);
}

TEST_CASE("strip_lower_layers: ipv6 fixed header") {
    byte_vec payload = {1, 2, 3, 4};
    byte_vec ip6(40, 0);
    ip6[0] = 0x60;
    ip6[6] = 17; // UDP
    byte_vec l3 = ip6;
    auto udp = udp_datagram(payload);
    l3.insert(l3.end(), udp.begin(), udp.end());
    auto p = packet(eth_frame(0x86dd, l3));
    CHECK(strip_lower_layers(p, OsiLayer::application) == payload);
}

TEST_CASE("strip_lower_layers: short or unknown packets throw") {
    CHECK_THROWS_AS(strip_lower_layers(packet(byte_vec(5, 0)), OsiLayer::transport), Error);
    // declared IHL beyond the actual frame
    auto bad = eth_frame(0x0800, byte_vec{0x4f, 0, 0, 30});
    CHECK_THROWS_AS(strip_lower_layers(packet(bad), OsiLayer::transport), Error);
    // unsupported ethertype
    auto arp = eth_frame(0x0806, byte_vec(20, 0));
    CHECK_THROWS_AS(strip_lower_layers(packet(arp), OsiLayer::transport), Error);
    // 802.11 frames cannot be dissected above the link layer
    CHECK_THROWS_AS(
        strip_lower_layers(packet(byte_vec(60, 1), LinkType::ieee80211), OsiLayer::transport),
        Error);
}

TEST_CASE("extract_header: truncation and application rules") {
    byte_vec payload(60, 0x11);
    auto h = extract_header(payload, 20, OsiLayer::transport);
    CHECK(h.bytes.size() == 20);
    CHECK(h.declared_len == 20);

    byte_vec small(10, 0x22);
    CHECK(extract_header(small, 20, OsiLayer::transport).bytes == small);

    // application ignores the requested length entirely
    auto a1 = extract_header(payload, 3, OsiLayer::application);
    auto a2 = extract_header(payload, 999, OsiLayer::application);
    CHECK(a1.bytes == payload);
    CHECK(a2.bytes == payload);

    CHECK_THROWS_AS(extract_header(byte_vec{}, 4, OsiLayer::transport), Error);
    CHECK_THROWS_AS(extract_header(payload, 0, OsiLayer::link), Error);
}

TEST_CASE("load -> strip -> extract preserves packet order") {
    std::vector<RawPacket> frames;
    for (std::uint8_t i = 1; i <= 5; ++i)
        frames.push_back(packet(eth_frame(0x0800, ipv4_packet(5, 6, tcp_segment(5, {i})))));
    std::string path = tmp_path("order.pcap");
    write_pcap(path, frames, 1);

    auto loaded = load_pcap(path);
    REQUIRE(loaded.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        auto payload = strip_lower_layers(loaded[i], OsiLayer::application);
        auto h = extract_header(payload, 1, OsiLayer::application);
        CHECK(h.bytes == byte_vec{static_cast<std::uint8_t>(i + 1)});
    }
}

TEST_CASE("stratified_sample: keeps everything at or below the cap") {
    // a realistic skewed link-layer mix: 14/8/86/78 = 186 packets
    std::vector<RawPacket> packets;
    auto add = [&](const char* label, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i)
            packets.push_back(packet(byte_vec(8, 1), LinkType::raw, label));
    };
    add("ppp", 14);
    add("lldp", 8);
    add("80211", 86);
    add("ethernet", 78);

    Dataset d = stratified_sample(packets, 186, 7, OsiLayer::link, "link");
    CHECK(d.packets.size() == 186);
    Dataset d2 = stratified_sample(packets, 200, 7, OsiLayer::link, "link");
    CHECK(d2.packets.size() == 186);
}

TEST_CASE("stratified_sample: single stratum is deterministic") {
    std::vector<RawPacket> packets;
    for (std::size_t i = 0; i < 100; ++i) {
        auto p = packet(byte_vec{static_cast<std::uint8_t>(i)}, LinkType::raw, "only");
        packets.push_back(p);
    }
    Dataset a = stratified_sample(packets, 20, 42, OsiLayer::link);
    Dataset b = stratified_sample(packets, 20, 42, OsiLayer::link);
    REQUIRE(a.packets.size() == 20);
    REQUIRE(b.packets.size() == 20);
    for (std::size_t i = 0; i < 20; ++i)
        CHECK(a.packets[i].bytes == b.packets[i].bytes);
}

TEST_CASE("stratified_sample: largest-remainder quotas with min-1 floor") {
    std::vector<RawPacket> packets;
    auto add = [&](const char* label, std::size_t count) {
        for (std::size_t i = 0; i < count; ++i)
            packets.push_back(packet(byte_vec(4, 9), LinkType::raw, label));
    };
    add("A", 90);
    add("B", 9);
    add("C", 1);

    Dataset d = stratified_sample(packets, 50, 3, OsiLayer::link);
    std::map<std::string, std::size_t> got;
    for (const auto& p : d.packets)
        ++got[*p.truth_label];
    CHECK(got["A"] == 45);
    CHECK(got["B"] == 4);
    CHECK(got["C"] == 1);
    CHECK(d.packets.size() == 50);
}

TEST_CASE("stratified_sample: every present label survives") {
    Rng rng(99);
    std::vector<RawPacket> packets;
    const char* labels[] = {"a", "b", "c", "d", "e"};
    for (std::size_t i = 0; i < 300; ++i) {
        std::size_t which = i < 296 ? rng.bounded(4) : 4; // "e" is rare: 4 packets
        packets.push_back(packet(byte_vec(4, 1), LinkType::raw, labels[which]));
    }
    Dataset d = stratified_sample(packets, 40, 5, OsiLayer::link);
    std::map<std::string, std::size_t> got;
    for (const auto& p : d.packets)
        ++got[*p.truth_label];
    for (const char* l : labels)
        CHECK(got[l] >= 1);
    CHECK(d.packets.size() == 40);
}

TEST_CASE("stratified_sample: error cases") {
    std::vector<RawPacket> unlabeled{packet(byte_vec(4, 1))};
    CHECK_THROWS_AS(stratified_sample(unlabeled, 10, 1, OsiLayer::link), Error);

    std::vector<RawPacket> three;
    three.push_back(packet(byte_vec(4, 1), LinkType::raw, "x"));
    three.push_back(packet(byte_vec(4, 1), LinkType::raw, "y"));
    three.push_back(packet(byte_vec(4, 1), LinkType::raw, "z"));
    CHECK_THROWS_AS(stratified_sample(three, 2, 1, OsiLayer::link), Error);
}

TEST_CASE("detect_text_protocol: printable, binary and borderline payloads") {
    auto mk = [&](const byte_vec& payload) {
        return packet(payload, LinkType::raw);
    };
    Dataset textual;
    textual.osi_target = OsiLayer::application;
    for (int i = 0; i < 5; ++i) {
        std::string s = "GET / HTTP/1.1\r\nHost: example\r\n\r\n";
        textual.packets.push_back(mk(byte_vec(s.begin(), s.end())));
    }
    CHECK(detect_text_protocol(textual) == PayloadClass::textual);

    Dataset binary;
    binary.osi_target = OsiLayer::application;
    Rng rng(3);
    for (int i = 0; i < 5; ++i) {
        byte_vec b(40);
        for (auto& x : b)
            x = static_cast<std::uint8_t>(0x80 + rng.bounded(0x80));
        binary.packets.push_back(mk(b));
    }
    CHECK(detect_text_protocol(binary) == PayloadClass::binary);

    Dataset mixed;
    mixed.osi_target = OsiLayer::application;
    for (int i = 0; i < 4; ++i) {
        byte_vec b;
        for (int j = 0; j < 20; ++j)
            b.push_back(j % 2 == 0 ? 0x41 : 0xff); // 50% printable
        mixed.packets.push_back(mk(b));
    }
    CHECK(detect_text_protocol(mixed) == PayloadClass::binary);

    Dataset wrong_layer = textual;
    wrong_layer.osi_target = OsiLayer::transport;
    CHECK_THROWS_AS(detect_text_protocol(wrong_layer), Error);
}

TEST_CASE("labels sidecar: header required, indices applied") {
    std::string path = tmp_path("labels.csv");
    {
        std::ofstream f(path);
        f << "packet_index,label\n0,tcp\n2,udp\n";
    }
    auto labels = load_labels_csv(path);
    REQUIRE(labels.size() == 2);
    CHECK(labels[0] == std::pair<std::size_t, std::string>{0, "tcp"});

    std::vector<RawPacket> packets(3, packet(byte_vec(4, 1)));
    apply_labels(packets, labels);
    CHECK(*packets[0].truth_label == "tcp");
    CHECK(!packets[1].truth_label);
    CHECK(*packets[2].truth_label == "udp");

    std::string bad = tmp_path("bad_labels.csv");
    {
        std::ofstream f(bad);
        f << "0,tcp\n";
    }
    CHECK_THROWS_AS(load_labels_csv(bad), Error);

    std::vector<std::pair<std::size_t, std::string>> oob{{7, "x"}};
    CHECK_THROWS_AS(apply_labels(packets, oob), Error);
}
