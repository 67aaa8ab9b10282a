#include "apa/synth.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "apa/rng.hpp"

namespace apa {

std::vector<int> parse_byte_pattern(const std::string& text) {
    std::string compact;
    compact.reserve(text.size());
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c)))
            compact.push_back(c);
    if (compact.empty() || compact.size() % 2 != 0)
        fail(ErrorKind::invalid_argument,
             "byte pattern must be a non-empty even-length hex string: " + text);

    auto nibble = [&](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };

    std::vector<int> out;
    out.reserve(compact.size() / 2);
    for (std::size_t i = 0; i < compact.size(); i += 2) {
        if (compact[i] == '?' && compact[i + 1] == '?') {
            out.push_back(-1);
            continue;
        }
        int hi = nibble(compact[i]), lo = nibble(compact[i + 1]);
        if (hi < 0 || lo < 0)
            fail(ErrorKind::invalid_argument, "bad byte in pattern: " + text);
        out.push_back((hi << 4) | lo);
    }
    return out;
}

SyntheticSpec SyntheticSpec::from_json(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::format, std::string("bad generator spec JSON: ") + e.what());
    }

    SyntheticSpec spec;
    spec.name = j.value("name", "synthetic");
    spec.layer = osi_layer_from_string(j.value("layer", "link"));
    if (!j.contains("classes") || !j["classes"].is_array() || j["classes"].empty())
        fail(ErrorKind::format, "generator spec needs a non-empty classes array");

    for (const auto& cj : j["classes"]) {
        SyntheticClass c;
        c.label = cj.value("label", "");
        if (c.label.empty())
            fail(ErrorKind::format, "every class needs a label");
        c.support = cj.value("support", std::size_t{0});
        if (c.support < 1)
            fail(ErrorKind::format, "class " + c.label + " needs support >= 1");
        if (cj.contains("pattern")) {
            c.pattern = parse_byte_pattern(cj["pattern"].get<std::string>());
        } else if (cj.contains("text")) {
            for (char ch : cj["text"].get<std::string>())
                c.pattern.push_back(static_cast<unsigned char>(ch));
        } else {
            fail(ErrorKind::format, "class " + c.label + " needs a pattern or text field");
        }
        if (cj.contains("tail")) {
            const auto& t = cj["tail"];
            if (!t.is_array() || t.size() != 2)
                fail(ErrorKind::format, "tail must be [min,max]");
            c.tail_min = t[0].get<std::size_t>();
            c.tail_max = t[1].get<std::size_t>();
            if (c.tail_max < c.tail_min)
                fail(ErrorKind::format, "tail max below min for class " + c.label);
        }
        c.tail_printable = cj.value("tail_mode", "bytes") == std::string("printable");
        c.tail_alphabet = cj.value("tail_alphabet", std::size_t{0});
        if (c.tail_alphabet > 32)
            fail(ErrorKind::format, "tail_alphabet is limited to 32 symbols");
        if (cj.contains("tail_charset")) {
            for (int b : parse_byte_pattern(cj["tail_charset"].get<std::string>())) {
                if (b < 0)
                    fail(ErrorKind::format, "tail_charset cannot contain wildcards");
                c.tail_charset.push_back(static_cast<std::uint8_t>(b));
            }
        }
        spec.classes.push_back(std::move(c));
    }

    // templates must be distinguishable
    for (std::size_t i = 0; i < spec.classes.size(); ++i)
        for (std::size_t k = i + 1; k < spec.classes.size(); ++k)
            if (spec.classes[i].pattern == spec.classes[k].pattern)
                fail(ErrorKind::invalid_argument,
                     "classes " + spec.classes[i].label + " and " + spec.classes[k].label +
                         " share an identical template");
    return spec;
}

SyntheticSpec SyntheticSpec::from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::io, "cannot open generator spec: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

namespace {

void put_u16be(byte_vec& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

byte_vec frame_payload(const byte_vec& payload, OsiLayer layer, std::size_t index) {
    if (layer == OsiLayer::link)
        return payload;

    byte_vec f;
    // Ethernet
    static const std::uint8_t dst[6] = {0x02, 0, 0, 0, 0, 0x01};
    static const std::uint8_t src[6] = {0x02, 0, 0, 0, 0, 0x02};
    f.insert(f.end(), dst, dst + 6);
    f.insert(f.end(), src, src + 6);
    put_u16be(f, 0x0800);

    const bool udp = layer == OsiLayer::application;
    const std::size_t l4_extra = udp ? 8 : 0;

    // IPv4, no options
    f.push_back(0x45);
    f.push_back(0x00);
    put_u16be(f, static_cast<std::uint16_t>(20 + l4_extra + payload.size()));
    put_u16be(f, static_cast<std::uint16_t>(index & 0xffff));
    put_u16be(f, 0x4000); // DF
    f.push_back(64);
    f.push_back(udp ? 17 : 0xfd); // experimental protocol number for raw transport payloads
    put_u16be(f, 0x0000);         // checksum unused by the dissector
    const std::uint8_t src_ip[4] = {10, 0, 0, 1};
    const std::uint8_t dst_ip[4] = {10, 0, 0, 2};
    f.insert(f.end(), src_ip, src_ip + 4);
    f.insert(f.end(), dst_ip, dst_ip + 4);

    if (udp) {
        put_u16be(f, 40000);
        put_u16be(f, 40001);
        put_u16be(f, static_cast<std::uint16_t>(8 + payload.size()));
        put_u16be(f, 0x0000);
    }
    f.insert(f.end(), payload.begin(), payload.end());
    return f;
}

} // namespace

GeneratedCapture generate_capture(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.classes.empty())
        fail(ErrorKind::invalid_argument, "generator spec has no classes");

    Rng rng(derive_seed(seed, {0x47454eull})); // "GEN"

    std::vector<std::size_t> order;
    for (std::size_t c = 0; c < spec.classes.size(); ++c)
        order.insert(order.end(), spec.classes[c].support, c);
    rng.shuffle(order);

    const std::uint64_t base_ts = 1600000000ull * 1000000ull;
    GeneratedCapture cap;
    cap.network = spec.layer == OsiLayer::link ? 147u : 1u; // USER0 or Ethernet
    cap.packets.reserve(order.size());

    for (std::size_t i = 0; i < order.size(); ++i) {
        const SyntheticClass& cls = spec.classes[order[i]];
        byte_vec payload;
        payload.reserve(cls.pattern.size() + cls.tail_max);
        for (int b : cls.pattern)
            payload.push_back(b < 0 ? rng.next_byte() : static_cast<std::uint8_t>(b));
        std::size_t tail = cls.tail_min;
        if (cls.tail_max > cls.tail_min)
            tail += static_cast<std::size_t>(rng.bounded(cls.tail_max - cls.tail_min + 1));
        for (std::size_t t = 0; t < tail; ++t) {
            if (!cls.tail_charset.empty())
                payload.push_back(cls.tail_charset[rng.bounded(cls.tail_charset.size())]);
            else if (cls.tail_printable)
                payload.push_back(static_cast<std::uint8_t>(0x20 + rng.bounded(0x7f - 0x20)));
            else if (cls.tail_alphabet > 0)
                payload.push_back(static_cast<std::uint8_t>(0xe0 + rng.bounded(cls.tail_alphabet)));
            else
                payload.push_back(rng.next_byte());
        }

        RawPacket p;
        p.bytes = frame_payload(payload, spec.layer, i);
        p.capture_ts = base_ts + i * 1000;
        p.link_type = spec.layer == OsiLayer::link ? LinkType::raw : LinkType::ethernet;
        p.truth_label = cls.label;
        cap.packets.push_back(std::move(p));
    }
    return cap;
}

void write_generated(const GeneratedCapture& cap, const std::string& pcap_path,
                     const std::string& labels_path) {
    write_pcap(pcap_path, cap.packets, cap.network);
    std::ofstream out(labels_path, std::ios::trunc);
    if (!out)
        fail(ErrorKind::io, "cannot write labels file: " + labels_path);
    out << "packet_index,label\n";
    for (std::size_t i = 0; i < cap.packets.size(); ++i)
        out << i << ',' << *cap.packets[i].truth_label << '\n';
}

Dataset generated_dataset(const SyntheticSpec& spec, std::uint64_t seed) {
    GeneratedCapture cap = generate_capture(spec, seed);
    Dataset d;
    d.name = spec.name;
    d.osi_target = spec.layer;
    d.packets = std::move(cap.packets);
    return d;
}

} // namespace apa
