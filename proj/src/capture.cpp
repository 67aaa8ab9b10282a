#include "apa/capture.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "apa/rng.hpp"

namespace apa {

const char* to_string(LinkType t) {
    switch (t) {
    case LinkType::ethernet: return "ethernet";
    case LinkType::ieee80211: return "ieee80211";
    case LinkType::ppp: return "ppp";
    case LinkType::raw: return "raw";
    }
    return "?";
}

const char* to_string(OsiLayer l) {
    switch (l) {
    case OsiLayer::link: return "link";
    case OsiLayer::transport: return "transport";
    case OsiLayer::application: return "application";
    }
    return "?";
}

OsiLayer osi_layer_from_string(const std::string& s) {
    if (s == "link") return OsiLayer::link;
    if (s == "transport") return OsiLayer::transport;
    if (s == "application") return OsiLayer::application;
    fail(ErrorKind::invalid_argument, "unknown OSI layer: " + s);
}

namespace {

constexpr std::uint32_t kPcapMagic = 0xa1b2c3d4u;
constexpr std::uint32_t kPcapMagicSwapped = 0xd4c3b2a1u;

std::uint32_t read_u32le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint32_t bswap32(std::uint32_t v) {
    return ((v & 0x000000ffu) << 24) | ((v & 0x0000ff00u) << 8) |
           ((v & 0x00ff0000u) >> 8) | ((v & 0xff000000u) >> 24);
}

std::uint16_t read_u16be(const std::uint8_t* p) {
    return static_cast<std::uint16_t>((p[0] << 8) | p[1]);
}

LinkType link_type_from_dlt(std::uint32_t network) {
    switch (network) {
    case 1: return LinkType::ethernet;
    case 9: return LinkType::ppp;
    case 105: return LinkType::ieee80211;
    default: return LinkType::raw;
    }
}

void put_u32le(std::string& out, std::uint32_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
    out.push_back(static_cast<char>((v >> 16) & 0xff));
    out.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16le(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

} // namespace

std::vector<RawPacket> load_pcap(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        fail(ErrorKind::io, "cannot open capture file: " + path);

    std::uint8_t gh[24];
    in.read(reinterpret_cast<char*>(gh), sizeof(gh));
    if (in.gcount() != sizeof(gh))
        fail(ErrorKind::format, "malformed global header (short file): " + path);

    std::uint32_t magic = read_u32le(gh);
    bool swapped = false;
    if (magic == kPcapMagicSwapped)
        swapped = true;
    else if (magic != kPcapMagic)
        fail(ErrorKind::format, "not a classic pcap file (bad magic): " + path);

    auto field32 = [&](const std::uint8_t* p) {
        std::uint32_t v = read_u32le(p);
        return swapped ? bswap32(v) : v;
    };

    std::uint32_t network = field32(gh + 20);
    LinkType link_type = link_type_from_dlt(network);

    std::vector<RawPacket> packets;
    std::size_t index = 0;
    for (;;) {
        std::uint8_t rh[16];
        in.read(reinterpret_cast<char*>(rh), sizeof(rh));
        if (in.gcount() == 0)
            break; // clean EOF
        if (in.gcount() != sizeof(rh))
            fail(ErrorKind::format,
                 "truncated record header at record " + std::to_string(index));

        std::uint32_t ts_sec = field32(rh);
        std::uint32_t ts_usec = field32(rh + 4);
        std::uint32_t incl_len = field32(rh + 8);
        if (incl_len == 0)
            fail(ErrorKind::format, "empty record at record " + std::to_string(index));
        if (incl_len > 0x0fffffffu)
            fail(ErrorKind::format,
                 "implausible record length at record " + std::to_string(index));

        RawPacket p;
        p.bytes.resize(incl_len);
        in.read(reinterpret_cast<char*>(p.bytes.data()), incl_len);
        if (static_cast<std::uint32_t>(in.gcount()) != incl_len)
            fail(ErrorKind::format,
                 "truncated record body at record " + std::to_string(index));
        p.capture_ts = static_cast<std::uint64_t>(ts_sec) * 1000000ull + ts_usec;
        p.link_type = link_type;
        packets.push_back(std::move(p));
        ++index;
    }
    return packets;
}

void write_pcap(const std::string& path, const std::vector<RawPacket>& packets,
                std::uint32_t network) {
    std::string out;
    put_u32le(out, kPcapMagic);
    put_u16le(out, 2);  // version major
    put_u16le(out, 4);  // version minor
    put_u32le(out, 0);  // thiszone
    put_u32le(out, 0);  // sigfigs
    put_u32le(out, 65535);
    put_u32le(out, network);
    for (const auto& p : packets) {
        put_u32le(out, static_cast<std::uint32_t>(p.capture_ts / 1000000ull));
        put_u32le(out, static_cast<std::uint32_t>(p.capture_ts % 1000000ull));
        put_u32le(out, static_cast<std::uint32_t>(p.bytes.size()));
        put_u32le(out, static_cast<std::uint32_t>(p.bytes.size()));
        out.append(reinterpret_cast<const char*>(p.bytes.data()), p.bytes.size());
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        fail(ErrorKind::io, "cannot write capture file: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f)
        fail(ErrorKind::io, "write failed: " + path);
}

std::vector<std::pair<std::size_t, std::string>> load_labels_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        fail(ErrorKind::io, "cannot open labels file: " + path);
    std::string line;
    if (!std::getline(in, line))
        fail(ErrorKind::format, "labels file is empty: " + path);
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    if (line.rfind("packet_index,", 0) != 0)
        fail(ErrorKind::format, "labels file missing packet_index,label header: " + path);

    std::vector<std::pair<std::size_t, std::string>> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            fail(ErrorKind::format,
                 "labels line " + std::to_string(lineno) + " has no comma");
        std::size_t idx = 0;
        try {
            idx = std::stoull(line.substr(0, comma));
        } catch (const std::exception&) {
            fail(ErrorKind::format,
                 "labels line " + std::to_string(lineno) + " has a bad index");
        }
        out.emplace_back(idx, line.substr(comma + 1));
    }
    return out;
}

void apply_labels(std::vector<RawPacket>& packets,
                  const std::vector<std::pair<std::size_t, std::string>>& labels) {
    for (const auto& [idx, label] : labels) {
        if (idx >= packets.size())
            fail(ErrorKind::invalid_argument,
                 "label index " + std::to_string(idx) + " out of range (have " +
                     std::to_string(packets.size()) + " packets)");
        packets[idx].truth_label = label;
    }
}

namespace {

struct IpInfo {
    std::size_t l4_offset;
    std::uint8_t protocol;
};

IpInfo parse_ip(const byte_vec& bytes, std::size_t l3) {
    if (bytes.size() < l3 + 1)
        fail(ErrorKind::format, "packet too short for IP header");
    std::uint8_t version = bytes[l3] >> 4;
    if (version == 4) {
        if (bytes.size() < l3 + 20)
            fail(ErrorKind::format, "packet too short for IPv4 header");
        std::size_t ihl = (bytes[l3] & 0x0f) * 4u;
        if (ihl < 20)
            fail(ErrorKind::format, "IPv4 IHL below minimum");
        if (bytes.size() < l3 + ihl)
            fail(ErrorKind::format, "packet too short for declared IPv4 options");
        return {l3 + ihl, bytes[l3 + 9]};
    }
    if (version == 6) {
        if (bytes.size() < l3 + 40)
            fail(ErrorKind::format, "packet too short for IPv6 header");
        return {l3 + 40, bytes[l3 + 6]};
    }
    fail(ErrorKind::format, "unknown IP version " + std::to_string(version));
}

} // namespace

byte_vec strip_lower_layers(const RawPacket& p, OsiLayer target) {
    if (p.bytes.empty())
        fail(ErrorKind::invalid_argument, "empty packet");
    if (target == OsiLayer::link)
        return p.bytes;

    std::size_t l3 = 0;
    if (p.link_type == LinkType::ethernet) {
        if (p.bytes.size() < 14)
            fail(ErrorKind::format, "frame too short for Ethernet header");
        std::uint16_t ethertype = read_u16be(p.bytes.data() + 12);
        if (ethertype != 0x0800 && ethertype != 0x86dd)
            fail(ErrorKind::format,
                 "unsupported ethertype 0x" + to_hex(p.bytes.data() + 12, 2));
        l3 = 14;
    } else if (p.link_type == LinkType::raw) {
        l3 = 0;
    } else {
        fail(ErrorKind::format,
             std::string("cannot dissect ") + to_string(p.link_type) +
                 " frames above the link layer");
    }

    IpInfo ip = parse_ip(p.bytes, l3);

    if (target == OsiLayer::transport) {
        if (ip.l4_offset >= p.bytes.size())
            fail(ErrorKind::format, "no transport payload after IP header");
        return byte_vec(p.bytes.begin() + static_cast<std::ptrdiff_t>(ip.l4_offset),
                        p.bytes.end());
    }

    // application: walk through TCP/UDP
    std::size_t app = 0;
    if (ip.protocol == 6) {
        if (p.bytes.size() < ip.l4_offset + 20)
            fail(ErrorKind::format, "packet too short for TCP header");
        std::size_t data_off = (p.bytes[ip.l4_offset + 12] >> 4) * 4u;
        if (data_off < 20)
            fail(ErrorKind::format, "TCP data offset below minimum");
        app = ip.l4_offset + data_off;
    } else if (ip.protocol == 17) {
        app = ip.l4_offset + 8;
    } else {
        fail(ErrorKind::format,
             "transport protocol " + std::to_string(ip.protocol) + " not dissectable");
    }
    if (app >= p.bytes.size())
        fail(ErrorKind::format, "no application payload");
    return byte_vec(p.bytes.begin() + static_cast<std::ptrdiff_t>(app), p.bytes.end());
}

HeaderSlice extract_header(const byte_vec& payload, std::size_t header_len,
                           OsiLayer layer, std::size_t origin) {
    if (payload.empty())
        fail(ErrorKind::invalid_argument, "cannot extract a header from an empty payload");
    HeaderSlice h;
    h.origin = origin;
    h.declared_len = header_len;
    if (layer == OsiLayer::application) {
        h.bytes = payload;
        return h;
    }
    if (header_len < 1)
        fail(ErrorKind::invalid_argument, "header length must be at least 1 byte");
    std::size_t take = std::min(header_len, payload.size());
    h.bytes.assign(payload.begin(), payload.begin() + static_cast<std::ptrdiff_t>(take));
    return h;
}

Dataset stratified_sample(const std::vector<RawPacket>& packets, std::size_t cap,
                          std::uint64_t seed, OsiLayer osi_target,
                          const std::string& name) {
    // label -> original packet indices, labels kept in first-appearance order
    std::vector<std::string> label_order;
    std::map<std::string, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < packets.size(); ++i) {
        if (!packets[i].truth_label)
            fail(ErrorKind::invalid_argument,
                 "packet " + std::to_string(i) + " has no truth label");
        const std::string& l = *packets[i].truth_label;
        auto it = by_label.find(l);
        if (it == by_label.end()) {
            label_order.push_back(l);
            by_label.emplace(l, std::vector<std::size_t>{i});
        } else {
            it->second.push_back(i);
        }
    }
    if (label_order.empty())
        fail(ErrorKind::invalid_argument, "no packets to sample");
    if (cap < label_order.size())
        fail(ErrorKind::invalid_argument,
             "cap " + std::to_string(cap) + " below label count " +
                 std::to_string(label_order.size()));

    Dataset d;
    d.osi_target = osi_target;
    d.name = name;

    const std::size_t total = packets.size();
    if (total <= cap) {
        d.packets = packets;
        return d;
    }

    // Largest-remainder apportionment with a floor of one per label.
    const std::size_t L = label_order.size();
    std::vector<std::size_t> quota(L), support(L);
    std::vector<std::size_t> remainder(L); // (cap * n_l) mod total, exact
    for (std::size_t i = 0; i < L; ++i) {
        support[i] = by_label[label_order[i]].size();
        quota[i] = cap * support[i] / total;
        remainder[i] = (cap * support[i]) % total;
        if (quota[i] == 0)
            quota[i] = 1;
        quota[i] = std::min(quota[i], support[i]);
    }
    std::size_t assigned = std::accumulate(quota.begin(), quota.end(), std::size_t{0});

    if (assigned < cap) {
        // hand out remaining seats by descending remainder, first-seen order on ties
        std::vector<std::size_t> order(L);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return remainder[a] > remainder[b];
        });
        while (assigned < cap) {
            bool progressed = false;
            for (std::size_t idx : order) {
                if (assigned == cap)
                    break;
                if (quota[idx] < support[idx]) {
                    ++quota[idx];
                    ++assigned;
                    progressed = true;
                }
            }
            if (!progressed)
                break; // every label exhausted; cap > total cannot happen here
        }
    } else if (assigned > cap) {
        // min-1 floor overshot: take seats back from the largest quotas
        while (assigned > cap) {
            std::size_t best = L;
            for (std::size_t i = 0; i < L; ++i) {
                if (quota[i] > 1 && (best == L || quota[i] > quota[best]))
                    best = i;
            }
            if (best == L)
                fail(ErrorKind::runtime, "cannot satisfy sampling cap");
            --quota[best];
            --assigned;
        }
    }

    Rng rng(derive_seed(seed, {0x5354524154ull})); // "STRAT"
    std::vector<std::size_t> chosen;
    for (std::size_t i = 0; i < L; ++i) {
        std::vector<std::size_t> pool = by_label[label_order[i]];
        rng.shuffle(pool);
        pool.resize(quota[i]);
        chosen.insert(chosen.end(), pool.begin(), pool.end());
    }
    std::sort(chosen.begin(), chosen.end()); // keep capture order
    d.packets.reserve(chosen.size());
    for (std::size_t idx : chosen)
        d.packets.push_back(packets[idx]);
    return d;
}

PayloadClass detect_text_protocol(const Dataset& d, double threshold) {
    if (d.packets.empty())
        fail(ErrorKind::invalid_argument, "empty dataset");
    if (d.osi_target != OsiLayer::application)
        fail(ErrorKind::invalid_argument, "text detection only applies to the application layer");

    auto printable = [](std::uint8_t b) {
        return (b >= 0x20 && b <= 0x7e) || b == 0x09 || b == 0x0a || b == 0x0d;
    };
    std::vector<double> ratios;
    ratios.reserve(d.packets.size());
    for (const auto& p : d.packets) {
        // Framed captures are stripped down to the application payload;
        // packets that do not parse as a known stack are taken as-is.
        byte_vec payload;
        try {
            payload = strip_lower_layers(p, OsiLayer::application);
        } catch (const Error&) {
            payload = p.bytes;
        }
        if (payload.empty()) {
            ratios.push_back(0.0);
            continue;
        }
        std::size_t hits = 0;
        for (std::uint8_t b : payload)
            if (printable(b))
                ++hits;
        ratios.push_back(static_cast<double>(hits) / static_cast<double>(payload.size()));
    }
    std::sort(ratios.begin(), ratios.end());
    std::size_t n = ratios.size();
    double median = (n % 2 == 1) ? ratios[n / 2]
                                 : 0.5 * (ratios[n / 2 - 1] + ratios[n / 2]);
    return median >= threshold ? PayloadClass::textual : PayloadClass::binary;
}

} // namespace apa
