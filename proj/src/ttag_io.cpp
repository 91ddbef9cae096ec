#include "bpl/ttag_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "bpl/errors.hpp"

namespace bpl {

namespace {

void put_u16(std::string& out, uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint16_t get_u16(const unsigned char* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

uint64_t get_u64(const unsigned char* p) {
    uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

}  // namespace

void write_ttag(const std::string& path, const std::vector<TagStream>& channels) {
    if (channels.empty())
        throw schema_error("write_ttag: no channels to write");
    if (channels.size() > 255)
        throw schema_error("write_ttag: more than 255 channels");
    const double res = channels.front().resolution_s;
    for (const auto& c : channels) {
        if (c.resolution_s != res)
            throw schema_error("write_ttag: channels have different resolutions");
        validate_sorted(c, "write_ttag");
    }
    const double res_fs = res * 1e15;
    const uint64_t res_fs_u = static_cast<uint64_t>(std::llround(res_fs));
    if (std::abs(res_fs - static_cast<double>(res_fs_u)) > 1e-6 * res_fs)
        throw schema_error("write_ttag: resolution is not a whole femtosecond count");

    size_t total = 0;
    for (const auto& c : channels) total += c.size();

    std::string buf;
    buf.reserve(15 + 9 * total);
    buf += "TTAG";
    put_u16(buf, kTtagVersion);
    put_u64(buf, res_fs_u);
    buf.push_back(static_cast<char>(channels.size()));

    // record order: ticks, then channel id, so merged output is canonical
    std::vector<size_t> pos(channels.size(), 0);
    for (size_t written = 0; written < total; ++written) {
        size_t best = channels.size();
        for (size_t c = 0; c < channels.size(); ++c) {
            if (pos[c] >= channels[c].size()) continue;
            if (best == channels.size() ||
                channels[c].ticks[pos[c]] < channels[best].ticks[pos[best]] ||
                (channels[c].ticks[pos[c]] == channels[best].ticks[pos[best]] &&
                 channels[c].channel_id < channels[best].channel_id))
                best = c;
        }
        buf.push_back(static_cast<char>(channels[best].channel_id));
        put_u64(buf, channels[best].ticks[pos[best]]);
        ++pos[best];
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw runtime_fault("write_ttag: cannot open '" + path + "' for writing");
    f.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!f)
        throw runtime_fault("write_ttag: short write to '" + path + "'");
}

std::vector<TagStream> read_ttag(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw runtime_fault("read_ttag: cannot open '" + path + "'");
    std::string data((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(data.data());
    const size_t n = data.size();

    if (n < 15 || std::memcmp(p, "TTAG", 4) != 0)
        throw format_error("read_ttag: '" + path + "' is not a TTAG file (bad magic)");
    const uint16_t version = get_u16(p + 4);
    if (version != kTtagVersion)
        throw format_error("read_ttag: unsupported TTAG version " + std::to_string(version));
    const uint64_t res_fs = get_u64(p + 6);
    if (res_fs == 0)
        throw format_error("read_ttag: zero resolution");
    const unsigned n_channels = p[14];
    if (n_channels == 0)
        throw format_error("read_ttag: zero channel count");
    if ((n - 15) % 9 != 0)
        throw format_error("read_ttag: truncated record section");

    std::vector<TagStream> by_id(256);
    std::vector<bool> seen(256, false);
    for (size_t off = 15; off < n; off += 9) {
        const uint8_t ch = p[off];
        const uint64_t t = get_u64(p + off + 1);
        auto& s = by_id[ch];
        if (!s.ticks.empty() && t < s.ticks.back())
            throw format_error("read_ttag: ticks of channel " + std::to_string(ch) +
                               " are not nondecreasing");
        s.ticks.push_back(t);
        seen[ch] = true;
    }

    std::vector<TagStream> out;
    uint64_t last = 0;
    for (int ch = 0; ch < 256; ++ch) {
        if (!seen[ch]) continue;
        by_id[ch].channel_id = static_cast<uint8_t>(ch);
        by_id[ch].resolution_s = static_cast<double>(res_fs) * 1e-15;
        if (!by_id[ch].ticks.empty()) last = std::max(last, by_id[ch].ticks.back());
        out.push_back(std::move(by_id[ch]));
    }
    // fewer channels than promised is legal: a channel with no tags leaves
    // no records behind, so it silently disappears on a round trip
    if (out.size() > n_channels)
        throw format_error("read_ttag: header promises " + std::to_string(n_channels) +
                           " channels, found " + std::to_string(out.size()));
    for (auto& s : out)
        s.duration_s = static_cast<double>(last) * s.resolution_s;
    return out;
}

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_correlogram_csv(const std::string& path, const CorrelogramResult& r) {
    std::string out = "tau_s,counts,g2,g2_err\n";
    for (size_t i = 0; i < r.counts.size(); ++i) {
        out += format_double(r.tau_s[i]);
        out += ',';
        out += std::to_string(r.counts[i]);
        out += ',';
        out += format_double(r.g2[i]);
        out += ',';
        out += format_double(r.g2_err[i]);
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f)
        throw runtime_fault("write_correlogram_csv: cannot open '" + path + "'");
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f)
        throw runtime_fault("write_correlogram_csv: short write to '" + path + "'");
}

}  // namespace bpl
