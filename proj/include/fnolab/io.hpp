#pragma once

// Binary container used for datasets and model checkpoints:
//
//   bytes 0..7    magic "FNOLABC1"
//   bytes 8..15   header length (uint64, little-endian)
//   header        JSON: {"version", "kind", "meta", "arrays":[{name, shape}], "checksum"}
//   payload       the declared arrays, in order, as little-endian float64
//
// "checksum" is FNV-1a 64 over the payload bytes, so truncation and bit rot
// are caught on load. The header stays greppable with ordinary shell tools.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "fnolab/grid.hpp"

namespace fnolab::io {

using nlohmann::json;

class IoError : public Error {
  public:
    using Error::Error;
};
class MalformedFile : public IoError {
  public:
    using IoError::IoError;
};
class VersionMismatch : public IoError {
  public:
    using IoError::IoError;
};
class ChecksumFailure : public IoError {
  public:
    using IoError::IoError;
};

inline constexpr char kMagic[9] = "FNOLABC1";
inline constexpr int kContainerVersion = 1;

inline std::uint64_t fnv1a64(const void* data, std::size_t len,
                             std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) h = (h ^ p[i]) * 0x100000001b3ull;
    return h;
}

inline std::string checksum_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::uint64_t file_checksum(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for checksum: " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[1 << 16];
    while (in.read(buf, sizeof buf) || in.gcount() > 0)
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    return h;
}

namespace detail {

inline std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
}

inline void doubles_to_le_bytes(const double* src, std::size_t count, std::vector<char>& out) {
    out.resize(count * 8);
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(out.data(), src, count * 8);
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const std::uint64_t v = to_le(std::bit_cast<std::uint64_t>(src[i]));
            std::memcpy(out.data() + 8 * i, &v, 8);
        }
    }
}

inline void le_bytes_to_doubles(const char* src, std::size_t count, double* out) {
    if constexpr (std::endian::native == std::endian::little) {
        std::memcpy(out, src, count * 8);
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            std::uint64_t v;
            std::memcpy(&v, src + 8 * i, 8);
            out[i] = std::bit_cast<double>(to_le(v));
        }
    }
}

} // namespace detail

struct Array {
    std::string name;
    std::vector<std::int64_t> shape;
    std::vector<double> data;

    std::int64_t count() const {
        return std::accumulate(shape.begin(), shape.end(), std::int64_t{1},
                               [](std::int64_t a, std::int64_t b) { return a * b; });
    }
};

struct Container {
    json meta;
    std::string kind;
    std::vector<Array> arrays;

    const Array& find(const std::string& name) const {
        for (const auto& a : arrays)
            if (a.name == name) return a;
        throw MalformedFile("container: missing array '" + name + "'");
    }
};

inline void write_container(const std::string& path, const std::string& kind, const json& meta,
                            const std::vector<Array>& arrays) {
    for (const auto& a : arrays)
        if (a.count() != static_cast<std::int64_t>(a.data.size()))
            throw IoError("write_container: shape/data mismatch in array '" + a.name + "'");

    std::vector<char> payload;
    {
        std::size_t total = 0;
        for (const auto& a : arrays) total += a.data.size();
        payload.reserve(total * 8);
        std::vector<char> chunk;
        for (const auto& a : arrays) {
            detail::doubles_to_le_bytes(a.data.data(), a.data.size(), chunk);
            payload.insert(payload.end(), chunk.begin(), chunk.end());
        }
    }

    json header;
    header["version"] = kContainerVersion;
    header["kind"] = kind;
    header["meta"] = meta;
    header["arrays"] = json::array();
    for (const auto& a : arrays) header["arrays"].push_back({{"name", a.name}, {"shape", a.shape}});
    header["checksum"] = checksum_hex(fnv1a64(payload.data(), payload.size()));
    const std::string htext = header.dump();

    if (const auto dir = std::filesystem::path(path).parent_path(); !dir.empty())
        std::filesystem::create_directories(dir);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path);
    out.write(kMagic, 8);
    const std::uint64_t hlen = detail::to_le(htext.size());
    out.write(reinterpret_cast<const char*>(&hlen), 8);
    out.write(htext.data(), static_cast<std::streamsize>(htext.size()));
    out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!out) throw IoError("write failed: " + path);
}

inline Container read_container(const std::string& path, const std::string& expected_kind) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);

    char magic[8];
    if (!in.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
        throw MalformedFile(path + ": not a fnolab container (bad magic)");
    std::uint64_t hlen_le;
    if (!in.read(reinterpret_cast<char*>(&hlen_le), 8))
        throw MalformedFile(path + ": header length missing");
    const std::uint64_t hlen = detail::to_le(hlen_le);
    if (hlen == 0 || hlen > (1ull << 30)) throw MalformedFile(path + ": absurd header length");
    std::string htext(hlen, '\0');
    if (!in.read(htext.data(), static_cast<std::streamsize>(hlen)))
        throw MalformedFile(path + ": truncated header");

    json header;
    try {
        header = json::parse(htext);
    } catch (const json::exception& e) {
        throw MalformedFile(path + ": header is not valid JSON: " + e.what());
    }
    const int version = header.at("version").get<int>();
    if (version != kContainerVersion)
        throw VersionMismatch(path + ": container version " + std::to_string(version) +
                              ", expected " + std::to_string(kContainerVersion));
    Container c;
    c.kind = header.at("kind").get<std::string>();
    if (!expected_kind.empty() && c.kind != expected_kind)
        throw MalformedFile(path + ": kind '" + c.kind + "', expected '" + expected_kind + "'");
    c.meta = header.value("meta", json::object());

    std::size_t total = 0;
    for (const auto& ja : header.at("arrays")) {
        Array a;
        a.name = ja.at("name").get<std::string>();
        a.shape = ja.at("shape").get<std::vector<std::int64_t>>();
        if (a.count() < 0) throw MalformedFile(path + ": negative array extent");
        total += static_cast<std::size_t>(a.count());
        c.arrays.push_back(std::move(a));
    }

    std::vector<char> payload(total * 8);
    in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
    const auto got = static_cast<std::size_t>(in.gcount());
    const std::string declared = header.at("checksum").get<std::string>();
    if (got != payload.size())
        throw ChecksumFailure(path + ": payload truncated (" + std::to_string(got) + " of " +
                              std::to_string(payload.size()) + " bytes); declared checksum " +
                              declared);
    const std::string actual = checksum_hex(fnv1a64(payload.data(), payload.size()));
    if (actual != declared)
        throw ChecksumFailure(path + ": payload checksum " + actual + " != declared " + declared);

    std::size_t off = 0;
    for (auto& a : c.arrays) {
        a.data.resize(static_cast<std::size_t>(a.count()));
        detail::le_bytes_to_doubles(payload.data() + off * 8, a.data.size(), a.data.data());
        off += a.data.size();
    }
    return c;
}

// full-precision float formatting shared by every CSV writer, so identical
// runs produce identical bytes
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_text_file(const std::string& path, const std::string& text) {
    if (const auto dir = std::filesystem::path(path).parent_path(); !dir.empty())
        std::filesystem::create_directories(dir);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open for write: " + path);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("write failed: " + path);
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::string s((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return s;
}

} // namespace fnolab::io
