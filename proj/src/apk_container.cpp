#include "analytika/apk_container.hpp"

#include <openssl/evp.h>
#include <zlib.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <iterator>
#include <unordered_map>

#include "analytika/error.hpp"

namespace analytika {
namespace {

constexpr std::uint32_t kEocdSig = 0x06054b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::size_t kEocdSize = 22;
constexpr std::size_t kCentralSize = 46;
constexpr std::size_t kLocalSize = 30;

[[noreturn]] void malformed(const std::string& why) {
    throw ArchiveError(ArchiveErrc::MalformedArchive, "malformed archive: " + why);
}

std::size_t find_eocd(ByteView b) {
    if (b.size() < kEocdSize) malformed("too small for end of central directory");
    std::size_t last = b.size() - kEocdSize;
    std::size_t first = last > 0xFFFF ? last - 0xFFFF : 0;
    for (std::size_t pos = last + 1; pos-- > first;) {
        if (load_u32(&b[pos]) != kEocdSig) continue;
        // Accept only a record whose comment runs exactly to the end of input.
        if (pos + kEocdSize + load_u16(&b[pos + 20]) == b.size()) return pos;
    }
    malformed("end of central directory not found");
}

// Local-header span [start, data_end) used for overlap detection.
struct Region {
    std::uint64_t start;
    std::uint64_t end;
};

}  // namespace

const EntryMeta* ArchiveIndex::find(std::string_view name) const {
    auto it = std::find_if(entries.begin(), entries.end(),
                           [&](const EntryMeta& e) { return e.name == name; });
    return it == entries.end() ? nullptr : &*it;
}

std::vector<std::string> ArchiveIndex::names() const {
    std::vector<std::string> out;
    out.reserve(entries.size());
    for (const auto& e : entries) out.push_back(e.name);
    return out;
}

ArchiveIndex open_archive(ByteView b) {
    if (b.empty()) malformed("empty input");
    const std::size_t eocd = find_eocd(b);
    const std::uint16_t disk = load_u16(&b[eocd + 4]);
    const std::uint16_t cd_disk = load_u16(&b[eocd + 6]);
    const std::uint16_t disk_entries = load_u16(&b[eocd + 8]);
    const std::uint16_t total_entries = load_u16(&b[eocd + 10]);
    const std::uint32_t cd_size = load_u32(&b[eocd + 12]);
    const std::uint32_t cd_off = load_u32(&b[eocd + 16]);

    if (total_entries == 0xFFFF || cd_size == 0xFFFFFFFF || cd_off == 0xFFFFFFFF)
        malformed("zip64 archives are not supported");
    if (disk != 0 || cd_disk != 0 || disk_entries != total_entries) malformed("multi-disk archive");
    if (!in_bounds(cd_off, cd_size, eocd)) malformed("central directory out of bounds");

    ArchiveIndex index;
    index.source_size = b.size();
    std::vector<Region> regions;
    regions.reserve(total_entries);
    std::unordered_map<std::string, std::size_t> by_name;

    std::size_t pos = cd_off;
    const std::size_t cd_end = static_cast<std::size_t>(cd_off) + cd_size;
    for (std::uint32_t i = 0; i < total_entries; ++i) {
        if (!in_bounds(pos, kCentralSize, cd_end)) malformed("truncated central directory");
        if (load_u32(&b[pos]) != kCentralSig) malformed("bad central directory signature");
        const std::uint16_t method = load_u16(&b[pos + 10]);
        const std::uint32_t crc = load_u32(&b[pos + 16]);
        const std::uint32_t csize = load_u32(&b[pos + 20]);
        const std::uint32_t usize = load_u32(&b[pos + 24]);
        const std::uint16_t name_len = load_u16(&b[pos + 28]);
        const std::uint16_t extra_len = load_u16(&b[pos + 30]);
        const std::uint16_t comment_len = load_u16(&b[pos + 32]);
        const std::uint32_t local_off = load_u32(&b[pos + 42]);
        if (csize == 0xFFFFFFFF || usize == 0xFFFFFFFF || local_off == 0xFFFFFFFF)
            malformed("zip64 entries are not supported");
        const std::size_t record = kCentralSize + name_len + extra_len + comment_len;
        if (!in_bounds(pos, record, cd_end)) malformed("truncated central directory record");

        EntryMeta e;
        e.name.assign(reinterpret_cast<const char*>(&b[pos + kCentralSize]), name_len);
        e.compressed_size = csize;
        e.uncompressed_size = usize;
        e.crc32 = crc;
        if (method == 0) {
            e.method = CompressionMethod::stored;
            if (csize != usize) malformed("stored entry '" + e.name + "' with differing sizes");
        } else if (method == 8) {
            e.method = CompressionMethod::deflated;
        } else {
            e.method = CompressionMethod::unsupported;
        }
        if ((load_u16(&b[pos + 8]) & 0x1) != 0) e.method = CompressionMethod::unsupported;

        if (!in_bounds(local_off, kLocalSize, cd_off)) malformed("local header out of bounds");
        if (load_u32(&b[local_off]) != kLocalSig) malformed("bad local header signature");
        const std::uint64_t data_off = std::uint64_t{local_off} + kLocalSize +
                                       load_u16(&b[local_off + 26]) + load_u16(&b[local_off + 28]);
        if (!in_bounds(data_off, csize, cd_off)) malformed("entry data out of bounds");
        e.data_offset = data_off;
        regions.push_back({local_off, data_off + csize});

        if (auto it = by_name.find(e.name); it != by_name.end()) {
            index.warnings.push_back("duplicate entry '" + e.name + "', keeping the last occurrence");
            index.entries[it->second] = std::move(e);
        } else {
            by_name.emplace(e.name, index.entries.size());
            index.entries.push_back(std::move(e));
        }
        pos += record;
    }

    std::sort(regions.begin(), regions.end(),
              [](const Region& l, const Region& r) { return l.start < r.start; });
    for (std::size_t i = 1; i < regions.size(); ++i)
        if (regions[i].start < regions[i - 1].end) malformed("overlapping entries");
    return index;
}

Bytes read_entry(const ArchiveIndex& index, ByteView bytes, std::string_view name,
                 const Deadline& deadline) {
    const EntryMeta* e = index.find(name);
    if (e == nullptr)
        throw ArchiveError(ArchiveErrc::EntryNotFound, "entry not found: " + std::string(name));
    if (bytes.size() != index.source_size || !in_bounds(e->data_offset, e->compressed_size, bytes.size()))
        throw ArchiveError(ArchiveErrc::MalformedArchive, "source buffer does not match index");
    ByteView src = bytes.subspan(e->data_offset, e->compressed_size);

    Bytes out;
    switch (e->method) {
    case CompressionMethod::stored:
        out.assign(src.begin(), src.end());
        break;
    case CompressionMethod::deflated: {
        z_stream zs{};
        if (inflateInit2(&zs, -MAX_WBITS) != Z_OK)
            throw ArchiveError(ArchiveErrc::DecompressionError, "inflateInit failed");
        out.reserve(std::min<std::uint64_t>(e->uncompressed_size, 64u << 20));
        std::array<std::uint8_t, 64 * 1024> chunk;
        zs.next_in = const_cast<Bytef*>(src.data());
        zs.avail_in = static_cast<uInt>(src.size());
        int rc = Z_OK;
        while (rc != Z_STREAM_END) {
            deadline.check();
            zs.next_out = chunk.data();
            zs.avail_out = static_cast<uInt>(chunk.size());
            rc = inflate(&zs, Z_NO_FLUSH);
            if (rc != Z_OK && rc != Z_STREAM_END) {
                inflateEnd(&zs);
                throw ArchiveError(ArchiveErrc::DecompressionError,
                                   "corrupt deflate stream in '" + e->name + "'");
            }
            const std::size_t produced = chunk.size() - zs.avail_out;
            if (out.size() + produced > e->uncompressed_size) {
                inflateEnd(&zs);
                throw ArchiveError(ArchiveErrc::SizeMismatch,
                                   "'" + e->name + "' inflates beyond its declared size");
            }
            out.insert(out.end(), chunk.begin(), chunk.begin() + produced);
            if (rc == Z_OK && produced == 0 && zs.avail_in == 0) {
                inflateEnd(&zs);
                throw ArchiveError(ArchiveErrc::DecompressionError,
                                   "truncated deflate stream in '" + e->name + "'");
            }
        }
        inflateEnd(&zs);
        break;
    }
    case CompressionMethod::unsupported:
        throw ArchiveError(ArchiveErrc::DecompressionError,
                           "unsupported compression method or encryption in '" + e->name + "'");
    }

    if (out.size() != e->uncompressed_size)
        throw ArchiveError(ArchiveErrc::SizeMismatch,
                           "'" + e->name + "' is " + std::to_string(out.size()) + " bytes, expected " +
                               std::to_string(e->uncompressed_size));
    const auto crc = ::crc32(0L, out.data(), static_cast<uInt>(out.size()));
    if (crc != e->crc32)
        throw ArchiveError(ArchiveErrc::DecompressionError, "crc mismatch in '" + e->name + "'");
    return out;
}

std::vector<std::string> enumerate_dex(const ArchiveIndex& index) {
    std::vector<std::pair<unsigned, std::string>> found;
    for (const auto& e : index.entries) {
        std::string_view n = e.name;
        if (n == "classes.dex") {
            found.emplace_back(1, e.name);
            continue;
        }
        if (!n.starts_with("classes") || !n.ends_with(".dex")) continue;
        std::string_view digits = n.substr(7, n.size() - 7 - 4);
        if (digits.empty() || digits.front() == '0' || digits.size() > 9) continue;
        unsigned num = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), num);
        if (ec != std::errc{} || ptr != digits.data() + digits.size() || num < 2) continue;
        found.emplace_back(num, e.name);
    }
    std::sort(found.begin(), found.end());
    std::vector<std::string> out;
    for (auto& [num, name] : found) out.push_back(std::move(name));
    return out;
}

std::vector<std::string> enumerate_native_libs(const ArchiveIndex& index) {
    std::vector<std::string> out;
    for (const auto& e : index.entries) {
        if (!e.name.starts_with("lib/")) continue;
        auto slash = e.name.rfind('/');
        if (e.name.find(".so", slash + 1) != std::string::npos) out.push_back(e.name);
    }
    return out;
}

std::string sha256_digest(ByteView bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
        throw Error("sha256 digest failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned i = 0; i < len; ++i) {
        out.push_back(kHex[md[i] >> 4]);
        out.push_back(kHex[md[i] & 0xF]);
    }
    return out;
}

ApkArchive::ApkArchive(Bytes bytes) : bytes_(std::move(bytes)), index_(open_archive(bytes_)) {}

Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

}  // namespace analytika
