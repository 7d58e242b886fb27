#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "analytika/bytes.hpp"
#include "analytika/cancel.hpp"

namespace analytika {

// `unsupported` covers every other method and encrypted entries; reading one fails.
enum class CompressionMethod { stored, deflated, unsupported };

struct EntryMeta {
    std::string name;
    std::uint64_t compressed_size = 0;
    std::uint64_t uncompressed_size = 0;
    CompressionMethod method = CompressionMethod::stored;
    std::uint32_t crc32 = 0;
    // Byte offset of the entry's data (after the local file header).
    std::uint64_t data_offset = 0;
};

// Central-directory view of a ZIP/APK. Immutable once built; read_entry()
// may be called concurrently against the same index and source buffer.
struct ArchiveIndex {
    std::vector<EntryMeta> entries;
    std::uint64_t source_size = 0;
    std::vector<std::string> warnings;

    const EntryMeta* find(std::string_view name) const;
    std::vector<std::string> names() const;
};

// Parses the end-of-central-directory record and the central directory.
// Entries are listed in central-directory order; for duplicate names the last
// occurrence wins (kept at its own position) and a warning is recorded.
// Throws ArchiveError{MalformedArchive}.
ArchiveIndex open_archive(ByteView bytes);

// Decompresses one entry. `bytes` must be the buffer the index was built from.
// Throws ArchiveError{EntryNotFound, DecompressionError, SizeMismatch}.
Bytes read_entry(const ArchiveIndex& index, ByteView bytes, std::string_view name,
                 const Deadline& deadline = Deadline::never());

// Top-level classes.dex, classes2.dex, ... ordered by their multidex number.
std::vector<std::string> enumerate_dex(const ArchiveIndex& index);

// Entries under lib/ whose file name contains ".so".
std::vector<std::string> enumerate_native_libs(const ArchiveIndex& index);

// Lowercase hex SHA-256.
std::string sha256_digest(ByteView bytes);

// Owns an APK's bytes together with its index.
class ApkArchive {
public:
    explicit ApkArchive(Bytes bytes);

    const ArchiveIndex& index() const { return index_; }
    ByteView bytes() const { return bytes_; }
    Bytes read(std::string_view name, const Deadline& deadline = Deadline::never()) const {
        return read_entry(index_, bytes_, name, deadline);
    }

private:
    Bytes bytes_;
    ArchiveIndex index_;
};

Bytes read_file(const std::string& path);

}  // namespace analytika
