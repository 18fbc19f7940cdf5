#pragma once

#include <string>
#include <vector>

namespace casetrain {

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(const std::string& data);

struct ArchiveEntry {
    std::string path;
    std::string data;
};

/// Serializes entries as a gzip-compressed ustar archive. All header fields
/// that would vary between runs (mtime, uid, gid, gzip os byte) are pinned,
/// so identical entries produce identical bytes.
std::string write_tar_gz(const std::vector<ArchiveEntry>& entries);

/// Inverse of write_tar_gz; also reads archives produced by standard tools.
/// Throws Error(ParseError) on malformed input.
std::vector<ArchiveEntry> read_tar_gz(const std::string& bytes);

}  // namespace casetrain
