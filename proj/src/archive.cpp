#include "casetrain/archive.hpp"

#include <array>
#include <cstdio>
#include <cstring>

#include <openssl/evp.h>
#include <zlib.h>

#include "casetrain/errors.hpp"

namespace casetrain {

namespace {

constexpr std::size_t kBlock = 512;

void write_octal(char* field, std::size_t width, unsigned long long value) {
    // Width includes the trailing NUL.
    std::snprintf(field, width, "%0*llo", static_cast<int>(width - 1), value);
}

std::string tar_header(const std::string& path, std::size_t size) {
    if (path.size() > 99) {
        throw Error(ErrorCode::StorageError, "archive path too long for ustar", path);
    }
    std::array<char, kBlock> h{};
    std::memcpy(h.data(), path.c_str(), path.size());
    write_octal(h.data() + 100, 8, 0644);       // mode
    write_octal(h.data() + 108, 8, 0);          // uid
    write_octal(h.data() + 116, 8, 0);          // gid
    write_octal(h.data() + 124, 12, size);      // size
    write_octal(h.data() + 136, 12, 0);         // mtime, pinned
    std::memset(h.data() + 148, ' ', 8);        // checksum placeholder
    h[156] = '0';                               // regular file
    std::memcpy(h.data() + 257, "ustar", 6);    // magic
    std::memcpy(h.data() + 263, "00", 2);       // version

    unsigned checksum = 0;
    for (unsigned char c : h) checksum += c;
    std::snprintf(h.data() + 148, 7, "%06o", checksum);
    h[155] = ' ';
    return {h.data(), h.size()};
}

std::string gzip(const std::string& raw) {
    z_stream stream{};
    if (deflateInit2(&stream, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8,
                     Z_DEFAULT_STRATEGY) != Z_OK) {
        throw Error(ErrorCode::StorageError, "deflate initialization failed");
    }
    gz_header header{};
    header.os = 3;  // pinned, with mtime zero from the zero-initialized header
    deflateSetHeader(&stream, &header);

    std::string out;
    out.resize(deflateBound(&stream, static_cast<uLong>(raw.size())) + 32);
    stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(raw.data()));
    stream.avail_in = static_cast<uInt>(raw.size());
    stream.next_out = reinterpret_cast<Bytef*>(out.data());
    stream.avail_out = static_cast<uInt>(out.size());
    const int rc = deflate(&stream, Z_FINISH);
    if (rc != Z_STREAM_END) {
        deflateEnd(&stream);
        throw Error(ErrorCode::StorageError, "deflate failed", std::to_string(rc));
    }
    out.resize(stream.total_out);
    deflateEnd(&stream);
    return out;
}

std::string gunzip(const std::string& compressed) {
    z_stream stream{};
    if (inflateInit2(&stream, 15 + 32) != Z_OK) {
        throw Error(ErrorCode::ParseError, "inflate initialization failed");
    }
    std::string out;
    std::array<char, 1 << 16> chunk;
    stream.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
    stream.avail_in = static_cast<uInt>(compressed.size());
    int rc = Z_OK;
    do {
        stream.next_out = reinterpret_cast<Bytef*>(chunk.data());
        stream.avail_out = static_cast<uInt>(chunk.size());
        rc = inflate(&stream, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&stream);
            throw Error(ErrorCode::ParseError, "archive is not valid gzip data",
                        std::to_string(rc));
        }
        out.append(chunk.data(), chunk.size() - stream.avail_out);
    } while (rc != Z_STREAM_END && (stream.avail_in > 0 || stream.avail_out == 0));
    inflateEnd(&stream);
    if (rc != Z_STREAM_END) {
        throw Error(ErrorCode::ParseError, "truncated gzip stream");
    }
    return out;
}

}  // namespace

std::string sha256_hex(const std::string& data) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int length = 0;
    if (EVP_Digest(data.data(), data.size(), digest.data(), &length, EVP_sha256(), nullptr) != 1) {
        throw Error(ErrorCode::StorageError, "sha256 computation failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(length * 2);
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string write_tar_gz(const std::vector<ArchiveEntry>& entries) {
    std::string tar;
    for (const auto& entry : entries) {
        tar += tar_header(entry.path, entry.data.size());
        tar += entry.data;
        if (entry.data.size() % kBlock != 0) {
            tar.append(kBlock - entry.data.size() % kBlock, '\0');
        }
    }
    tar.append(2 * kBlock, '\0');
    return gzip(tar);
}

std::vector<ArchiveEntry> read_tar_gz(const std::string& bytes) {
    const std::string tar = gunzip(bytes);
    std::vector<ArchiveEntry> entries;
    std::size_t offset = 0;
    while (offset + kBlock <= tar.size()) {
        const char* header = tar.data() + offset;
        if (header[0] == '\0') break;  // end-of-archive blocks
        std::string path(header, strnlen(header, 100));
        char size_field[13]{};
        std::memcpy(size_field, header + 124, 12);
        const std::size_t size = std::strtoull(size_field, nullptr, 8);
        offset += kBlock;
        if (offset + size > tar.size()) {
            throw Error(ErrorCode::ParseError, "tar entry overruns the archive", path);
        }
        const char type = header[156];
        if (type == '0' || type == '\0') {
            entries.push_back({std::move(path), tar.substr(offset, size)});
        }
        offset += size;
        if (size % kBlock != 0) offset += kBlock - size % kBlock;
    }
    return entries;
}

}  // namespace casetrain
