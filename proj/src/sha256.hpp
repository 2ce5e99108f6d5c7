#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fsd {

// Self-contained SHA-256, used for content digests (run directories,
// reproducibility records). Not a security boundary.
std::string sha256_hex(const void* data, size_t len);
inline std::string sha256_hex(const std::string& s) { return sha256_hex(s.data(), s.size()); }

// Digest of a file's bytes. Throws Errc::io if unreadable.
std::string sha256_file_hex(const std::string& path);

} // namespace fsd
