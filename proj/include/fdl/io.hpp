#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fdl::io {

// Shortest round-trip decimal form of a double; stable across reruns.
std::string format_double(double x);

// Write-to-temp-then-rename so partial output is never observable.
void atomic_write(const std::string& path, const std::string& contents);
void atomic_write_bytes(const std::string& path, const void* data,
                        std::size_t size);

std::string read_file(const std::string& path);
std::vector<unsigned char> read_file_bytes(const std::string& path);

// FNV-1a 64-bit content hash, hex encoded; used for manifest input hashes.
std::string fnv1a_hex(const void* data, std::size_t size);
std::string hash_file(const std::string& path);

std::string iso8601_now();

}  // namespace fdl::io
