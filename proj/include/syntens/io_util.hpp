#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>

namespace syntens {

/// Writes through a temp file in the same directory, then renames onto `path`,
/// so a crash never leaves a partial file at the destination. The writer runs
/// with exceptions enabled on the stream.
void atomic_write(const std::string& path, const std::function<void(std::ostream&)>& writer,
                  bool binary = false);

// little-endian fixed-width binary primitives
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);

/// Reads and checks a 4-byte magic; throws DataError on mismatch.
void expect_magic(std::istream& in, const char magic[4], const std::string& path);

/// Formats a double with enough digits to round-trip exactly.
std::string format_double(double v);

} // namespace syntens
