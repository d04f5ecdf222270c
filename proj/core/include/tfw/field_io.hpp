#pragma once

// TFWF raw field dump.
//
// Layout (all little-endian):
//   offset  0  char[4]  magic "TFWF"
//   offset  4  u32      format version
//   offset  8  u32      n
//   offset 12  u32      reserved, written as zero
//   offset 16  f64      L
//   offset 24  f64[n^3] values, x fastest

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "tfw/grid.hpp"

namespace tfw {

inline constexpr std::uint32_t kFieldFormatVersion = 1;
inline constexpr std::size_t kFieldHeaderBytes = 24;

std::vector<unsigned char> encode_field(ScalarField const& f);
ScalarField decode_field(std::vector<unsigned char> const& bytes);

void store_field(ScalarField const& f, std::filesystem::path const& path);
ScalarField load_field(std::filesystem::path const& path);

}  // namespace tfw
