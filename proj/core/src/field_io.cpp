#include "tfw/field_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "tfw/errors.hpp"

namespace tfw {

namespace {

constexpr char kMagic[4] = {'T', 'F', 'W', 'F'};

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<unsigned char>((v >> (8 * b)) & 0xffu));
}

void put_f64(std::vector<unsigned char>& out, double v) {
  auto const bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<unsigned char>((bits >> (8 * b)) & 0xffu));
}

std::uint32_t get_u32(std::vector<unsigned char> const& in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(in[offset + b]) << (8 * b);
  return v;
}

double get_f64(std::vector<unsigned char> const& in, std::size_t offset) {
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(in[offset + b]) << (8 * b);
  return std::bit_cast<double>(bits);
}

void require_bytes(std::vector<unsigned char> const& in, std::size_t needed, char const* what) {
  if (in.size() < needed) {
    throw FormatError(std::string("truncated field dump: ") + what + " needs " + std::to_string(needed) +
                      " bytes, file ends at byte offset " + std::to_string(in.size()));
  }
}

}  // namespace

std::vector<unsigned char> encode_field(ScalarField const& f) {
  std::vector<unsigned char> out;
  out.reserve(kFieldHeaderBytes + 8 * f.size());
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  put_u32(out, kFieldFormatVersion);
  put_u32(out, static_cast<std::uint32_t>(f.grid().n()));
  put_u32(out, 0);
  put_f64(out, f.grid().length());
  for (double v : f.values()) put_f64(out, v);
  return out;
}

ScalarField decode_field(std::vector<unsigned char> const& bytes) {
  require_bytes(bytes, 4, "magic");
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic at byte offset 0: expected \"TFWF\"");
  require_bytes(bytes, 8, "version");
  std::uint32_t const version = get_u32(bytes, 4);
  if (version != kFieldFormatVersion) {
    throw FormatError("unsupported field format version " + std::to_string(version) + " (reader supports version " +
                      std::to_string(kFieldFormatVersion) + ")");
  }
  require_bytes(bytes, kFieldHeaderBytes, "header");
  std::uint32_t const n = get_u32(bytes, 8);
  double const length = get_f64(bytes, 16);
  Grid grid = [&] {
    try {
      return Grid(static_cast<int>(n), length);
    } catch (InvalidArgument const& e) {
      throw FormatError(std::string("invalid grid in header at byte offset 8: ") + e.what());
    }
  }();
  std::size_t const count = grid.size();
  require_bytes(bytes, kFieldHeaderBytes + 8 * count, "payload");
  if (bytes.size() != kFieldHeaderBytes + 8 * count) {
    throw FormatError("trailing data after payload at byte offset " + std::to_string(kFieldHeaderBytes + 8 * count));
  }
  std::vector<double> values(count);
  for (std::size_t i = 0; i < count; ++i) values[i] = get_f64(bytes, kFieldHeaderBytes + 8 * i);
  return ScalarField(grid, std::move(values));
}

void store_field(ScalarField const& f, std::filesystem::path const& path) {
  auto const bytes = encode_field(f);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<char const*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw FormatError("write failed for " + path.string());
}

ScalarField load_field(std::filesystem::path const& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_field(bytes);
}

}  // namespace tfw
