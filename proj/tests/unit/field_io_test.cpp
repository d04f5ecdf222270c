#include <gtest/gtest.h>

#include <cstring>
#include <fstream>
#include <iterator>

#include "test_support.hpp"
#include "tfw/errors.hpp"
#include "tfw/field_io.hpp"

namespace tfw {
namespace {

std::vector<unsigned char> read_bytes(std::filesystem::path const& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string error_of(std::vector<unsigned char> const& bytes) {
  try {
    decode_field(bytes);
  } catch (FormatError const& e) {
    return e.what();
  }
  return {};
}

TEST(FieldIo, RandomFieldRoundTripsByteIdentical) {
  auto const dir = testing::scratch_dir("field-io");
  Grid const g(8, 2.5);
  ScalarField f = testing::white_noise(g, 11);
  f[0] = -0.0;
  f[1] = 5e-324;
  f[2] = 1.7976931348623157e308;
  store_field(f, dir / "a.tfwf");
  ScalarField const back = load_field(dir / "a.tfwf");
  ASSERT_EQ(back.grid(), g);
  EXPECT_EQ(std::memcmp(back.data(), f.data(), 8 * f.size()), 0);
  store_field(back, dir / "b.tfwf");
  EXPECT_EQ(read_bytes(dir / "a.tfwf"), read_bytes(dir / "b.tfwf"));
}

TEST(FieldIo, HeaderLayout) {
  Grid const g(4, 1.5);
  auto const bytes = encode_field(ScalarField(g, 1.0));
  ASSERT_EQ(bytes.size(), kFieldHeaderBytes + 8 * 64);
  EXPECT_EQ(std::memcmp(bytes.data(), "TFWF", 4), 0);
  EXPECT_EQ(bytes[4], kFieldFormatVersion);
  EXPECT_EQ(bytes[8], 4);
  for (int i = 12; i < 16; ++i) EXPECT_EQ(bytes[i], 0);
  double L = 0.0;
  std::memcpy(&L, bytes.data() + 16, 8);  // little-endian host
  EXPECT_EQ(L, 1.5);
}

TEST(FieldIo, TruncatedFileNamesByteOffset) {
  auto bytes = encode_field(ScalarField(Grid(4, 1.0), 2.0));
  bytes.resize(100);
  std::string const msg = error_of(bytes);
  EXPECT_NE(msg.find("byte offset 100"), std::string::npos) << msg;
  bytes.resize(10);
  EXPECT_NE(error_of(bytes).find("byte offset 10"), std::string::npos);
}

TEST(FieldIo, VersionMismatchNamesVersions) {
  auto bytes = encode_field(ScalarField(Grid(4, 1.0)));
  bytes[4] = 7;
  std::string const msg = error_of(bytes);
  EXPECT_NE(msg.find("version 7"), std::string::npos) << msg;
  EXPECT_NE(msg.find("version " + std::to_string(kFieldFormatVersion)), std::string::npos) << msg;
}

TEST(FieldIo, BadMagicAndTrailingBytes) {
  auto bytes = encode_field(ScalarField(Grid(4, 1.0)));
  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_NE(error_of(bad).find("magic"), std::string::npos);
  auto longer = bytes;
  longer.push_back(0);
  EXPECT_NE(error_of(longer).find("trailing"), std::string::npos);
}

TEST(FieldIo, InvalidGridInHeader) {
  auto bytes = encode_field(ScalarField(Grid(4, 1.0)));
  bytes[8] = 5;
  EXPECT_THROW(decode_field(bytes), FormatError);
}

TEST(FieldIo, MissingFile) {
  EXPECT_THROW(load_field("/nonexistent/dir/x.tfwf"), FormatError);
}

}  // namespace
}  // namespace tfw
