#include "artifacts.hpp"

#include <openssl/evp.h>

#include <array>
#include <cctype>
#include <fstream>
#include <memory>

#include "tfw/errors.hpp"
#include "tfw/field_io.hpp"

namespace tfw::cli {

std::string sha256_hex(void const* data, std::size_t size) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), data, size) != 1 || EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error("sha256: digest computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xf]);
  }
  return out;
}

std::string sha256_hex(std::string const& text) { return sha256_hex(text.data(), text.size()); }

ArtifactWriter::ArtifactWriter(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw Error("cannot create output directory " + root_.string() + ": " + ec.message());
}

void ArtifactWriter::write_bytes(std::string const& relative, void const* data, std::size_t size,
                                 std::string const& kind) {
  std::filesystem::path const path = root_ / relative;
  std::error_code ec;
  std::filesystem::create_directories(path.parent_path(), ec);
  if (ec) throw Error("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(static_cast<char const*>(data), static_cast<std::streamsize>(size));
  out.close();
  if (!out) throw Error("failed to write " + path.string());
  entries_.push_back({relative, kind, size, sha256_hex(data, size)});
}

void ArtifactWriter::write_text(std::string const& relative, std::string const& content, std::string const& kind) {
  write_bytes(relative, content.data(), content.size(), kind);
}

void ArtifactWriter::write_field(std::string const& relative, ScalarField const& field) {
  std::vector<unsigned char> const bytes = encode_field(field);
  write_bytes(relative, bytes.data(), bytes.size(), "tfwf");
}

nlohmann::json ArtifactWriter::manifest() const {
  nlohmann::json list = nlohmann::json::array();
  for (auto const& e : entries_) {
    list.push_back({{"path", e.path}, {"kind", e.kind}, {"bytes", e.bytes}, {"sha256", e.sha256}});
  }
  return list;
}

std::string ArtifactWriter::write_report(nlohmann::json report) {
  report["artifacts"] = manifest();
  std::string const text = report.dump(2) + "\n";
  std::filesystem::path const path = root_ / "report.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw Error("failed to write " + path.string());
  return sha256_hex(text);
}

std::string safe_file_stem(std::string const& name) {
  std::string out = name;
  for (char& c : out) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) c = '_';
  }
  return out.empty() ? "unnamed" : out;
}

}  // namespace tfw::cli
