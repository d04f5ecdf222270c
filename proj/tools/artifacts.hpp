#pragma once

// Output directory of one run. Every file written through the writer is
// listed in report.json with its size and SHA-256.

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "tfw/grid.hpp"

namespace tfw::cli {

std::string sha256_hex(void const* data, std::size_t size);
std::string sha256_hex(std::string const& text);

struct ArtifactEntry {
  std::string path;  // relative to the output directory, '/' separated
  std::string kind;  // "csv", "tfwf" or "json"
  std::size_t bytes = 0;
  std::string sha256;
};

class ArtifactWriter {
 public:
  explicit ArtifactWriter(std::filesystem::path root);

  std::filesystem::path const& root() const { return root_; }

  void write_text(std::string const& relative, std::string const& content, std::string const& kind);
  void write_field(std::string const& relative, ScalarField const& field);

  std::vector<ArtifactEntry> const& entries() const { return entries_; }
  nlohmann::json manifest() const;

  /// Adds the manifest under "artifacts" and writes report.json. Returns the
  /// hash of the report itself.
  std::string write_report(nlohmann::json report);

 private:
  void write_bytes(std::string const& relative, void const* data, std::size_t size, std::string const& kind);

  std::filesystem::path root_;
  std::vector<ArtifactEntry> entries_;
};

/// Keeps letters, digits, '-', '_' and '.'; everything else becomes '_'.
std::string safe_file_stem(std::string const& name);

}  // namespace tfw::cli
