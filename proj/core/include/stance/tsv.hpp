#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace stance {

// Tab-separated output with '#'-prefixed comment lines. Every pipeline
// artifact starts with a standard header (tool version, config hash, seed)
// so that reruns are diffable and provenance travels with the file.
class TsvWriter {
 public:
  explicit TsvWriter(const std::string& path);

  void comment(std::string_view line);
  void provenance(std::string_view config_hash, std::uint64_t seed);
  void columns(const std::vector<std::string>& names);
  void row(const std::vector<std::string>& fields);

  bool good() const { return out_.good(); }

 private:
  std::ofstream out_;
  std::string path_;
};

struct TsvFile {
  std::vector<std::string> columns;              // from the "#: col1 col2" line, may be empty
  std::vector<std::vector<std::string>> rows;
};

// Reads a TSV file, dropping comment and blank lines. Throws on I/O failure.
TsvFile read_tsv(const std::string& path);

std::string fmt_double(double v);

}  // namespace stance
