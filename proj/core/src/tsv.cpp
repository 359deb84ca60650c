#include "stance/tsv.hpp"

#include <cstdio>
#include <stdexcept>

#include "stance/version.hpp"

namespace stance {

TsvWriter::TsvWriter(const std::string& path) : out_(path), path_(path) {
  if (!out_) throw std::runtime_error("cannot open for writing: " + path);
}

void TsvWriter::comment(std::string_view line) {
  out_ << "# " << line << "\n";
}

void TsvWriter::provenance(std::string_view config_hash, std::uint64_t seed) {
  out_ << "# stance " << kVersion << " config=" << config_hash << " seed=" << seed << "\n";
}

void TsvWriter::columns(const std::vector<std::string>& names) {
  out_ << "#:";
  for (const auto& n : names) out_ << '\t' << n;
  out_ << "\n";
}

void TsvWriter::row(const std::vector<std::string>& fields) {
  for (size_t i = 0; i < fields.size(); ++i) {
    if (i) out_ << '\t';
    out_ << fields[i];
  }
  out_ << "\n";
}

TsvFile read_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  TsvFile file;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.size() > 1 && line[1] == ':' && file.columns.empty()) {
        std::vector<std::string> cols;
        size_t pos = 2;
        while (pos < line.size()) {
          if (line[pos] == '\t') {
            ++pos;
            size_t end = line.find('\t', pos);
            cols.push_back(line.substr(pos, end == std::string::npos ? std::string::npos : end - pos));
            pos = (end == std::string::npos) ? line.size() : end;
          } else {
            ++pos;
          }
        }
        file.columns = std::move(cols);
      }
      continue;
    }
    std::vector<std::string> fields;
    size_t pos = 0;
    while (true) {
      size_t tab = line.find('\t', pos);
      fields.push_back(line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos));
      if (tab == std::string::npos) break;
      pos = tab + 1;
    }
    file.rows.push_back(std::move(fields));
  }
  return file;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace stance
