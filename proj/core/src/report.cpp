#include "rwre/report.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "rwre/error.hpp"

namespace rwre {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : bytes) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex16(std::uint64_t v) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string fmt_g(double v, int precision) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.*g", precision, v);
  return buf;
}

void TextDoc::add(const std::string& key, const std::string& value) {
  lines_.push_back(key + " " + value);
}
void TextDoc::add(const std::string& key, double value) { add(key, fmt_g(value)); }
void TextDoc::add(const std::string& key, std::uint64_t value) {
  add(key, std::to_string(value));
}
void TextDoc::add_raw(const std::string& block) { lines_.push_back(block); }

std::string TextDoc::str() const {
  std::string out;
  for (const std::string& l : lines_) {
    out += l;
    if (out.empty() || out.back() != '\n') out += "\n";
  }
  return out;
}

Table::Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

void Table::add_row(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) throw UsageError("table row width mismatch");
  rows_.push_back(std::move(cells));
}

std::string Table::to_tsv() const {
  std::string out;
  for (size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += "\t";
    out += columns_[i];
  }
  out += "\n";
  for (const auto& row : rows_) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out += "\t";
      out += row[i];
    }
    out += "\n";
  }
  return out;
}

std::string Manifest::to_text() const {
  std::ostringstream out;
  out << "rwre-manifest v1\n";
  out << "config-hash " << config_hash << "\n";
  out << "version " << version << "\n";
  out << "status " << status << "\n";
  out << "workers " << workers << "\n";
  out << "elapsed-seconds " << fmt_g(elapsed_seconds, 6) << "\n";
  out << "seed-scheme " << seed_scheme << "\n";
  for (const auto& [file, digest] : file_digests) out << "digest " << file << " " << digest << "\n";
  return out.str();
}

Manifest Manifest::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open manifest " + path.string());
  Manifest m;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1) {
      if (line != "rwre-manifest v1") throw ParseError("not a manifest file", 1);
      continue;
    }
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "config-hash") ls >> m.config_hash;
    else if (key == "version") ls >> m.version;
    else if (key == "status") ls >> m.status;
    else if (key == "workers") ls >> m.workers;
    else if (key == "elapsed-seconds") ls >> m.elapsed_seconds;
    else if (key == "seed-scheme") {
      std::string rest;
      std::getline(ls, rest);
      if (!rest.empty() && rest[0] == ' ') rest.erase(0, 1);
      m.seed_scheme = rest;
    } else if (key == "digest") {
      std::string file, digest;
      ls >> file >> digest;
      m.file_digests[file] = digest;
    } else {
      throw ParseError("unknown manifest key '" + key + "'", line_no);
    }
  }
  return m;
}

void Manifest::write(const std::filesystem::path& path) const {
  write_text_file(path, to_text());
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path.string());
  out << content;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace rwre
