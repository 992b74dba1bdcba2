#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace rwre {

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex16(std::uint64_t v);

// full-precision double formatting (round-trips exactly)
std::string fmt_full(double v);
// readable formatting for tables and summaries
std::string fmt_g(double v, int precision = 12);

// Simple key/value result document, written as structured text.
class TextDoc {
 public:
  void add(const std::string& key, const std::string& value);
  void add(const std::string& key, double value);
  void add(const std::string& key, std::uint64_t value);
  void add_raw(const std::string& block);
  std::string str() const;

 private:
  std::vector<std::string> lines_;
};

// Tab-separated table with a header row; the flat export format.
class Table {
 public:
  explicit Table(std::vector<std::string> columns);
  void add_row(std::vector<std::string> cells);
  std::string to_tsv() const;
  size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

struct Manifest {
  std::string config_hash;
  std::string version;
  std::string status;  // "incomplete" | "complete"
  int workers = 0;
  double elapsed_seconds = 0.0;
  std::string seed_scheme;
  std::map<std::string, std::string> file_digests;  // file name -> fnv1a hex

  std::string to_text() const;
  static Manifest from_file(const std::filesystem::path& path);
  void write(const std::filesystem::path& path) const;
};

void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace rwre
