#pragma once

// Output bundle helpers: TSV tables with a units header, an ordered
// key = value report, and SHA-256 digests of every file written.

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace qcomb::report {

std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Column names carry their unit, e.g. "tau_s", "counts".
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row);
  std::string to_tsv() const;
};

Table read_tsv(const std::filesystem::path& path);

class Report {
 public:
  void set(const std::string& key, double value);
  void set(const std::string& key, long long value);
  void set(const std::string& key, const std::string& value);
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }
  std::string to_text() const;

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

std::map<std::string, std::string> read_report(const std::filesystem::path& path);

/// Writes bytes and returns the digest of what was written.
std::string write_file(const std::filesystem::path& path, std::string_view bytes);

std::string format_number(double v);

}  // namespace qcomb::report
