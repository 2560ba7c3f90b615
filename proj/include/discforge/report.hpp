#pragma once

// Deterministic text output shared by the experiment writers.  Numbers are
// printed with a fixed format so that reruns produce identical bytes.

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"

namespace discforge {

using Json = nlohmann::ordered_json;

/// Shortest round-trip decimal form ("%.17g" trimmed through std::to_chars).
std::string format_number(double v);

class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::vector<std::string> header);
  CsvWriter& cell(const std::string& v);
  CsvWriter& cell(double v);
  CsvWriter& cell(long long v);
  CsvWriter& cell(std::size_t v);
  CsvWriter& cell(int v) { return cell(static_cast<long long>(v)); }
  void end_row();

 private:
  std::ostream& out_;
  std::size_t columns_;
  std::size_t filled_ = 0;
};

/// Parses a CSV produced by CsvWriter (no quoting) into header + rows.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
CsvTable parse_csv(const std::string& text);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// `<command>_<kind>_n<n>_seed<seed>.<ext>`
std::string artifact_name(const std::string& command, const std::string& kind, std::size_t n, std::uint64_t seed,
                          const std::string& ext);

}  // namespace discforge
