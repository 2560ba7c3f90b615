#include "discforge/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "discforge/error.hpp"

namespace discforge {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

CsvWriter::CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), columns_(header.size()) {
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

CsvWriter& CsvWriter::cell(const std::string& v) {
  if (filled_ == columns_) throw StructuralError("csv row has too many cells");
  out_ << (filled_ ? "," : "") << v;
  ++filled_;
  return *this;
}
CsvWriter& CsvWriter::cell(double v) { return cell(format_number(v)); }
CsvWriter& CsvWriter::cell(long long v) { return cell(std::to_string(v)); }
CsvWriter& CsvWriter::cell(std::size_t v) { return cell(std::to_string(v)); }

void CsvWriter::end_row() {
  if (filled_ != columns_) throw StructuralError("csv row has " + std::to_string(filled_) + " of " +
                                                 std::to_string(columns_) + " cells");
  out_ << '\n';
  filled_ = 0;
}

CsvTable parse_csv(const std::string& text) {
  CsvTable t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
      if (c == ',') {
        out.push_back(cur);
        cur.clear();
      } else {
        cur += c;
      }
    }
    out.push_back(cur);
    return out;
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split(line);
    if (t.header.empty()) {
      t.header = std::move(cells);
    } else {
      if (cells.size() != t.header.size()) throw ParseError("wrong number of csv cells", lineno);
      t.rows.push_back(std::move(cells));
    }
  }
  if (t.header.empty()) throw ParseError("empty csv", 0);
  return t;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PreconditionError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw PreconditionError("cannot write " + path.string());
  out << text;
  if (!out) throw RuntimeFailure("write failed: " + path.string());
}

std::string artifact_name(const std::string& command, const std::string& kind, std::size_t n, std::uint64_t seed,
                          const std::string& ext) {
  return command + "_" + kind + "_n" + std::to_string(n) + "_seed" + std::to_string(seed) + "." + ext;
}

}  // namespace discforge
