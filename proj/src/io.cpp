#include "dcgkit/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

namespace dcgkit::io {

namespace {

std::vector<std::vector<std::string>> split_records(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false, any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw InputError("csv: unterminated quoted field");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

std::string trim(std::string s) {
  const auto ws = [](unsigned char ch) { return std::isspace(ch) != 0; };
  while (!s.empty() && ws(s.back())) s.pop_back();
  std::size_t b = 0;
  while (b < s.size() && ws(s[b])) ++b;
  return s.substr(b);
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Cell {
  bool gap;
  double value;
};

Cell parse_cell(const std::string& raw, std::size_t row, std::size_t col) {
  const std::string s = trim(raw);
  if (s.empty() || s == "-") return {true, 0.0};
  if (s.size() == 1) {
    switch (std::toupper(static_cast<unsigned char>(s[0]))) {
      case 'A': return {false, 1.0};
      case 'G': return {false, 2.0};
      case 'C': return {false, 5.0};
      case 'T': return {false, 6.0};
      default: break;
    }
  }
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw InputError(fmt::format("csv: cell '{}' at data row {}, col {} is not a finite number", s, row + 1,
                                 col + 1));
  return {false, v};
}

}  // namespace

CsvTable parse_csv(std::string_view text) {
  auto records = split_records(text);
  if (records.size() < 2) throw InputError("csv: need a header row and at least one data row");
  CsvTable t;
  const auto& header = records.front();
  if (header.size() < 2) throw InputError("csv: header needs at least one column label");
  t.corner = trim(header.front());
  for (std::size_t c = 1; c < header.size(); ++c) t.col_labels.push_back(trim(header[c]));
  for (std::size_t r = 1; r < records.size(); ++r) {
    auto& rec = records[r];
    if (rec.size() != header.size())
      throw InputError(fmt::format("csv: line {} has {} fields, expected {}", r + 1, rec.size(), header.size()));
    t.row_labels.push_back(trim(rec.front()));
    t.cells.emplace_back(rec.begin() + 1, rec.end());
  }
  return t;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(fmt::format("cannot open '{}'", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

std::string format_number(double v) { return fmt::format("{}", v); }

DataMatrix matrix_from_csv(std::string_view text, std::optional<MatrixKind> kind) {
  const auto t = parse_csv(text);
  const std::size_t rows = t.row_labels.size(), cols = t.col_labels.size();
  std::vector<double> values(rows * cols);
  std::vector<std::uint8_t> gaps(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const Cell cell = parse_cell(t.cells[r][c], r, c);
      values[r * cols + c] = cell.value;
      gaps[r * cols + c] = cell.gap;
    }
  }
  if (!kind) {
    bool binary = true, coded = true;
    const auto codes = DataMatrix::default_codes();
    const std::set<double> code_set(codes.begin(), codes.end());
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (gaps[i]) continue;
      if (values[i] != 0.0 && values[i] != 1.0) binary = false;
      if (!code_set.contains(values[i])) coded = false;
    }
    kind = binary ? MatrixKind::binary : coded ? MatrixKind::coded : MatrixKind::real;
  }
  return DataMatrix(rows, cols, std::move(values), std::move(gaps), t.row_labels, t.col_labels, *kind);
}

DataMatrix read_matrix(const std::filesystem::path& path, std::optional<MatrixKind> kind) {
  return matrix_from_csv(read_file(path), kind);
}

std::string matrix_to_csv(const DataMatrix& m, std::string_view corner) {
  std::string out = csv_field(std::string(corner));
  for (const auto& l : m.col_labels()) out += "," + csv_field(l);
  out += '\n';
  for (std::size_t r = 0; r < m.rows(); ++r) {
    out += csv_field(m.row_labels()[r]);
    for (std::size_t c = 0; c < m.cols(); ++c) {
      out += ',';
      if (!m.is_gap(r, c)) out += format_number(m.at(r, c));
    }
    out += '\n';
  }
  return out;
}

DistanceMatrix distance_from_csv(std::string_view text) {
  const auto t = parse_csv(text);
  const std::size_t n = t.row_labels.size();
  if (t.col_labels.size() != n) throw InputError("distance csv must be square");
  if (t.col_labels != t.row_labels) throw InputError("distance csv row and column labels differ");
  std::vector<double> d(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const std::string s = trim(t.cells[r][c]);
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (s.empty() || ec != std::errc() || ptr != s.data() + s.size())
        throw InputError(fmt::format("distance csv: bad entry '{}' at row {}, col {}", s, r + 1, c + 1));
      d[r * n + c] = v;
    }
  }
  return DistanceMatrix(n, std::move(d), t.row_labels);
}

DistanceMatrix read_distance(const std::filesystem::path& path) { return distance_from_csv(read_file(path)); }

std::string square_to_csv(const std::vector<std::string>& labels, const std::vector<double>& values) {
  const std::size_t n = labels.size();
  std::string out;
  for (const auto& l : labels) out += "," + csv_field(l);
  out += '\n';
  for (std::size_t r = 0; r < n; ++r) {
    out += csv_field(labels[r]);
    for (std::size_t c = 0; c < n; ++c) out += "," + format_number(values[r * n + c]);
    out += '\n';
  }
  return out;
}

std::string distance_to_csv(const DistanceMatrix& d) { return square_to_csv(d.labels(), d.data()); }

}  // namespace dcgkit::io
