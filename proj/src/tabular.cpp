#include "skewmix/tabular.hpp"

#include "skewmix/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <unordered_map>

namespace skewmix {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool parse_number(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  if (b != e && *b == '+') ++b;
  if (b == e) return false;
  const auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

}  // namespace

std::vector<std::string> split_fields(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(delim, start);
    std::string f = trim(line.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
    if (f.size() >= 2 && f.front() == '"' && f.back() == '"') f = f.substr(1, f.size() - 2);
    out.push_back(std::move(f));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

Dataset parse_dataset_csv(std::istream& in, const std::string& source) {
  std::string line;
  long line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      have_header = true;
      break;
    }
  }
  if (!have_header) throw ParseError(source + ": empty file");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

  const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
  const std::vector<std::string> header = split_fields(line, delim);
  if (header[0] != "sample_id") {
    throw ParseError(source + ": missing header (first line must start with a 'sample_id' column, got '" +
                     header[0] + "')");
  }
  if (header.size() < 2) throw ParseError(source + ": no marker columns after 'sample_id'");
  const int p = static_cast<int>(header.size()) - 1;

  std::vector<double> values;
  std::vector<int> sample_of;
  std::vector<std::string> names;
  std::unordered_map<std::string, int> index;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line, delim);
    if (fields.size() != header.size()) {
      throw ParseError(source + ": line " + std::to_string(line_no) + ": expected " +
                       std::to_string(header.size()) + " fields, found " + std::to_string(fields.size()));
    }
    const auto [it, inserted] = index.try_emplace(fields[0], static_cast<int>(names.size()));
    if (inserted) names.push_back(fields[0]);
    sample_of.push_back(it->second);
    for (int c = 0; c < p; ++c) {
      const std::string& cell = fields[static_cast<std::size_t>(c + 1)];
      double v = 0.0;
      if (!parse_number(cell, v)) {
        throw ParseError(source + ": line " + std::to_string(line_no) + ", column '" +
                         header[static_cast<std::size_t>(c + 1)] + "': '" + cell + "' is not a number");
      }
      if (!std::isfinite(v)) {
        throw ParseError(source + ": line " + std::to_string(line_no) + ", column '" +
                         header[static_cast<std::size_t>(c + 1)] + "': non-finite value '" + cell + "'");
      }
      values.push_back(v);
    }
  }
  if (sample_of.empty()) throw ParseError(source + ": header but no data rows");

  const int n = static_cast<int>(sample_of.size());
  RowMat y = Eigen::Map<const RowMat>(values.data(), n, p);
  Dataset d = Dataset::make(std::move(y), std::move(sample_of), static_cast<int>(names.size()));
  d.sample_names = std::move(names);
  d.marker_names.assign(header.begin() + 1, header.end());
  return d;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_dataset_csv(in, path);
}

std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  out << "sample_id";
  for (int c = 0; c < data.p(); ++c) {
    out << ',' << (c < static_cast<int>(data.marker_names.size()) ? data.marker_names[static_cast<std::size_t>(c)]
                                                                  : "m" + std::to_string(c + 1));
  }
  out << '\n';
  for (int i = 0; i < data.n(); ++i) {
    out << data.sample_names[static_cast<std::size_t>(data.sample_of[static_cast<std::size_t>(i)])];
    for (int c = 0; c < data.p(); ++c) out << ',' << format_double(data.y(i, c));
    out << '\n';
  }
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_dataset_csv(out, data);
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

}  // namespace skewmix
