#include "hidalgo/io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "hidalgo/sampler.hpp"

namespace hidalgo::io {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& cell, double& out) {
  if (cell.empty()) return false;
  try {
    std::size_t used = 0;
    out = std::stod(cell, &used);
    return used == cell.size();
  } catch (const std::exception&) {
    return false;
  }
}

double to_double(const std::string& cell, std::size_t line) {
  double v = 0.0;
  if (!parse_double(cell, v))
    throw std::invalid_argument("row " + std::to_string(line) + ": '" + cell + "' is not a number");
  return v;
}

std::vector<std::vector<double>> numeric_rows(const CsvTable& t) {
  std::vector<std::vector<double>> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    std::vector<double> row;
    row.reserve(t.rows[r].size());
    for (const auto& cell : t.rows[r]) row.push_back(to_double(cell, r + 1));
    out.push_back(std::move(row));
  }
  return out;
}

}  // namespace

CsvTable parse_csv(std::istream& in) {
  CsvTable table;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<std::string> cells;
    std::stringstream ss(t);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
    if (t.back() == ',') cells.emplace_back();
    if (first) {
      first = false;
      const bool numeric = std::all_of(cells.begin(), cells.end(), [](const std::string& c) {
        double v = 0.0;
        return parse_double(c, v) || c == "uncertain";
      });
      if (!numeric) {
        table.header = std::move(cells);
        continue;
      }
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  return parse_csv(in);
}

PointCloud read_point_cloud(const std::string& path) {
  const auto rows = numeric_rows(read_csv(path));
  if (rows.empty()) throw std::invalid_argument("'" + path + "' holds no data rows");
  const std::size_t dim = rows.front().size();
  std::vector<double> coords;
  coords.reserve(rows.size() * dim);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != dim)
      throw std::invalid_argument("'" + path + "' row " + std::to_string(r + 1) + " has " +
                                  std::to_string(rows[r].size()) + " columns, expected " + std::to_string(dim));
    coords.insert(coords.end(), rows[r].begin(), rows[r].end());
  }
  return PointCloud(rows.size(), dim, std::move(coords));
}

DistanceMatrix read_distance_matrix(const std::string& path) {
  const auto rows = numeric_rows(read_csv(path));
  const std::size_t n = rows.size();
  std::vector<double> values;
  values.reserve(n * n);
  for (const auto& row : rows) {
    if (row.size() != n) throw std::invalid_argument("'" + path + "' is not a square matrix");
    values.insert(values.end(), row.begin(), row.end());
  }
  return DistanceMatrix(n, std::move(values));
}

std::vector<int> read_labels(const std::string& path) {
  const CsvTable t = read_csv(path);
  if (t.rows.empty()) throw std::invalid_argument("'" + path + "' holds no labels");
  std::size_t column = t.rows.front().size() == 1 ? 0 : 1;
  const auto named = std::find(t.header.begin(), t.header.end(), "label");
  if (named != t.header.end()) column = static_cast<std::size_t>(named - t.header.begin());
  std::vector<int> labels;
  labels.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (column >= t.rows[r].size())
      throw std::invalid_argument("'" + path + "' row " + std::to_string(r + 1) + " has no label column");
    const std::string& cell = t.rows[r][column];
    if (cell == "uncertain") {
      labels.push_back(kUncertain);
      continue;
    }
    const double v = to_double(cell, r + 1);
    if (v != static_cast<double>(static_cast<int>(v)))
      throw std::invalid_argument("'" + path + "' row " + std::to_string(r + 1) + ": label must be an integer");
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

std::vector<double> read_column(const std::string& path, const std::string& name) {
  const CsvTable t = read_csv(path);
  const auto it = std::find(t.header.begin(), t.header.end(), name);
  if (it == t.header.end()) throw std::invalid_argument("'" + path + "' has no column '" + name + "'");
  const auto column = static_cast<std::size_t>(it - t.header.begin());
  std::vector<double> out;
  out.reserve(t.rows.size());
  for (std::size_t r = 0; r < t.rows.size(); ++r) out.push_back(to_double(t.rows[r].at(column), r + 1));
  return out;
}

}  // namespace hidalgo::io
