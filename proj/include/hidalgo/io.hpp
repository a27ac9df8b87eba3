#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hidalgo/geometry.hpp"

namespace hidalgo::io {

/// Comma-separated table. Lines starting with '#' are skipped; the first row
/// is taken as a header when any of its cells fails to parse as a number.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable parse_csv(std::istream& in);
CsvTable read_csv(const std::string& path);

/// One point per row; every cell must be numeric.
PointCloud read_point_cloud(const std::string& path);
/// Square matrix, one row per point.
DistanceMatrix read_distance_matrix(const std::string& path);

/// Reads a labeling. Uses the `label` column when a header names one,
/// otherwise the only column, otherwise the second column (index, label).
/// The token `uncertain` maps to kUncertain.
std::vector<int> read_labels(const std::string& path);

/// Reads one numeric column by header name.
std::vector<double> read_column(const std::string& path, const std::string& name);

}  // namespace hidalgo::io
