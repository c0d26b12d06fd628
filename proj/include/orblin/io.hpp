#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace orblin::io {

// Shortest text form that round-trips an IEEE double (17 significant digits).
std::string format_double(double v);

// Writes a CSV with the given header row; one row per column of `columns`'
// entries (each Eigen vector is one output column).
void write_csv(const std::filesystem::path& path, const std::vector<std::string>& header,
               const std::vector<Eigen::VectorXd>& columns);

}  // namespace orblin::io
