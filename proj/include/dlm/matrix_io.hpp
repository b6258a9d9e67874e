#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace dlm {

// Binary container: 8-byte magic "DLMMAT01", uint64 rows, uint64 cols (little
// endian), then rows*cols IEEE-754 doubles in row-major order.
void write_matrix(std::ostream& out, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix(std::istream& in);

void save_matrices(const std::filesystem::path& path, const std::vector<Eigen::MatrixXd>& matrices);
std::vector<Eigen::MatrixXd> load_matrices(const std::filesystem::path& path);

}  // namespace dlm
