#include "dlm/matrix_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "dlm/error.hpp"

namespace dlm {

static_assert(std::endian::native == std::endian::little, "matrix container assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'D', 'L', 'M', 'M', 'A', 'T', '0', '1'};

void put_u64(std::ostream& out, std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t get_u64(std::istream& in) {
    std::uint64_t v = 0;
    if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw data_error("matrix container: truncated header");
    return v;
}

}  // namespace

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
    out.write(kMagic, sizeof kMagic);
    put_u64(out, static_cast<std::uint64_t>(m.rows()));
    put_u64(out, static_cast<std::uint64_t>(m.cols()));
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
    out.write(reinterpret_cast<const char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double)));
}

Eigen::MatrixXd read_matrix(std::istream& in) {
    char magic[8];
    if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw data_error("matrix container: bad magic");
    auto rows = get_u64(in), cols = get_u64(in);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
    if (!in.read(reinterpret_cast<char*>(rm.data()), static_cast<std::streamsize>(rm.size() * sizeof(double))))
        throw data_error("matrix container: truncated payload");
    return rm;
}

void save_matrices(const std::filesystem::path& path, const std::vector<Eigen::MatrixXd>& matrices) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write " + path.string());
    put_u64(out, matrices.size());
    for (const auto& m : matrices) write_matrix(out, m);
}

std::vector<Eigen::MatrixXd> load_matrices(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open " + path.string());
    auto n = get_u64(in);
    std::vector<Eigen::MatrixXd> out;
    for (std::uint64_t i = 0; i < n; ++i) out.push_back(read_matrix(in));
    return out;
}

}  // namespace dlm
