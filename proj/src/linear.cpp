#include "dlm/linear.hpp"

#include <cmath>
#include <fstream>
#include "json.hpp"

#include "dlm/error.hpp"
#include "dlm/matrix_io.hpp"

namespace dlm {

namespace {

// Below this reciprocal condition estimate the Gram matrix is treated as singular.
constexpr double kMinRcond = 1e-14;

Eigen::VectorXd checked_weights(const SolveOptions& options, Eigen::Index rows) {
    if (!options.row_weights) return Eigen::VectorXd::Ones(rows);
    auto w = *options.row_weights;
    if (static_cast<Eigen::Index>(w.size()) != rows)
        throw data_error("solve_linear: " + std::to_string(w.size()) + " row weights for " + std::to_string(rows) +
                         " rows");
    Eigen::VectorXd out(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        double v = w[static_cast<std::size_t>(i)];
        if (!(v >= 0.0) || !std::isfinite(v)) throw data_error("solve_linear: row weights must be finite and non-negative");
        out(i) = v;
    }
    return out;
}

LinearMapping finish(Eigen::MatrixXd gram, const Eigen::MatrixXd& rhs, const SolveOptions& options) {
    if (options.ridge < 0.0) throw config_error("ridge must be non-negative");
    gram.diagonal().array() += options.ridge;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success || llt.rcond() < kMinRcond) {
        if (options.ridge == 0.0)
            throw numerical_error("solve_linear: normal equations are singular; use a positive ridge (e.g. 1e-6)");
        throw numerical_error("solve_linear: normal equations are numerically singular at ridge " +
                              std::to_string(options.ridge));
    }
    LinearMapping m;
    m.weights = llt.solve(rhs);
    if (!m.weights.allFinite()) throw numerical_error("solve_linear: non-finite solution");
    m.kind = options.kind;
    m.learning = options.row_weights ? Learning::fil : Learning::eol;
    m.ridge = options.ridge;
    return m;
}

}  // namespace

std::string_view to_string(MappingKind k) { return k == MappingKind::comprehension ? "comprehension" : "production"; }
std::string_view to_string(Learning l) { return l == Learning::eol ? "EOL" : "FIL"; }

Learning parse_learning(std::string_view s) {
    if (s == "EOL" || s == "eol") return Learning::eol;
    if (s == "FIL" || s == "fil") return Learning::fil;
    throw config_error("learning must be EOL or FIL, got '" + std::string(s) + "'");
}

LinearMapping solve_linear(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const SolveOptions& options) {
    if (x.rows() != y.rows())
        throw data_error("solve_linear: X has " + std::to_string(x.rows()) + " rows but Y has " + std::to_string(y.rows()));
    Eigen::VectorXd w = checked_weights(options, x.rows());
    Eigen::MatrixXd wx = w.asDiagonal() * x;
    Eigen::MatrixXd gram = x.transpose() * wx;
    Eigen::MatrixXd rhs = wx.transpose() * y;
    return finish(std::move(gram), rhs, options);
}

LinearMapping solve_linear(const Eigen::SparseMatrix<double, Eigen::RowMajor>& x, const Eigen::MatrixXd& y,
                           const SolveOptions& options) {
    if (x.rows() != y.rows())
        throw data_error("solve_linear: X has " + std::to_string(x.rows()) + " rows but Y has " + std::to_string(y.rows()));
    Eigen::VectorXd w = checked_weights(options, x.rows());
    const Eigen::Index p = x.cols();
    Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(p, p);
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(p, y.cols());
    using It = Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double wi = w(i);
        if (wi == 0.0) continue;
        for (It a(x, i); a; ++a) {
            const double va = wi * a.value();
            rhs.row(a.col()) += va * y.row(i);
            for (It b(x, i); b; ++b) gram(a.col(), b.col()) += va * b.value();
        }
    }
    return finish(std::move(gram), rhs, options);
}

Eigen::MatrixXd apply_mapping(const LinearMapping& m, const Eigen::MatrixXd& rows) {
    if (rows.cols() != m.input_dims())
        throw data_error("apply_mapping: input has " + std::to_string(rows.cols()) + " columns, mapping expects " +
                         std::to_string(m.input_dims()));
    return rows * m.weights;
}

Eigen::MatrixXd apply_mapping(const LinearMapping& m, const Eigen::SparseMatrix<double, Eigen::RowMajor>& rows) {
    if (rows.cols() != m.input_dims())
        throw data_error("apply_mapping: input has " + std::to_string(rows.cols()) + " columns, mapping expects " +
                         std::to_string(m.input_dims()));
    return rows * m.weights;
}

void save_mapping(const std::filesystem::path& path, const LinearMapping& m, const std::string& inventory_hash) {
    save_matrices(path, {m.weights});
    nlohmann::ordered_json meta;
    meta["kind"] = to_string(m.kind);
    meta["learning"] = to_string(m.learning);
    meta["ridge"] = m.ridge;
    meta["input_dims"] = m.input_dims();
    meta["output_dims"] = m.output_dims();
    meta["cue_inventory_hash"] = inventory_hash;
    std::ofstream out(path.string() + ".json");
    out << meta.dump(2) << '\n';
}

LinearMapping load_mapping(const std::filesystem::path& path) {
    auto mats = load_matrices(path);
    if (mats.size() != 1) throw data_error(path.string() + ": expected a single matrix");
    std::ifstream in(path.string() + ".json");
    if (!in) throw data_error("missing mapping metadata " + path.string() + ".json");
    auto meta = nlohmann::json::parse(in);
    LinearMapping m;
    m.weights = std::move(mats[0]);
    m.kind = meta.at("kind").get<std::string>() == "production" ? MappingKind::production : MappingKind::comprehension;
    m.learning = parse_learning(meta.at("learning").get<std::string>());
    m.ridge = meta.at("ridge").get<double>();
    return m;
}

}  // namespace dlm
