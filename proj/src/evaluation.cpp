#include "dlm/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <limits>
#include <map>
#include <ostream>
#include <unordered_map>

#include "json.hpp"
#include "dlm/cues.hpp"
#include "dlm/error.hpp"
#include "dlm/parallel.hpp"

namespace dlm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Centered, unit-norm copy; false when the row is constant.
bool standardize(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row) {
    if (row.size() == 0 || row.maxCoeff() == row.minCoeff()) {
        row.setZero();
        return false;
    }
    row.array() -= row.mean();
    const double norm = row.norm();
    if (norm == 0.0 || !std::isfinite(norm)) {
        row.setZero();
        return false;
    }
    row /= norm;
    return true;
}

std::uint64_t hash_bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace

double target_correlation(std::span<const double> predicted, std::span<const double> gold) {
    if (predicted.size() != gold.size()) throw data_error("target_correlation: vectors differ in length");
    if (predicted.size() < 2) throw data_error("target_correlation: need at least two elements");
    auto constant = [](std::span<const double> v) {
        return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
    };
    if (constant(predicted) || constant(gold)) throw numerical_error("target_correlation: undefined for a constant vector");
    const double n = static_cast<double>(predicted.size());
    double mp = 0.0, mg = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) mp += predicted[i], mg += gold[i];
    mp /= n, mg /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        const double dx = predicted[i] - mp, dy = gold[i] - mg;
        sxy += dx * dy, sxx += dx * dx, syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw numerical_error("target_correlation: undefined for a constant vector");
    return sxy / std::sqrt(sxx * syy);
}

double target_correlation(const Eigen::VectorXd& predicted, const Eigen::VectorXd& gold) {
    return target_correlation(std::span<const double>(predicted.data(), static_cast<std::size_t>(predicted.size())),
                              std::span<const double>(gold.data(), static_cast<std::size_t>(gold.size())));
}

GoldPool::GoldPool(const Eigen::MatrixXd& gold)
    : rows_(static_cast<std::size_t>(gold.rows())), dims_(static_cast<std::size_t>(gold.cols())), standardized_(gold) {
    representative_.resize(rows_);
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = gold;
    std::unordered_multimap<std::uint64_t, std::size_t> seen;
    for (std::size_t i = 0; i < rows_; ++i) {
        const double* row = rm.data() + i * dims_;
        const std::uint64_t h = hash_bytes(row, dims_ * sizeof(double));
        representative_[i] = i;
        auto [lo, hi] = seen.equal_range(h);
        for (auto it = lo; it != hi; ++it)
            if (std::memcmp(rm.data() + it->second * dims_, row, dims_ * sizeof(double)) == 0) {
                representative_[i] = it->second;
                break;
            }
        if (representative_[i] == i) seen.emplace(h, i);
        standardize(standardized_.row(static_cast<Eigen::Index>(i)));
    }
}

GoldPool::GoldPool(const FormMatrix& gold) : rows_(gold.rows()), dims_(gold.cols()), sparse_(true) {
    representative_.resize(rows_);
    sparse_scale_.resize(static_cast<Eigen::Index>(rows_));
    std::map<std::vector<std::uint32_t>, std::size_t> seen;
    const double k = static_cast<double>(dims_);
    for (std::size_t i = 0; i < rows_; ++i) {
        auto r = gold.row(i);
        sparse_rows_.emplace_back(r.begin(), r.end());
        representative_[i] = seen.emplace(sparse_rows_.back(), i).first->second;
        const double m = static_cast<double>(r.size());
        const double ss = m - m * m / k;  // |g - mean(g)|^2 for a binary row
        sparse_scale_(static_cast<Eigen::Index>(i)) = ss > 0.0 ? 1.0 / std::sqrt(ss) : 0.0;
    }
}

Eigen::MatrixXd GoldPool::correlations(const Eigen::MatrixXd& predicted) const {
    if (static_cast<std::size_t>(predicted.cols()) != dims_)
        throw data_error("evaluation: predicted vectors have " + std::to_string(predicted.cols()) +
                         " dimensions, gold has " + std::to_string(dims_));
    Eigen::MatrixXd p = predicted;
    std::vector<bool> defined(static_cast<std::size_t>(p.rows()));
    for (Eigen::Index i = 0; i < p.rows(); ++i) defined[static_cast<std::size_t>(i)] = standardize(p.row(i));

    Eigen::MatrixXd c;
    if (!sparse_) {
        c = p * standardized_.transpose();
    } else {
        c.resize(p.rows(), static_cast<Eigen::Index>(rows_));
        for (std::size_t j = 0; j < rows_; ++j) {
            const auto& cols = sparse_rows_[j];
            for (Eigen::Index i = 0; i < p.rows(); ++i) {
                double s = 0.0;
                for (auto col : cols) s += p(i, col);
                c(i, static_cast<Eigen::Index>(j)) = s * sparse_scale_(static_cast<Eigen::Index>(j));
            }
        }
    }
    for (std::size_t j = 0; j < rows_; ++j)
        if (representative_[j] != j) c.col(static_cast<Eigen::Index>(j)) = c.col(static_cast<Eigen::Index>(representative_[j]));
    for (Eigen::Index i = 0; i < p.rows(); ++i)
        if (!defined[static_cast<std::size_t>(i)]) c.row(i).setConstant(kNaN);
    return c;
}

Eigen::VectorXd GoldPool::correlations(const Eigen::RowVectorXd& predicted) const {
    Eigen::MatrixXd m = predicted;
    return correlations(m).row(0).transpose();
}

EvaluationReport evaluate_against_pool(const Eigen::MatrixXd& predicted, const GoldPool& pool,
                                       std::span<const std::size_t> targets, const EvaluationOptions& options) {
    const auto n = static_cast<std::size_t>(predicted.rows());
    if (targets.size() != n) throw data_error("evaluation: target list does not match the predicted rows");
    if (options.k < 1) throw config_error("evaluation: k must be at least 1");
    const std::size_t k = std::min(options.k, pool.rows());  // a pool smaller than k holds every candidate
    for (auto t : targets)
        if (t >= pool.rows()) throw data_error("evaluation: target row " + std::to_string(t) + " is not in the pool");
    if (options.frequencies && options.frequencies->size() != n)
        throw data_error("evaluation: frequency list does not match the predicted rows");
    if (options.keys && options.keys->size() != n) throw data_error("evaluation: key list does not match the predicted rows");

    EvaluationReport report;
    report.per_word.resize(n);
    constexpr std::size_t block = 64;
    const std::size_t n_blocks = (n + block - 1) / block;
    parallel_for(n_blocks, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) {
            const std::size_t start = b * block, len = std::min(block, n - start);
            Eigen::MatrixXd c = pool.correlations(
                Eigen::MatrixXd(predicted.middleRows(static_cast<Eigen::Index>(start), static_cast<Eigen::Index>(len))));
            for (std::size_t r = 0; r < len; ++r) {
                const std::size_t i = start + r, t = targets[i];
                WordResult& w = report.per_word[i];
                w.key = options.keys ? (*options.keys)[i] : std::to_string(i);
                const auto row = c.row(static_cast<Eigen::Index>(r));
                const double ct = row(static_cast<Eigen::Index>(t));
                w.target_correlation = ct;
                if (std::isnan(ct)) {
                    w.rank = pool.rows();
                    continue;
                }
                std::size_t above = 0;
                for (std::size_t j = 0; j < pool.rows(); ++j) {
                    const double cj = row(static_cast<Eigen::Index>(j));
                    if (cj > ct || (cj == ct && j < t)) ++above;
                    if (cj == ct && j != t) w.tied = true;
                }
                w.rank = above + 1;
                w.correct_at_1 = w.rank == 1;
                w.correct_at_k = w.rank <= k;
            }
        }
    });

    EvaluationSummary& s = report.summary;
    s.words = n;
    s.k = k;
    double hit1 = 0, hitk = 0, f_total = 0, f_hit1 = 0, f_hitk = 0, corr_sum = 0;
    std::size_t corr_n = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& w = report.per_word[i];
        hit1 += w.correct_at_1, hitk += w.correct_at_k;
        s.ties += w.tied;
        if (std::isnan(w.target_correlation)) {
            ++s.undefined;
        } else {
            corr_sum += w.target_correlation;
            ++corr_n;
        }
        if (options.frequencies) {
            const double f = (*options.frequencies)[i];
            f_total += f, f_hit1 += f * w.correct_at_1, f_hitk += f * w.correct_at_k;
        }
    }
    if (n > 0) {
        s.type_accuracy_at_1 = hit1 / static_cast<double>(n);
        s.type_accuracy_at_k = hitk / static_cast<double>(n);
    }
    if (corr_n > 0) s.mean_target_correlation = corr_sum / static_cast<double>(corr_n);
    if (options.frequencies && f_total > 0) {
        s.token_accuracy_at_1 = f_hit1 / f_total;
        s.token_accuracy_at_k = f_hitk / f_total;
    }
    return report;
}

EvaluationReport evaluate_nearest(const Eigen::MatrixXd& predicted, const GoldPool& gold, const EvaluationOptions& options) {
    if (static_cast<std::size_t>(predicted.rows()) != gold.rows())
        throw data_error("evaluation: predicted and gold row counts differ");
    std::vector<std::size_t> targets(gold.rows());
    for (std::size_t i = 0; i < targets.size(); ++i) targets[i] = i;
    return evaluate_against_pool(predicted, gold, targets, options);
}

void write_report_csv(std::ostream& out, const EvaluationReport& report) {
    out << "word,correlation,rank,correct_at_1,correct_at_k,tied\n";
    auto old = out.precision(17);
    for (const auto& w : report.per_word)
        out << w.key << ',' << w.target_correlation << ',' << w.rank << ',' << int(w.correct_at_1) << ','
            << int(w.correct_at_k) << ',' << int(w.tied) << '\n';
    out.precision(old);
}

std::string summary_json(const EvaluationSummary& s) {
    nlohmann::ordered_json j;
    j["words"] = s.words;
    j["k"] = s.k;
    j["type_accuracy_at_1"] = s.type_accuracy_at_1;
    j["type_accuracy_at_k"] = s.type_accuracy_at_k;
    j["token_accuracy_at_1"] = s.token_accuracy_at_1 ? nlohmann::ordered_json(*s.token_accuracy_at_1) : nullptr;
    j["token_accuracy_at_k"] = s.token_accuracy_at_k ? nlohmann::ordered_json(*s.token_accuracy_at_k) : nullptr;
    j["mean_target_correlation"] = s.mean_target_correlation;
    j["ties"] = s.ties;
    j["undefined"] = s.undefined;
    return j.dump(2);
}

}  // namespace dlm
