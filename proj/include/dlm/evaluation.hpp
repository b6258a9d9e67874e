#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dlm {

class FormMatrix;

// Pearson correlation; throws when either vector is constant or lengths differ.
double target_correlation(std::span<const double> predicted, std::span<const double> gold);
double target_correlation(const Eigen::VectorXd& predicted, const Eigen::VectorXd& gold);

struct WordResult {
    std::string key;
    double target_correlation = 0.0;  // NaN when the prediction is constant
    std::size_t rank = 0;             // 1-based rank of the target in the pool
    bool correct_at_1 = false;
    bool correct_at_k = false;
    bool tied = false;  // another pool row scored exactly the target's correlation
};

struct EvaluationSummary {
    std::size_t words = 0;
    std::size_t k = 1;
    double type_accuracy_at_1 = 0.0;
    double type_accuracy_at_k = 0.0;
    std::optional<double> token_accuracy_at_1;
    std::optional<double> token_accuracy_at_k;
    std::size_t ties = 0;
    std::size_t undefined = 0;  // constant predictions
    double mean_target_correlation = 0.0;
};

struct EvaluationReport {
    std::vector<WordResult> per_word;
    EvaluationSummary summary;
};

// Gold rows to rank against. Identical rows are scored identically, so ties between
// duplicate gold rows are exact and resolved toward the lower row index.
class GoldPool {
public:
    explicit GoldPool(const Eigen::MatrixXd& gold);
    explicit GoldPool(const FormMatrix& gold);

    std::size_t rows() const { return rows_; }
    std::size_t dims() const { return dims_; }

    // Correlation of one predicted row with every pool row.
    Eigen::VectorXd correlations(const Eigen::RowVectorXd& predicted) const;
    // Correlations for a block of predicted rows (block x pool).
    Eigen::MatrixXd correlations(const Eigen::MatrixXd& predicted) const;

private:
    std::size_t rows_ = 0, dims_ = 0;
    std::vector<std::size_t> representative_;  // first row with identical content
    Eigen::MatrixXd standardized_;             // dense pools: centered, unit-norm rows
    std::vector<std::vector<std::uint32_t>> sparse_rows_;
    Eigen::VectorXd sparse_scale_;  // 1/|g - mean(g)| per sparse row (0 for constant rows)
    bool sparse_ = false;
};

struct EvaluationOptions {
    std::size_t k = 10;
    std::optional<std::span<const double>> frequencies;  // token weighting
    std::optional<std::span<const std::string>> keys;
};

// Row i of `predicted` targets pool row targets[i].
EvaluationReport evaluate_against_pool(const Eigen::MatrixXd& predicted, const GoldPool& pool,
                                       std::span<const std::size_t> targets, const EvaluationOptions& options);

// Predicted row i targets gold row i.
EvaluationReport evaluate_nearest(const Eigen::MatrixXd& predicted, const GoldPool& gold, const EvaluationOptions& options);

void write_report_csv(std::ostream& out, const EvaluationReport& report);
std::string summary_json(const EvaluationSummary& summary);

}  // namespace dlm
