#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlm/lexicon.hpp"

namespace dlm {

struct SemanticMatrix;

// Linear discriminant analysis with a pooled within-class covariance shrunk toward
// its diagonal, (1 - shrinkage) * S + shrinkage * diag(S), plus a 1e-9 * mean(diag(S)) floor.
class LdaModel {
public:
    static LdaModel fit(const Eigen::MatrixXd& x, std::span<const std::string> labels, double shrinkage);

    const std::vector<std::string>& labels() const { return labels_; }  // sorted
    const Eigen::MatrixXd& means() const { return means_; }            // labels x dims
    const Eigen::MatrixXd& covariance() const { return covariance_; }
    const Eigen::VectorXd& priors() const { return priors_; }
    double shrinkage() const { return shrinkage_; }

    struct Prediction {
        std::size_t label = 0;  // index into labels()
        bool tie = false;
        Eigen::VectorXd scores;  // linear discriminant per label
    };
    Prediction predict(const Eigen::VectorXd& x) const;
    const std::string& predict_label(const Eigen::VectorXd& x) const { return labels_[predict(x).label]; }

    // Built directly from sufficient statistics; used by the leave-one-out fast path.
    static LdaModel from_statistics(std::vector<std::string> labels, Eigen::MatrixXd means, const Eigen::MatrixXd& pooled,
                                    Eigen::VectorXd priors, double shrinkage);

private:
    void factorize();

    std::vector<std::string> labels_;
    Eigen::MatrixXd means_;
    Eigen::MatrixXd covariance_;
    Eigen::VectorXd priors_;
    double shrinkage_ = 0.0;
    Eigen::MatrixXd coef_;       // dims x labels: Sigma^-1 mu_k
    Eigen::VectorXd intercept_;  // log prior - mu' Sigma^-1 mu / 2
};

double majority_baseline(std::span<const std::string> labels);
double resubstitution_accuracy(const LdaModel& model, const Eigen::MatrixXd& x, std::span<const std::string> labels);

enum class LoocvMethod {
    refit,    // fit from scratch on every fold
    downdate, // remove the held-out row from the pooled statistics
};

struct LoocvResult {
    double accuracy = 0.0;
    std::size_t folds = 0;
    std::size_t skipped = 0;  // held-out label would be left with a single member
    std::vector<std::optional<std::string>> predictions;  // per row, empty when skipped
};

LoocvResult loocv(const Eigen::MatrixXd& x, std::span<const std::string> labels, double shrinkage,
                  LoocvMethod method = LoocvMethod::refit);
inline double loocv_accuracy(const Eigen::MatrixXd& x, std::span<const std::string> labels, double shrinkage) {
    return loocv(x, labels, shrinkage).accuracy;
}

enum class ProbeTarget { inflectional_class, grammatical_case, number, case_number };
ProbeTarget parse_probe_target(std::string_view s);
std::string_view to_string(ProbeTarget t);

// Label of an entry for a target, or empty when it has none (unknown class, ...).
std::optional<std::string> probe_label(const LexiconEntry& e, ProbeTarget target);

struct ProbeRow {
    std::string cell;
    std::size_t n_class = 0;
    std::size_t n_lexeme = 0;
    std::size_t n_token = 0;
    std::optional<double> lda;       // fractions in [0, 1]; empty = NA
    std::optional<double> lda_cv;
    std::optional<double> baseline;
    std::string note;
};

struct ProbeOptions {
    double shrinkage = 0.1;
    std::size_t min_tokens = 30;
    LoocvMethod loocv = LoocvMethod::downdate;
};

// LDA over a whole matrix; rows without a label and labels with a single member are dropped.
ProbeRow probe_rows(const std::string& name, const Eigen::MatrixXd& x, const std::vector<std::optional<std::string>>& labels,
                    const Lexicon& entries, const ProbeOptions& options);

// One LDA per paradigm cell. `semantics` is row-aligned with `lexicon`.
std::vector<ProbeRow> probe_by_cell(const Lexicon& lexicon, const SemanticMatrix& semantics, ProbeTarget target,
                                    const ProbeOptions& options = {});

void write_probe_csv(std::ostream& out, std::span<const ProbeRow> rows);

}  // namespace dlm
