#include "dlm/probe.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>

#include "dlm/embeddings.hpp"
#include "dlm/error.hpp"
#include "dlm/parallel.hpp"

namespace dlm {

namespace {

constexpr double kMinRcond = 1e-13;
constexpr double kJitter = 1e-9;

struct GroupStats {
    std::vector<std::string> labels;
    std::vector<std::size_t> row_label;  // index into labels
    std::vector<std::size_t> counts;
    Eigen::MatrixXd means;    // labels x dims
    Eigen::MatrixXd scatter;  // pooled within-class scatter (not divided)
};

GroupStats group_stats(const Eigen::MatrixXd& x, std::span<const std::string> labels) {
    if (static_cast<std::size_t>(x.rows()) != labels.size())
        throw data_error("lda: " + std::to_string(x.rows()) + " rows but " + std::to_string(labels.size()) + " labels");
    GroupStats g;
    std::set<std::string> distinct(labels.begin(), labels.end());
    g.labels.assign(distinct.begin(), distinct.end());
    std::map<std::string, std::size_t> index;
    for (std::size_t k = 0; k < g.labels.size(); ++k) index[g.labels[k]] = k;
    g.counts.assign(g.labels.size(), 0);
    g.means = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(g.labels.size()), x.cols());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        std::size_t k = index[labels[i]];
        g.row_label.push_back(k);
        ++g.counts[k];
        g.means.row(static_cast<Eigen::Index>(k)) += x.row(static_cast<Eigen::Index>(i));
    }
    for (std::size_t k = 0; k < g.labels.size(); ++k) g.means.row(static_cast<Eigen::Index>(k)) /= static_cast<double>(g.counts[k]);
    Eigen::MatrixXd centered = x;
    for (std::size_t i = 0; i < labels.size(); ++i)
        centered.row(static_cast<Eigen::Index>(i)) -= g.means.row(static_cast<Eigen::Index>(g.row_label[i]));
    g.scatter = centered.transpose() * centered;
    return g;
}

void check_fit_preconditions(const GroupStats& g) {
    if (g.labels.size() < 2) throw data_error("lda: need at least two labels");
    for (std::size_t k = 0; k < g.labels.size(); ++k)
        if (g.counts[k] < 2) throw data_error("lda: label '" + g.labels[k] + "' has a single member; cannot pool");
}

}  // namespace

LdaModel LdaModel::from_statistics(std::vector<std::string> labels, Eigen::MatrixXd means, const Eigen::MatrixXd& pooled,
                                   Eigen::VectorXd priors, double shrinkage) {
    if (!(shrinkage >= 0.0 && shrinkage <= 1.0)) throw config_error("lda: shrinkage must lie in [0, 1]");
    LdaModel m;
    m.labels_ = std::move(labels);
    m.means_ = std::move(means);
    m.priors_ = std::move(priors);
    m.shrinkage_ = shrinkage;
    m.covariance_ = (1.0 - shrinkage) * pooled;
    m.covariance_.diagonal() += shrinkage * pooled.diagonal();
    // A small diagonal floor keeps zero-variance directions (e.g. one-hot features) solvable.
    const double scale = pooled.trace() > 0.0 ? pooled.trace() / static_cast<double>(pooled.rows()) : 1.0;
    m.covariance_.diagonal().array() += kJitter * scale;
    m.factorize();
    return m;
}

void LdaModel::factorize() {
    Eigen::LLT<Eigen::MatrixXd> llt(covariance_);
    if (llt.info() != Eigen::Success || llt.rcond() < kMinRcond) {
        if (shrinkage_ == 0.0) throw numerical_error("lda: pooled covariance is singular; use a positive shrinkage");
        throw numerical_error("lda: pooled covariance is singular even after shrinkage (constant feature?)");
    }
    coef_ = llt.solve(means_.transpose());
    intercept_.resize(static_cast<Eigen::Index>(labels_.size()));
    for (Eigen::Index k = 0; k < intercept_.size(); ++k)
        intercept_(k) = std::log(priors_(k)) - 0.5 * means_.row(k).dot(coef_.col(k));
}

LdaModel LdaModel::fit(const Eigen::MatrixXd& x, std::span<const std::string> labels, double shrinkage) {
    GroupStats g = group_stats(x, labels);
    check_fit_preconditions(g);
    const double n = static_cast<double>(labels.size());
    const double dof = n - static_cast<double>(g.labels.size());
    Eigen::VectorXd priors(static_cast<Eigen::Index>(g.labels.size()));
    for (std::size_t k = 0; k < g.labels.size(); ++k) priors(static_cast<Eigen::Index>(k)) = static_cast<double>(g.counts[k]) / n;
    return from_statistics(std::move(g.labels), std::move(g.means), g.scatter / dof, std::move(priors), shrinkage);
}

LdaModel::Prediction LdaModel::predict(const Eigen::VectorXd& x) const {
    if (x.size() != means_.cols())
        throw data_error("lda: vector has " + std::to_string(x.size()) + " dimensions, model has " +
                         std::to_string(means_.cols()));
    Prediction p;
    p.scores = coef_.transpose() * x + intercept_;
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < p.scores.size(); ++k)
        if (p.scores(k) > p.scores(best)) best = k;
    p.label = static_cast<std::size_t>(best);
    for (Eigen::Index k = 0; k < p.scores.size(); ++k)
        if (k != best && p.scores(k) == p.scores(best)) p.tie = true;
    return p;
}

double majority_baseline(std::span<const std::string> labels) {
    if (labels.empty()) throw data_error("majority baseline of an empty label list");
    std::map<std::string, std::size_t> counts;
    std::size_t best = 0;
    for (const auto& l : labels) best = std::max(best, ++counts[l]);
    return static_cast<double>(best) / static_cast<double>(labels.size());
}

double resubstitution_accuracy(const LdaModel& model, const Eigen::MatrixXd& x, std::span<const std::string> labels) {
    std::size_t hits = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        hits += model.predict_label(x.row(i).transpose()) == labels[static_cast<std::size_t>(i)];
    return labels.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(labels.size());
}

LoocvResult loocv(const Eigen::MatrixXd& x, std::span<const std::string> labels, double shrinkage, LoocvMethod method) {
    GroupStats g = group_stats(x, labels);
    check_fit_preconditions(g);
    const std::size_t n = labels.size();
    const std::size_t n_labels = g.labels.size();
    LoocvResult result;
    result.predictions.resize(n);

    parallel_for(n, [&](std::size_t begin, std::size_t end) {
        std::vector<std::string> fold_labels;
        for (std::size_t i = begin; i < end; ++i) {
            const std::size_t k = g.row_label[i];
            if (g.counts[k] - 1 < 2) continue;
            const Eigen::VectorXd xi = x.row(static_cast<Eigen::Index>(i)).transpose();
            if (method == LoocvMethod::refit) {
                Eigen::MatrixXd xf(x.rows() - 1, x.cols());
                fold_labels.clear();
                for (std::size_t r = 0, o = 0; r < n; ++r) {
                    if (r == i) continue;
                    xf.row(static_cast<Eigen::Index>(o++)) = x.row(static_cast<Eigen::Index>(r));
                    fold_labels.push_back(labels[r]);
                }
                LdaModel m = LdaModel::fit(xf, fold_labels, shrinkage);
                result.predictions[i] = m.predict_label(xi);
                continue;
            }
            const double nk = static_cast<double>(g.counts[k]);
            const Eigen::RowVectorXd d = xi.transpose() - g.means.row(static_cast<Eigen::Index>(k));
            Eigen::MatrixXd scatter = g.scatter - (nk / (nk - 1.0)) * (d.transpose() * d);
            Eigen::MatrixXd means = g.means;
            means.row(static_cast<Eigen::Index>(k)) = (nk * g.means.row(static_cast<Eigen::Index>(k)) - xi.transpose()) / (nk - 1.0);
            Eigen::VectorXd priors(static_cast<Eigen::Index>(n_labels));
            for (std::size_t c = 0; c < n_labels; ++c)
                priors(static_cast<Eigen::Index>(c)) =
                    static_cast<double>(g.counts[c] - (c == k ? 1 : 0)) / static_cast<double>(n - 1);
            const double dof = static_cast<double>(n - 1 - n_labels);
            LdaModel m = LdaModel::from_statistics(g.labels, std::move(means), scatter / dof, std::move(priors), shrinkage);
            result.predictions[i] = m.predict_label(xi);
        }
    });

    std::size_t hits = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!result.predictions[i]) {
            ++result.skipped;
            continue;
        }
        ++result.folds;
        hits += *result.predictions[i] == labels[i];
    }
    result.accuracy = result.folds == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(result.folds);
    return result;
}

ProbeTarget parse_probe_target(std::string_view s) {
    if (s == "class") return ProbeTarget::inflectional_class;
    if (s == "case") return ProbeTarget::grammatical_case;
    if (s == "number") return ProbeTarget::number;
    if (s == "case_number" || s == "case×number") return ProbeTarget::case_number;
    throw config_error("probe target must be class, case, number or case_number; got '" + std::string(s) + "'");
}

std::string_view to_string(ProbeTarget t) {
    switch (t) {
        case ProbeTarget::inflectional_class: return "class";
        case ProbeTarget::grammatical_case: return "case";
        case ProbeTarget::number: return "number";
        default: return "case_number";
    }
}

std::optional<std::string> probe_label(const LexiconEntry& e, ProbeTarget target) {
    switch (target) {
        case ProbeTarget::inflectional_class:
            if (!e.inflectional_class) return std::nullopt;
            return std::to_string(*e.inflectional_class);
        case ProbeTarget::grammatical_case:
            if (e.grammatical_case == Case::uncertain) return std::nullopt;
            return std::string(case_name(e.grammatical_case));
        case ProbeTarget::number:
            if (e.number == Number::ambiguous) return std::nullopt;
            return std::string(number_name(e.number));
        default:
            if (e.grammatical_case == Case::uncertain) return std::nullopt;
            if (e.number == Number::ambiguous && e.grammatical_case != Case::comitative) return std::nullopt;
            return cell_label(e.grammatical_case, e.number);
    }
}

ProbeRow probe_rows(const std::string& name, const Eigen::MatrixXd& x, const std::vector<std::optional<std::string>>& labels,
                    const Lexicon& entries, const ProbeOptions& options) {
    if (labels.size() != static_cast<std::size_t>(x.rows()) || entries.size() != labels.size())
        throw data_error("probe: rows, labels and entries are not aligned");
    ProbeRow row;
    row.cell = name;
    std::map<std::string, std::size_t> counts;
    for (const auto& l : labels)
        if (l) ++counts[*l];
    std::vector<std::size_t> keep;
    std::set<std::string> lexemes, classes;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (!labels[i] || counts[*labels[i]] < 2) continue;
        keep.push_back(i);
        lexemes.insert(entries[i].lexeme);
        if (entries[i].inflectional_class) classes.insert(std::to_string(*entries[i].inflectional_class));
    }
    row.n_class = classes.size();
    row.n_lexeme = lexemes.size();
    row.n_token = keep.size();
    std::set<std::string> distinct;
    for (auto i : keep) distinct.insert(*labels[i]);
    if (keep.size() < options.min_tokens) {
        row.note = "fewer than " + std::to_string(options.min_tokens) + " tokens";
        return row;
    }
    if (distinct.size() < 2) {
        row.note = "fewer than two labels";
        return row;
    }
    Eigen::MatrixXd xs(static_cast<Eigen::Index>(keep.size()), x.cols());
    std::vector<std::string> ls;
    for (std::size_t r = 0; r < keep.size(); ++r) {
        xs.row(static_cast<Eigen::Index>(r)) = x.row(static_cast<Eigen::Index>(keep[r]));
        ls.push_back(*labels[keep[r]]);
    }
    try {
        LdaModel model = LdaModel::fit(xs, ls, options.shrinkage);
        row.lda = resubstitution_accuracy(model, xs, ls);
        row.lda_cv = loocv(xs, ls, options.shrinkage, options.loocv).accuracy;
        row.baseline = majority_baseline(ls);
    } catch (const Error& e) {
        row.lda.reset();
        row.lda_cv.reset();
        row.note = e.what();
    }
    return row;
}

std::vector<ProbeRow> probe_by_cell(const Lexicon& lexicon, const SemanticMatrix& semantics, ProbeTarget target,
                                    const ProbeOptions& options) {
    if (semantics.rows() != lexicon.size()) throw data_error("probe: semantic matrix is not row-aligned with the lexicon");
    std::map<std::string, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < lexicon.size(); ++i) {
        const auto& e = lexicon[i];
        if (e.grammatical_case == Case::uncertain) continue;
        if (e.number == Number::ambiguous && e.grammatical_case != Case::comitative) continue;
        cells[cell_label(e.grammatical_case, e.number)].push_back(i);
    }
    std::vector<ProbeRow> rows;
    for (const auto& [cell, members] : cells) {
        Eigen::MatrixXd x(static_cast<Eigen::Index>(members.size()), semantics.values.cols());
        std::vector<std::optional<std::string>> labels;
        Lexicon entries;
        for (std::size_t r = 0; r < members.size(); ++r) {
            x.row(static_cast<Eigen::Index>(r)) = semantics.values.row(static_cast<Eigen::Index>(members[r]));
            labels.push_back(probe_label(lexicon[members[r]], target));
            entries.push_back(lexicon[members[r]]);
        }
        rows.push_back(probe_rows(cell, x, labels, entries, options));
    }
    return rows;
}

void write_probe_csv(std::ostream& out, std::span<const ProbeRow> rows) {
    out << "cell,n_class,n_lexeme,n_token,lda_pct,lda_cv_pct,baseline_pct\n";
    auto pct = [&out](const std::optional<double>& v) {
        if (v)
            out << std::fixed << std::setprecision(1) << 100.0 * *v << std::defaultfloat;
        else
            out << "NA";
    };
    for (const auto& r : rows) {
        out << r.cell << ',' << r.n_class << ',' << r.n_lexeme << ',' << r.n_token << ',';
        pct(r.lda);
        out << ',';
        pct(r.lda_cv);
        out << ',';
        pct(r.baseline);
        out << '\n';
    }
}

}  // namespace dlm
