#include "dlm/productivity.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <set>
#include <unordered_map>

#include "dlm/error.hpp"
#include "dlm/text.hpp"

namespace dlm {

double ClassProductivity::logV() const { return std::log(static_cast<double>(V)); }
double ClassProductivity::logV1() const { return std::log(static_cast<double>(V1) + 1.0); }
double ClassProductivity::logMedian() const { return std::log(median_lemma_freq); }
double ClassProductivity::logP() const { return std::log(P + 0.01); }
double ClassProductivity::logPstar() const { return std::log(Pstar + 0.01); }

LemmaFrequencies load_lemma_frequencies(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open lemma frequency file " + path.string());
    std::string line;
    if (!std::getline(in, line) || text::trim(line) != "lexeme,frequency")
        throw data_error(path.string() + ": header must be 'lexeme,frequency'");
    LemmaFrequencies out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (text::trim(line).empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        auto fields = text::split(text::trim(line), ',');
        if (fields.size() != 2) throw data_error(where + ": expected 2 columns");
        std::string_view f = text::trim(fields[1]);
        std::uint64_t value = 0;
        auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
        if (f.empty() || ec != std::errc{} || ptr != f.data() + f.size() || value < 1)
            throw data_error(where + ": frequency must be a positive integer");
        if (!out.emplace(text::normalize(text::trim(fields[0])), value).second)
            throw data_error(where + ": duplicate lexeme '" + fields[0] + "'");
    }
    return out;
}

LemmaFrequencies lemma_frequencies_from(const Lexicon& entries) {
    LemmaFrequencies out;
    for (const auto& e : entries) out[e.lexeme] += e.frequency;
    return out;
}

std::vector<ClassProductivity> class_measures(const Lexicon& entries, const LemmaFrequencies& lemma_freqs) {
    std::map<int, std::set<std::string>> lexemes;
    for (const auto& e : entries)
        if (e.inflectional_class) lexemes[*e.inflectional_class].insert(e.lexeme);

    std::vector<ClassProductivity> out;
    std::size_t total_hapaxes = 0;
    for (const auto& [cls, members] : lexemes) {
        ClassProductivity p;
        p.class_id = cls;
        std::vector<double> freqs;
        for (const auto& lex : members) {
            auto it = lemma_freqs.find(lex);
            if (it == lemma_freqs.end()) throw data_error("no lemma frequency for lexeme '" + lex + "'");
            freqs.push_back(static_cast<double>(it->second));
            p.N += it->second;
            if (it->second == 1) ++p.V1;
        }
        p.V = members.size();
        std::sort(freqs.begin(), freqs.end());
        const std::size_t m = freqs.size();
        p.median_lemma_freq = m % 2 == 1 ? freqs[m / 2] : 0.5 * (freqs[m / 2 - 1] + freqs[m / 2]);
        p.P = p.N == 0 ? 0.0 : static_cast<double>(p.V1) / static_cast<double>(p.N);
        total_hapaxes += p.V1;
        out.push_back(p);
    }
    for (auto& p : out)
        p.Pstar = total_hapaxes == 0 ? 0.0 : static_cast<double>(p.V1) / static_cast<double>(total_hapaxes);
    return out;
}

std::vector<ClassPerformance> class_performance(std::span<const WordPerformance> rows, const Lexicon& entries) {
    std::unordered_map<std::string, const LexiconEntry*> by_key;
    for (const auto& e : entries) by_key.emplace(e.key(), &e);

    struct Acc {
        double corr = 0, acc = 0, sup = 0;
        std::size_t n_corr = 0, n_acc = 0, n_sup = 0, n = 0;
    };
    std::map<int, Acc> acc;
    for (const auto& r : rows) {
        auto it = by_key.find(r.key);
        if (it == by_key.end()) throw data_error("class_performance: '" + r.key + "' is not in the lexicon");
        const LexiconEntry& e = *it->second;
        if (!e.classifiable()) continue;
        Acc& a = acc[*e.inflectional_class];
        ++a.n;
        if (r.correlation && std::isfinite(*r.correlation)) a.corr += *r.correlation, ++a.n_corr;
        if (r.accuracy) a.acc += *r.accuracy, ++a.n_acc;
        if (r.support && std::isfinite(*r.support)) a.sup += *r.support, ++a.n_sup;
    }
    if (acc.empty()) throw data_error("class_performance: no result rows joined to classifiable lexicon entries");

    std::vector<ClassPerformance> out;
    for (const auto& [cls, a] : acc) {
        ClassPerformance p;
        p.class_id = cls;
        p.n_words = a.n;
        if (a.n_corr) p.mean_target_correlation = a.corr / static_cast<double>(a.n_corr);
        if (a.n_acc) p.mean_accuracy = a.acc / static_cast<double>(a.n_acc);
        if (a.n_sup) p.mean_support = a.sup / static_cast<double>(a.n_sup);
        p.unstable = a.n < 5;
        out.push_back(p);
    }
    return out;
}

std::vector<double> mid_ranks(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    std::vector<double> ranks(n);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && values[order[j + 1]] == values[order[i]]) ++j;
        const double r = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

SpearmanResult spearman(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw data_error("spearman: inputs differ in length");
    const std::size_t n = x.size();
    if (n < 3) throw data_error("spearman: need at least 3 observations");
    auto rx = mid_ranks(x), ry = mid_ranks(y);
    const double mean = 0.5 * static_cast<double>(n + 1);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = rx[i] - mean, dy = ry[i] - mean;
        sxy += dx * dy, sxx += dx * dx, syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0) throw numerical_error("spearman: undefined for constant input");
    SpearmanResult r;
    r.rho = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    if (std::abs(r.rho) == 1.0) {
        r.p_value = 0.0;
        return r;
    }
    const double df = static_cast<double>(n - 2);
    const double t = r.rho * std::sqrt(df / (1.0 - r.rho * r.rho));
    boost::math::students_t dist(df);
    r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
    return r;
}

double measure_value(const ClassProductivity& p, const std::string& measure) {
    if (measure == "logP") return p.logP();
    if (measure == "logV") return p.logV();
    if (measure == "logV1") return p.logV1();
    if (measure == "logMedian") return p.logMedian();
    if (measure == "logPstar") return p.logPstar();
    throw config_error("unknown productivity measure '" + measure + "'");
}

CorrelationReport productivity_correlation_report(std::span<const ClassPerformance> perf,
                                                  std::span<const ClassProductivity> prod) {
    std::map<int, const ClassProductivity*> prod_by_class;
    for (const auto& p : prod)
        if (!p.too_small()) prod_by_class.emplace(p.class_id, &p);

    struct Column {
        std::string name;
        std::optional<double> ClassPerformance::*field;
    };
    const std::vector<Column> columns{{"mean_accuracy", &ClassPerformance::mean_accuracy},
                                      {"mean_target_correlation", &ClassPerformance::mean_target_correlation},
                                      {"mean_support", &ClassPerformance::mean_support}};

    CorrelationReport report;
    std::size_t joined = 0;
    for (const auto& c : perf) {
        if (prod_by_class.count(c.class_id)) ++joined;
        if (c.unstable) report.unstable_classes.push_back(c.class_id);
    }
    if (joined < 3)
        throw data_error("productivity correlation: only " + std::to_string(joined) +
                         " classes have both performance and productivity measures (need 3)");

    for (const auto& column : columns) {
        bool present = std::any_of(perf.begin(), perf.end(), [&](const ClassPerformance& c) { return (c.*column.field).has_value(); });
        if (!present) continue;
        for (const auto& measure : kProductivityMeasures) {
            CorrelationRow row;
            row.measure = measure;
            row.performance = column.name;
            std::vector<double> xs, ys;
            for (const auto& c : perf) {
                auto it = prod_by_class.find(c.class_id);
                if (it == prod_by_class.end() || !(c.*column.field)) continue;
                const double x = measure_value(*it->second, measure), y = *(c.*column.field);
                if (!std::isfinite(x) || !std::isfinite(y)) continue;
                xs.push_back(x);
                ys.push_back(y);
                report.scatter.push_back({measure, column.name, c.class_id, x, y});
            }
            row.n_classes = xs.size();
            try {
                row.result = spearman(xs, ys);
            } catch (const Error& e) {
                row.note = e.what();
            }
            report.rows.push_back(std::move(row));
        }
    }
    return report;
}

void write_productivity_csv(std::ostream& out, std::span<const ClassProductivity> prod) {
    out << "class,V,V1,N,median_lemma_freq,P,Pstar,logV,logV1,logMedian,logP,logPstar,too_small\n";
    auto old = out.precision(17);
    for (const auto& p : prod)
        out << p.class_id << ',' << p.V << ',' << p.V1 << ',' << p.N << ',' << p.median_lemma_freq << ',' << p.P << ','
            << p.Pstar << ',' << p.logV() << ',' << p.logV1() << ',' << p.logMedian() << ',' << p.logP() << ','
            << p.logPstar() << ',' << int(p.too_small()) << '\n';
    out.precision(old);
}

namespace {
void put_optional(std::ostream& out, const std::optional<double>& v) {
    if (v) out << *v;
    else out << "NA";
}
}  // namespace

void write_class_performance_csv(std::ostream& out, std::span<const ClassPerformance> perf) {
    out << "class,n_words,mean_accuracy,mean_target_correlation,mean_support,unstable\n";
    auto old = out.precision(17);
    for (const auto& p : perf) {
        out << p.class_id << ',' << p.n_words << ',';
        put_optional(out, p.mean_accuracy);
        out << ',';
        put_optional(out, p.mean_target_correlation);
        out << ',';
        put_optional(out, p.mean_support);
        out << ',' << int(p.unstable) << '\n';
    }
    out.precision(old);
}

void write_correlation_csv(std::ostream& out, const CorrelationReport& report) {
    out << "measure,performance,n_classes,rho,p_value,note\n";
    auto old = out.precision(17);
    for (const auto& r : report.rows) {
        out << r.measure << ',' << r.performance << ',' << r.n_classes << ',';
        if (r.result)
            out << r.result->rho << ',' << r.result->p_value;
        else
            out << "NA,NA";
        std::string note = r.note;
        std::replace(note.begin(), note.end(), ',', ';');
        out << ',' << note << '\n';
    }
    out.precision(old);
}

void write_scatter_csv(std::ostream& out, const CorrelationReport& report) {
    out << "measure,performance,class,x,y\n";
    auto old = out.precision(17);
    for (const auto& s : report.scatter)
        out << s.measure << ',' << s.performance << ',' << s.class_id << ',' << s.x << ',' << s.y << '\n';
    out.precision(old);
}

}  // namespace dlm
