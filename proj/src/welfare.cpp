#include "sclm/welfare.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sclm {

WelfareFunction WelfareFunction::preset(const std::string& name) {
    if (name == "utilitarian") return utilitarian();
    if (name == "nash") return nash();
    if (name == "egalitarian") return egalitarian();
    throw std::invalid_argument("unknown welfare preset: " + name);
}

double pmean(std::span<const double> values, std::span<const double> weights, double p) {
    if (values.empty()) throw std::invalid_argument("pmean: empty input");
    if (!weights.empty() && weights.size() != values.size())
        throw std::invalid_argument("pmean: weight/value size mismatch");
    if (p > 1.0) throw std::invalid_argument("pmean: p must be <= 1");

    double total_weight = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        if (!(values[i] > 0.0))
            throw std::domain_error("pmean: values must be strictly positive");
        double w = weights.empty() ? 1.0 : weights[i];
        if (w < 0.0) throw std::invalid_argument("pmean: weights must be >= 0");
        total_weight += w;
    }
    if (total_weight <= 0.0) throw std::invalid_argument("pmean: weights sum to zero");

    if (std::isinf(p) && p < 0) {
        double m = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < values.size(); ++i) {
            double w = weights.empty() ? 1.0 : weights[i];
            if (w > 0.0) m = std::min(m, values[i]);
        }
        return m;
    }
    if (p == 0.0) {
        double acc = 0.0;
        for (size_t i = 0; i < values.size(); ++i) {
            double w = weights.empty() ? 1.0 : weights[i];
            acc += w * std::log(values[i]);
        }
        return std::exp(acc / total_weight);
    }
    double acc = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        double w = weights.empty() ? 1.0 : weights[i];
        acc += w * std::pow(values[i], p);
    }
    return std::pow(acc / total_weight, 1.0 / p);
}

double pmean(std::span<const double> values, double p) { return pmean(values, {}, p); }

void ScoreMatrix::validate() const {
    size_t l = scores.size();
    if (clause_labels.size() != l || records.size() != l || available.size() != l ||
        weights.size() != l || raw.size() != l)
        throw std::invalid_argument("ScoreMatrix: inconsistent clause dimensions");
    size_t n = scores.empty() ? 0 : scores[0].size();
    for (size_t i = 0; i < l; ++i) {
        if (scores[i].size() != n || raw[i].size() != n)
            throw std::invalid_argument("ScoreMatrix: ragged rows");
        for (double v : scores[i])
            if (std::isnan(v)) throw std::invalid_argument("ScoreMatrix: NaN score");
    }
}

SelectionResult select(const ScoreMatrix& matrix, const WelfareFunction& welfare) {
    matrix.validate();
    const int n = matrix.n_candidates();
    if (n == 0) throw std::invalid_argument("select: empty pool");

    std::vector<int> rows;
    for (int i = 0; i < matrix.n_clauses(); ++i)
        if (matrix.available[i]) rows.push_back(i);
    if (rows.empty()) throw std::invalid_argument("select: no available clause columns");

    SelectionResult result;
    result.shifts.assign(matrix.scores.size(), 0.0);
    for (int i : rows) {
        double row_min = *std::min_element(matrix.scores[i].begin(), matrix.scores[i].end());
        if (row_min <= 0.0) result.shifts[i] = 1e-6 - row_min;
    }

    std::vector<double> values(rows.size()), row_weights(rows.size());
    for (size_t r = 0; r < rows.size(); ++r) {
        double w = matrix.weights[rows[r]];
        if (!welfare.weights.empty()) w *= welfare.weights[rows[r]];
        row_weights[r] = w;
    }
    for (int j = 0; j < n; ++j) {
        for (size_t r = 0; r < rows.size(); ++r)
            values[r] = matrix.scores[rows[r]][j] + result.shifts[rows[r]];
        result.ranking.emplace_back(j, pmean(values, row_weights, welfare.p));
    }
    std::stable_sort(result.ranking.begin(), result.ranking.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    result.chosen = result.ranking.front().first;
    result.welfare = result.ranking.front().second;
    return result;
}

double relative_regret(const std::vector<std::vector<double>>& true_scores,
                       const std::vector<std::vector<double>>& noisy_scores, double p) {
    if (true_scores.size() != noisy_scores.size() || true_scores.empty())
        throw std::invalid_argument("relative_regret: shape mismatch");
    size_t n = true_scores[0].size();
    for (size_t i = 0; i < true_scores.size(); ++i)
        if (true_scores[i].size() != n || noisy_scores[i].size() != n)
            throw std::invalid_argument("relative_regret: shape mismatch");

    auto welfare_of = [&](const std::vector<std::vector<double>>& m, size_t j) {
        std::vector<double> col(m.size());
        for (size_t i = 0; i < m.size(); ++i) col[i] = m[i][j];
        return pmean(col, p);
    };
    size_t best_true = 0, best_noisy = 0;
    double w_true = -1, w_noisy = -1;
    for (size_t j = 0; j < n; ++j) {
        double wt = welfare_of(true_scores, j);
        double wn = welfare_of(noisy_scores, j);
        if (wt > w_true) w_true = wt, best_true = j;
        if (wn > w_noisy) w_noisy = wn, best_noisy = j;
    }
    double chosen_true_welfare = welfare_of(true_scores, best_noisy);
    (void)best_true;
    return (w_true - chosen_true_welfare) / w_true;
}

std::vector<int> pareto_front(const ScoreMatrix& matrix) {
    if (matrix.n_clauses() != 2)
        throw std::invalid_argument("pareto_front: exactly 2 clause rows required");
    const int n = matrix.n_candidates();
    std::vector<int> front;
    for (int j = 0; j < n; ++j) {
        bool dominated = false;
        for (int k = 0; k < n && !dominated; ++k) {
            if (k == j) continue;
            bool geq = matrix.scores[0][k] >= matrix.scores[0][j] &&
                       matrix.scores[1][k] >= matrix.scores[1][j];
            bool gt = matrix.scores[0][k] > matrix.scores[0][j] ||
                      matrix.scores[1][k] > matrix.scores[1][j];
            dominated = geq && gt;
        }
        if (!dominated) front.push_back(j);
    }
    return front;
}

}  // namespace sclm
