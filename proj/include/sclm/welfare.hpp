#pragma once

#include <limits>
#include <span>
#include <string>
#include <vector>

namespace sclm {

// Generalized p-mean social welfare, p in [-inf, 1]. Weights default to 1.
struct WelfareFunction {
    double p = 1.0;
    std::vector<double> weights;  // empty: uniform

    static WelfareFunction utilitarian() { return {1.0, {}}; }
    static WelfareFunction nash() { return {0.0, {}}; }
    static WelfareFunction egalitarian() { return {-std::numeric_limits<double>::infinity(), {}}; }
    static WelfareFunction preset(const std::string& name);  // by the names above
};

// Weighted generalized p-mean of a strictly positive vector: min for
// p = -inf, weighted geometric mean for p = 0, weighted power mean otherwise.
// Throws on non-positive values (callers shift first).
double pmean(std::span<const double> values, std::span<const double> weights, double p);
double pmean(std::span<const double> values, double p);

struct NormalizationRecord {
    std::string scorer;
    double shift = 0.0;      // positivity shift added before the p-mean
    double raw_min = 0.0, raw_max = 0.0;
    bool minmax = false;     // 0-1 normalization applied
    bool inverted = false;   // column stored as 1 - minmax (NoShift clauses)
    bool constant = false;   // constant raw column mapped to 0.5
    bool fallback_raw = false;  // default-policy normalization was degenerate
};

// Clause x candidate alignment scores.
struct ScoreMatrix {
    std::vector<std::string> clause_labels;
    std::vector<std::vector<double>> scores;  // [clause][candidate], normalized layer
    std::vector<std::vector<double>> raw;     // [clause][candidate], pre-normalization
    std::vector<NormalizationRecord> records;
    std::vector<bool> available;              // clause columns that could be computed
    std::vector<double> weights;              // clause weights

    int n_clauses() const { return static_cast<int>(scores.size()); }
    int n_candidates() const { return scores.empty() ? 0 : static_cast<int>(scores[0].size()); }
    void validate() const;  // dimensions consistent, no NaN
};

struct SelectionResult {
    int chosen = -1;
    double welfare = 0.0;
    std::vector<std::pair<int, double>> ranking;  // (candidate id, welfare), best first
    std::vector<double> shifts;                   // per-clause positivity shift applied
};

// Argmax of the p-mean over candidates; each clause row is shifted by
// (1e-6 - row min) when any entry is <= 0, ties break toward the lowest id.
SelectionResult select(const ScoreMatrix& matrix, const WelfareFunction& welfare);

// Relative welfare loss from selecting under noisy scores: both matrices are
// clause x candidate, strictly positive, same shape.
double relative_regret(const std::vector<std::vector<double>>& true_scores,
                       const std::vector<std::vector<double>>& noisy_scores, double p);

// Candidate ids not dominated on the two clause rows (higher is better in
// both coordinates).
std::vector<int> pareto_front(const ScoreMatrix& matrix);

}  // namespace sclm
