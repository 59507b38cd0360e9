#include "sclm/scorers.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <stdexcept>

#include "sclm/emd.hpp"
#include "sclm/rng.hpp"

namespace sclm {

namespace {

std::string distribution_text(const UtilityFeatureDistribution& dist) {
    std::string out;
    for (size_t ci = 0; ci < dist.schema.categories.size(); ++ci) {
        const auto& cat = dist.schema.categories[ci];
        out += "Category: " + cat.name + "\n";
        for (size_t b = 0; b < cat.buckets.size(); ++b) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.2f", dist.totals[ci][b]);
            out += cat.buckets[b] + ": " + buf + "\n";
        }
    }
    return out;
}

std::optional<int> parse_rating(const std::string& text) {
    size_t pos = text.find("rating");
    if (pos == std::string::npos) pos = 0;
    while (pos < text.size() && !std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size()) return std::nullopt;
    size_t end = pos;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
    int rating = 0;
    auto res = std::from_chars(text.data() + pos, text.data() + end, rating);
    if (res.ec != std::errc{}) return std::nullopt;
    if (rating < 1 || rating > 5) return std::nullopt;
    return rating;
}

}  // namespace

std::vector<double> minmax01(const std::vector<double>& raw, NormalizationRecord* record,
                             bool invert) {
    auto [mn, mx] = std::minmax_element(raw.begin(), raw.end());
    std::vector<double> out(raw.size());
    bool constant = !(*mx > *mn);
    for (size_t j = 0; j < raw.size(); ++j) {
        if (constant)
            out[j] = 0.5;
        else {
            double v = (raw[j] - *mn) / (*mx - *mn);
            out[j] = invert ? 1.0 - v : v;
        }
    }
    if (record) {
        record->minmax = true;
        record->inverted = invert;
        record->constant = constant;
        record->raw_min = *mn;
        record->raw_max = *mx;
    }
    return out;
}

const dsl::RewardExpression& ProxyRewardCache::proxy(const PreferenceClause& clause,
                                                     const RmabInstance& instance,
                                                     WhittleCache* cache) {
    std::string key = clause.key();
    auto it = proxies_.find(key);
    if (it != proxies_.end()) return it->second;

    PreferencePrompt singular;
    singular.clauses.push_back(clause);
    GeneratorConfig cfg = config_;
    cfg.master_seed = derive_seed(config_.master_seed, fnv1a(key));
    CandidatePool pool = evolve(instance, singular, cfg, cache);
    if (pool.dlm_choice < 0) throw std::runtime_error("proxy generation produced no pick for " + key);
    auto [pos, inserted] =
        proxies_.emplace(key, pool.candidates[static_cast<size_t>(pool.dlm_choice)].expr);
    return pos->second;
}

std::vector<double> simulator_score(const PreferenceClause& clause, const CandidatePool& pool,
                                    const ScoringContext& ctx,
                                    const dsl::RewardExpression& proxy_reward,
                                    NormalizationRecord* record) {
    if (clause.kind != ClauseKind::Prioritize)
        throw std::invalid_argument("simulator_score: expects a Prioritize clause");
    RewardTable proxy_table = to_reward_table(proxy_reward, ctx.instance);
    double v_star = simulate(ctx.instance, default_reward_table(ctx.instance.n_arms()),
                             {proxy_table}, ctx.seeds, ctx.cache, ctx.solver)
                        .totals[0];

    std::vector<double> raw(pool.candidates.size());
    for (size_t j = 0; j < pool.candidates.size(); ++j)
        raw[j] = simulate(ctx.instance, to_reward_table(pool.candidates[j].expr, ctx.instance),
                          {proxy_table}, ctx.seeds, ctx.cache, ctx.solver)
                     .totals[0];

    if (record) record->scorer = "simulator";
    if (v_star <= 0.0) {
        if (record) record->fallback_raw = true;
        return raw;
    }
    for (double& v : raw) v = (v - v_star) / v_star;
    return raw;
}

std::vector<std::optional<int>> llm_score(const PreferenceClause& clause,
                                          const CandidatePool& pool, LlmTransport& transport) {
    std::vector<std::optional<int>> ratings(pool.candidates.size());
    for (size_t j = 0; j < pool.candidates.size(); ++j) {
        const auto& cand = pool.candidates[j];
        std::string request =
            "My goal is: " + clause.render() +
            "\nOn a scale from 1 to 5, rank how well the following reward function aligns with "
            "this preference.\nReward Function: " +
            cand.expr.source() + "\nReward distribution under this function:\n" +
            distribution_text(cand.distribution) +
            "Provide your answer EXACTLY IN the following format: 'rating: [1-5]'.";
        for (int attempt = 0; attempt < 3 && !ratings[j]; ++attempt)
            ratings[j] = parse_rating(transport.complete(request));
    }
    return ratings;
}

std::vector<double> shift_score(const PreferenceClause& clause, const CandidatePool& pool,
                                const UtilityFeatureDistribution& default_distribution,
                                NormalizationRecord* record) {
    if (clause.kind != ClauseKind::NoShift)
        throw std::invalid_argument("shift_score: expects a NoShift clause");
    std::vector<double> raw(pool.candidates.size());
    for (size_t j = 0; j < pool.candidates.size(); ++j)
        raw[j] = utility_distribution_diff(pool.candidates[j].distribution, default_distribution,
                                           clause.category);
    if (record) record->scorer = "emd-shift";
    auto out = minmax01(raw, record, /*invert=*/true);
    return out;
}

std::vector<double> utility_score(const CandidatePool& pool, NormalizationRecord* record) {
    std::vector<double> raw(pool.candidates.size());
    for (size_t j = 0; j < pool.candidates.size(); ++j)
        raw[j] = pool.candidates[j].distribution.total_utility;
    if (record) record->scorer = "total-utility";
    return minmax01(raw, record, /*invert=*/false);
}

ScoreMatrix build_score_matrix(const CandidatePool& pool, const PreferencePrompt& prompt,
                               ScorerModel model, const ScoringContext& ctx,
                               ProxyRewardCache* proxies, LlmTransport* transport,
                               const UtilityFeatureDistribution& default_distribution) {
    ScoreMatrix matrix;
    for (const auto& clause : prompt.clauses) {
        NormalizationRecord record;
        std::vector<double> raw, normalized;
        bool available = true;
        switch (clause.kind) {
            case ClauseKind::Prioritize: {
                if (model == ScorerModel::Simulator) {
                    if (!proxies) throw std::invalid_argument("simulator scorer needs proxies");
                    const auto& proxy = proxies->proxy(clause, ctx.instance, ctx.cache);
                    raw = simulator_score(clause, pool, ctx, proxy, &record);
                    normalized = raw;
                } else {
                    if (!transport) throw std::invalid_argument("llm scorer needs a transport");
                    auto ratings = llm_score(clause, pool, *transport);
                    record.scorer = "llm-rating";
                    raw.resize(ratings.size());
                    for (size_t j = 0; j < ratings.size(); ++j) {
                        if (!ratings[j]) {
                            available = false;
                            break;
                        }
                        raw[j] = static_cast<double>(*ratings[j]);
                    }
                    normalized = raw;
                }
                break;
            }
            case ClauseKind::NoShift:
                raw.resize(pool.candidates.size());
                for (size_t j = 0; j < pool.candidates.size(); ++j)
                    raw[j] = utility_distribution_diff(pool.candidates[j].distribution,
                                                       default_distribution, clause.category);
                record.scorer = "emd-shift";
                normalized = minmax01(raw, &record, /*invert=*/true);
                break;
            case ClauseKind::MaximizeUtility:
                raw.resize(pool.candidates.size());
                for (size_t j = 0; j < pool.candidates.size(); ++j)
                    raw[j] = pool.candidates[j].distribution.total_utility;
                record.scorer = "total-utility";
                normalized = minmax01(raw, &record, /*invert=*/false);
                break;
        }
        if (!available) {
            raw.assign(pool.candidates.size(), 0.0);
            normalized = raw;
        }
        matrix.clause_labels.push_back(clause.key());
        matrix.raw.push_back(std::move(raw));
        matrix.scores.push_back(std::move(normalized));
        matrix.records.push_back(record);
        matrix.available.push_back(available);
        matrix.weights.push_back(clause.weight);
    }
    matrix.validate();
    return matrix;
}

}  // namespace sclm
