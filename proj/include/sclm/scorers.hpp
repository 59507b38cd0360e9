#pragma once

#include <map>
#include <optional>

#include "sclm/generator.hpp"
#include "sclm/welfare.hpp"

namespace sclm {

enum class ScorerModel { Simulator, Llm };

struct ScoringContext {
    const RmabInstance& instance;
    WhittleCache* cache = nullptr;
    std::vector<uint64_t> seeds;
    SolverParams solver;
};

// Clause-proxy reward functions for the simulator scorer: the DLM pick of a
// generator run on the clause cast as a singular prompt, cached per clause.
class ProxyRewardCache {
public:
    explicit ProxyRewardCache(GeneratorConfig generator_config)
        : config_(std::move(generator_config)) {}

    const dsl::RewardExpression& proxy(const PreferenceClause& clause,
                                       const RmabInstance& instance, WhittleCache* cache);

private:
    GeneratorConfig config_;
    std::map<std::string, dsl::RewardExpression> proxies_;
};

// (V - V*) / V* where V is the discounted proxy-reward total under each
// candidate's policy and V* under the default policy, shared seeds. Falls back
// to raw V when V* <= 0 (recorded).
std::vector<double> simulator_score(const PreferenceClause& clause, const CandidatePool& pool,
                                    const ScoringContext& ctx,
                                    const dsl::RewardExpression& proxy_reward,
                                    NormalizationRecord* record = nullptr);

// 1..5 alignment ratings; nullopt when a candidate's rating stayed unparseable
// after 3 retries.
std::vector<std::optional<int>> llm_score(const PreferenceClause& clause,
                                          const CandidatePool& pool, LlmTransport& transport);

// 1 - minmax01 of the EMD between each candidate's distribution and the
// default policy's, for the clause category. Constant raw columns map to 0.5.
std::vector<double> shift_score(const PreferenceClause& clause, const CandidatePool& pool,
                                const UtilityFeatureDistribution& default_distribution,
                                NormalizationRecord* record = nullptr);

// minmax01 of total utility (default-reward accounting) per candidate.
std::vector<double> utility_score(const CandidatePool& pool,
                                  NormalizationRecord* record = nullptr);

// Assembles the clause x candidate matrix for a prompt; Prioritize clauses use
// the chosen scorer model, NoShift the EMD scorer, MaximizeUtility the total
// utility scorer. Unavailable columns (persistent LLM parse failure) are
// flagged so selection can proceed on the rest.
ScoreMatrix build_score_matrix(const CandidatePool& pool, const PreferencePrompt& prompt,
                               ScorerModel model, const ScoringContext& ctx,
                               ProxyRewardCache* proxies, LlmTransport* transport,
                               const UtilityFeatureDistribution& default_distribution);

std::vector<double> minmax01(const std::vector<double>& raw, NormalizationRecord* record,
                             bool invert);

}  // namespace sclm
