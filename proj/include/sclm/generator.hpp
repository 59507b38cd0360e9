#pragma once

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "sclm/dsl.hpp"
#include "sclm/prompts.hpp"
#include "sclm/simulate.hpp"
#include "sclm/transport.hpp"
#include "sclm/types.hpp"

namespace sclm {

struct Candidate {
    int id = 0;
    dsl::RewardExpression expr;
    int round = 0;
    int proposal_index = 0;
    UtilityFeatureDistribution distribution;
    bool monotone = true;
};

struct CandidatePool {
    std::vector<Candidate> candidates;
    int dlm_choice = -1;  // final round's reflection pick; the DLM baseline output
    std::vector<std::string> failures;
};

enum class BackendKind { Template, Llm };
enum class ReflectStrategy { Adjudicator, Llm };

struct GeneratorConfig {
    int proposals_per_round = 4;
    int rounds = 5;
    BackendKind backend = BackendKind::Template;
    ReflectStrategy reflect_strategy = ReflectStrategy::Adjudicator;
    std::shared_ptr<LlmTransport> transport;  // required for the Llm backend / Llm reflect
    uint64_t master_seed = 0;
    int simulation_seeds = 10;
    bool strict_monotone = false;  // re-propose when the monotonicity audit fails
    std::string reflection_template;  // optional override; {GOAL} and {CANDIDATES} placeholders
    SolverParams solver;
};

class ProposalBackend {
public:
    virtual ~ProposalBackend() = default;
    virtual dsl::RewardExpression propose(const PreferencePrompt& prompt,
                                          const FeatureSchema& schema,
                                          const dsl::RewardExpression* seed_candidate,
                                          std::mt19937_64& rng) = 0;
};

// Deterministic proposal family: state + state * (coefficient ladders over the
// top/bottom buckets of the prompted categories), with sum/product/single-focus
// variants for composite prompts and coefficient jitter when mutating a seed.
class TemplateBackend : public ProposalBackend {
public:
    dsl::RewardExpression propose(const PreferencePrompt& prompt, const FeatureSchema& schema,
                                  const dsl::RewardExpression* seed_candidate,
                                  std::mt19937_64& rng) override;
};

// Asks the transport for a reward function, re-parses the text between the
// "$$$" delimiters, retries up to 3 times on parse failure and then falls back
// to the template backend. Transport errors propagate as TransportError.
class LlmBackend : public ProposalBackend {
public:
    explicit LlmBackend(std::shared_ptr<LlmTransport> transport)
        : transport_(std::move(transport)) {}
    dsl::RewardExpression propose(const PreferencePrompt& prompt, const FeatureSchema& schema,
                                  const dsl::RewardExpression* seed_candidate,
                                  std::mt19937_64& rng) override;

private:
    std::shared_ptr<LlmTransport> transport_;
    TemplateBackend fallback_;
};

std::string build_generation_prompt(const PreferencePrompt& prompt, const FeatureSchema& schema,
                                    const dsl::RewardExpression* seed_candidate);
std::string build_reflection_prompt(const PreferencePrompt& prompt,
                                    const std::vector<const Candidate*>& candidates,
                                    const std::string& template_override = {});

// Extracts the text between the first pair of "$$$" delimiters.
std::optional<std::string> extract_delimited(const std::string& text);

// Picks one candidate of a round. The adjudicator strategy takes the
// utilitarian mean of per-clause scores computed from the candidates' own
// simulated distributions; the Llm strategy parses "The best reward function
// is at number: [k]" and falls back to the adjudicator strategy after 3
// unparseable replies.
int reflect(const std::vector<const Candidate*>& round_candidates, const PreferencePrompt& prompt,
            ReflectStrategy strategy, LlmTransport* transport,
            const UtilityFeatureDistribution* default_distribution = nullptr,
            const std::string& reflection_template = {});

// Evolutionary search: rounds x proposals, simulating every proposal and
// seeding each round with the previous round's reflection pick.
CandidatePool evolve(const RmabInstance& instance, const PreferencePrompt& prompt,
                     const GeneratorConfig& config, WhittleCache* cache = nullptr);

// Seeds used to simulate candidates during generation and scoring; shared so
// score differences are not Monte-Carlo artifacts.
std::vector<uint64_t> simulation_seeds(uint64_t master_seed, int count);

}  // namespace sclm
