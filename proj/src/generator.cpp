#include "sclm/generator.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "sclm/emd.hpp"
#include "sclm/rng.hpp"

namespace sclm {

namespace {

std::string format_number(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

// Coefficient ladder over the `depth` most extreme buckets of the clause's
// category, e.g. depth 2 / low: "2*agent_feats[0] + 1*agent_feats[1]".
std::string ladder_term(const FeatureSchema& schema, const PreferenceClause& clause, int depth,
                        const std::vector<double>& factors) {
    int ci = schema.category_index(clause.category);
    int off = schema.offset_of(ci);
    int n_buckets = static_cast<int>(schema.categories[ci].buckets.size());
    depth = std::min(depth, n_buckets);
    std::string term;
    for (int j = 0; j < depth; ++j) {
        int idx = clause.direction == Direction::Low ? off + j : off + n_buckets - 1 - j;
        double c = (depth - j) * (j < static_cast<int>(factors.size()) ? factors[j] : 1.0);
        if (j) term += " + ";
        term += format_number(c) + "*agent_feats[" + std::to_string(idx) + "]";
    }
    return term;
}

std::optional<int> parse_reflection_reply(const std::string& text, int n_candidates) {
    size_t pos = text.rfind("number");
    if (pos == std::string::npos) pos = 0;
    while (pos < text.size() && !std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
    if (pos >= text.size()) return std::nullopt;
    size_t end = pos;
    while (end < text.size() && std::isdigit(static_cast<unsigned char>(text[end]))) ++end;
    int k = 0;
    auto res = std::from_chars(text.data() + pos, text.data() + end, k);
    if (res.ec != std::errc{}) return std::nullopt;
    if (k < 0 || k >= n_candidates) return std::nullopt;
    return k;
}

constexpr const char* kDefaultReflectionTemplate =
    "My goal was to create a Python reward function for RL in resource allocation, with the "
    "objective of: {GOAL} I tried several reward functions for this task.\n\n"
    "Below are the reward functions I used and their corresponding reward distributions:\n\n"
    "{CANDIDATES}"
    "Based on the above reward distributions and the given goal: {GOAL} please identify the "
    "FUNCTION NUMBER of the most effective reward function. Provide your answer EXACTLY IN the "
    "following format: 'The best reward function is at number: [FUNCTION NUMBER]'.";

void replace_all(std::string& text, const std::string& token, const std::string& value) {
    for (size_t pos = text.find(token); pos != std::string::npos; pos = text.find(token, pos))
        text.replace(pos, token.size(), value), pos += value.size();
}

std::string format_distribution(const UtilityFeatureDistribution& dist) {
    std::string out;
    for (size_t ci = 0; ci < dist.schema.categories.size(); ++ci) {
        const auto& cat = dist.schema.categories[ci];
        out += "Category: " + cat.name + "\n";
        for (size_t b = 0; b < cat.buckets.size(); ++b) {
            char buf[64];
            std::snprintf(buf, sizeof buf, "%.2f", dist.totals[ci][b]);
            out += cat.buckets[b] + ": " + buf + "\n";
        }
        out += "\n";
    }
    return out;
}

}  // namespace

std::vector<uint64_t> simulation_seeds(uint64_t master_seed, int count) {
    std::vector<uint64_t> seeds;
    seeds.reserve(static_cast<size_t>(count));
    for (int k = 0; k < count; ++k)
        seeds.push_back(derive_seed(master_seed, 0x5EED0000ULL + static_cast<uint64_t>(k)));
    return seeds;
}

dsl::RewardExpression TemplateBackend::propose(const PreferencePrompt& prompt,
                                               const FeatureSchema& schema,
                                               const dsl::RewardExpression* seed_candidate,
                                               std::mt19937_64& rng) {
    int n_features = schema.total_buckets();
    std::vector<const PreferenceClause*> targets;
    for (const auto& c : prompt.clauses)
        if (c.kind == ClauseKind::Prioritize) targets.push_back(&c);
    if (targets.empty()) return dsl::RewardExpression::parse("state", n_features);

    auto draw_factors = [&](int depth) {
        std::vector<double> f(static_cast<size_t>(depth), 1.0);
        if (seed_candidate) {
            static constexpr double kJitter[] = {0.5, 1.0, 1.5, 2.0};
            for (auto& v : f) v = kJitter[rng() % 4];
        }
        return f;
    };
    auto clause_term = [&](const PreferenceClause& clause, int depth) {
        return ladder_term(schema, clause, depth, draw_factors(depth));
    };

    int depth = 1 + static_cast<int>(rng() % 3);
    std::string source;
    if (targets.size() == 1) {
        source = "state + state*(" + clause_term(*targets[0], depth) + ")";
    } else {
        switch (rng() % 5) {
            case 0: {  // additive combination
                source = "state + state*(";
                for (size_t k = 0; k < targets.size(); ++k) {
                    if (k) source += " + ";
                    source += clause_term(*targets[k], k == 0 ? depth : 1 + static_cast<int>(rng() % 3));
                }
                source += ")";
                break;
            }
            case 1: {  // conjunctive combination
                source = "state + state*(";
                for (size_t k = 0; k < targets.size(); ++k) {
                    if (k) source += " and ";
                    source += "(" + clause_term(*targets[k], k == 0 ? depth : 1 + static_cast<int>(rng() % 3)) + ")";
                }
                source += ")";
                break;
            }
            case 2:
                source = "state + state*(" + clause_term(*targets[0], depth) + ")";
                break;
            case 3:
                source = "state + state*(" + clause_term(*targets[1 + rng() % (targets.size() - 1)], depth) + ")";
                break;
            default:
                source = "state";
                break;
        }
    }
    return dsl::RewardExpression::parse(source, n_features);
}

std::optional<std::string> extract_delimited(const std::string& text) {
    size_t first = text.find("$$$");
    if (first == std::string::npos) return std::nullopt;
    size_t second = text.find("$$$", first + 3);
    if (second == std::string::npos) return std::nullopt;
    std::string inner = text.substr(first + 3, second - first - 3);
    size_t begin = inner.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return std::nullopt;
    size_t end = inner.find_last_not_of(" \t\r\n");
    return inner.substr(begin, end - begin + 1);
}

dsl::RewardExpression LlmBackend::propose(const PreferencePrompt& prompt,
                                          const FeatureSchema& schema,
                                          const dsl::RewardExpression* seed_candidate,
                                          std::mt19937_64& rng) {
    std::string request = build_generation_prompt(prompt, schema, seed_candidate);
    for (int attempt = 0; attempt < 3; ++attempt) {
        std::string reply = transport_->complete(request);
        auto code = extract_delimited(reply);
        if (!code) continue;
        try {
            return dsl::RewardExpression::parse(*code, schema.total_buckets());
        } catch (const dsl::ParseError&) {
        }
    }
    return fallback_.propose(prompt, schema, seed_candidate, rng);
}

std::string build_generation_prompt(const PreferencePrompt& prompt, const FeatureSchema& schema,
                                    const dsl::RewardExpression* seed_candidate) {
    std::string goal = prompt.render();
    std::string text =
        "Create a Python reward function for RL in resource allocation problem for agents, with "
        "the objective of prioritizing higher states and: " +
        goal + " The function should use 'state' (value is either 0,1) and features 'agent_feats' "
        "(length " + std::to_string(schema.total_buckets()) +
        " array) to direct the RL agent. Here is a description of the features you may use along "
        "with the index in 'agent_feats' array:\n"
        "Index Name DataType\n";
    int idx = 0;
    for (const auto& cat : schema.categories)
        for (const auto& bucket : cat.buckets)
            text += " " + std::to_string(idx++) + ". " + bucket + " - Binary\n";
    text += "All buckets are in increasing order of the feature values.\n";
    if (seed_candidate)
        text += "The best reward function from the previous iteration was: " +
                seed_candidate->source() + " Use it as a seed and improve upon it.\n";
    text +=
        "Your task:\n"
        "1. Write a simple, single-line Python reward function. Exclude the word 'return' and "
        "exclude non-standard libraries. Format your code with triple $ signs: $$$[YOUR "
        "FUNCTION]$$$.\n"
        "Note that HIGHER states are always preferred, so ensure reward increases as state "
        "increases. Make sure reward is always positive and increasing with state.\n"
        "Goal: \n" +
        goal;
    return text;
}

std::string build_reflection_prompt(const PreferencePrompt& prompt,
                                    const std::vector<const Candidate*>& candidates,
                                    const std::string& template_override) {
    std::string body;
    for (size_t k = 0; k < candidates.size(); ++k) {
        body += "Function Number " + std::to_string(k) + ": \n";
        body += "Reward Function: " + candidates[k]->expr.source() + "\n";
        body += "Reflection:\n" + format_distribution(candidates[k]->distribution);
    }
    std::string text = template_override.empty() ? kDefaultReflectionTemplate : template_override;
    replace_all(text, "{GOAL}", prompt.render());
    replace_all(text, "{CANDIDATES}", body);
    return text;
}

int reflect(const std::vector<const Candidate*>& round_candidates, const PreferencePrompt& prompt,
            ReflectStrategy strategy, LlmTransport* transport,
            const UtilityFeatureDistribution* default_distribution,
            const std::string& reflection_template) {
    if (round_candidates.empty()) throw std::invalid_argument("reflect: empty candidate round");
    const int n = static_cast<int>(round_candidates.size());
    if (n == 1) return 0;

    if (strategy == ReflectStrategy::Llm && transport) {
        std::string request =
            build_reflection_prompt(prompt, round_candidates, reflection_template);
        for (int attempt = 0; attempt < 3; ++attempt) {
            auto pick = parse_reflection_reply(transport->complete(request), n);
            if (pick) return *pick;
        }
        // fall through to the adjudicator strategy
    }

    // Utilitarian mean of per-clause scores computed from the candidates' own
    // simulated utility feature distributions, each clause min-max normalized.
    std::vector<double> total(static_cast<size_t>(n), 0.0);
    for (const auto& clause : prompt.clauses) {
        std::vector<double> raw(static_cast<size_t>(n), 0.0);
        bool have = true;
        for (int j = 0; j < n; ++j) {
            const auto& dist = round_candidates[j]->distribution;
            switch (clause.kind) {
                case ClauseKind::Prioritize: {
                    const auto& totals = dist.category_totals(clause.category);
                    raw[j] = clause.direction == Direction::Low ? totals.front() : totals.back();
                    break;
                }
                case ClauseKind::MaximizeUtility:
                    raw[j] = dist.total_utility;
                    break;
                case ClauseKind::NoShift:
                    if (!default_distribution) {
                        have = false;
                        break;
                    }
                    raw[j] = -utility_distribution_diff(dist, *default_distribution, clause.category);
                    break;
            }
        }
        if (!have) continue;
        auto [mn, mx] = std::minmax_element(raw.begin(), raw.end());
        for (int j = 0; j < n; ++j) {
            double norm = *mx > *mn ? (raw[j] - *mn) / (*mx - *mn) : 0.5;
            total[j] += clause.weight * norm;
        }
    }
    return static_cast<int>(std::max_element(total.begin(), total.end()) - total.begin());
}

CandidatePool evolve(const RmabInstance& instance, const PreferencePrompt& prompt,
                     const GeneratorConfig& config, WhittleCache* cache) {
    if (config.proposals_per_round < 1 || config.rounds < 1)
        throw std::invalid_argument("evolve: proposals_per_round and rounds must be >= 1");
    prompt.validate(instance.schema);

    std::unique_ptr<ProposalBackend> backend;
    if (config.backend == BackendKind::Llm) {
        if (!config.transport) throw std::invalid_argument("evolve: Llm backend needs a transport");
        backend = std::make_unique<LlmBackend>(config.transport);
    } else {
        backend = std::make_unique<TemplateBackend>();
    }
    TemplateBackend template_fallback;

    auto seeds = simulation_seeds(config.master_seed, config.simulation_seeds);
    CandidatePool pool;

    bool needs_default = std::any_of(prompt.clauses.begin(), prompt.clauses.end(),
                                     [](const PreferenceClause& c) { return c.kind == ClauseKind::NoShift; });
    std::optional<UtilityFeatureDistribution> default_dist;
    if (needs_default)
        default_dist = simulate(instance, default_reward_table(instance.n_arms()), {}, seeds,
                                cache, config.solver)
                           .distribution;

    std::optional<dsl::RewardExpression> round_seed;
    for (int round = 0; round < config.rounds; ++round) {
        std::vector<const Candidate*> round_candidates;
        try {
            size_t round_start = pool.candidates.size();
            for (int k = 0; k < config.proposals_per_round; ++k) {
                uint64_t task = static_cast<uint64_t>(round) * 1000 + static_cast<uint64_t>(k) + 1;
                std::mt19937_64 rng(derive_seed(config.master_seed, task));
                const dsl::RewardExpression* seed_ptr = round_seed ? &*round_seed : nullptr;

                dsl::RewardExpression expr;
                try {
                    expr = backend->propose(prompt, instance.schema, seed_ptr, rng);
                } catch (const TransportError& err) {
                    pool.failures.push_back(std::string("proposal fell back to template: ") + err.what());
                    expr = template_fallback.propose(prompt, instance.schema, seed_ptr, rng);
                }
                bool monotone = dsl::monotone_in_state(expr, instance);
                if (config.strict_monotone) {
                    for (int retry = 0; retry < 3 && !monotone; ++retry) {
                        expr = template_fallback.propose(prompt, instance.schema, seed_ptr, rng);
                        monotone = dsl::monotone_in_state(expr, instance);
                    }
                    if (!monotone) {
                        expr = dsl::RewardExpression::parse("state", instance.schema.total_buckets());
                        monotone = true;
                    }
                }

                Candidate cand;
                cand.id = static_cast<int>(pool.candidates.size());
                cand.expr = expr;
                cand.round = round;
                cand.proposal_index = k;
                cand.monotone = monotone;
                cand.distribution =
                    simulate(instance, dsl::to_reward_table(expr, instance), {}, seeds, cache,
                             config.solver)
                        .distribution;
                pool.candidates.push_back(std::move(cand));
            }
            for (size_t i = round_start; i < pool.candidates.size(); ++i)
                round_candidates.push_back(&pool.candidates[i]);
        } catch (const std::exception& err) {
            pool.failures.push_back("round " + std::to_string(round) + " failed: " + err.what());
            return pool;  // partial pool with failure manifest
        }

        int pick;
        try {
            pick = reflect(round_candidates, prompt, config.reflect_strategy,
                           config.transport.get(), default_dist ? &*default_dist : nullptr,
                           config.reflection_template);
        } catch (const TransportError& err) {
            pool.failures.push_back("round " + std::to_string(round) +
                                    " reflection failed: " + err.what());
            return pool;
        }
        const Candidate* chosen = round_candidates[static_cast<size_t>(pick)];
        round_seed = chosen->expr;
        pool.dlm_choice = chosen->id;
    }
    return pool;
}

}  // namespace sclm
