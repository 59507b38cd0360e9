#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sclm/types.hpp"

namespace sclm::dsl {

struct ParseError : std::runtime_error {
    size_t position;
    ParseError(const std::string& msg, size_t pos)
        : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
};

enum class NodeKind { Literal, State, Feature, Negate, Not, Add, Sub, Mul, And, Or };

struct Node {
    NodeKind kind;
    double value = 0.0;  // Literal
    int index = 0;       // Feature
    std::shared_ptr<const Node> lhs, rhs;
};

bool ast_equal(const Node* a, const Node* b);

// A parsed single-line reward formula over `state` and `agent_feats[i]`.
// Immutable; safe to share across threads.
class RewardExpression {
public:
    RewardExpression() = default;

    // Grammar: or < and < additive < multiplicative < unary; operands are
    // literals, `state`, `agent_feats[i]` and parenthesized expressions.
    // Feature indices are validated against n_features.
    static RewardExpression parse(std::string_view source, int n_features);

    // `and`/`or` short-circuit and return operand values; `not x` is 1 if
    // x == 0 else 0.
    double evaluate(int state, std::span<const uint8_t> feats) const;

    // Canonical source; parses back to an identical AST.
    std::string render() const;

    const std::string& source() const { return source_; }
    const Node* root() const { return root_.get(); }
    int max_feature_index() const;  // -1 when no features are referenced

    bool operator==(const RewardExpression& other) const {
        return ast_equal(root_.get(), other.root_.get());
    }

private:
    std::string source_;
    std::shared_ptr<const Node> root_;
};

// r_i(s) = evaluate(expr, s, features_i) for every arm and both states.
RewardTable to_reward_table(const RewardExpression& expr, const RmabInstance& instance);

// Audit flag: r(1) >= r(0) for every arm of the instance.
bool monotone_in_state(const RewardExpression& expr, const RmabInstance& instance);

}  // namespace sclm::dsl
