#include "sclm/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>

namespace sclm::dsl {

namespace {

enum class Tok { Number, State, Feats, And, Or, Not, Plus, Minus, Star, LParen, RParen, LBracket, RBracket, End };

struct Token {
    Tok kind;
    double number = 0.0;
    size_t pos = 0;
};

class Lexer {
public:
    Lexer(std::string_view src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            skip_ws();
            size_t pos = i_;
            if (i_ >= src_.size()) {
                out.push_back({Tok::End, 0.0, pos});
                return out;
            }
            char c = src_[i_];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                out.push_back({Tok::Number, number(), pos});
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                out.push_back(identifier(pos));
            } else {
                switch (c) {
                    case '+': out.push_back({Tok::Plus, 0, pos}); break;
                    case '-': out.push_back({Tok::Minus, 0, pos}); break;
                    case '*': out.push_back({Tok::Star, 0, pos}); break;
                    case '(': out.push_back({Tok::LParen, 0, pos}); break;
                    case ')': out.push_back({Tok::RParen, 0, pos}); break;
                    case '[': out.push_back({Tok::LBracket, 0, pos}); break;
                    case ']': out.push_back({Tok::RBracket, 0, pos}); break;
                    default:
                        throw ParseError(std::string("unexpected character '") + c + "'", pos);
                }
                ++i_;
            }
        }
    }

private:
    void skip_ws() {
        while (i_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[i_]))) ++i_;
    }

    double number() {
        size_t start = i_;
        while (i_ < src_.size() &&
               (std::isdigit(static_cast<unsigned char>(src_[i_])) || src_[i_] == '.' ||
                src_[i_] == 'e' || src_[i_] == 'E' ||
                ((src_[i_] == '+' || src_[i_] == '-') && i_ > start &&
                 (src_[i_ - 1] == 'e' || src_[i_ - 1] == 'E'))))
            ++i_;
        double v = 0.0;
        auto res = std::from_chars(src_.data() + start, src_.data() + i_, v);
        if (res.ec != std::errc{} || res.ptr != src_.data() + i_)
            throw ParseError("malformed number", start);
        return v;
    }

    Token identifier(size_t pos) {
        size_t start = i_;
        while (i_ < src_.size() &&
               (std::isalnum(static_cast<unsigned char>(src_[i_])) || src_[i_] == '_'))
            ++i_;
        std::string_view word = src_.substr(start, i_ - start);
        if (word == "state") return {Tok::State, 0, pos};
        if (word == "agent_feats") return {Tok::Feats, 0, pos};
        if (word == "and") return {Tok::And, 0, pos};
        if (word == "or") return {Tok::Or, 0, pos};
        if (word == "not") return {Tok::Not, 0, pos};
        if (word == "return") throw ParseError("'return' is not allowed", pos);
        throw ParseError("disallowed identifier '" + std::string(word) + "'", pos);
    }

    std::string_view src_;
    size_t i_ = 0;
};

using NodePtr = std::shared_ptr<const Node>;

NodePtr make(NodeKind kind, NodePtr lhs = nullptr, NodePtr rhs = nullptr) {
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->lhs = std::move(lhs);
    n->rhs = std::move(rhs);
    return n;
}

class Parser {
public:
    Parser(std::vector<Token> tokens, int n_features)
        : tokens_(std::move(tokens)), n_features_(n_features) {}

    NodePtr run() {
        NodePtr e = or_expr();
        if (peek().kind != Tok::End) throw ParseError("trailing input after expression", peek().pos);
        return e;
    }

private:
    const Token& peek() const { return tokens_[i_]; }
    Token take() { return tokens_[i_++]; }
    bool accept(Tok k) {
        if (peek().kind == k) {
            ++i_;
            return true;
        }
        return false;
    }
    void expect(Tok k, const char* what) {
        if (!accept(k)) throw ParseError(std::string("expected ") + what, peek().pos);
    }

    NodePtr or_expr() {
        NodePtr e = and_expr();
        while (accept(Tok::Or)) e = make(NodeKind::Or, e, and_expr());
        return e;
    }
    NodePtr and_expr() {
        NodePtr e = add_expr();
        while (accept(Tok::And)) e = make(NodeKind::And, e, add_expr());
        return e;
    }
    NodePtr add_expr() {
        NodePtr e = mul_expr();
        while (true) {
            if (accept(Tok::Plus))
                e = make(NodeKind::Add, e, mul_expr());
            else if (accept(Tok::Minus))
                e = make(NodeKind::Sub, e, mul_expr());
            else
                return e;
        }
    }
    NodePtr mul_expr() {
        NodePtr e = unary();
        while (accept(Tok::Star)) e = make(NodeKind::Mul, e, unary());
        return e;
    }
    NodePtr unary() {
        if (accept(Tok::Minus)) return make(NodeKind::Negate, unary());
        if (accept(Tok::Not)) return make(NodeKind::Not, unary());
        return primary();
    }
    NodePtr primary() {
        Token t = take();
        switch (t.kind) {
            case Tok::Number: {
                auto n = std::make_shared<Node>();
                n->kind = NodeKind::Literal;
                n->value = t.number;
                return n;
            }
            case Tok::State:
                if (peek().kind == Tok::LParen)
                    throw ParseError("function calls are not allowed", peek().pos);
                return make(NodeKind::State);
            case Tok::Feats: {
                expect(Tok::LBracket, "'[' after agent_feats");
                Token idx = take();
                if (idx.kind != Tok::Number || idx.number != std::floor(idx.number))
                    throw ParseError("feature index must be an integer literal", idx.pos);
                int index = static_cast<int>(idx.number);
                if (index < 0 || index >= n_features_)
                    throw ParseError("feature index " + std::to_string(index) +
                                         " out of range for " + std::to_string(n_features_) +
                                         " features",
                                     idx.pos);
                expect(Tok::RBracket, "']'");
                auto n = std::make_shared<Node>();
                n->kind = NodeKind::Feature;
                n->index = index;
                return n;
            }
            case Tok::LParen: {
                NodePtr e = or_expr();
                expect(Tok::RParen, "')'");
                return e;
            }
            default:
                throw ParseError("expected an operand", t.pos);
        }
    }

    std::vector<Token> tokens_;
    size_t i_ = 0;
    int n_features_;
};

double eval_node(const Node* n, int state, std::span<const uint8_t> feats) {
    switch (n->kind) {
        case NodeKind::Literal: return n->value;
        case NodeKind::State: return static_cast<double>(state);
        case NodeKind::Feature: return static_cast<double>(feats[static_cast<size_t>(n->index)]);
        case NodeKind::Negate: return -eval_node(n->lhs.get(), state, feats);
        case NodeKind::Not: return eval_node(n->lhs.get(), state, feats) == 0.0 ? 1.0 : 0.0;
        case NodeKind::Add:
            return eval_node(n->lhs.get(), state, feats) + eval_node(n->rhs.get(), state, feats);
        case NodeKind::Sub:
            return eval_node(n->lhs.get(), state, feats) - eval_node(n->rhs.get(), state, feats);
        case NodeKind::Mul:
            return eval_node(n->lhs.get(), state, feats) * eval_node(n->rhs.get(), state, feats);
        case NodeKind::And: {
            double a = eval_node(n->lhs.get(), state, feats);
            return a == 0.0 ? a : eval_node(n->rhs.get(), state, feats);
        }
        case NodeKind::Or: {
            double a = eval_node(n->lhs.get(), state, feats);
            return a != 0.0 ? a : eval_node(n->rhs.get(), state, feats);
        }
    }
    return 0.0;  // unreachable
}

int level(NodeKind k) {
    switch (k) {
        case NodeKind::Or: return 1;
        case NodeKind::And: return 2;
        case NodeKind::Add:
        case NodeKind::Sub: return 3;
        case NodeKind::Mul: return 4;
        case NodeKind::Negate:
        case NodeKind::Not: return 5;
        default: return 6;
    }
}

std::string literal_text(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void render_node(const Node* n, std::string& out) {
    auto child = [&](const Node* c, bool need_parens) {
        if (need_parens) {
            out += '(';
            render_node(c, out);
            out += ')';
        } else {
            render_node(c, out);
        }
    };
    int lv = level(n->kind);
    switch (n->kind) {
        case NodeKind::Literal: out += literal_text(n->value); return;
        case NodeKind::State: out += "state"; return;
        case NodeKind::Feature:
            out += "agent_feats[" + std::to_string(n->index) + "]";
            return;
        case NodeKind::Negate:
        case NodeKind::Not:
            out += n->kind == NodeKind::Not ? "not " : "-";
            child(n->lhs.get(), level(n->lhs->kind) < lv);
            return;
        default: {
            const char* op = nullptr;
            switch (n->kind) {
                case NodeKind::Or: op = " or "; break;
                case NodeKind::And: op = " and "; break;
                case NodeKind::Add: op = " + "; break;
                case NodeKind::Sub: op = " - "; break;
                default: op = "*"; break;
            }
            child(n->lhs.get(), level(n->lhs->kind) < lv);
            out += op;
            child(n->rhs.get(), level(n->rhs->kind) <= lv);
            return;
        }
    }
}

int max_index(const Node* n) {
    if (!n) return -1;
    int m = n->kind == NodeKind::Feature ? n->index : -1;
    m = std::max(m, max_index(n->lhs.get()));
    return std::max(m, max_index(n->rhs.get()));
}

}  // namespace

bool ast_equal(const Node* a, const Node* b) {
    if (a == b) return true;
    if (!a || !b) return false;
    if (a->kind != b->kind) return false;
    if (a->kind == NodeKind::Literal && a->value != b->value) return false;
    if (a->kind == NodeKind::Feature && a->index != b->index) return false;
    return ast_equal(a->lhs.get(), b->lhs.get()) && ast_equal(a->rhs.get(), b->rhs.get());
}

RewardExpression RewardExpression::parse(std::string_view source, int n_features) {
    if (source.find_first_not_of(" \t\r\n") == std::string_view::npos)
        throw ParseError("empty expression", 0);
    Lexer lexer(source);
    Parser parser(lexer.run(), n_features);
    RewardExpression e;
    e.root_ = parser.run();
    e.source_ = std::string(source);
    return e;
}

double RewardExpression::evaluate(int state, std::span<const uint8_t> feats) const {
    return eval_node(root_.get(), state, feats);
}

std::string RewardExpression::render() const {
    std::string out;
    render_node(root_.get(), out);
    return out;
}

int RewardExpression::max_feature_index() const { return max_index(root_.get()); }

RewardTable to_reward_table(const RewardExpression& expr, const RmabInstance& instance) {
    if (expr.max_feature_index() >= instance.schema.total_buckets())
        throw std::invalid_argument("to_reward_table: expression indexes past the feature vector");
    RewardTable table;
    table.values.reserve(instance.arms.size());
    for (const auto& arm : instance.arms)
        table.values.push_back({expr.evaluate(0, arm.features), expr.evaluate(1, arm.features)});
    table.validate();
    return table;
}

bool monotone_in_state(const RewardExpression& expr, const RmabInstance& instance) {
    for (const auto& arm : instance.arms)
        if (expr.evaluate(1, arm.features) + 1e-12 < expr.evaluate(0, arm.features)) return false;
    return true;
}

}  // namespace sclm::dsl
