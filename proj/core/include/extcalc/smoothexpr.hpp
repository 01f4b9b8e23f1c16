#ifndef EXTCALC_SMOOTHEXPR_HPP
#define EXTCALC_SMOOTHEXPR_HPP

// Smooth scalar expressions over named variables, with evaluation generic
// over the derivative-propagating scalar types of jets.hpp.
//
// Grammar (precedence high to low): ^ with numeric exponent, unary -,
// * /, + - (left associative). Functions: sin cos tan exp log sqrt atan2.
// "pi" is a built-in constant. Variable names may carry a braced index
// block, e.g. T1_{2;13}, which the lexer treats as part of the name.

#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "extcalc/errors.hpp"
#include "extcalc/jets.hpp"

namespace extcalc {

enum class ExprOp {
    Literal,
    Variable,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Pow,  // numeric exponent in `literal`
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Atan2,
};

struct ExprNode {
    ExprOp op{ExprOp::Literal};
    double literal = 0.0;
    std::string name;
    std::vector<ExprNode> kids;
    std::size_t offset = 0;
};

class Expr {
public:
    Expr() = default;
    explicit Expr(ExprNode root) : root_(std::make_shared<const ExprNode>(std::move(root))) {}

    bool empty() const { return root_ == nullptr; }
    const ExprNode& root() const { return *root_; }

    /// Distinct variable names, in first-appearance order.
    std::vector<std::string> variables() const;

private:
    std::shared_ptr<const ExprNode> root_;
};

Expr parse(const std::string& source);
std::string print(const Expr& e);

/// Expression lowered to a postfix program with variable slots resolved
/// against an ordered name table. Unknown names fail here (bind time).
class CompiledExpr {
public:
    struct Ins {
        ExprOp op;
        double literal;
        int slot;
    };

    CompiledExpr() = default;
    CompiledExpr(const Expr& e, const std::vector<std::string>& names);

    template <class S>
    S eval(std::span<const S> env) const {
        std::vector<S> stack;
        stack.reserve(max_depth_);
        for (const Ins& ins : prog_) {
            switch (ins.op) {
                case ExprOp::Literal:
                    stack.push_back(S(ins.literal));
                    break;
                case ExprOp::Variable:
                    stack.push_back(env[static_cast<std::size_t>(ins.slot)]);
                    break;
                case ExprOp::Neg:
                    stack.back() = -stack.back();
                    break;
                case ExprOp::Pow:
                    stack.back() = pow(stack.back(), ins.literal);
                    break;
                case ExprOp::Sin:
                    stack.back() = sin(stack.back());
                    break;
                case ExprOp::Cos:
                    stack.back() = cos(stack.back());
                    break;
                case ExprOp::Tan:
                    stack.back() = tan(stack.back());
                    break;
                case ExprOp::Exp:
                    stack.back() = exp(stack.back());
                    break;
                case ExprOp::Log:
                    stack.back() = log(stack.back());
                    break;
                case ExprOp::Sqrt:
                    stack.back() = sqrt(stack.back());
                    break;
                case ExprOp::Atan2: {
                    S x = std::move(stack.back());
                    stack.pop_back();
                    stack.back() = atan2(stack.back(), x);
                    break;
                }
                case ExprOp::Add:
                case ExprOp::Sub:
                case ExprOp::Mul:
                case ExprOp::Div: {
                    S b = std::move(stack.back());
                    stack.pop_back();
                    S& a = stack.back();
                    switch (ins.op) {
                        case ExprOp::Add: a = a + b; break;
                        case ExprOp::Sub: a = a - b; break;
                        case ExprOp::Mul: a = a * b; break;
                        default:
                            if (scalar_value(b) == 0.0) throw DomainError("division by zero");
                            a = a / b;
                            break;
                    }
                    break;
                }
            }
        }
        return std::move(stack.back());
    }

private:
    std::vector<Ins> prog_;
    std::size_t max_depth_ = 1;
};

/// Convenience eval against a name->value map (binds on every call).
template <class S>
S eval(const Expr& e, const std::map<std::string, S>& bindings) {
    std::vector<std::string> names;
    std::vector<S> env;
    names.reserve(bindings.size());
    env.reserve(bindings.size());
    for (const auto& [k, v] : bindings) {
        names.push_back(k);
        env.push_back(v);
    }
    CompiledExpr c(e, names);
    return c.eval(std::span<const S>(env));
}

/// Value, gradient and symmetric Hessian over the given seed variables,
/// exact to arithmetic rounding.
Jet2 eval_jet2(const Expr& e, const std::map<std::string, double>& bindings,
               const std::vector<std::string>& seeds);

}  // namespace extcalc

#endif
