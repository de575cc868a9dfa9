#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mindist/errors.hpp"

namespace mindist {

// A scalar expression in named variables, parsed once into a postfix
// program and evaluated many times (the finite-difference jet of an
// expression-defined surface calls eval in a tight loop).
//
// Grammar: + - * / ^ (right-associative), unary minus, parentheses,
// decimal literals, the constant pi, and the single-argument functions
// sin cos tan exp log sqrt abs. Any other identifier is a parse error
// unless it appears in the variable list.
class Expression {
public:
    // `source` is kept for error messages; `variables` fixes both the
    // set of legal identifiers and the order of eval() arguments.
    static Expression parse(const std::string& source, const std::vector<std::string>& variables);

    // args.size() must equal the variable count.
    double eval(std::span<const double> args) const;

    const std::string& source() const { return source_; }
    std::size_t arity() const { return n_vars_; }

private:
    enum class Op : std::uint8_t {
        PushConst,
        PushVar,
        Add,
        Sub,
        Mul,
        Div,
        Pow,
        Neg,
        Sin,
        Cos,
        Tan,
        Exp,
        Log,
        Sqrt,
        Abs,
    };

    struct Instr {
        Op op;
        std::uint32_t src; // byte offset in source_, for runtime diagnostics
        double value;      // PushConst: literal; PushVar: variable index
    };

    friend class ExprParser;

    std::string source_;
    std::size_t n_vars_ = 0;
    std::vector<Instr> code_;
    std::size_t stack_need_ = 0;
};

} // namespace mindist
