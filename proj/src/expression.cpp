#include "mindist/expression.hpp"

#include <algorithm>
#include <cassert>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <optional>

namespace mindist {

ParseError::ParseError(const std::string& msg, std::size_t off)
    : Error("parse error at " + std::to_string(off) + ": " + msg), offset(off) {}

EvaluationError::EvaluationError(const std::string& msg, std::size_t off)
    : Error("evaluation error at " + std::to_string(off) + ": " + msg), offset(off) {}

namespace {

struct Token {
    enum Kind { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End } kind;
    std::size_t pos;    // byte offset of the first character
    double number = 0;  // Number
    std::string text;   // Ident
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) { advance(); }

    const Token& peek() const { return tok_; }

    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        tok_.pos = pos_;
        if (pos_ >= src_.size()) {
            tok_.kind = Token::End;
            return;
        }
        char c = src_[pos_];
        switch (c) {
        case '+': tok_.kind = Token::Plus; ++pos_; return;
        case '-': tok_.kind = Token::Minus; ++pos_; return;
        case '*': tok_.kind = Token::Star; ++pos_; return;
        case '/': tok_.kind = Token::Slash; ++pos_; return;
        case '^': tok_.kind = Token::Caret; ++pos_; return;
        case '(': tok_.kind = Token::LParen; ++pos_; return;
        case ')': tok_.kind = Token::RParen; ++pos_; return;
        default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            // strtod accepts leading signs and hex floats; neither can reach
            // here because '-' is tokenized above and 'x' is not a digit.
            const char* begin = src_.c_str() + pos_;
            char* end = nullptr;
            double v = std::strtod(begin, &end);
            if (end == begin) throw ParseError("malformed number", pos_);
            tok_.kind = Token::Number;
            tok_.number = v;
            pos_ += static_cast<std::size_t>(end - begin);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos_;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                ++pos_;
            tok_.kind = Token::Ident;
            tok_.text = src_.substr(start, pos_ - start);
            return;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    }

    const std::string& src_;
    std::size_t pos_ = 0;
    Token tok_;
};

} // namespace

// Parser emits straight into the Expression being built. Friend of
// Expression so the instruction encoding stays private to this file.
class ExprParser {
public:
    ExprParser(Expression& out, Lexer& lex, const std::vector<std::string>& vars)
        : out_(out), lex_(lex), vars_(vars) {}

    void run() {
        expr();
        const Token& t = lex_.peek();
        if (t.kind != Token::End) throw ParseError("unexpected trailing input", t.pos);
        out_.stack_need_ = measure_stack();
    }

private:
    using Op = Expression::Op;

    // expr := term (('+'|'-') term)*
    void expr() {
        term();
        while (true) {
            const Token& t = lex_.peek();
            if (t.kind == Token::Plus || t.kind == Token::Minus) {
                Token op = lex_.take();
                term();
                emit(op.kind == Token::Plus ? Op::Add : Op::Sub, op.pos);
            } else {
                return;
            }
        }
    }

    // term := unary (('*'|'/') unary)*
    void term() {
        unary();
        while (true) {
            const Token& t = lex_.peek();
            if (t.kind == Token::Star || t.kind == Token::Slash) {
                Token op = lex_.take();
                unary();
                emit(op.kind == Token::Star ? Op::Mul : Op::Div, op.pos);
            } else {
                return;
            }
        }
    }

    // unary := '-' unary | power
    // Binding unary below '^' gives the conventional -x^2 == -(x^2),
    // while the recursion on the right of '^' allows 2^-3.
    void unary() {
        const Token& t = lex_.peek();
        if (t.kind == Token::Minus) {
            Token op = lex_.take();
            unary();
            emit(Op::Neg, op.pos);
            return;
        }
        power();
    }

    // power := atom ('^' unary)?   (right-associative)
    void power() {
        atom();
        const Token& t = lex_.peek();
        if (t.kind == Token::Caret) {
            Token op = lex_.take();
            unary();
            emit(Op::Pow, op.pos);
        }
    }

    void atom() {
        Token t = lex_.take();
        switch (t.kind) {
        case Token::Number:
            push_const(t.number, t.pos);
            return;
        case Token::LParen: {
            expr();
            Token close = lex_.take();
            if (close.kind != Token::RParen) throw ParseError("expected ')'", close.pos);
            return;
        }
        case Token::Ident: {
            if (t.text == "pi") {
                push_const(std::numbers::pi, t.pos);
                return;
            }
            if (auto fn = function_op(t.text)) {
                Token open = lex_.take();
                if (open.kind != Token::LParen)
                    throw ParseError("expected '(' after function '" + t.text + "'", open.pos);
                expr();
                Token close = lex_.take();
                if (close.kind != Token::RParen)
                    throw ParseError("expected ')' closing call to '" + t.text + "'", close.pos);
                emit(*fn, t.pos);
                return;
            }
            auto it = std::find(vars_.begin(), vars_.end(), t.text);
            if (it == vars_.end())
                throw ParseError("unknown identifier '" + t.text + "'", t.pos);
            push_var(static_cast<std::size_t>(it - vars_.begin()), t.pos);
            return;
        }
        case Token::End:
            throw ParseError("unexpected end of expression", t.pos);
        default:
            throw ParseError("expected a value", t.pos);
        }
    }

    static std::optional<Op> function_op(const std::string& name) {
        if (name == "sin") return Op::Sin;
        if (name == "cos") return Op::Cos;
        if (name == "tan") return Op::Tan;
        if (name == "exp") return Op::Exp;
        if (name == "log") return Op::Log;
        if (name == "sqrt") return Op::Sqrt;
        if (name == "abs") return Op::Abs;
        return std::nullopt;
    }

    void emit(Op op, std::size_t pos) {
        out_.code_.push_back({op, static_cast<std::uint32_t>(pos), 0.0});
    }
    void push_const(double v, std::size_t pos) {
        out_.code_.push_back({Op::PushConst, static_cast<std::uint32_t>(pos), v});
    }
    void push_var(std::size_t idx, std::size_t pos) {
        out_.code_.push_back(
            {Op::PushVar, static_cast<std::uint32_t>(pos), static_cast<double>(idx)});
    }

    // Max stack depth of the finished program (binary ops pop 2 push 1,
    // unaries pop 1 push 1, pushes push 1).
    std::size_t measure_stack() const {
        std::size_t depth = 0, peak = 0;
        for (const auto& ins : out_.code_) {
            switch (ins.op) {
            case Op::PushConst:
            case Op::PushVar:
                ++depth;
                break;
            case Op::Add:
            case Op::Sub:
            case Op::Mul:
            case Op::Div:
            case Op::Pow:
                --depth;
                break;
            default:
                break; // unary: net zero
            }
            peak = std::max(peak, depth);
        }
        return peak;
    }

    Expression& out_;
    Lexer& lex_;
    const std::vector<std::string>& vars_;
};

Expression Expression::parse(const std::string& source, const std::vector<std::string>& variables) {
    Expression e;
    e.source_ = source;
    e.n_vars_ = variables.size();
    Lexer lex(source);
    ExprParser(e, lex, variables).run();
    return e;
}

double Expression::eval(std::span<const double> args) const {
    assert(args.size() == n_vars_);
    // Fixed-size scratch: surface expressions are short; 128 slots is far
    // beyond any plausible operand depth and keeps eval allocation-free.
    double stack[128];
    if (stack_need_ > std::size(stack))
        throw EvaluationError("expression too deep", 0);
    std::size_t top = 0;

    for (const auto& ins : code_) {
        switch (ins.op) {
        case Op::PushConst: stack[top++] = ins.value; break;
        case Op::PushVar: stack[top++] = args[static_cast<std::size_t>(ins.value)]; break;
        case Op::Add: --top; stack[top - 1] += stack[top]; break;
        case Op::Sub: --top; stack[top - 1] -= stack[top]; break;
        case Op::Mul: --top; stack[top - 1] *= stack[top]; break;
        case Op::Div: {
            --top;
            if (stack[top] == 0.0) throw EvaluationError("division by zero", ins.src);
            stack[top - 1] /= stack[top];
            break;
        }
        case Op::Pow: {
            --top;
            double v = std::pow(stack[top - 1], stack[top]);
            if (!std::isfinite(v))
                throw EvaluationError("power produced a non-finite value", ins.src);
            stack[top - 1] = v;
            break;
        }
        case Op::Neg: stack[top - 1] = -stack[top - 1]; break;
        case Op::Sin: stack[top - 1] = std::sin(stack[top - 1]); break;
        case Op::Cos: stack[top - 1] = std::cos(stack[top - 1]); break;
        case Op::Tan: stack[top - 1] = std::tan(stack[top - 1]); break;
        case Op::Exp: stack[top - 1] = std::exp(stack[top - 1]); break;
        case Op::Log: {
            if (stack[top - 1] <= 0.0)
                throw EvaluationError("log of a non-positive value", ins.src);
            stack[top - 1] = std::log(stack[top - 1]);
            break;
        }
        case Op::Sqrt: {
            if (stack[top - 1] < 0.0)
                throw EvaluationError("sqrt of a negative value", ins.src);
            stack[top - 1] = std::sqrt(stack[top - 1]);
            break;
        }
        case Op::Abs: stack[top - 1] = std::fabs(stack[top - 1]); break;
        }
    }
    assert(top == 1);
    return stack[0];
}

} // namespace mindist
