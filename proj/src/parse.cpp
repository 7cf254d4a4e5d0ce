// SPDX-License-Identifier: MIT

#include "resr/expr.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

namespace resr {

std::string_view to_string(ParseErrorKind kind) noexcept
{
    switch (kind) {
    case ParseErrorKind::EmptyInput:
        return "empty input";
    case ParseErrorKind::UnknownIdentifier:
        return "unknown identifier";
    case ParseErrorKind::UnbalancedParentheses:
        return "unbalanced parentheses";
    case ParseErrorKind::ArityMismatch:
        return "arity mismatch";
    case ParseErrorKind::UnexpectedToken:
        return "unexpected token";
    case ParseErrorKind::InvalidNumber:
        return "invalid number";
    }
    return "parse error";
}

ParseError::ParseError(ParseErrorKind kind, std::size_t offset, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + " at offset " + std::to_string(offset) + ": " + detail),
      kind_(kind), offset_(offset)
{
}

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, End };

struct Token {
    Tok type = Tok::End;
    std::size_t offset = 0;
    std::string_view text;
    double number = 0.0;
};

std::optional<NodeKind> function_kind(std::string_view name)
{
    if (name == "cos") return NodeKind::Cos;
    if (name == "sin") return NodeKind::Sin;
    if (name == "exp") return NodeKind::Exp;
    if (name == "log") return NodeKind::Log;
    if (name == "tan") return NodeKind::Tan;
    if (name == "sqrt") return NodeKind::Sqrt;
    return std::nullopt;
}

std::vector<Token> tokenize(std::string_view s)
{
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        Token tok;
        tok.offset = i;
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            if (j < s.size() && s[j] == '.') {
                ++j;
                while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            }
            if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
                std::size_t k = j + 1;
                if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
                if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
                    while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
                    j = k;
                }
            }
            tok.type = Tok::Number;
            tok.text = s.substr(i, j - i);
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(tok.text.data(), tok.text.data() + tok.text.size(), value);
            if (ec != std::errc() || ptr != tok.text.data() + tok.text.size() || !std::isfinite(value)) {
                throw ParseError(ParseErrorKind::InvalidNumber, i, "'" + std::string(tok.text) + "'");
            }
            tok.number = value;
            i = j;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && (std::isalnum(static_cast<unsigned char>(s[j])) || s[j] == '_')) ++j;
            tok.type = Tok::Ident;
            tok.text = s.substr(i, j - i);
            i = j;
        } else {
            switch (c) {
            case '+': tok.type = Tok::Plus; break;
            case '-': tok.type = Tok::Minus; break;
            case '*': tok.type = Tok::Star; break;
            case '/': tok.type = Tok::Slash; break;
            case '^': tok.type = Tok::Caret; break;
            case '(': tok.type = Tok::LParen; break;
            case ')': tok.type = Tok::RParen; break;
            case ',': tok.type = Tok::Comma; break;
            default:
                throw ParseError(ParseErrorKind::UnexpectedToken, i, std::string("character '") + c + "'");
            }
            tok.text = s.substr(i, 1);
            ++i;
        }
        out.push_back(tok);
    }
    Token end;
    end.type = Tok::End;
    end.offset = s.size();
    out.push_back(end);
    return out;
}

// expr     := term (('+' | '-') term)*
// term     := unary (('*' | '/') unary)*
// unary    := '-' unary | power
// power    := primary ('^' unary)?
// primary  := number | 't' | func '(' expr ')' | '(' expr ')'
class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    Expr parse_all()
    {
        Expr e = expr();
        const auto& t = peek();
        if (t.type == Tok::RParen) {
            throw ParseError(ParseErrorKind::UnbalancedParentheses, t.offset, "unmatched ')'");
        }
        if (t.type != Tok::End) {
            throw ParseError(ParseErrorKind::UnexpectedToken, t.offset, "'" + std::string(t.text) + "'");
        }
        return e;
    }

private:
    const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }
    const Token& next() { return toks_[pos_++]; }

    Expr expr()
    {
        Expr lhs = term();
        while (peek().type == Tok::Plus || peek().type == Tok::Minus) {
            const auto kind = next().type == Tok::Plus ? NodeKind::Add : NodeKind::Sub;
            lhs = Expr::binary(kind, lhs, term());
        }
        return lhs;
    }

    Expr term()
    {
        Expr lhs = unary();
        while (peek().type == Tok::Star || peek().type == Tok::Slash) {
            const auto kind = next().type == Tok::Star ? NodeKind::Mul : NodeKind::Div;
            lhs = Expr::binary(kind, lhs, unary());
        }
        return lhs;
    }

    Expr unary()
    {
        if (peek().type == Tok::Minus) {
            next();
            if (peek().type == Tok::Number && peek(1).type != Tok::Caret) {
                return Expr::constant(-next().number);
            }
            return Expr::unary(NodeKind::Neg, unary());
        }
        return power();
    }

    Expr power()
    {
        Expr base = primary();
        if (peek().type == Tok::Caret) {
            next();
            return Expr::binary(NodeKind::Pow, base, unary());
        }
        return base;
    }

    Expr primary()
    {
        const Token& tok = peek();
        switch (tok.type) {
        case Tok::Number:
            next();
            return Expr::constant(tok.number);
        case Tok::Ident:
            return identifier();
        case Tok::LParen: {
            next();
            Expr inner = expr();
            expect_close(tok.offset);
            return inner;
        }
        case Tok::RParen:
            throw ParseError(ParseErrorKind::UnbalancedParentheses, tok.offset, "unexpected ')'");
        case Tok::End:
            if (tok.offset == 0 || pos_ == 0) {
                throw ParseError(ParseErrorKind::EmptyInput, tok.offset, "expected an expression");
            }
            throw ParseError(ParseErrorKind::UnexpectedToken, tok.offset, "unexpected end of input");
        default:
            throw ParseError(ParseErrorKind::UnexpectedToken, tok.offset, "'" + std::string(tok.text) + "'");
        }
    }

    Expr identifier()
    {
        const Token tok = next();
        if (tok.text == "t") {
            if (peek().type == Tok::LParen) {
                throw ParseError(ParseErrorKind::UnexpectedToken, peek().offset, "'t' is not a function");
            }
            return Expr::variable();
        }
        const auto fn = function_kind(tok.text);
        if (!fn) {
            throw ParseError(ParseErrorKind::UnknownIdentifier, tok.offset, "'" + std::string(tok.text) + "'");
        }
        if (peek().type != Tok::LParen) {
            throw ParseError(ParseErrorKind::ArityMismatch, tok.offset,
                std::string(tok.text) + " expects one parenthesized argument");
        }
        const auto open = next().offset;
        if (peek().type == Tok::RParen) {
            throw ParseError(ParseErrorKind::ArityMismatch, tok.offset, std::string(tok.text) + "() takes 1 argument, got 0");
        }
        Expr arg = expr();
        if (peek().type == Tok::Comma) {
            throw ParseError(ParseErrorKind::ArityMismatch, peek().offset,
                std::string(tok.text) + "() takes 1 argument");
        }
        expect_close(open);
        return Expr::unary(*fn, arg);
    }

    void expect_close(std::size_t open_offset)
    {
        const auto& t = peek();
        if (t.type == Tok::RParen) {
            next();
            return;
        }
        if (t.type == Tok::End) {
            throw ParseError(ParseErrorKind::UnbalancedParentheses, open_offset, "unclosed '('");
        }
        throw ParseError(ParseErrorKind::UnexpectedToken, t.offset, "'" + std::string(t.text) + "'");
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

// Binding strength as seen by a parent deciding on parentheses.
int precedence(const Node& n)
{
    switch (n.kind) {
    case NodeKind::Add:
    case NodeKind::Sub:
        return 1;
    case NodeKind::Mul:
    case NodeKind::Div:
        return 2;
    case NodeKind::Neg:
        return 3;
    case NodeKind::Pow:
        return 4;
    case NodeKind::Constant:
        return std::signbit(n.value) ? 3 : 5;
    default:
        return 5;
    }
}

std::string format_number(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

class Printer {
public:
    explicit Printer(const Expr& e) : e_(e) {}

    std::string print(std::size_t i)
    {
        const Node& n = e_[i];
        switch (n.kind) {
        case NodeKind::Constant:
            return format_number(n.value);
        case NodeKind::Variable:
            return "t";
        case NodeKind::Neg: {
            const auto c = i + 1;
            const Node& child = e_[c];
            // A bare literal after '-' would fold into a negative constant.
            const bool literal = child.kind == NodeKind::Constant && !std::signbit(child.value);
            const bool paren = literal || precedence(child) < 3;
            return "-" + wrap(c, paren);
        }
        case NodeKind::Cos:
        case NodeKind::Sin:
        case NodeKind::Exp:
        case NodeKind::Log:
        case NodeKind::Tan:
        case NodeKind::Sqrt:
            return std::string(kind_name(n.kind)) + "(" + print(i + 1) + ")";
        default:
            break;
        }
        const auto kids = e_.children(i);
        const int p = precedence(n);
        const int pl = precedence(e_[kids[0]]);
        const int pr = precedence(e_[kids[1]]);
        std::string op;
        bool paren_l = false;
        bool paren_r = false;
        switch (n.kind) {
        case NodeKind::Add:
            op = " + ";
            break;
        case NodeKind::Sub:
            op = " - ";
            break;
        case NodeKind::Mul:
            op = " * ";
            break;
        case NodeKind::Div:
            op = " / ";
            break;
        default:
            op = " ^ ";
            break;
        }
        if (n.kind == NodeKind::Pow) {
            paren_l = pl <= 4;
            paren_r = pr < 3;
        } else {
            paren_l = pl < p;
            paren_r = pr <= p;
        }
        return wrap(kids[0], paren_l) + op + wrap(kids[1], paren_r);
    }

private:
    std::string wrap(std::size_t i, bool paren) { return paren ? "(" + print(i) + ")" : print(i); }

    const Expr& e_;
};

} // namespace

Expr parse(std::string_view text)
{
    auto tokens = tokenize(text);
    if (tokens.size() == 1) {
        throw ParseError(ParseErrorKind::EmptyInput, 0, "no tokens");
    }
    Parser parser(std::move(tokens));
    return parser.parse_all();
}

std::string to_string(const Expr& e) { return Printer(e).print(0); }

} // namespace resr
