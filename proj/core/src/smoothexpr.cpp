#include "extcalc/smoothexpr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <unordered_map>

namespace extcalc {

namespace {

enum class Tok { End, Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma };

struct Lexer {
    const std::string& src;
    std::size_t pos = 0;

    Tok kind = Tok::End;
    double number = 0.0;
    std::string ident;
    std::size_t tok_offset = 0;

    explicit Lexer(const std::string& s) : src(s) { next(); }

    void next() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
        tok_offset = pos;
        if (pos >= src.size()) {
            kind = Tok::End;
            return;
        }
        const char c = src[pos];
        switch (c) {
            case '+': kind = Tok::Plus; ++pos; return;
            case '-': kind = Tok::Minus; ++pos; return;
            case '*': kind = Tok::Star; ++pos; return;
            case '/': kind = Tok::Slash; ++pos; return;
            case '^': kind = Tok::Caret; ++pos; return;
            case '(': kind = Tok::LParen; ++pos; return;
            case ')': kind = Tok::RParen; ++pos; return;
            case ',': kind = Tok::Comma; ++pos; return;
            default: break;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            lex_number();
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            lex_ident();
            return;
        }
        throw SyntaxError(std::string("unexpected character '") + c + "'", pos);
    }

    void lex_number() {
        const std::size_t start = pos;
        while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
        if (pos < src.size() && src[pos] == '.') {
            ++pos;
            while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
        }
        if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
            std::size_t mark = pos;
            ++pos;
            if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
            if (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
                while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
            } else {
                pos = mark;  // not an exponent, leave 'e' for the ident lexer
            }
        }
        try {
            number = std::stod(src.substr(start, pos - start));
        } catch (const std::exception&) {
            throw SyntaxError("malformed number", start);
        }
        kind = Tok::Number;
    }

    // Identifier, optionally carrying one braced index block: T2_{13;2}
    void lex_ident() {
        const std::size_t start = pos;
        while (pos < src.size() &&
               (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
            ++pos;
        if (pos < src.size() && src[pos] == '{') {
            ++pos;
            while (pos < src.size() && src[pos] != '}') {
                const char c = src[pos];
                if (!std::isdigit(static_cast<unsigned char>(c)) && c != ';' && c != ',')
                    throw SyntaxError("invalid character in index block", pos);
                ++pos;
            }
            if (pos >= src.size()) throw SyntaxError("unterminated index block", start);
            ++pos;  // '}'
        }
        ident = src.substr(start, pos - start);
        kind = Tok::Ident;
    }
};

struct Parser {
    Lexer lex;

    explicit Parser(const std::string& s) : lex(s) {}

    ExprNode parse_expr() {
        ExprNode node = parse_term();
        while (lex.kind == Tok::Plus || lex.kind == Tok::Minus) {
            const ExprOp op = lex.kind == Tok::Plus ? ExprOp::Add : ExprOp::Sub;
            const std::size_t off = lex.tok_offset;
            lex.next();
            ExprNode rhs = parse_term();
            ExprNode parent;
            parent.op = op;
            parent.offset = off;
            parent.kids.push_back(std::move(node));
            parent.kids.push_back(std::move(rhs));
            node = std::move(parent);
        }
        return node;
    }

    ExprNode parse_term() {
        ExprNode node = parse_unary();
        while (lex.kind == Tok::Star || lex.kind == Tok::Slash) {
            const ExprOp op = lex.kind == Tok::Star ? ExprOp::Mul : ExprOp::Div;
            const std::size_t off = lex.tok_offset;
            lex.next();
            ExprNode rhs = parse_unary();
            ExprNode parent;
            parent.op = op;
            parent.offset = off;
            parent.kids.push_back(std::move(node));
            parent.kids.push_back(std::move(rhs));
            node = std::move(parent);
        }
        return node;
    }

    ExprNode parse_unary() {
        if (lex.kind == Tok::Minus) {
            const std::size_t off = lex.tok_offset;
            lex.next();
            ExprNode kid = parse_unary();
            ExprNode node;
            node.op = ExprOp::Neg;
            node.offset = off;
            node.kids.push_back(std::move(kid));
            return node;
        }
        return parse_power();
    }

    ExprNode parse_power() {
        ExprNode base = parse_primary();
        if (lex.kind == Tok::Caret) {
            const std::size_t off = lex.tok_offset;
            lex.next();
            ExprNode expo = parse_unary();  // right-assoc, allows -2 and (3)
            double value = 0.0;
            if (!const_fold(expo, value))
                throw SyntaxError("exponent must be numeric", off);
            ExprNode node;
            node.op = ExprOp::Pow;
            node.literal = value;
            node.offset = off;
            node.kids.push_back(std::move(base));
            return node;
        }
        return base;
    }

    static bool const_fold(const ExprNode& n, double& out) {
        switch (n.op) {
            case ExprOp::Literal: out = n.literal; return true;
            case ExprOp::Neg: {
                double v;
                if (!const_fold(n.kids[0], v)) return false;
                out = -v;
                return true;
            }
            default: return false;
        }
    }

    ExprNode parse_primary() {
        switch (lex.kind) {
            case Tok::Number: {
                ExprNode node;
                node.op = ExprOp::Literal;
                node.literal = lex.number;
                node.offset = lex.tok_offset;
                lex.next();
                return node;
            }
            case Tok::Ident: {
                const std::string name = lex.ident;
                const std::size_t off = lex.tok_offset;
                lex.next();
                if (lex.kind == Tok::LParen) return parse_call(name, off);
                if (name == "pi") {
                    ExprNode node;
                    node.op = ExprOp::Literal;
                    node.literal = 3.14159265358979323846;
                    node.offset = off;
                    return node;
                }
                ExprNode node;
                node.op = ExprOp::Variable;
                node.name = name;
                node.offset = off;
                return node;
            }
            case Tok::LParen: {
                lex.next();
                ExprNode node = parse_expr();
                expect(Tok::RParen, "expected ')'");
                return node;
            }
            default:
                throw SyntaxError("expected a value", lex.tok_offset);
        }
    }

    ExprNode parse_call(const std::string& name, std::size_t off) {
        static const std::unordered_map<std::string, std::pair<ExprOp, int>> table = {
            {"sin", {ExprOp::Sin, 1}},   {"cos", {ExprOp::Cos, 1}},  {"tan", {ExprOp::Tan, 1}},
            {"exp", {ExprOp::Exp, 1}},   {"log", {ExprOp::Log, 1}},  {"sqrt", {ExprOp::Sqrt, 1}},
            {"atan2", {ExprOp::Atan2, 2}},
        };
        const auto it = table.find(name);
        if (it == table.end()) throw UnknownFunction("unknown function '" + name + "'");
        expect(Tok::LParen, "expected '('");
        ExprNode node;
        node.op = it->second.first;
        node.offset = off;
        node.kids.push_back(parse_expr());
        for (int i = 1; i < it->second.second; ++i) {
            expect(Tok::Comma, "expected ','");
            node.kids.push_back(parse_expr());
        }
        expect(Tok::RParen, "expected ')'");
        return node;
    }

    void expect(Tok t, const char* msg) {
        if (lex.kind != t) throw SyntaxError(msg, lex.tok_offset);
        lex.next();
    }
};

void collect_vars(const ExprNode& n, std::vector<std::string>& out) {
    if (n.op == ExprOp::Variable) {
        for (const std::string& s : out)
            if (s == n.name) return;
        out.push_back(n.name);
        return;
    }
    for (const ExprNode& k : n.kids) collect_vars(k, out);
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void print_node(const ExprNode& n, std::string& out) {
    switch (n.op) {
        case ExprOp::Literal:
            if (n.literal < 0) {
                out += "(" + format_double(n.literal) + ")";
            } else {
                out += format_double(n.literal);
            }
            break;
        case ExprOp::Variable: out += n.name; break;
        case ExprOp::Add:
        case ExprOp::Sub:
        case ExprOp::Mul:
        case ExprOp::Div: {
            const char* sym = n.op == ExprOp::Add   ? "+"
                              : n.op == ExprOp::Sub ? "-"
                              : n.op == ExprOp::Mul ? "*"
                                                    : "/";
            out += "(";
            print_node(n.kids[0], out);
            out += sym;
            print_node(n.kids[1], out);
            out += ")";
            break;
        }
        case ExprOp::Neg:
            out += "(-";
            print_node(n.kids[0], out);
            out += ")";
            break;
        case ExprOp::Pow:
            out += "(";
            print_node(n.kids[0], out);
            out += "^";
            if (n.literal < 0) {
                out += "(" + format_double(n.literal) + ")";
            } else {
                out += format_double(n.literal);
            }
            out += ")";
            break;
        case ExprOp::Sin:
        case ExprOp::Cos:
        case ExprOp::Tan:
        case ExprOp::Exp:
        case ExprOp::Log:
        case ExprOp::Sqrt: {
            const char* f = n.op == ExprOp::Sin   ? "sin"
                            : n.op == ExprOp::Cos ? "cos"
                            : n.op == ExprOp::Tan ? "tan"
                            : n.op == ExprOp::Exp ? "exp"
                            : n.op == ExprOp::Log ? "log"
                                                  : "sqrt";
            out += f;
            out += "(";
            print_node(n.kids[0], out);
            out += ")";
            break;
        }
        case ExprOp::Atan2:
            out += "atan2(";
            print_node(n.kids[0], out);
            out += ",";
            print_node(n.kids[1], out);
            out += ")";
            break;
    }
}

void compile_node(const ExprNode& n, const std::vector<std::string>& names,
                  std::vector<CompiledExpr::Ins>& prog) {
    switch (n.op) {
        case ExprOp::Literal:
            prog.push_back({ExprOp::Literal, n.literal, -1});
            return;
        case ExprOp::Variable: {
            for (std::size_t i = 0; i < names.size(); ++i) {
                if (names[i] == n.name) {
                    prog.push_back({ExprOp::Variable, 0.0, static_cast<int>(i)});
                    return;
                }
            }
            throw UnknownVariable("unknown variable '" + n.name + "'");
        }
        default:
            for (const ExprNode& k : n.kids) compile_node(k, names, prog);
            prog.push_back({n.op, n.literal, -1});
            return;
    }
}

std::size_t program_depth(const std::vector<CompiledExpr::Ins>& prog) {
    std::size_t depth = 0;
    std::size_t max_depth = 0;
    for (const auto& ins : prog) {
        switch (ins.op) {
            case ExprOp::Literal:
            case ExprOp::Variable: ++depth; break;
            case ExprOp::Add:
            case ExprOp::Sub:
            case ExprOp::Mul:
            case ExprOp::Div:
            case ExprOp::Atan2: --depth; break;
            default: break;
        }
        if (depth > max_depth) max_depth = depth;
    }
    return max_depth == 0 ? 1 : max_depth;
}

}  // namespace

Expr parse(const std::string& source) {
    Parser p(source);
    ExprNode root = p.parse_expr();
    if (p.lex.kind != Tok::End) throw SyntaxError("trailing input", p.lex.tok_offset);
    return Expr(std::move(root));
}

std::vector<std::string> Expr::variables() const {
    std::vector<std::string> out;
    if (root_) collect_vars(*root_, out);
    return out;
}

std::string print(const Expr& e) {
    std::string out;
    if (!e.empty()) print_node(e.root(), out);
    return out;
}

CompiledExpr::CompiledExpr(const Expr& e, const std::vector<std::string>& names) {
    if (e.empty()) throw Error("compiling an empty expression");
    compile_node(e.root(), names, prog_);
    max_depth_ = program_depth(prog_);
}

Jet2 eval_jet2(const Expr& e, const std::map<std::string, double>& bindings,
               const std::vector<std::string>& seeds) {
    std::vector<std::string> names;
    std::vector<Jet2> env;
    names.reserve(bindings.size());
    env.reserve(bindings.size());
    for (const auto& [k, v] : bindings) {
        names.push_back(k);
        env.push_back(Jet2(v));
    }
    for (std::size_t s = 0; s < seeds.size(); ++s) {
        bool found = false;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (names[i] == seeds[s]) {
                env[i] = Jet2::seeded(env[i].v, seeds.size(), s);
                found = true;
                break;
            }
        }
        if (!found) throw UnknownVariable("seed variable '" + seeds[s] + "' is not bound");
    }
    CompiledExpr c(e, names);
    return c.eval(std::span<const Jet2>(env));
}

}  // namespace extcalc
