#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "msou/errors.hpp"
#include "msou/formula.hpp"

namespace msou {

namespace detail {

inline void print_formula(const Formula& f, std::string& out) {
    switch (f.kind()) {
    case FormulaKind::label_atom:
        out += f.label().name();
        out += '(';
        out += f.x().name();
        out += ')';
        return;
    case FormulaKind::subset:
        out += f.x().name();
        out += " sub ";
        out += f.y().name();
        return;
    case FormulaKind::child:
        out += "child";
        out += std::to_string(f.index());
        out += '(';
        out += f.x().name();
        out += ',';
        out += f.y().name();
        out += ')';
        return;
    case FormulaKind::conj:
        out += "((";
        print_formula(f.lhs(), out);
        out += ") & (";
        print_formula(f.rhs(), out);
        out += "))";
        return;
    case FormulaKind::negation:
        out += "!(";
        print_formula(f.body(), out);
        out += ')';
        return;
    case FormulaKind::exists:
    case FormulaKind::unbound:
        out += f.kind() == FormulaKind::exists ? "ex " : "U ";
        out += f.x().name();
        out += ". (";
        print_formula(f.body(), out);
        out += ')';
        return;
    }
}

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '#';
}

/// Recursive-descent parser for the formula grammar. Precedence
/// ! > & > | > ->, `->` associates to the right, quantifier bodies extend
/// as far right as possible.
class FormulaParser {
public:
    explicit FormulaParser(std::string_view text) : text_(text) { advance(); }

    Formula parse_all() {
        Formula f = parse_implies();
        if (tok_.kind != Tok::end) fail("unexpected '" + std::string(tok_.text) + "'");
        return f;
    }

private:
    enum class Tok { end, ident, lparen, rparen, comma, dot, amp, bar, arrow, bang };
    struct Token {
        Tok kind = Tok::end;
        std::string_view text;
        std::size_t offset = 0;
    };

    [[noreturn]] void fail(const std::string& msg, std::size_t offset) const {
        std::size_t line = 1, col = 1;
        for (std::size_t i = 0; i < offset && i < text_.size(); ++i) {
            if (text_[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ParseError("syntax error: " + msg, offset, line, col);
    }
    [[noreturn]] void fail(const std::string& msg) const { fail(msg, tok_.offset); }

    Token lex(std::size_t& pos) const {
        while (pos < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos]))) ++pos;
        Token t;
        t.offset = pos;
        if (pos >= text_.size()) return t;
        const char c = text_[pos];
        auto single = [&](Tok k) {
            t.kind = k;
            t.text = text_.substr(pos, 1);
            ++pos;
            return t;
        };
        switch (c) {
        case '(': return single(Tok::lparen);
        case ')': return single(Tok::rparen);
        case ',': return single(Tok::comma);
        case '.': return single(Tok::dot);
        case '&': return single(Tok::amp);
        case '|': return single(Tok::bar);
        case '!': return single(Tok::bang);
        case '-':
            if (pos + 1 < text_.size() && text_[pos + 1] == '>') {
                t.kind = Tok::arrow;
                t.text = text_.substr(pos, 2);
                pos += 2;
                return t;
            }
            break;
        default:
            if (ident_start(c)) {
                std::size_t end = pos + 1;
                while (end < text_.size() && ident_char(text_[end])) ++end;
                t.kind = Tok::ident;
                t.text = text_.substr(pos, end - pos);
                pos = end;
                return t;
            }
        }
        fail(std::string("unexpected character '") + c + "'", pos);
    }

    void advance() { tok_ = lex(pos_); }

    Token peek(std::size_t ahead = 1) const {
        std::size_t p = pos_;
        Token t = tok_;
        for (std::size_t i = 0; i < ahead; ++i) t = lex(p);
        return t;
    }

    void expect(Tok kind, const char* what) {
        if (tok_.kind != kind) fail(std::string("expected ") + what);
        advance();
    }

    static bool upper_initial(std::string_view s) { return std::isupper(static_cast<unsigned char>(s[0])); }

    Var expect_var() {
        if (tok_.kind != Tok::ident || !upper_initial(tok_.text)) fail("expected a variable");
        Var v{tok_.text};
        advance();
        return v;
    }

    Formula parse_implies() {
        Formula lhs = parse_or();
        if (tok_.kind == Tok::arrow) {
            advance();
            return implies(std::move(lhs), parse_implies());
        }
        return lhs;
    }

    Formula parse_or() {
        Formula lhs = parse_and();
        while (tok_.kind == Tok::bar) {
            advance();
            lhs = or_(std::move(lhs), parse_and());
        }
        return lhs;
    }

    Formula parse_and() {
        Formula lhs = parse_unary();
        while (tok_.kind == Tok::amp) {
            advance();
            lhs = Formula::conj(std::move(lhs), parse_unary());
        }
        return lhs;
    }

    bool at_quantifier() const {
        if (tok_.kind != Tok::ident) return false;
        if (tok_.text == "ex" || tok_.text == "all")
            return peek().kind == Tok::ident;
        if (tok_.text == "U") {
            Token v = peek(1);
            return v.kind == Tok::ident && peek(2).kind == Tok::dot;
        }
        return false;
    }

    Formula parse_unary() {
        if (tok_.kind == Tok::bang) {
            advance();
            return !parse_unary();
        }
        if (at_quantifier()) {
            const std::string_view q = tok_.text;
            advance();
            Var v = expect_var();
            expect(Tok::dot, "'.'");
            Formula body = parse_implies();
            if (q == "ex") return Formula::exists(v, std::move(body));
            if (q == "all") return forall(v, std::move(body));
            return Formula::unbound(v, std::move(body));
        }
        return parse_primary();
    }

    static unsigned child_index(std::string_view name) {
        if (name.size() <= 5 || name.substr(0, 5) != "child") return 0;
        unsigned value = 0;
        for (char c : name.substr(5)) {
            if (!std::isdigit(static_cast<unsigned char>(c))) return 0;
            value = value * 10 + static_cast<unsigned>(c - '0');
            if (value > 1000000) return 0;
        }
        return value == 0 ? ~0u : value;
    }

    Formula parse_primary() {
        if (tok_.kind == Tok::lparen) {
            advance();
            Formula f = parse_implies();
            expect(Tok::rparen, "')'");
            return f;
        }
        if (tok_.kind != Tok::ident) fail(tok_.kind == Tok::end ? "unexpected end of input" : "expected a formula");
        const Token head = tok_;
        if (upper_initial(head.text)) {
            Var x = expect_var();
            if (tok_.kind != Tok::ident || tok_.text != "sub") fail("expected 'sub'");
            advance();
            Var y = expect_var();
            return Formula::subset(x, y);
        }
        advance();
        expect(Tok::lparen, "'('");
        if (unsigned k = child_index(head.text)) {
            if (k == ~0u) fail("child index must be at least 1", head.offset);
            Var x = expect_var();
            expect(Tok::comma, "','");
            Var y = expect_var();
            expect(Tok::rparen, "')'");
            return Formula::child(k, x, y);
        }
        Var x = expect_var();
        if (tok_.kind == Tok::comma)
            fail("unknown sugar keyword '" + std::string(head.text) + "'", head.offset);
        expect(Tok::rparen, "')'");
        if (head.text == "empty") return empty(x);
        if (head.text == "sing") return sing(x);
        if (head.text == "big") return big(x);
        return Formula::label_atom(Label{head.text}, x);
    }

    std::string_view text_;
    std::size_t pos_ = 0;
    Token tok_;
};

} // namespace detail

/// Canonical, fully parenthesized text. Round-trips through `parse_formula`.
inline std::string print(const Formula& f) {
    std::string out;
    detail::print_formula(f, out);
    return out;
}

/// Parses the formula grammar; sugar (`|`, `->`, `all`, empty/sing/big) is
/// expanded on the fly. Throws ParseError.
inline Formula parse_formula(std::string_view text) { return detail::FormulaParser(text).parse_all(); }

} // namespace msou
