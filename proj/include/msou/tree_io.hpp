#pragma once

#include <cctype>
#include <string>
#include <string_view>

#include "msou/errors.hpp"
#include "msou/tree.hpp"

namespace msou {

namespace detail {

[[noreturn]] inline void text_error(std::string_view text, std::size_t offset, const std::string& msg) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    throw ParseError(msg, offset, line, col);
}

class TermParser {
public:
    explicit TermParser(std::string_view text) : text_(text) {}

    Context parse_all() {
        Context c = term();
        skip_ws();
        if (pos_ != text_.size()) text_error(text_, pos_, "trailing input after tree");
        return c;
    }

private:
    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    Context term() {
        skip_ws();
        if (pos_ >= text_.size()) text_error(text_, pos_, "expected a tree");
        if (text_[pos_] == '_') {
            const std::size_t start = ++pos_;
            unsigned id = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
                id = id * 10 + static_cast<unsigned>(text_[pos_++] - '0');
            if (pos_ == start) text_error(text_, pos_, "expected a hole number after '_'");
            return Context::make_hole(id);
        }
        const std::size_t start = pos_;
        if (!std::isalpha(static_cast<unsigned char>(text_[pos_]))) text_error(text_, pos_, "expected a label");
        while (pos_ < text_.size() && ident_char(text_[pos_])) ++pos_;
        Context node = Context::node(Label{text_.substr(start, pos_ - start)});
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '(') {
            ++pos_;
            for (;;) {
                node.children.push_back(term());
                skip_ws();
                if (pos_ < text_.size() && text_[pos_] == ',') {
                    ++pos_;
                    continue;
                }
                if (pos_ < text_.size() && text_[pos_] == ')') {
                    ++pos_;
                    break;
                }
                text_error(text_, pos_, "expected ',' or ')'");
            }
        }
        return node;
    }

    static bool ident_char(char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '#';
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

inline void print_context(const Context& c, std::string& out) {
    if (c.is_hole()) {
        out += '_';
        out += std::to_string(*c.hole);
        return;
    }
    out += c.label.name();
    if (c.children.empty()) return;
    out += '(';
    for (std::size_t i = 0; i < c.children.size(); ++i) {
        if (i) out += ',';
        print_context(c.children[i], out);
    }
    out += ')';
}

} // namespace detail

/// Term syntax with holes `_1`, `_2`, ...
inline Context parse_context(std::string_view text) {
    Context c = detail::TermParser(text).parse_all();
    (void)c.holes();
    return c;
}

/// Term syntax `label(child,...)`; holes are rejected.
inline Tree parse_tree(std::string_view text) {
    auto t = parse_context(text).to_tree();
    if (!t) throw ParseError("holes are not allowed in a tree", 0, 1, 1);
    return *t;
}

inline std::string print(const Context& c) {
    std::string out;
    detail::print_context(c, out);
    return out;
}

inline std::string print(const Tree& t) { return print(Context::from_tree(t)); }

/// `eps` or dot-separated positive child indices.
inline NodeAddr parse_address(std::string_view text) {
    if (text == "eps") return NodeAddr{};
    NodeAddr u;
    std::size_t i = 0;
    while (i <= text.size()) {
        std::size_t j = i;
        unsigned v = 0;
        while (j < text.size() && std::isdigit(static_cast<unsigned char>(text[j])))
            v = v * 10 + static_cast<unsigned>(text[j++] - '0');
        if (j == i || v == 0) detail::text_error(text, i, "malformed node address '" + std::string(text) + "'");
        u.path.push_back(v);
        if (j == text.size()) break;
        if (text[j] != '.') detail::text_error(text, j, "malformed node address '" + std::string(text) + "'");
        i = j + 1;
    }
    return u;
}

/// One line per variable, `X = {eps, 1, 2.1}`. Blank lines and lines
/// starting with '#' are ignored.
inline Valuation parse_valuation(std::string_view text) {
    Valuation nu;
    std::set<Var> seen;
    std::size_t line_start = 0;
    while (line_start <= text.size()) {
        std::size_t line_end = text.find('\n', line_start);
        if (line_end == std::string_view::npos) line_end = text.size();
        std::string_view line = text.substr(line_start, line_end - line_start);
        auto at = [&](std::size_t i) { return line_start + i; };
        std::size_t i = 0;
        auto ws = [&] {
            while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
        };
        ws();
        if (i < line.size() && line[i] != '#') {
            const std::size_t vstart = i;
            while (i < line.size() && (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '_')) ++i;
            if (i == vstart || !std::isupper(static_cast<unsigned char>(line[vstart])))
                detail::text_error(text, at(vstart), "expected a variable");
            Var v{line.substr(vstart, i - vstart)};
            if (!seen.insert(v).second) detail::text_error(text, at(vstart), "variable " + v.name() + " assigned twice");
            ws();
            if (i >= line.size() || line[i] != '=') detail::text_error(text, at(i), "expected '='");
            ++i;
            ws();
            if (i >= line.size() || line[i] != '{') detail::text_error(text, at(i), "expected '{'");
            ++i;
            NodeSet nodes;
            ws();
            if (i < line.size() && line[i] == '}') {
                ++i;
            } else {
                for (;;) {
                    ws();
                    const std::size_t s = i;
                    while (i < line.size() && (std::isalnum(static_cast<unsigned char>(line[i])) || line[i] == '.')) ++i;
                    try {
                        nodes.insert(parse_address(line.substr(s, i - s)));
                    } catch (const ParseError&) {
                        detail::text_error(text, at(s), "malformed node address");
                    }
                    ws();
                    if (i < line.size() && line[i] == ',') {
                        ++i;
                        continue;
                    }
                    if (i < line.size() && line[i] == '}') {
                        ++i;
                        break;
                    }
                    detail::text_error(text, at(i), "expected ',' or '}'");
                }
            }
            ws();
            if (i != line.size()) detail::text_error(text, at(i), "trailing input");
            nu.assign(v, std::move(nodes));
        }
        line_start = line_end + 1;
    }
    return nu;
}

inline std::string print(const Valuation& nu) {
    std::string out;
    for (const auto& [v, nodes] : nu.entries()) {
        out += v.name();
        out += " = {";
        bool first = true;
        for (const NodeAddr& u : nodes) {
            if (!first) out += ", ";
            first = false;
            out += u.to_string();
        }
        out += "}\n";
    }
    return out;
}

} // namespace msou
