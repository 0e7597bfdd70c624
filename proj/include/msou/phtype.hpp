#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "msou/errors.hpp"
#include "msou/formula.hpp"

namespace msou {

enum class TypeKind : std::uint8_t { boolean, child4, pair, quant };

/// Values of a child-atom type, in canonical order.
enum class Child4 : std::uint8_t { ff, tt, empty, root };

struct PhTypeNode;

/// A phi-type. Values are hash-consed: two PhType handles are equal exactly
/// when they point at the same node, and nodes live for the whole process.
class PhType {
public:
    static PhType boolean(bool value);
    static PhType child4(Child4 value);
    static PhType pair(PhType lhs, PhType rhs);
    /// Sorts and deduplicates both sets.
    static PhType quant(std::vector<PhType> exists_set, std::vector<PhType> unbounded_set);

    TypeKind kind() const;
    bool as_bool() const;
    Child4 as_child4() const;
    PhType lhs() const;
    PhType rhs() const;
    std::span<const PhType> exists_set() const;
    std::span<const PhType> unbounded_set() const;

    const PhTypeNode* get() const { return node_; }
    std::size_t hash() const { return std::hash<const void*>{}(node_); }

    friend bool operator==(PhType a, PhType b) { return a.node_ == b.node_; }
    friend bool operator!=(PhType a, PhType b) { return a.node_ != b.node_; }
    /// Total order: tag (boolean < child4 < pair < quant), then components
    /// lexicographically; sets compare as sorted sequences.
    friend bool operator<(PhType a, PhType b);

private:
    explicit PhType(const PhTypeNode* node) : node_(node) {}
    const PhTypeNode* node_;
};

struct PhTypeNode {
    TypeKind kind;
    std::uint8_t value = 0;
    const PhTypeNode* lhs = nullptr;
    const PhTypeNode* rhs = nullptr;
    std::vector<PhType> exists_set, unbounded_set;
    std::size_t hash = 0;
};

namespace detail {

inline int compare_types(const PhTypeNode* a, const PhTypeNode* b);

inline int compare_sets(std::span<const PhType> a, std::span<const PhType> b) {
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i)
        if (int c = compare_types(a[i].get(), b[i].get())) return c;
    return a.size() < b.size() ? -1 : (a.size() > b.size() ? 1 : 0);
}

inline int compare_types(const PhTypeNode* a, const PhTypeNode* b) {
    if (a == b) return 0;
    if (a->kind != b->kind) return a->kind < b->kind ? -1 : 1;
    switch (a->kind) {
    case TypeKind::boolean:
    case TypeKind::child4: return a->value < b->value ? -1 : (a->value > b->value ? 1 : 0);
    case TypeKind::pair:
        if (int c = compare_types(a->lhs, b->lhs)) return c;
        return compare_types(a->rhs, b->rhs);
    case TypeKind::quant:
        if (int c = compare_sets(a->exists_set, b->exists_set)) return c;
        return compare_sets(a->unbounded_set, b->unbounded_set);
    }
    return 0;
}

struct NodeHash {
    std::size_t operator()(const std::unique_ptr<PhTypeNode>& n) const { return n->hash; }
};

// Children are already interned, so shallow comparison is structural.
struct NodeEq {
    bool operator()(const std::unique_ptr<PhTypeNode>& a, const std::unique_ptr<PhTypeNode>& b) const {
        return a->kind == b->kind && a->value == b->value && a->lhs == b->lhs && a->rhs == b->rhs &&
               a->exists_set == b->exists_set && a->unbounded_set == b->unbounded_set;
    }
};

inline const PhTypeNode* intern_type(std::unique_ptr<PhTypeNode> candidate) {
    std::size_t h = hash_mix(static_cast<std::size_t>(candidate->kind) + 17, candidate->value);
    h = hash_mix(h, std::hash<const void*>{}(candidate->lhs));
    h = hash_mix(h, std::hash<const void*>{}(candidate->rhs));
    for (PhType t : candidate->exists_set) h = hash_mix(h, t.hash());
    h = hash_mix(h, 0x51);
    for (PhType t : candidate->unbounded_set) h = hash_mix(h, t.hash());
    candidate->hash = h;

    static std::mutex mutex;
    static std::unordered_set<std::unique_ptr<PhTypeNode>, NodeHash, NodeEq> pool;
    std::lock_guard<std::mutex> lock(mutex);
    return pool.insert(std::move(candidate)).first->get();
}

inline void canonicalize(std::vector<PhType>& set) {
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
}

} // namespace detail

inline bool operator<(PhType a, PhType b) { return detail::compare_types(a.node_, b.node_) < 0; }

inline PhType PhType::boolean(bool value) {
    static const PhType tt{[] {
        auto n = std::make_unique<PhTypeNode>();
        n->kind = TypeKind::boolean;
        n->value = 1;
        return detail::intern_type(std::move(n));
    }()};
    static const PhType ff{[] {
        auto n = std::make_unique<PhTypeNode>();
        n->kind = TypeKind::boolean;
        return detail::intern_type(std::move(n));
    }()};
    return value ? tt : ff;
}

inline PhType PhType::child4(Child4 value) {
    auto n = std::make_unique<PhTypeNode>();
    n->kind = TypeKind::child4;
    n->value = static_cast<std::uint8_t>(value);
    return PhType(detail::intern_type(std::move(n)));
}

inline PhType PhType::pair(PhType lhs, PhType rhs) {
    auto n = std::make_unique<PhTypeNode>();
    n->kind = TypeKind::pair;
    n->lhs = lhs.node_;
    n->rhs = rhs.node_;
    return PhType(detail::intern_type(std::move(n)));
}

inline PhType PhType::quant(std::vector<PhType> exists_set, std::vector<PhType> unbounded_set) {
    detail::canonicalize(exists_set);
    detail::canonicalize(unbounded_set);
    auto n = std::make_unique<PhTypeNode>();
    n->kind = TypeKind::quant;
    n->exists_set = std::move(exists_set);
    n->unbounded_set = std::move(unbounded_set);
    return PhType(detail::intern_type(std::move(n)));
}

inline TypeKind PhType::kind() const { return node_->kind; }
inline bool PhType::as_bool() const { return node_->value != 0; }
inline Child4 PhType::as_child4() const { return static_cast<Child4>(node_->value); }
inline PhType PhType::lhs() const { return PhType(node_->lhs); }
inline PhType PhType::rhs() const { return PhType(node_->rhs); }
inline std::span<const PhType> PhType::exists_set() const { return node_->exists_set; }
inline std::span<const PhType> PhType::unbounded_set() const { return node_->unbounded_set; }

inline const PhType tt_type = PhType::boolean(true);
inline const PhType ff_type = PhType::boolean(false);

/// True iff `t` mirrors the constructor skeleton of `f`.
inline bool has_shape(const Formula& f, PhType t) {
    switch (f.kind()) {
    case FormulaKind::label_atom:
    case FormulaKind::subset: return t.kind() == TypeKind::boolean;
    case FormulaKind::child: return t.kind() == TypeKind::child4;
    case FormulaKind::conj:
        return t.kind() == TypeKind::pair && has_shape(f.lhs(), t.lhs()) && has_shape(f.rhs(), t.rhs());
    case FormulaKind::negation: return has_shape(f.body(), t);
    case FormulaKind::exists:
    case FormulaKind::unbound:
        if (t.kind() != TypeKind::quant) return false;
        for (PhType s : t.exists_set())
            if (!has_shape(f.body(), s)) return false;
        for (PhType s : t.unbounded_set())
            if (!has_shape(f.body(), s)) return false;
        return true;
    }
    return false;
}

inline void require_shape(const Formula& f, PhType t) {
    if (!has_shape(f, t)) throw ShapeError("type does not have the shape of the formula");
}

namespace detail {

inline void print_type(PhType t, std::string& out) {
    switch (t.kind()) {
    case TypeKind::boolean: out += t.as_bool() ? "tt" : "ff"; return;
    case TypeKind::child4:
        switch (t.as_child4()) {
        case Child4::ff: out += "ff"; return;
        case Child4::tt: out += "tt"; return;
        case Child4::empty: out += "empty"; return;
        case Child4::root: out += "root"; return;
        }
        return;
    case TypeKind::pair:
        out += "pair(";
        print_type(t.lhs(), out);
        out += ',';
        print_type(t.rhs(), out);
        out += ')';
        return;
    case TypeKind::quant: {
        auto set = [&](std::span<const PhType> s) {
            out += '{';
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (i) out += ',';
                print_type(s[i], out);
            }
            out += '}';
        };
        out += "q(";
        set(t.exists_set());
        out += ',';
        set(t.unbounded_set());
        out += ')';
        return;
    }
    }
}

class TypeParser {
public:
    explicit TypeParser(std::string_view text) : text_(text) {}

    PhType parse_all(const Formula& f) {
        PhType t = parse(f);
        skip_ws();
        if (pos_ != text_.size()) fail("trailing input after type");
        return t;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_, 1, pos_ + 1); }

    void skip_ws() {
        while (pos_ < text_.size() && (text_[pos_] == ' ' || text_[pos_] == '\t' || text_[pos_] == '\n')) ++pos_;
    }

    bool eat(std::string_view s) {
        skip_ws();
        if (text_.substr(pos_, s.size()) == s) {
            pos_ += s.size();
            return true;
        }
        return false;
    }

    void need(std::string_view s) {
        if (!eat(s)) fail("expected '" + std::string(s) + "'");
    }

    std::vector<PhType> parse_set(const Formula& body) {
        std::vector<PhType> out;
        need("{");
        if (eat("}")) return out;
        do {
            out.push_back(parse(body));
        } while (eat(","));
        need("}");
        return out;
    }

    PhType parse(const Formula& f) {
        switch (f.kind()) {
        case FormulaKind::label_atom:
        case FormulaKind::subset:
            if (eat("tt")) return tt_type;
            if (eat("ff")) return ff_type;
            fail("expected tt or ff");
        case FormulaKind::child:
            if (eat("tt")) return PhType::child4(Child4::tt);
            if (eat("ff")) return PhType::child4(Child4::ff);
            if (eat("empty")) return PhType::child4(Child4::empty);
            if (eat("root")) return PhType::child4(Child4::root);
            fail("expected tt, empty, root or ff");
        case FormulaKind::conj: {
            need("pair(");
            PhType l = parse(f.lhs());
            need(",");
            PhType r = parse(f.rhs());
            need(")");
            return PhType::pair(l, r);
        }
        case FormulaKind::negation: return parse(f.body());
        case FormulaKind::exists:
        case FormulaKind::unbound: {
            need("q(");
            auto s = parse_set(f.body());
            need(",");
            auto su = parse_set(f.body());
            need(")");
            return PhType::quant(std::move(s), std::move(su));
        }
        }
        fail("unknown formula kind");
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// `tt | ff | empty | root | pair(t1,t2) | q({...},{...})`, set elements in
/// canonical order.
inline std::string print(PhType t) {
    std::string out;
    detail::print_type(t, out);
    return out;
}

/// Parses a type term; the formula disambiguates its shape.
inline PhType parse_type(const Formula& f, std::string_view text) { return detail::TypeParser(text).parse_all(f); }

} // namespace msou

template <>
struct std::hash<msou::PhType> {
    std::size_t operator()(msou::PhType t) const noexcept { return t.hash(); }
};
