#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "msou/symbol.hpp"

namespace msou {

/// Sorted (by name), duplicate-free set of variables.
using VarSet = std::vector<Var>;

inline bool contains(const VarSet& set, Var v) {
    return std::binary_search(set.begin(), set.end(), v);
}

inline VarSet set_union(const VarSet& a, const VarSet& b) {
    VarSet out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

inline VarSet set_minus(const VarSet& a, Var v) {
    VarSet out;
    out.reserve(a.size());
    for (Var w : a)
        if (w != v) out.push_back(w);
    return out;
}

inline VarSet make_varset(std::vector<Var> vars) {
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

inline bool is_subset(const VarSet& a, const VarSet& b) {
    return std::includes(b.begin(), b.end(), a.begin(), a.end());
}

enum class FormulaKind : std::uint8_t { label_atom, subset, child, conj, negation, exists, unbound };

struct FormulaNode;

/// Immutable MSO+U formula over set variables. Copies share structure;
/// equality is structural.
class Formula {
public:
    static Formula label_atom(Label a, Var x);
    static Formula subset(Var x, Var y);
    static Formula child(unsigned index, Var x, Var y);
    static Formula conj(Formula lhs, Formula rhs);
    static Formula negation(Formula inner);
    static Formula exists(Var x, Formula body);
    static Formula unbound(Var x, Formula body);

    FormulaKind kind() const;
    Label label() const;
    /// Atom operand (label atoms), left operand (subset/child), or bound variable (quantifiers).
    Var x() const;
    Var y() const;
    unsigned index() const;
    const Formula& lhs() const;
    const Formula& rhs() const;
    /// Operand of negation and quantifiers.
    const Formula& body() const;

    const VarSet& free_vars() const;
    std::size_t hash() const;
    /// Number of AST nodes counted as a tree (shared subterms counted each
    /// time), saturating at UINT64_MAX.
    std::uint64_t size() const;
    unsigned quantifier_depth() const;
    bool has_unbound() const;

    const FormulaNode* get() const { return node_.get(); }

    friend bool operator==(const Formula& a, const Formula& b);
    friend bool operator!=(const Formula& a, const Formula& b) { return !(a == b); }

private:
    explicit Formula(std::shared_ptr<const FormulaNode> node) : node_(std::move(node)) {}
    std::shared_ptr<const FormulaNode> node_;
};

struct FormulaNode {
    FormulaKind kind;
    Label label;
    Var x, y;
    unsigned index = 0;
    // conj: both; negation and quantifiers: lhs only.
    std::unique_ptr<Formula> lhs, rhs;
    VarSet free;
    std::size_t hash = 0;
    std::uint64_t size = 1;
    unsigned qdepth = 0;
    bool has_unbound = false;
};

namespace detail {

inline std::size_t hash_mix(std::size_t seed, std::size_t v) {
    return seed ^ (v + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
}

inline std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
    return a > UINT64_MAX - b ? UINT64_MAX : a + b;
}

inline std::shared_ptr<FormulaNode> new_node(FormulaKind kind) {
    auto node = std::make_shared<FormulaNode>();
    node->kind = kind;
    return node;
}

inline std::string_view kind_tag(FormulaKind k) {
    switch (k) {
    case FormulaKind::label_atom: return "lab";
    case FormulaKind::subset: return "sub";
    case FormulaKind::child: return "chd";
    case FormulaKind::conj: return "and";
    case FormulaKind::negation: return "not";
    case FormulaKind::exists: return "ex";
    case FormulaKind::unbound: return "U";
    }
    return "";
}

} // namespace detail

inline Formula Formula::label_atom(Label a, Var x) {
    auto n = detail::new_node(FormulaKind::label_atom);
    n->label = a;
    n->x = x;
    n->free = {x};
    n->hash = detail::hash_mix(detail::hash_mix(1, a.hash()), x.hash());
    return Formula(std::move(n));
}

inline Formula Formula::subset(Var x, Var y) {
    auto n = detail::new_node(FormulaKind::subset);
    n->x = x;
    n->y = y;
    n->free = make_varset({x, y});
    n->hash = detail::hash_mix(detail::hash_mix(2, x.hash()), y.hash());
    return Formula(std::move(n));
}

inline Formula Formula::child(unsigned index, Var x, Var y) {
    if (index < 1) throw std::invalid_argument("child index must be at least 1");
    auto n = detail::new_node(FormulaKind::child);
    n->index = index;
    n->x = x;
    n->y = y;
    n->free = make_varset({x, y});
    n->hash = detail::hash_mix(detail::hash_mix(detail::hash_mix(3, index), x.hash()), y.hash());
    return Formula(std::move(n));
}

inline Formula Formula::conj(Formula lhs, Formula rhs) {
    auto n = detail::new_node(FormulaKind::conj);
    n->free = set_union(lhs.free_vars(), rhs.free_vars());
    n->hash = detail::hash_mix(detail::hash_mix(4, lhs.hash()), rhs.hash());
    n->size = detail::sat_add(1, detail::sat_add(lhs.size(), rhs.size()));
    n->qdepth = std::max(lhs.quantifier_depth(), rhs.quantifier_depth());
    n->has_unbound = lhs.has_unbound() || rhs.has_unbound();
    n->lhs = std::make_unique<Formula>(std::move(lhs));
    n->rhs = std::make_unique<Formula>(std::move(rhs));
    return Formula(std::move(n));
}

inline Formula Formula::negation(Formula inner) {
    auto n = detail::new_node(FormulaKind::negation);
    n->free = inner.free_vars();
    n->hash = detail::hash_mix(5, inner.hash());
    n->size = detail::sat_add(1, inner.size());
    n->qdepth = inner.quantifier_depth();
    n->has_unbound = inner.has_unbound();
    n->lhs = std::make_unique<Formula>(std::move(inner));
    return Formula(std::move(n));
}

inline Formula Formula::exists(Var x, Formula body) {
    auto n = detail::new_node(FormulaKind::exists);
    n->x = x;
    n->free = set_minus(body.free_vars(), x);
    n->hash = detail::hash_mix(detail::hash_mix(6, x.hash()), body.hash());
    n->size = detail::sat_add(1, body.size());
    n->qdepth = body.quantifier_depth() + 1;
    n->has_unbound = body.has_unbound();
    n->lhs = std::make_unique<Formula>(std::move(body));
    return Formula(std::move(n));
}

inline Formula Formula::unbound(Var x, Formula body) {
    auto n = detail::new_node(FormulaKind::unbound);
    n->x = x;
    n->free = set_minus(body.free_vars(), x);
    n->hash = detail::hash_mix(detail::hash_mix(7, x.hash()), body.hash());
    n->size = detail::sat_add(1, body.size());
    n->qdepth = body.quantifier_depth() + 1;
    n->has_unbound = true;
    n->lhs = std::make_unique<Formula>(std::move(body));
    return Formula(std::move(n));
}

inline FormulaKind Formula::kind() const { return node_->kind; }
inline Label Formula::label() const { return node_->label; }
inline Var Formula::x() const { return node_->x; }
inline Var Formula::y() const { return node_->y; }
inline unsigned Formula::index() const { return node_->index; }
inline const Formula& Formula::lhs() const { return *node_->lhs; }
inline const Formula& Formula::rhs() const { return *node_->rhs; }
inline const Formula& Formula::body() const { return *node_->lhs; }
inline const VarSet& Formula::free_vars() const { return node_->free; }
inline std::size_t Formula::hash() const { return node_->hash; }
inline std::uint64_t Formula::size() const { return node_->size; }
inline unsigned Formula::quantifier_depth() const { return node_->qdepth; }
inline bool Formula::has_unbound() const { return node_->has_unbound; }

inline bool operator==(const Formula& a, const Formula& b) {
    const FormulaNode* p = a.get();
    const FormulaNode* q = b.get();
    if (p == q) return true;
    if (p->hash != q->hash || p->kind != q->kind || p->size != q->size) return false;
    switch (p->kind) {
    case FormulaKind::label_atom: return p->label == q->label && p->x == q->x;
    case FormulaKind::subset: return p->x == q->x && p->y == q->y;
    case FormulaKind::child: return p->index == q->index && p->x == q->x && p->y == q->y;
    case FormulaKind::conj: return *p->lhs == *q->lhs && *p->rhs == *q->rhs;
    case FormulaKind::negation: return *p->lhs == *q->lhs;
    case FormulaKind::exists:
    case FormulaKind::unbound: return p->x == q->x && *p->lhs == *q->lhs;
    }
    return false;
}

inline VarSet free_vars(const Formula& f) { return f.free_vars(); }

/// True iff the formula contains no U quantifier.
inline bool is_mso(const Formula& f) { return !f.has_unbound(); }

// ---------------------------------------------------------------------------
// Syntactic sugar. Every derived form is expanded into the core constructors.

/// First of `base`, `base1`, `base2`, ... that is not in `avoid`.
inline Var fresh_var(const VarSet& avoid, std::string_view base = "Y") {
    Var candidate{base};
    for (unsigned i = 1; contains(avoid, candidate); ++i)
        candidate = Var{std::string(base) + std::to_string(i)};
    return candidate;
}

inline Formula operator&&(Formula a, Formula b) { return Formula::conj(std::move(a), std::move(b)); }
inline Formula operator!(Formula a) { return Formula::negation(std::move(a)); }

inline Formula or_(Formula a, Formula b) { return !(!std::move(a) && !std::move(b)); }
inline Formula implies(Formula a, Formula b) { return !(std::move(a) && !std::move(b)); }
inline Formula forall(Var x, Formula body) { return !Formula::exists(x, !std::move(body)); }

/// Closed, always-false formula (there is no set not included in itself).
inline Formula falsum() {
    Var v{"Y"};
    return Formula::exists(v, !Formula::subset(v, v));
}

inline Formula verum() { return !falsum(); }

namespace detail {

template <class Combine>
Formula fold_balanced(std::span<const Formula> items, Combine combine) {
    if (items.size() == 1) return items.front();
    const std::size_t mid = items.size() / 2;
    return combine(fold_balanced(items.first(mid), combine), fold_balanced(items.subspan(mid), combine));
}

} // namespace detail

/// Conjunction of all items as a balanced tree; `verum()` when empty.
inline Formula conj_all(std::span<const Formula> items) {
    if (items.empty()) return verum();
    return detail::fold_balanced(items, [](Formula a, Formula b) { return std::move(a) && std::move(b); });
}

/// Disjunction of all items as a balanced tree; `falsum()` when empty.
inline Formula disj_all(std::span<const Formula> items) {
    if (items.empty()) return falsum();
    return detail::fold_balanced(items, [](Formula a, Formula b) { return or_(std::move(a), std::move(b)); });
}

/// empty(X) = forall Y. X sub Y
inline Formula empty(Var x) {
    Var y = fresh_var({x});
    return forall(y, Formula::subset(x, y));
}

/// big(X) = ex Y. (Y sub X & !(X sub Y) & !empty(Y)): at least two elements.
inline Formula big(Var x) {
    Var y = fresh_var({x});
    return Formula::exists(y, (Formula::subset(y, x) && !Formula::subset(x, y)) && !empty(y));
}

/// sing(X) = !empty(X) & !big(X)
inline Formula sing(Var x) { return !empty(x) && !big(x); }

/// (X child1 Y) | ... | (X child_rmax Y)
inline Formula child_any(unsigned rmax, Var x, Var y) {
    if (rmax < 1) throw std::invalid_argument("child_any needs a maximal arity of at least 1");
    Formula out = Formula::child(1, x, y);
    for (unsigned i = 2; i <= rmax; ++i) out = or_(std::move(out), Formula::child(i, x, y));
    return out;
}

/// Every node of X carries one of `labels`.
inline Formula label_in(std::span<const Label> labels, Var x) {
    if (labels.empty()) throw std::invalid_argument("label_in needs at least one label");
    Var y = fresh_var({x});
    Formula any = Formula::label_atom(labels[0], y);
    for (std::size_t i = 1; i < labels.size(); ++i) any = or_(std::move(any), Formula::label_atom(labels[i], y));
    return forall(y, implies(sing(y) && Formula::subset(y, x), std::move(any)));
}

/// Y denotes the root: no node has it as a child (at arity `rmax`).
inline Formula is_root(unsigned rmax, Var y) {
    Var z = fresh_var({y}, "Z");
    return !Formula::exists(z, child_any(rmax, z, y));
}

} // namespace msou

template <>
struct std::hash<msou::Formula> {
    std::size_t operator()(const msou::Formula& f) const noexcept { return f.hash(); }
};
