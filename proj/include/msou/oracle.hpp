#pragma once

#include <bit>
#include <cstdint>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "msou/errors.hpp"
#include "msou/formula.hpp"
#include "msou/phtype.hpp"
#include "msou/tree.hpp"

namespace msou {

/// Nodes of a tree numbered in canonical address order (root = 0), so node
/// sets become bit masks.
class TreeIndex {
public:
    static constexpr unsigned hard_cap = 62;

    TreeIndex(const Tree& t, unsigned node_cap) {
        const std::size_t n = t.size();
        if (n > node_cap || n > hard_cap)
            throw ResourceError("tree has " + std::to_string(n) + " nodes; subset enumeration is capped at " +
                                std::to_string(std::min(node_cap, hard_cap)));
        addrs_ = t.addresses();
        children_.resize(n);
        labels_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const Tree* node = t.find(addrs_[i]);
            labels_[i] = node->label;
            for (unsigned c = 1; c <= node->children.size(); ++c) children_[i].push_back(index_of(addrs_[i].child(c)));
        }
        for (std::size_t i = 0; i < n; ++i) label_masks_[labels_[i]] |= 1ULL << i;
        full_ = (1ULL << n) - 1;
    }

    std::size_t size() const { return addrs_.size(); }
    std::uint64_t full_mask() const { return full_; }
    const std::vector<NodeAddr>& addresses() const { return addrs_; }
    Label label(std::size_t i) const { return labels_[i]; }
    const std::vector<int>& children(std::size_t i) const { return children_[i]; }

    /// Child `i` (1-based) of node `node`, or -1.
    int child(int node, unsigned i) const {
        const auto& c = children_[static_cast<std::size_t>(node)];
        return i >= 1 && i <= c.size() ? c[i - 1] : -1;
    }

    int index_of(const NodeAddr& u) const {
        auto it = std::lower_bound(addrs_.begin(), addrs_.end(), u);
        return it != addrs_.end() && *it == u ? static_cast<int>(it - addrs_.begin()) : -1;
    }

    std::uint64_t label_mask(Label a) const {
        auto it = label_masks_.find(a);
        return it == label_masks_.end() ? 0 : it->second;
    }

    std::uint64_t mask_of(const NodeSet& nodes) const {
        std::uint64_t m = 0;
        for (const NodeAddr& u : nodes) {
            const int i = index_of(u);
            if (i < 0) throw DomainError("address " + u.to_string() + " is not in the tree");
            m |= 1ULL << i;
        }
        return m;
    }

private:
    std::vector<NodeAddr> addrs_;
    std::vector<Label> labels_;
    std::vector<std::vector<int>> children_;
    std::unordered_map<Label, std::uint64_t> label_masks_;
    std::uint64_t full_ = 0;
};

struct EvalStats {
    /// Sets tried for a quantified variable, summed over all quantifier visits.
    std::uint64_t candidate_sets = 0;
    /// Decision points visited by `eval_search`.
    std::uint64_t search_steps = 0;
};

/// Reference semantics on one finite tree. Memo tables are keyed by the
/// subformula and the values of its free variables, so they stay valid across
/// calls with different valuations and formulas. Not thread safe; use one
/// instance per thread.
///
/// U X.psi asks, for every n, for a finite witness set of size at least n.
/// A tree with N nodes has no set of size N + 1, so U is false on every
/// finite tree and the unbounded component of every quantifier type is
/// empty. Both follow from that cardinality bound; no search is performed.
class Evaluator {
public:
    explicit Evaluator(const Tree& t, unsigned node_cap = Config::default_node_cap())
        : tree_(t), index_(t, node_cap) {}

    const TreeIndex& index() const { return index_; }
    const EvalStats& stats() const { return stats_; }

    /// T, nu |= f by plain enumeration of all 2^N sets per quantifier.
    bool eval(const Formula& f, const Valuation& nu) {
        bind(nu);
        retain(f);
        return eval_plain(f);
    }

    /// Same truth value as `eval`. Blocks of existential quantifiers are
    /// decided node by node with three-valued evaluation of the block body
    /// on partial assignments, cutting branches whose body is already false
    /// for every completion.
    bool eval_search(const Formula& f, const Valuation& nu) {
        bind(nu);
        retain(f);
        return eval_searching(f);
    }

    /// The phi-type of the tree under nu, by the inductive definition.
    PhType direct_type(const Formula& f, const Valuation& nu) {
        bind(nu);
        retain(f);
        return type_of(f);
    }

private:
    // Memo keys are node addresses; keep their formulas alive.
    void retain(const Formula& f) {
        if (retained_nodes_.insert(f.get()).second) retained_.push_back(f);
    }

    enum class Tri : std::uint8_t { f, t, u };

    struct Slot {
        std::uint64_t in = 0;
        std::uint64_t unk = 0;
    };

    struct Key {
        const void* node;
        std::vector<std::uint64_t> values;
        friend bool operator==(const Key&, const Key&) = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::size_t h = std::hash<const void*>{}(k.node);
            for (std::uint64_t v : k.values) h = detail::hash_mix(h, std::hash<std::uint64_t>{}(v));
            return h;
        }
    };

    std::size_t slot_of(Var v) {
        auto [it, inserted] = slot_index_.try_emplace(v, slots_.size());
        if (inserted) slots_.push_back(Slot{});
        return it->second;
    }

    Slot slot_value(Var v) {
        const std::size_t s = slot_of(v);
        return slots_[s];
    }

    std::uint64_t in_of(Var v) {
        const std::size_t s = slot_of(v);
        return slots_[s].in;
    }

    void bind(const Valuation& nu) {
        for (Slot& s : slots_) s = Slot{};
        for (const auto& [v, nodes] : nu.entries()) slots_[slot_of(v)].in = index_.mask_of(nodes);
    }

    Key key_for(const Formula& f, bool partial) {
        Key k{f.get(), {}};
        k.values.reserve(f.free_vars().size() * (partial ? 2 : 1));
        for (Var v : f.free_vars()) {
            const Slot s = slot_value(v);
            k.values.push_back(s.in);
            if (partial) k.values.push_back(s.unk);
        }
        return k;
    }

    bool child_holds(std::uint64_t mx, std::uint64_t my, unsigned i) const {
        if (std::popcount(mx) != 1 || std::popcount(my) != 1) return false;
        const int x = std::countr_zero(mx);
        return index_.child(x, i) == std::countr_zero(my);
    }

    bool eval_plain(const Formula& f) {
        switch (f.kind()) {
        case FormulaKind::label_atom: return (in_of(f.x()) & ~index_.label_mask(f.label())) == 0;
        case FormulaKind::subset: {
            const std::uint64_t mx = in_of(f.x());
            return (mx & ~in_of(f.y())) == 0;
        }
        case FormulaKind::child: {
            const std::uint64_t mx = in_of(f.x());
            return child_holds(mx, in_of(f.y()), f.index());
        }
        case FormulaKind::conj: return eval_plain(f.lhs()) && eval_plain(f.rhs());
        case FormulaKind::negation: return !eval_plain(f.body());
        case FormulaKind::unbound: return false;
        case FormulaKind::exists: {
            Key key = key_for(f, false);
            if (auto it = memo_bool_.find(key); it != memo_bool_.end()) return it->second;
            const std::size_t s = slot_of(f.x());
            const Slot saved = slots_[s];
            bool result = false;
            for (std::uint64_t m = 0;; ++m) {
                ++stats_.candidate_sets;
                slots_[s] = Slot{m, 0};
                if (eval_plain(f.body())) {
                    result = true;
                    break;
                }
                if (m == index_.full_mask()) break;
            }
            slots_[s] = saved;
            memo_bool_.emplace(std::move(key), result);
            return result;
        }
        }
        return false;
    }

    PhType type_of(const Formula& f) {
        switch (f.kind()) {
        case FormulaKind::label_atom:
        case FormulaKind::subset: return PhType::boolean(eval_plain(f));
        case FormulaKind::child: {
            const std::uint64_t mx = in_of(f.x());
            const std::uint64_t my = in_of(f.y());
            if (child_holds(mx, my, f.index())) return PhType::child4(Child4::tt);
            if (mx == 0 && my == 0) return PhType::child4(Child4::empty);
            if (mx == 0 && my == 1) return PhType::child4(Child4::root);
            return PhType::child4(Child4::ff);
        }
        case FormulaKind::conj: return PhType::pair(type_of(f.lhs()), type_of(f.rhs()));
        case FormulaKind::negation: return type_of(f.body());
        case FormulaKind::exists:
        case FormulaKind::unbound: {
            Key key = key_for(f, false);
            if (auto it = memo_type_.find(key); it != memo_type_.end()) return it->second;
            const std::size_t s = slot_of(f.x());
            const Slot saved = slots_[s];
            std::vector<PhType> realized;
            for (std::uint64_t m = 0;; ++m) {
                ++stats_.candidate_sets;
                slots_[s] = Slot{m, 0};
                realized.push_back(type_of(f.body()));
                if (m == index_.full_mask()) break;
            }
            slots_[s] = saved;
            // Unbounded component: no witness of size > N exists, so it is empty.
            PhType result = PhType::quant(std::move(realized), {});
            memo_type_.emplace(std::move(key), result);
            return result;
        }
        }
        throw ShapeError("unknown formula kind");
    }

    // Three-valued evaluation over partial assignments: `t` / `f` when every
    // completion of the unknown bits makes the formula true / false.
    Tri eval3(const Formula& f) {
        switch (f.kind()) {
        case FormulaKind::label_atom: {
            const Slot x = slots_[slot_of(f.x())];
            const std::uint64_t bad = ~index_.label_mask(f.label());
            if (x.in & bad) return Tri::f;
            return ((x.in | x.unk) & bad) == 0 ? Tri::t : Tri::u;
        }
        case FormulaKind::subset: {
            if (f.x() == f.y()) return Tri::t;
            const Slot x = slot_value(f.x());
            const Slot y = slot_value(f.y());
            if (((x.in | x.unk) & ~y.in) == 0) return Tri::t;
            if ((x.in & ~(y.in | y.unk)) != 0) return Tri::f;
            return Tri::u;
        }
        case FormulaKind::child: {
            if (f.x() == f.y()) return Tri::f;
            const Slot x = slot_value(f.x());
            const Slot y = slot_value(f.y());
            if (x.unk == 0 && y.unk == 0) return child_holds(x.in, y.in, f.index()) ? Tri::t : Tri::f;
            auto singles = [](const Slot& s) -> std::uint64_t {
                const int n = std::popcount(s.in);
                return n == 0 ? s.unk : (n == 1 ? s.in : 0);
            };
            const std::uint64_t cx = singles(x);
            const std::uint64_t cy = singles(y);
            for (std::uint64_t m = cx; m; m &= m - 1) {
                const int c = index_.child(std::countr_zero(m), f.index());
                if (c >= 0 && (cy >> c) & 1ULL) return Tri::u;
            }
            return Tri::f;
        }
        case FormulaKind::conj: {
            const Tri l = eval3(f.lhs());
            if (l == Tri::f) return Tri::f;
            const Tri r = eval3(f.rhs());
            if (r == Tri::f) return Tri::f;
            return l == Tri::t && r == Tri::t ? Tri::t : Tri::u;
        }
        case FormulaKind::negation: {
            const Tri b = eval3(f.body());
            return b == Tri::u ? Tri::u : (b == Tri::t ? Tri::f : Tri::t);
        }
        case FormulaKind::unbound: return Tri::f;
        case FormulaKind::exists: {
            Key key = key_for(f, true);
            if (auto it = memo_tri_.find(key); it != memo_tri_.end()) return it->second;
            const std::size_t s = slot_of(f.x());
            const Slot saved = slots_[s];
            Tri result = Tri::f;
            for (std::uint64_t m = 0;; ++m) {
                ++stats_.candidate_sets;
                slots_[s] = Slot{m, 0};
                const Tri b = eval3(f.body());
                if (b == Tri::t) {
                    result = Tri::t;
                    break;
                }
                if (b == Tri::u) result = Tri::u;
                if (m == index_.full_mask()) break;
            }
            slots_[s] = saved;
            memo_tri_.emplace(std::move(key), result);
            return result;
        }
        }
        return Tri::u;
    }

    bool eval_searching(const Formula& f) {
        switch (f.kind()) {
        case FormulaKind::conj: return eval_searching(f.lhs()) && eval_searching(f.rhs());
        case FormulaKind::negation: return !eval_searching(f.body());
        case FormulaKind::exists: break;
        default: return eval_plain(f);
        }
        Key key = key_for(f, false);
        if (auto it = memo_bool_.find(key); it != memo_bool_.end()) return it->second;

        std::vector<std::size_t> block;
        const Formula* body = &f;
        while (body->kind() == FormulaKind::exists) {
            block.push_back(slot_of(body->x()));
            body = &body->body();
        }
        // An inner binder of the same variable shadows the outer one.
        std::vector<std::size_t> distinct;
        for (auto it = block.rbegin(); it != block.rend(); ++it)
            if (std::find(distinct.begin(), distinct.end(), *it) == distinct.end()) distinct.push_back(*it);
        std::reverse(distinct.begin(), distinct.end());

        std::vector<Slot> saved;
        for (std::size_t s : distinct) {
            saved.push_back(slots_[s]);
            slots_[s] = Slot{0, index_.full_mask()};
        }
        // Children before parents: reverse canonical order.
        std::vector<std::pair<std::size_t, std::uint64_t>> decisions;
        for (std::size_t n = index_.size(); n-- > 0;)
            for (std::size_t s : distinct) decisions.emplace_back(s, 1ULL << n);

        const bool result = search(*body, decisions, 0);
        for (std::size_t i = 0; i < distinct.size(); ++i) slots_[distinct[i]] = saved[i];
        memo_bool_.emplace(std::move(key), result);
        return result;
    }

    bool search(const Formula& body, const std::vector<std::pair<std::size_t, std::uint64_t>>& decisions,
                std::size_t depth) {
        ++stats_.search_steps;
        const Tri t = eval3(body);
        if (t != Tri::u) return t == Tri::t;
        if (depth == decisions.size()) throw std::logic_error("three-valued evaluation undecided on a total assignment");
        const auto [s, bit] = decisions[depth];
        slots_[s].unk &= ~bit;
        slots_[s].in |= bit;
        bool found = search(body, decisions, depth + 1);
        slots_[s].in &= ~bit;
        if (!found) found = search(body, decisions, depth + 1);
        slots_[s].unk |= bit;
        return found;
    }

    const Tree& tree_;
    TreeIndex index_;
    EvalStats stats_;
    std::unordered_map<Var, std::size_t> slot_index_;
    std::vector<Slot> slots_;
    std::unordered_set<const void*> retained_nodes_;
    std::vector<Formula> retained_;
    std::unordered_map<Key, bool, KeyHash> memo_bool_;
    std::unordered_map<Key, Tri, KeyHash> memo_tri_;
    std::unordered_map<Key, PhType, KeyHash> memo_type_;
};

/// T, nu |= f. Throws DomainError if nu mentions nodes outside T and
/// ResourceError if T exceeds the enumeration cap.
inline bool eval(const Formula& f, const Tree& t, const Valuation& nu = {},
                 unsigned node_cap = Config::default_node_cap()) {
    Evaluator ev(t, node_cap);
    return ev.eval(f, nu);
}

/// pht(f, T, nu) computed literally from the definition.
inline PhType direct_type(const Formula& f, const Tree& t, const Valuation& nu = {},
                          unsigned node_cap = Config::default_node_cap()) {
    Evaluator ev(t, node_cap);
    return ev.direct_type(f, nu);
}

} // namespace msou
