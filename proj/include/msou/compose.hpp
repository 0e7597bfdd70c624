#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "msou/errors.hpp"
#include "msou/formula.hpp"
#include "msou/phtype.hpp"
#include "msou/tree.hpp"

namespace msou {

inline VarSet set_intersection(const VarSet& a, const VarSet& b) {
    VarSet out;
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

/// The composition functions Comp_{a,r,phi}: the type of a tree from its
/// root letter, the set R of free variables containing the root, and the
/// types of the root's children.
///
/// Results are memoized per (subformula, letter, R, argument types). Not
/// thread safe; use one instance per thread.
class Composer {
public:
    explicit Composer(Config config = {}) : config_(std::move(config)) {}

    const Config& config() const { return config_; }

    /// Number of `compose` invocations so far, including recursive ones.
    std::uint64_t calls() const { return calls_; }

    /// Checked entry point: R must be a subset of FV(f), args.size() == r <= rmax,
    /// and each argument must have the shape of f.
    PhType comp(const Formula& f, Label a, unsigned r, const VarSet& R, std::span<const PhType> args) {
        if (r > config_.rmax)
            throw ConfigError("arity " + std::to_string(r) + " exceeds maximal arity " + std::to_string(config_.rmax));
        if (args.size() != r) throw ShapeError("comp expects exactly r argument types");
        if (!is_subset(R, f.free_vars())) throw std::invalid_argument("R must be a subset of FV(phi)");
        for (PhType t : args) require_shape(f, t);
        return compose(f, a, R, args);
    }

    /// Type of the single-node tree labeled `a` whose root is in exactly the
    /// variables R.
    PhType leaf_type(const Formula& f, Label a, const VarSet& R) { return comp(f, a, 0, R, {}); }

    /// Structural fold of `compose` over the tree.
    PhType bottom_up_type(const Formula& f, const Tree& t, const Valuation& nu) {
        nu.check_in(t);
        return fold(f, t, nu, NodeAddr{});
    }

    /// Fold over a context where each hole contributes its assumed type.
    /// The valuation may not mention a hole position or anything below it.
    PhType context_type(const Formula& f, const Context& c, const Valuation& nu,
                        const std::map<unsigned, PhType>& assumptions) {
        for (const auto& [v, nodes] : nu.entries())
            for (const NodeAddr& u : nodes) check_context_node(c, u);
        for (const auto& [id, t] : assumptions) require_shape(f, t);
        return fold_context(f, c, nu, NodeAddr{}, assumptions);
    }

    /// Unchecked composition, used by fixpoints that only feed it
    /// well-shaped values.
    PhType compose(const Formula& f, Label a, const VarSet& R, std::span<const PhType> args) {
        ++calls_;
        Key key{f.get(), a, R, std::vector<PhType>(args.begin(), args.end())};
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        PhType result = compose_uncached(f, a, R, args);
        memo_.emplace(std::move(key), result);
        if (retained_nodes_.insert(f.get()).second) retained_.push_back(f);
        return result;
    }

private:
    struct Key {
        const void* node;
        Label a;
        VarSet R;
        std::vector<PhType> args;
        friend bool operator==(const Key&, const Key&) = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            std::size_t h = detail::hash_mix(std::hash<const void*>{}(k.node), k.a.hash());
            for (Var v : k.R) h = detail::hash_mix(h, v.hash());
            h = detail::hash_mix(h, 0xabc);
            for (PhType t : k.args) h = detail::hash_mix(h, t.hash());
            return h;
        }
    };

    static void expect_kind(PhType t, TypeKind kind) {
        if (t.kind() != kind) throw ShapeError("argument type has the wrong shape");
    }

    PhType compose_uncached(const Formula& f, Label a, const VarSet& R, std::span<const PhType> args) {
        switch (f.kind()) {
        case FormulaKind::label_atom:
        case FormulaKind::subset: {
            bool children_hold = true;
            for (PhType t : args) {
                expect_kind(t, TypeKind::boolean);
                children_hold = children_hold && t.as_bool();
            }
            const bool root_holds = f.kind() == FormulaKind::label_atom
                                        ? (a == f.label() || !contains(R, f.x()))
                                        : (!contains(R, f.x()) || contains(R, f.y()));
            return PhType::boolean(children_hold && root_holds);
        }
        case FormulaKind::child: return compose_child(f, R, args);
        case FormulaKind::negation: return compose(f.body(), a, R, args);
        case FormulaKind::conj: {
            std::vector<PhType> left, right;
            left.reserve(args.size());
            right.reserve(args.size());
            for (PhType t : args) {
                expect_kind(t, TypeKind::pair);
                left.push_back(t.lhs());
                right.push_back(t.rhs());
            }
            return PhType::pair(compose(f.lhs(), a, set_intersection(R, f.lhs().free_vars()), left),
                                compose(f.rhs(), a, set_intersection(R, f.rhs().free_vars()), right));
        }
        case FormulaKind::exists:
        case FormulaKind::unbound: return compose_quantifier(f, a, R, args);
        }
        throw ShapeError("unknown formula kind");
    }

    static PhType compose_child(const Formula& f, const VarSet& R, std::span<const PhType> args) {
        const bool x_in = contains(R, f.x());
        const bool y_in = contains(R, f.y());
        const PhType tt = PhType::child4(Child4::tt);
        const PhType emp = PhType::child4(Child4::empty);
        const PhType root = PhType::child4(Child4::root);
        std::size_t non_empty = 0, last_non_empty = 0;
        for (std::size_t i = 0; i < args.size(); ++i) {
            expect_kind(args[i], TypeKind::child4);
            if (args[i] != emp) {
                ++non_empty;
                last_non_empty = i;
            }
        }
        // Exactly one child is not `empty`; it carries the whole pair.
        if (non_empty == 1 && !y_in) {
            if (!x_in && args[last_non_empty] == tt) return tt;
            if (x_in && last_non_empty + 1 == f.index() && args[last_non_empty] == root) return tt;
        }
        if (non_empty == 0 && !x_in) {
            if (!y_in) return emp;
            return root;
        }
        return PhType::child4(Child4::ff);
    }

    PhType compose_quantifier(const Formula& f, Label a, const VarSet& R, std::span<const PhType> args) {
        const Formula& body = f.body();
        const VarSet& body_fv = body.free_vars();
        const VarSet with_x = set_intersection(set_union(R, VarSet{f.x()}), body_fv);
        const VarSet without_x = set_intersection(set_minus(R, f.x()), body_fv);
        for (PhType t : args) expect_kind(t, TypeKind::quant);

        const std::size_t r = args.size();
        std::vector<PhType> from_a, from_b;
        std::vector<PhType> tuple(r, tt_type);

        // Visits every tuple with tuple[i] drawn from pick(i).
        auto for_each_tuple = [&](auto&& pick, std::vector<PhType>& out) {
            for (std::size_t i = 0; i < r; ++i)
                if (pick(i).empty()) return;
            std::vector<std::size_t> pos(r, 0);
            for (;;) {
                for (std::size_t i = 0; i < r; ++i) tuple[i] = pick(i)[pos[i]];
                out.push_back(compose(body, a, with_x, tuple));
                if (with_x != without_x) out.push_back(compose(body, a, without_x, tuple));
                std::size_t i = 0;
                while (i < r && ++pos[i] == pick(i).size()) pos[i++] = 0;
                if (i == r) return;
            }
        };

        for_each_tuple([&](std::size_t i) { return args[i].exists_set(); }, from_a);
        for (std::size_t j = 0; j < r; ++j) {
            if (args[j].unbounded_set().empty()) continue;
            for_each_tuple(
                [&](std::size_t i) { return i == j ? args[i].unbounded_set() : args[i].exists_set(); }, from_b);
        }
        return PhType::quant(std::move(from_a), std::move(from_b));
    }

    PhType fold(const Formula& f, const Tree& t, const Valuation& nu, const NodeAddr& at) {
        if (t.children.size() > config_.rmax)
            throw ConfigError("node " + at.to_string() + " has more than " + std::to_string(config_.rmax) + " children");
        std::vector<PhType> kids;
        kids.reserve(t.children.size());
        for (unsigned i = 0; i < t.children.size(); ++i) kids.push_back(fold(f, t.children[i], nu, at.child(i + 1)));
        return compose(f, t.label, root_set(f, nu, at), kids);
    }

    PhType fold_context(const Formula& f, const Context& c, const Valuation& nu, const NodeAddr& at,
                        const std::map<unsigned, PhType>& assumptions) {
        if (c.is_hole()) {
            auto it = assumptions.find(*c.hole);
            if (it == assumptions.end()) throw HoleError("no assumed type for hole _" + std::to_string(*c.hole));
            return it->second;
        }
        if (c.children.size() > config_.rmax)
            throw ConfigError("node " + at.to_string() + " has more than " + std::to_string(config_.rmax) + " children");
        std::vector<PhType> kids;
        kids.reserve(c.children.size());
        for (unsigned i = 0; i < c.children.size(); ++i)
            kids.push_back(fold_context(f, c.children[i], nu, at.child(i + 1), assumptions));
        return compose(f, c.label, root_set(f, nu, at), kids);
    }

    static VarSet root_set(const Formula& f, const Valuation& nu, const NodeAddr& at) {
        VarSet R;
        for (Var v : f.free_vars())
            if (nu.get(v).count(at)) R.push_back(v);
        return R;
    }

    static void check_context_node(const Context& c, const NodeAddr& u) {
        const Context* node = &c;
        for (unsigned i : u.path) {
            if (node->is_hole()) break;
            if (i < 1 || i > node->children.size())
                throw DomainError("address " + u.to_string() + " is not in the context");
            node = &node->children[i - 1];
        }
        if (node->is_hole()) throw HoleError("valuation assigns " + u.to_string() + ", which is at or below a hole");
    }

    Config config_;
    std::uint64_t calls_ = 0;
    std::unordered_map<Key, PhType, KeyHash> memo_;
    // Memo keys are node addresses; keep their formulas alive.
    std::unordered_set<const void*> retained_nodes_;
    std::vector<Formula> retained_;
};

/// One-shot convenience wrappers around a fresh Composer.
inline PhType comp(const Formula& f, Label a, unsigned r, const VarSet& R, std::span<const PhType> args,
                   const Config& config = {}) {
    return Composer(config).comp(f, a, r, R, args);
}

inline PhType bottom_up_type(const Formula& f, const Tree& t, const Valuation& nu = {}, const Config& config = {}) {
    return Composer(config).bottom_up_type(f, t, nu);
}

inline PhType context_type(const Formula& f, const Context& c, const Valuation& nu,
                           const std::map<unsigned, PhType>& assumptions, const Config& config = {}) {
    return Composer(config).context_type(f, c, nu, assumptions);
}

} // namespace msou
