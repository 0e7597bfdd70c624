#pragma once

#include <algorithm>
#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "msou/compose.hpp"
#include "msou/errors.hpp"
#include "msou/formula.hpp"
#include "msou/phtype.hpp"

namespace msou {

using BigInt = boost::multiprecision::cpp_int;

/// |Pht(f)|: 2 for boolean atoms, 4 for child atoms, products for
/// conjunction, unchanged under negation, (2^|Pht(body)|)^2 for quantifiers.
/// Throws ResourceError when the value would need more than `max_bits` bits.
inline BigInt potential_size(const Formula& f, std::size_t max_bits = std::size_t{1} << 20) {
    switch (f.kind()) {
    case FormulaKind::label_atom:
    case FormulaKind::subset: return 2;
    case FormulaKind::child: return 4;
    case FormulaKind::conj: {
        BigInt p = potential_size(f.lhs(), max_bits) * potential_size(f.rhs(), max_bits);
        if (boost::multiprecision::msb(p) >= max_bits) throw ResourceError("potential type count is too large to materialize");
        return p;
    }
    case FormulaKind::negation: return potential_size(f.body(), max_bits);
    case FormulaKind::exists:
    case FormulaKind::unbound: {
        const BigInt inner = potential_size(f.body(), max_bits);
        if (inner * 2 >= max_bits) throw ResourceError("potential type count is too large to materialize");
        BigInt out = 1;
        out <<= static_cast<unsigned>(inner * 2);
        return out;
    }
    }
    return 0;
}

/// Truth value carried by a type: atoms are true exactly at `tt`; a
/// negation flips its body; a quantifier holds when some member of its
/// exists-set (for U, its unbounded-set) makes the body true.
inline bool tv(const Formula& f, PhType t) {
    switch (f.kind()) {
    case FormulaKind::label_atom:
    case FormulaKind::subset:
        if (t.kind() != TypeKind::boolean) throw ShapeError("expected a boolean type");
        return t.as_bool();
    case FormulaKind::child:
        if (t.kind() != TypeKind::child4) throw ShapeError("expected a child-atom type");
        return t.as_child4() == Child4::tt;
    case FormulaKind::conj:
        if (t.kind() != TypeKind::pair) throw ShapeError("expected a pair type");
        return tv(f.lhs(), t.lhs()) && tv(f.rhs(), t.rhs());
    case FormulaKind::negation: return !tv(f.body(), t);
    case FormulaKind::exists:
    case FormulaKind::unbound: {
        if (t.kind() != TypeKind::quant) throw ShapeError("expected a quantifier type");
        auto set = f.kind() == FormulaKind::exists ? t.exists_set() : t.unbounded_set();
        return std::any_of(set.begin(), set.end(), [&](PhType s) { return tv(f.body(), s); });
    }
    }
    return false;
}

/// All subsets of `vars`, smallest bitmask first.
inline std::vector<VarSet> subsets_of(const VarSet& vars) {
    if (vars.size() > 20) throw ResourceError("too many free variables");
    std::vector<VarSet> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << vars.size()); ++mask) {
        VarSet s;
        for (std::size_t i = 0; i < vars.size(); ++i)
            if (mask >> i & 1) s.push_back(vars[i]);
        out.push_back(std::move(s));
    }
    return out;
}

/// The Comp-reachable part of Pht(f) for a fixed alphabet and arity: every
/// type realized by a finite tree lies in it.
struct TypeSpace {
    Formula formula;
    Config config;
    /// Canonically sorted.
    std::vector<PhType> reachable;
    /// Members of `reachable` with tv = tt, canonically sorted.
    std::vector<PhType> truthy;

    bool contains(PhType t) const { return std::binary_search(reachable.begin(), reachable.end(), t); }

    /// Position in `reachable`, or -1.
    long index_of(PhType t) const {
        auto it = std::lower_bound(reachable.begin(), reachable.end(), t);
        return it != reachable.end() && *it == t ? it - reachable.begin() : -1;
    }
};

inline constexpr std::size_t default_max_states = 4096;
inline constexpr std::uint64_t default_max_compositions = 20'000'000;

/// Least set containing every leaf type and closed under composition for
/// each letter, arity r <= rmax and root set R. Throws ResourceError once
/// more than `max_states` types are found or the composer has been called
/// more than `max_compositions` times during the closure.
inline TypeSpace reachable_types(const Formula& f, Composer& composer, std::size_t max_states = default_max_states,
                                 std::uint64_t max_compositions = default_max_compositions) {
    const Config& config = composer.config();
    const std::uint64_t calls_before = composer.calls();
    if (config.alphabet.empty()) throw ConfigError("alphabet must be nonempty");
    const std::vector<VarSet> root_sets = subsets_of(f.free_vars());

    std::vector<PhType> found;
    std::unordered_set<PhType> seen;
    auto add = [&](PhType t) {
        if (composer.calls() - calls_before > max_compositions)
            throw ResourceError("reachable type space needs more than " + std::to_string(max_compositions) +
                                " compositions");
        if (seen.insert(t).second) {
            found.push_back(t);
            if (found.size() > max_states)
                throw ResourceError("reachable type space exceeds " + std::to_string(max_states) + " types");
        }
    };

    for (Label a : config.alphabet)
        for (const VarSet& R : root_sets) add(composer.compose(f, a, R, {}));

    std::vector<PhType> tuple;
    std::size_t old_end = 0;
    while (old_end < found.size()) {
        const std::size_t new_end = found.size();
        for (unsigned r = 1; r <= config.rmax; ++r) {
            tuple.assign(r, found[0]);
            // Tuples over [0, new_end)^r with some entry >= old_end: position p is
            // the first such entry, earlier ones are old, later ones anything.
            for (unsigned p = 0; p < r; ++p) {
                std::vector<std::size_t> pos(r, 0);
                pos[p] = old_end;
                auto limit = [&](unsigned i) { return i < p ? old_end : new_end; };
                auto start = [&](unsigned i) { return i == p ? old_end : std::size_t{0}; };
                bool empty_range = false;
                for (unsigned i = 0; i < r; ++i)
                    if (start(i) >= limit(i)) empty_range = true;
                if (empty_range) continue;
                for (;;) {
                    for (unsigned i = 0; i < r; ++i) tuple[i] = found[pos[i]];
                    for (Label a : config.alphabet)
                        for (const VarSet& R : root_sets) add(composer.compose(f, a, R, tuple));
                    unsigned i = 0;
                    while (i < r && ++pos[i] == limit(i)) {
                        pos[i] = start(i);
                        ++i;
                    }
                    if (i == r) break;
                }
            }
        }
        old_end = new_end;
    }

    TypeSpace space{f, config, std::move(found), {}};
    std::sort(space.reachable.begin(), space.reachable.end());
    for (PhType t : space.reachable)
        if (tv(f, t)) space.truthy.push_back(t);
    return space;
}

inline TypeSpace reachable_types(const Formula& f, const Config& config = {},
                                 std::size_t max_states = default_max_states,
                                 std::uint64_t max_compositions = default_max_compositions) {
    Composer composer(config);
    return reachable_types(f, composer, max_states, max_compositions);
}

/// Formulas defining types: psi_tau holds in (T, nu) exactly when the
/// f-type of (T, nu) is tau. Caches body type spaces and synthesized
/// formulas, so repeated requests share subformulas. Not thread safe.
class Synthesizer {
public:
    explicit Synthesizer(Config config = {}, std::size_t max_states = default_max_states,
                         std::uint64_t max_compositions = default_max_compositions)
        : composer_(std::move(config)), max_states_(max_states), max_compositions_(max_compositions) {}

    const Config& config() const { return composer_.config(); }
    Composer& composer() { return composer_; }

    /// Reachable space of `f`, computed once per subformula object.
    const TypeSpace& space(const Formula& f) {
        auto it = spaces_.find(f.get());
        if (it == spaces_.end()) {
            auto space = std::make_unique<TypeSpace>(reachable_types(f, composer_, max_states_, max_compositions_));
            it = spaces_.emplace(f.get(), std::move(space)).first;
            keep_alive_.push_back(f);
        }
        return *it->second;
    }

    Formula psi(const Formula& f, PhType t) {
        require_shape(f, t);
        return psi_unchecked(f, t);
    }

    /// Sentence holding in T exactly when the f-type of (T, empty valuation) is t.
    Formula psi_empty(const Formula& f, PhType t) {
        Key key{f.get(), t};
        if (auto it = memo_empty_.find(key); it != memo_empty_.end()) return it->second;
        Formula out = psi(f, t);
        for (Var x : f.free_vars()) out = std::move(out) && empty(x);
        const VarSet& fv = f.free_vars();
        for (auto it = fv.rbegin(); it != fv.rend(); ++it) out = Formula::exists(*it, std::move(out));
        memo_empty_.emplace(key, out);
        keep_alive_.push_back(f);
        return out;
    }

private:
    struct Key {
        const void* node;
        PhType type;
        friend bool operator==(const Key&, const Key&) = default;
    };
    struct KeyHash {
        std::size_t operator()(const Key& k) const {
            return detail::hash_mix(std::hash<const void*>{}(k.node), k.type.hash());
        }
    };

    Formula psi_unchecked(const Formula& f, PhType t) {
        Key key{f.get(), t};
        if (auto it = memo_.find(key); it != memo_.end()) return it->second;
        Formula out = build(f, t);
        memo_.emplace(key, out);
        keep_alive_.push_back(f);
        return out;
    }

    Formula child_psi(const Formula& f, Child4 value) {
        const Var x = f.x(), y = f.y();
        switch (value) {
        case Child4::tt: return f;
        case Child4::empty: return empty(x) && empty(y);
        case Child4::root: {
            Formula out = empty(x) && sing(y);
            if (config().rmax >= 1) out = std::move(out) && is_root(config().rmax, y);
            return out;
        }
        case Child4::ff:
            return !or_(child_psi(f, Child4::tt), or_(child_psi(f, Child4::empty), child_psi(f, Child4::root)));
        }
        throw ShapeError("unknown child-atom type");
    }

    Formula build(const Formula& f, PhType t) {
        switch (f.kind()) {
        case FormulaKind::label_atom:
        case FormulaKind::subset: return t.as_bool() ? f : !f;
        case FormulaKind::child: return child_psi(f, t.as_child4());
        case FormulaKind::conj: return psi_unchecked(f.lhs(), t.lhs()) && psi_unchecked(f.rhs(), t.rhs());
        case FormulaKind::negation: return psi_unchecked(f.body(), t);
        case FormulaKind::exists:
        case FormulaKind::unbound: {
            const Formula& body = f.body();
            const std::vector<PhType>& reach = space(body).reachable;
            const Var x = f.x();
            auto in = [](std::span<const PhType> set, PhType s) {
                return std::binary_search(set.begin(), set.end(), s);
            };
            // The same quantified psi_sigma recurs across types; sharing the node
            // lets evaluators reuse their memo entries.
            auto quantified = [&](bool unbounded, PhType s) {
                auto& memo = unbounded ? memo_unbound_ : memo_exists_;
                Key key{f.get(), s};
                auto it = memo.find(key);
                if (it == memo.end()) {
                    Formula inner = psi_unchecked(body, s);
                    it = memo.emplace(key, unbounded ? Formula::unbound(x, std::move(inner))
                                                     : Formula::exists(x, std::move(inner)))
                             .first;
                }
                return it->second;
            };
            std::vector<Formula> parts;
            for (PhType s : t.exists_set()) parts.push_back(quantified(false, s));
            for (PhType s : reach)
                if (!in(t.exists_set(), s)) parts.push_back(!quantified(false, s));
            for (PhType s : t.unbounded_set()) parts.push_back(quantified(true, s));
            for (PhType s : reach)
                if (!in(t.unbounded_set(), s)) parts.push_back(!quantified(true, s));
            return conj_all(parts);
        }
        }
        throw ShapeError("unknown formula kind");
    }

    Composer composer_;
    std::size_t max_states_;
    std::uint64_t max_compositions_;
    std::unordered_map<const void*, std::unique_ptr<TypeSpace>> spaces_;
    std::unordered_map<Key, Formula, KeyHash> memo_;
    std::unordered_map<Key, Formula, KeyHash> memo_empty_;
    std::unordered_map<Key, Formula, KeyHash> memo_exists_;
    std::unordered_map<Key, Formula, KeyHash> memo_unbound_;
    // Cache keys are node addresses; holding the formulas keeps them valid.
    std::vector<Formula> keep_alive_;
};

inline PhType leaf_type(const Formula& f, Label a, const VarSet& R, const Config& config = {}) {
    return Composer(config).leaf_type(f, a, R);
}

inline Formula synth_psi(const Formula& f, PhType t, const Config& config = {}) {
    return Synthesizer(config).psi(f, t);
}

inline Formula synth_psi_empty(const Formula& f, PhType t, const Config& config = {}) {
    return Synthesizer(config).psi_empty(f, t);
}

} // namespace msou
