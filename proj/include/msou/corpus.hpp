#pragma once

#include <cstdint>
#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "msou/formula.hpp"
#include "msou/tree.hpp"

namespace msou {

/// Deterministic random source: the same seed gives the same stream on
/// every platform (no std distributions involved).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform-ish value in [0, n).
    std::size_t below(std::size_t n) { return n == 0 ? 0 : static_cast<std::size_t>(engine_() % n); }
    bool chance(unsigned num, unsigned den) { return below(den) < num; }

    template <class T>
    const T& pick(const std::vector<T>& items) { return items[below(items.size())]; }

private:
    std::mt19937_64 engine_;
};

struct FormulaShape {
    unsigned max_qdepth = 2;
    /// Maximal number of core constructors.
    unsigned max_size = 10;
    std::vector<Var> vars{Var{"X"}, Var{"Y"}, Var{"Z"}};
};

namespace detail {

inline Formula random_atom(Rng& rng, const FormulaShape& shape, const Config& config) {
    const Var x = rng.pick(shape.vars);
    const Var y = rng.pick(shape.vars);
    switch (rng.below(3)) {
    case 0: return Formula::label_atom(rng.pick(config.alphabet), x);
    case 1: return Formula::subset(x, y);
    default: return Formula::child(1 + static_cast<unsigned>(rng.below(std::max(1u, config.rmax))), x, y);
    }
}

inline Formula random_formula(Rng& rng, const FormulaShape& shape, const Config& config, unsigned qdepth,
                              unsigned& budget) {
    // Weights: atom 40, and 20, not 20, exists 15, U 5.
    for (;;) {
        const std::size_t roll = rng.below(100);
        if (budget <= 1 || roll < 40) {
            if (budget > 0) --budget;
            return random_atom(rng, shape, config);
        }
        if (roll < 60) {
            if (budget < 3) continue;
            budget -= 2;
            Formula lhs = random_formula(rng, shape, config, qdepth, budget);
            ++budget;
            Formula rhs = random_formula(rng, shape, config, qdepth, budget);
            return std::move(lhs) && std::move(rhs);
        }
        if (roll < 80) {
            --budget;
            return !random_formula(rng, shape, config, qdepth, budget);
        }
        if (qdepth >= shape.max_qdepth) continue;
        --budget;
        const Var x = rng.pick(shape.vars);
        Formula body = random_formula(rng, shape, config, qdepth + 1, budget);
        return roll < 95 ? Formula::exists(x, std::move(body)) : Formula::unbound(x, std::move(body));
    }
}

} // namespace detail

inline Formula random_formula(Rng& rng, const FormulaShape& shape, const Config& config) {
    unsigned budget = std::max(1u, shape.max_size);
    return detail::random_formula(rng, shape, config, 0, budget);
}

/// Random tree with 1..max_nodes nodes conforming to `config`.
inline Tree random_tree(Rng& rng, std::size_t max_nodes, const Config& config) {
    const std::size_t n = 1 + rng.below(std::max<std::size_t>(1, max_nodes));
    Tree root(rng.pick(config.alphabet));
    if (config.rmax == 0) return root;
    std::vector<NodeAddr> open{NodeAddr{}};
    for (std::size_t added = 1; added < n && !open.empty();) {
        const std::size_t slot = rng.below(open.size());
        const NodeAddr at = open[slot];
        Tree* node = &root;
        for (unsigned i : at.path) node = &node->children[i - 1];
        node->children.emplace_back(rng.pick(config.alphabet));
        open.push_back(at.child(static_cast<unsigned>(node->children.size())));
        if (node->children.size() == config.rmax) open.erase(open.begin() + static_cast<std::ptrdiff_t>(slot));
        ++added;
    }
    return root;
}

/// Random assignment of node sets to `vars`; each node joins a set with
/// probability 1/3.
inline Valuation random_valuation(Rng& rng, const Tree& t, const VarSet& vars) {
    Valuation nu;
    const std::vector<NodeAddr> nodes = t.addresses();
    for (Var v : vars) {
        NodeSet set;
        for (const NodeAddr& u : nodes)
            if (rng.chance(1, 3)) set.insert(u);
        nu.assign(v, std::move(set));
    }
    return nu;
}

/// Replaces random non-root subtrees of `t` by holes numbered from 1.
inline Context random_context(Rng& rng, const Tree& t, unsigned max_holes) {
    Context c = Context::from_tree(t);
    std::vector<NodeAddr> nodes = t.addresses();
    unsigned next_id = 1;
    for (unsigned h = 0; h < max_holes && nodes.size() > 1; ++h) {
        const NodeAddr at = nodes[1 + rng.below(nodes.size() - 1)];
        Context* node = &c;
        bool under_hole = false;
        for (unsigned i : at.path) {
            if (node->is_hole()) {
                under_hole = true;
                break;
            }
            node = &node->children[i - 1];
        }
        if (under_hole || node->is_hole()) continue;
        *node = Context::make_hole(next_id++);
    }
    return c;
}

/// A tree cut into a context and the subtrees that fill its holes.
struct PlugCase {
    Context context;
    std::map<unsigned, Tree> parts;
    Tree plugged;
};

/// Cuts holes into a random tree and fills each with either the subtree it
/// replaced or a fresh random tree of at most `max_part_nodes` nodes.
inline PlugCase random_plug_case(Rng& rng, std::size_t max_nodes, std::size_t max_part_nodes, unsigned max_holes,
                                 const Config& config) {
    const Tree t = random_tree(rng, max_nodes, config);
    PlugCase out{random_context(rng, t, max_holes), {}, t};
    std::map<unsigned, Context> fill;
    for (const auto& [id, at] : out.context.holes()) {
        Tree part = rng.chance(1, 2) ? subtree(t, at) : random_tree(rng, max_part_nodes, config);
        fill.emplace(id, Context::from_tree(part));
        out.parts.emplace(id, std::move(part));
    }
    out.plugged = *plug(out.context, fill, config).to_tree();
    return out;
}

/// `nu` without the nodes at or below a hole of `c`.
inline Valuation outside_holes(const Valuation& nu, const Context& c) {
    const auto holes = c.holes();
    Valuation out;
    for (const auto& [v, nodes] : nu.entries()) {
        NodeSet kept;
        for (const NodeAddr& u : nodes)
            if (std::none_of(holes.begin(), holes.end(), [&](const auto& h) { return u.has_prefix(h.second); }))
                kept.insert(u);
        out.assign(v, std::move(kept));
    }
    return out;
}

/// All trees with exactly n nodes over `config`, in a fixed order.
inline std::vector<Tree> all_trees(std::size_t n, const Config& config) {
    std::vector<Tree> out;
    if (n == 0) return out;
    // Forests of `count` trees with `nodes` nodes in total.
    std::function<std::vector<std::vector<Tree>>(std::size_t, std::size_t)> forests =
        [&](std::size_t count, std::size_t nodes) {
            std::vector<std::vector<Tree>> result;
            if (count == 0) {
                if (nodes == 0) result.emplace_back();
                return result;
            }
            for (std::size_t first = 1; first + (count - 1) <= nodes; ++first)
                for (const Tree& head : all_trees(first, config))
                    for (std::vector<Tree>& rest : forests(count - 1, nodes - first)) {
                        rest.insert(rest.begin(), head);
                        result.push_back(std::move(rest));
                    }
            return result;
        };
    for (Label a : config.alphabet)
        for (std::size_t r = 0; r <= config.rmax; ++r)
            for (std::vector<Tree>& kids : forests(r, n - 1)) out.emplace_back(a, std::move(kids));
    return out;
}

/// All trees with 1..max_nodes nodes.
inline std::vector<Tree> all_trees_up_to(std::size_t max_nodes, const Config& config) {
    std::vector<Tree> out;
    for (std::size_t n = 1; n <= max_nodes; ++n) {
        auto batch = all_trees(n, config);
        out.insert(out.end(), std::make_move_iterator(batch.begin()), std::make_move_iterator(batch.end()));
    }
    return out;
}

/// All valuations of `vars` over the nodes of `t`.
inline std::vector<Valuation> all_valuations(const Tree& t, const VarSet& vars) {
    const std::vector<NodeAddr> nodes = t.addresses();
    std::vector<Valuation> out{Valuation{}};
    for (Var v : vars) {
        std::vector<Valuation> next;
        for (const Valuation& base : out)
            for (std::uint64_t m = 0; m < (std::uint64_t{1} << nodes.size()); ++m) {
                NodeSet set;
                for (std::size_t i = 0; i < nodes.size(); ++i)
                    if (m >> i & 1) set.insert(nodes[i]);
                Valuation nu = base;
                nu.assign(v, std::move(set));
                next.push_back(std::move(nu));
            }
        out = std::move(next);
    }
    return out;
}

} // namespace msou
