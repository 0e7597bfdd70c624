#pragma once

#include <algorithm>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "msou/errors.hpp"
#include "msou/symbol.hpp"

namespace msou {

/// Path of child indices from the root; the empty path is the root.
struct NodeAddr {
    std::vector<unsigned> path;

    NodeAddr() = default;
    NodeAddr(std::initializer_list<unsigned> p) : path(p) {}
    explicit NodeAddr(std::vector<unsigned> p) : path(std::move(p)) {}

    bool is_root() const { return path.empty(); }
    std::size_t depth() const { return path.size(); }

    NodeAddr child(unsigned i) const {
        NodeAddr out = *this;
        out.path.push_back(i);
        return out;
    }

    NodeAddr concat(const NodeAddr& suffix) const {
        NodeAddr out = *this;
        out.path.insert(out.path.end(), suffix.path.begin(), suffix.path.end());
        return out;
    }

    bool has_prefix(const NodeAddr& prefix) const {
        return prefix.path.size() <= path.size() &&
               std::equal(prefix.path.begin(), prefix.path.end(), path.begin());
    }

    /// The part after `prefix`; requires has_prefix(prefix).
    NodeAddr strip(const NodeAddr& prefix) const {
        return NodeAddr(std::vector<unsigned>(path.begin() + static_cast<std::ptrdiff_t>(prefix.path.size()), path.end()));
    }

    std::string to_string() const {
        if (path.empty()) return "eps";
        std::string out;
        for (std::size_t i = 0; i < path.size(); ++i) {
            if (i) out += '.';
            out += std::to_string(path[i]);
        }
        return out;
    }

    friend bool operator==(const NodeAddr&, const NodeAddr&) = default;
    /// Shorter addresses first, then componentwise.
    friend bool operator<(const NodeAddr& a, const NodeAddr& b) {
        if (a.path.size() != b.path.size()) return a.path.size() < b.path.size();
        return a.path < b.path;
    }
};

using NodeSet = std::set<NodeAddr>;

/// Alphabet and maximal arity shared by every operation on trees.
struct Config {
    std::vector<Label> alphabet{Label{"a"}, Label{"b"}};
    unsigned rmax = 2;
    /// Largest tree on which subset enumeration is attempted.
    unsigned node_cap = default_node_cap();

    static unsigned default_node_cap() {
        if (const char* env = std::getenv("MSOU_NODE_CAP")) {
            char* end = nullptr;
            const unsigned long v = std::strtoul(env, &end, 10);
            if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(std::min<unsigned long>(v, 62));
        }
        return 16;
    }

    bool has_label(Label a) const { return std::find(alphabet.begin(), alphabet.end(), a) != alphabet.end(); }
};

/// Finite ordered tree; its domain is prefix closed and left-sibling closed
/// by construction.
struct Tree {
    Label label;
    std::vector<Tree> children;

    Tree() = default;
    explicit Tree(Label l, std::vector<Tree> c = {}) : label(l), children(std::move(c)) {}

    std::size_t size() const {
        std::size_t n = 1;
        for (const Tree& c : children) n += c.size();
        return n;
    }

    /// Null when `u` is not in the domain.
    const Tree* find(const NodeAddr& u) const {
        const Tree* t = this;
        for (unsigned i : u.path) {
            if (i < 1 || i > t->children.size()) return nullptr;
            t = &t->children[i - 1];
        }
        return t;
    }

    bool contains(const NodeAddr& u) const { return find(u) != nullptr; }

    /// Domain in canonical order (by length, then componentwise).
    std::vector<NodeAddr> addresses() const {
        std::vector<NodeAddr> out;
        collect(NodeAddr{}, out);
        std::sort(out.begin(), out.end());
        return out;
    }

    friend bool operator==(const Tree&, const Tree&) = default;

private:
    void collect(const NodeAddr& at, std::vector<NodeAddr>& out) const {
        out.push_back(at);
        for (unsigned i = 0; i < children.size(); ++i) children[i].collect(at.child(i + 1), out);
    }
};

/// Throws ConfigError unless every label is in the alphabet and every node
/// has at most `rmax` children.
inline void check_conforms(const Tree& t, const Config& config) {
    if (!config.has_label(t.label))
        throw ConfigError("label '" + t.label.name() + "' is not in the alphabet");
    if (t.children.size() > config.rmax)
        throw ConfigError("node labeled '" + t.label.name() + "' has " + std::to_string(t.children.size()) +
                          " children, maximal arity is " + std::to_string(config.rmax));
    for (const Tree& c : t.children) check_conforms(c, config);
}

inline Tree subtree(const Tree& t, const NodeAddr& u) {
    const Tree* s = t.find(u);
    if (!s) throw DomainError("address " + u.to_string() + " is not in the tree");
    return *s;
}

inline Tree root_tree(const Tree& t) { return Tree(t.label); }

/// Finite-support map from variables to node sets; unmentioned variables
/// denote the empty set. Empty entries are never stored, so equality is
/// extensional.
class Valuation {
public:
    Valuation() = default;
    Valuation(std::initializer_list<std::pair<const Var, NodeSet>> init) {
        for (const auto& [v, s] : init) assign(v, s);
    }

    const NodeSet& get(Var v) const {
        static const NodeSet none;
        auto it = map_.find(v);
        return it == map_.end() ? none : it->second;
    }

    void assign(Var v, NodeSet nodes) {
        if (nodes.empty())
            map_.erase(v);
        else
            map_[v] = std::move(nodes);
    }

    void insert(Var v, const NodeAddr& u) { map_[v].insert(u); }

    const std::map<Var, NodeSet>& entries() const { return map_; }
    bool empty() const { return map_.empty(); }

    /// Throws DomainError if some assigned node is outside `t`.
    void check_in(const Tree& t) const {
        for (const auto& [v, nodes] : map_)
            for (const NodeAddr& u : nodes)
                if (!t.contains(u))
                    throw DomainError("valuation maps " + v.name() + " to " + u.to_string() +
                                      ", which is not in the tree");
    }

    friend bool operator==(const Valuation&, const Valuation&) = default;

private:
    std::map<Var, NodeSet> map_;
};

/// Every variable X is mapped to { w | u.w in nu(X) }.
inline Valuation restrict_valuation(const Valuation& nu, const NodeAddr& u) {
    Valuation out;
    for (const auto& [v, nodes] : nu.entries()) {
        NodeSet kept;
        for (const NodeAddr& w : nodes)
            if (w.has_prefix(u)) kept.insert(w.strip(u));
        out.assign(v, std::move(kept));
    }
    return out;
}

/// Every variable X is mapped to {eps} intersected with nu(X).
inline Valuation root_valuation(const Valuation& nu) {
    Valuation out;
    for (const auto& [v, nodes] : nu.entries())
        if (nodes.count(NodeAddr{})) out.assign(v, {NodeAddr{}});
    return out;
}

// ---------------------------------------------------------------------------
// Contexts: trees with identified holes.

struct Context {
    std::optional<unsigned> hole;
    Label label;
    std::vector<Context> children;

    static Context make_hole(unsigned id) {
        Context c;
        c.hole = id;
        return c;
    }

    static Context node(Label l, std::vector<Context> kids = {}) {
        Context c;
        c.label = l;
        c.children = std::move(kids);
        return c;
    }

    static Context from_tree(const Tree& t) {
        Context c = node(t.label);
        c.children.reserve(t.children.size());
        for (const Tree& k : t.children) c.children.push_back(from_tree(k));
        return c;
    }

    bool is_hole() const { return hole.has_value(); }

    /// Hole identifiers with their addresses.
    std::map<unsigned, NodeAddr> holes() const {
        std::map<unsigned, NodeAddr> out;
        collect_holes(NodeAddr{}, out);
        return out;
    }

    /// The context as a tree, if it has no holes.
    std::optional<Tree> to_tree() const {
        if (is_hole()) return std::nullopt;
        Tree t(label);
        for (const Context& k : children) {
            auto sub = k.to_tree();
            if (!sub) return std::nullopt;
            t.children.push_back(std::move(*sub));
        }
        return t;
    }

    friend bool operator==(const Context&, const Context&) = default;

private:
    void collect_holes(const NodeAddr& at, std::map<unsigned, NodeAddr>& out) const {
        if (is_hole()) {
            if (!out.emplace(*hole, at).second)
                throw ConfigError("duplicate hole identifier _" + std::to_string(*hole));
            return;
        }
        for (unsigned i = 0; i < children.size(); ++i) children[i].collect_holes(at.child(i + 1), out);
    }
};

namespace detail {

inline Context plug_rec(const Context& c, const std::map<unsigned, Context>& assignment, unsigned rmax) {
    if (c.is_hole()) {
        auto it = assignment.find(*c.hole);
        return it == assignment.end() ? c : it->second;
    }
    if (c.children.size() > rmax)
        throw ConfigError("arity " + std::to_string(c.children.size()) + " exceeds maximal arity " +
                          std::to_string(rmax));
    Context out = Context::node(c.label);
    out.children.reserve(c.children.size());
    for (const Context& k : c.children) out.children.push_back(plug_rec(k, assignment, rmax));
    return out;
}

inline void check_arity(const Context& c, unsigned rmax) {
    if (c.children.size() > rmax)
        throw ConfigError("arity " + std::to_string(c.children.size()) + " exceeds maximal arity " +
                          std::to_string(rmax));
    for (const Context& k : c.children) check_arity(k, rmax);
}

} // namespace detail

/// Replaces each assigned hole by its context (or tree, via
/// Context::from_tree). Unassigned holes stay. Throws ConfigError on an
/// arity violation or when the result has repeated hole identifiers.
inline Context plug(const Context& c, const std::map<unsigned, Context>& assignment, const Config& config) {
    for (const auto& [id, sub] : assignment) detail::check_arity(sub, config.rmax);
    Context out = detail::plug_rec(c, assignment, config.rmax);
    (void)out.holes(); // validates distinct identifiers
    return out;
}

} // namespace msou
