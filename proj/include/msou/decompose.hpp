#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "msou/compose.hpp"
#include "msou/errors.hpp"
#include "msou/formula.hpp"
#include "msou/oracle.hpp"
#include "msou/phtype.hpp"
#include "msou/tree.hpp"
#include "msou/typespace.hpp"

namespace msou {

/// Root formula of a decomposition tuple: on a single-node tree it holds
/// iff the label is `a` and exactly the variables of R contain the root.
///
///   all Y. a(Y) & (all Y. Y sub X) & ... & !(all Y. Y sub X') & ...
///
/// for X in R and X' in FV \ R, with Y fresh for FV.
inline Formula eta(Label a, const VarSet& R, const VarSet& fv) {
    if (!is_subset(R, fv)) throw std::invalid_argument("R must be a subset of FV");
    const Var y = fresh_var(fv);
    Formula body = Formula::label_atom(a, y);
    for (Var x : R) body = std::move(body) && forall(y, Formula::subset(y, x));
    for (Var x : fv)
        if (!contains(R, x)) body = std::move(body) && !forall(y, Formula::subset(y, x));
    return forall(y, std::move(body));
}

struct OmegaTuple {
    Formula root;
    std::vector<Formula> children;

    std::size_t arity() const { return children.size(); }
    friend bool operator==(const OmegaTuple&, const OmegaTuple&) = default;
};

/// Finite set of tuples (root formula, child formulas) such that a tree
/// satisfies the formula iff some tuple matches its root and children.
struct OmegaSet {
    Formula formula;
    std::vector<OmegaTuple> tuples;
};

inline constexpr std::size_t default_max_tuples = 500000;

inline OmegaSet build_omega(const Formula& f, Synthesizer& synth, std::size_t max_tuples = default_max_tuples) {
    const Config& config = synth.config();
    const TypeSpace& space = synth.space(f);
    const std::vector<PhType>& reach = space.reachable;
    OmegaSet omega{f, {}};
    std::vector<PhType> args;
    for (Label a : config.alphabet) {
        for (const VarSet& R : subsets_of(f.free_vars())) {
            const Formula root = eta(a, R, f.free_vars());
            for (unsigned r = 0; r <= config.rmax; ++r) {
                if (r > 0 && reach.empty()) break;
                std::vector<std::size_t> pos(r, 0);
                for (;;) {
                    args.clear();
                    for (std::size_t p : pos) args.push_back(reach[p]);
                    if (tv(f, synth.composer().compose(f, a, R, args))) {
                        OmegaTuple tuple{root, {}};
                        for (PhType t : args) tuple.children.push_back(synth.psi(f, t));
                        omega.tuples.push_back(std::move(tuple));
                        if (omega.tuples.size() > max_tuples)
                            throw ResourceError("decomposition exceeds " + std::to_string(max_tuples) + " tuples");
                    }
                    unsigned i = 0;
                    while (i < r && ++pos[i] == reach.size()) pos[i++] = 0;
                    if (i == r) break;
                }
            }
        }
    }
    return omega;
}

inline OmegaSet build_omega(const Formula& f, const Config& config = {}) {
    Synthesizer synth(config);
    return build_omega(f, synth);
}

struct Thm1Report {
    bool lhs = false;
    bool rhs = false;
    std::optional<OmegaTuple> witness;
};

/// Evaluates a tuple against the root and child subtrees of a tree,
/// caching each formula's verdict per position.
class TupleMatcher {
public:
    TupleMatcher(const Tree& t, const Valuation& nu, unsigned node_cap)
        : root_tree_(root_tree(t)), root_nu_(root_valuation(nu)) {
        nu.check_in(t);
        subtrees_.reserve(t.children.size());
        for (unsigned i = 0; i < t.children.size(); ++i) {
            const NodeAddr at = NodeAddr{}.child(i + 1);
            subtrees_.push_back(t.children[i]);
            child_nu_.push_back(restrict_valuation(nu, at));
        }
        positions_.emplace_back(root_tree_, node_cap);
        for (const Tree& s : subtrees_) positions_.emplace_back(s, node_cap);
        verdicts_.resize(positions_.size());
    }

    std::size_t arity() const { return subtrees_.size(); }

    bool matches(const OmegaTuple& tuple) {
        if (tuple.arity() != arity()) return false;
        if (!holds(0, tuple.root, root_nu_)) return false;
        for (std::size_t i = 0; i < tuple.arity(); ++i)
            if (!holds(i + 1, tuple.children[i], child_nu_[i])) return false;
        return true;
    }

private:
    bool holds(std::size_t position, const Formula& f, const Valuation& nu) {
        auto& cache = verdicts_[position];
        if (auto it = cache.find(f.get()); it != cache.end()) return it->second;
        const bool value = positions_[position].eval(f, nu);
        cache.emplace(f.get(), value);
        return value;
    }

    Tree root_tree_;
    Valuation root_nu_;
    std::vector<Tree> subtrees_;
    std::vector<Valuation> child_nu_;
    std::vector<Evaluator> positions_;
    std::vector<std::unordered_map<const void*, bool>> verdicts_;
};

/// Compares T, nu |= f with the existence of a matching tuple in Omega.
inline Thm1Report check_thm1(const Formula& f, const Tree& t, const Valuation& nu, const OmegaSet& omega,
                             unsigned node_cap = Config::default_node_cap()) {
    Thm1Report report;
    report.lhs = eval(f, t, nu, node_cap);
    TupleMatcher matcher(t, nu, node_cap);
    for (const OmegaTuple& tuple : omega.tuples) {
        if (matcher.matches(tuple)) {
            report.rhs = true;
            report.witness = tuple;
            break;
        }
    }
    return report;
}

/// Node relabeling given by one sentence per output letter; a node gets
/// the letter whose sentence holds in its subtree.
struct Relabeling {
    std::map<Label, Formula> sentences;
    /// Types named by the `#t<index>` suffix of output letters.
    std::vector<PhType> legend;

    Config output_config(unsigned rmax) const {
        Config c;
        c.alphabet.clear();
        for (const auto& [letter, sentence] : sentences) c.alphabet.push_back(letter);
        c.rmax = rmax;
        return c;
    }
};

inline Label type_letter(Label a, std::size_t type_index) {
    return Label{std::string(a.name()) + "#t" + std::to_string(type_index)};
}

/// ex Y. (sing(Y) & Y is the root & a(Y))
inline Formula root_labeled(Label a, unsigned rmax) {
    const Var y{"Y"};
    Formula out = sing(y);
    if (rmax >= 1) out = std::move(out) && is_root(rmax, y);
    return Formula::exists(y, std::move(out) && Formula::label_atom(a, y));
}

/// Letters (a, tau) for every label a and reachable tau; the sentence for
/// (a, tau) holds in a tree iff its root is labeled a and its f-type under
/// the empty valuation is tau.
inline Relabeling build_relabeling(const Formula& f, Synthesizer& synth) {
    const Config& config = synth.config();
    const TypeSpace& space = synth.space(f);
    Relabeling out;
    out.legend = space.reachable;
    for (Label a : config.alphabet) {
        const Formula root = root_labeled(a, config.rmax);
        for (std::size_t i = 0; i < space.reachable.size(); ++i)
            out.sentences.emplace(type_letter(a, i), root && synth.psi_empty(f, space.reachable[i]));
    }
    return out;
}

inline Relabeling build_relabeling(const Formula& f, const Config& config = {}) {
    Synthesizer synth(config);
    return build_relabeling(f, synth);
}

namespace detail {

inline Tree relabel_at(const Relabeling& psi, const Tree& t, const NodeAddr& at, unsigned node_cap) {
    Evaluator ev(t, node_cap);
    std::optional<Label> chosen;
    std::size_t matches = 0;
    for (const auto& [letter, sentence] : psi.sentences) {
        if (ev.eval_search(sentence, {})) {
            ++matches;
            chosen = letter;
        }
    }
    if (matches != 1) throw NotUniqueError(at.to_string(), matches);
    Tree out(*chosen);
    for (unsigned i = 0; i < t.children.size(); ++i)
        out.children.push_back(relabel_at(psi, t.children[i], at.child(i + 1), node_cap));
    return out;
}

} // namespace detail

/// Psi(T): same domain, each node relabeled by the unique sentence holding
/// in its subtree. Throws NotUniqueError where no or several sentences hold.
inline Tree apply_relabeling(const Relabeling& psi, const Tree& t,
                             unsigned node_cap = Config::default_node_cap()) {
    return detail::relabel_at(psi, t, NodeAddr{}, node_cap);
}

inline constexpr std::uint64_t default_formula_budget = 1'000'000;

namespace detail {

// Builds the MSO formula that guesses a type for every node of a relabeled
// tree and checks the guess locally.
class MsoBuilder {
public:
    MsoBuilder(const Formula& f, Synthesizer& synth, std::uint64_t budget)
        : f_(f), synth_(synth), config_(synth.config()), space_(synth.space(f)), budget_(budget) {
        VarSet avoid = f.free_vars();
        for (std::size_t i = 0; i < space_.reachable.size(); ++i) {
            const Var v = fresh_var(avoid, "T");
            type_vars_.push_back(v);
            avoid = set_union(avoid, VarSet{v});
        }
        auto take = [&](std::string_view base) {
            const Var v = fresh_var(avoid, base);
            avoid = set_union(avoid, VarSet{v});
            return v;
        };
        n_ = take("N");
        c_ = take("C");
        w_ = take("W");
        d_ = take("D");
        p_ = take("P");
        q_ = take("Q");
    }

    Formula build() {
        check_estimate();
        std::vector<Formula> parts{partition(), root_ok(), local_comp(), empty_suffix()};
        Formula body = conj_all(parts);
        guard(body);
        for (std::size_t i = type_vars_.size(); i-- > 0;) body = Formula::exists(type_vars_[i], std::move(body));
        return body;
    }

private:
    Var type_var(PhType t) const { return type_vars_[static_cast<std::size_t>(space_.index_of(t))]; }

    void guard(const Formula& g) const {
        if (g.size() > budget_)
            throw ResourceError("MSO formula exceeds the budget of " + std::to_string(budget_) + " nodes");
    }

    // Every (a, R, child tuple) case contributes at least one node.
    void check_estimate() const {
        const double k = static_cast<double>(space_.reachable.size());
        double leaves = 0;
        for (unsigned r = 0; r <= config_.rmax; ++r) leaves += std::pow(k, r);
        leaves *= static_cast<double>(config_.alphabet.size()) * std::pow(2.0, f_.free_vars().size());
        if (leaves > static_cast<double>(budget_))
            throw ResourceError("MSO formula exceeds the budget of " + std::to_string(budget_) + " nodes");
    }

    // ex N. (sing(N) & !body)
    Formula none_violates(Formula body) const {
        return !Formula::exists(n_, sing(n_) && !std::move(body));
    }

    Formula partition() {
        std::vector<Formula> parts;
        const std::size_t k = type_vars_.size();
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j)
                parts.push_back(!Formula::exists(n_, (sing(n_) && Formula::subset(n_, type_vars_[i])) &&
                                                         Formula::subset(n_, type_vars_[j])));
        std::vector<Formula> some;
        for (Var x : type_vars_) some.push_back(Formula::subset(n_, x));
        parts.push_back(none_violates(disj_all(some)));
        Formula out = conj_all(parts);
        guard(out);
        return out;
    }

    Formula root_ok() {
        std::vector<Formula> accepting;
        for (PhType t : space_.truthy) accepting.push_back(Formula::subset(n_, type_var(t)));
        Formula at_root = sing(n_);
        if (config_.rmax >= 1) at_root = std::move(at_root) && is_root(config_.rmax, n_);
        return Formula::exists(n_, std::move(at_root) && disj_all(accepting));
    }

    Formula has_child(unsigned i) const { return Formula::exists(c_, Formula::child(i, n_, c_)); }

    std::optional<Formula> exactly_children(unsigned r) const {
        if (config_.rmax == 0) return std::nullopt;
        if (r == 0) return !has_child(1);
        if (r == config_.rmax) return has_child(r);
        return has_child(r) && !has_child(r + 1);
    }

    std::optional<Formula> root_pattern(const VarSet& R) const {
        std::vector<Formula> parts;
        for (Var x : f_.free_vars())
            parts.push_back(contains(R, x) ? Formula::subset(n_, x) : !Formula::subset(n_, x));
        if (parts.empty()) return std::nullopt;
        return conj_all(parts);
    }

    Formula letter_is(Label a) const {
        std::vector<Formula> parts;
        for (std::size_t j = 0; j < space_.reachable.size(); ++j)
            parts.push_back(Formula::label_atom(type_letter(a, j), n_));
        return disj_all(parts);
    }

    // ex C. (N child_i C & C sub X), shared per (i, X).
    const Formula& child_in(unsigned i, std::size_t type_index) {
        auto& slot = child_in_[{i, type_index}];
        if (!slot)
            slot = Formula::exists(c_, Formula::child(i, n_, c_) && Formula::subset(c_, type_vars_[type_index]));
        return *slot;
    }

    // Disjunction over the remaining child types; the leaf pins N to the
    // composed type.
    Formula child_cases(Label a, const VarSet& R, unsigned r, std::vector<PhType>& prefix) {
        if (prefix.size() == r)
            return Formula::subset(n_, type_var(synth_.composer().compose(f_, a, R, prefix)));
        const unsigned i = static_cast<unsigned>(prefix.size()) + 1;
        std::vector<Formula> cases;
        for (std::size_t j = 0; j < space_.reachable.size(); ++j) {
            prefix.push_back(space_.reachable[j]);
            cases.push_back(child_in(i, j) && child_cases(a, R, r, prefix));
            prefix.pop_back();
        }
        return disj_all(cases);
    }

    Formula local_comp() {
        std::vector<Formula> by_label;
        const std::vector<VarSet> root_sets = subsets_of(f_.free_vars());
        for (Label a : config_.alphabet) {
            std::vector<Formula> by_arity;
            for (unsigned r = 0; r <= config_.rmax; ++r) {
                std::vector<Formula> by_root_set;
                for (const VarSet& R : root_sets) {
                    std::vector<PhType> prefix;
                    Formula cases = child_cases(a, R, r, prefix);
                    if (auto pattern = root_pattern(R)) cases = std::move(*pattern) && std::move(cases);
                    by_root_set.push_back(std::move(cases));
                }
                Formula block = disj_all(by_root_set);
                if (auto exact = exactly_children(r)) block = std::move(*exact) && std::move(block);
                by_arity.push_back(std::move(block));
            }
            Formula block = letter_is(a) && disj_all(by_arity);
            guard(block);
            by_label.push_back(std::move(block));
        }
        Formula out = none_violates(disj_all(by_label));
        guard(out);
        return out;
    }

    // N sub D and D closed under child steps imply W sub D.
    Formula descendant_or_self() const {
        Formula closed_premise = Formula::subset(n_, d_);
        if (config_.rmax >= 1) {
            const Formula step = (Formula::subset(p_, d_) && child_any(config_.rmax, p_, q_)) &&
                                 !Formula::subset(q_, d_);
            closed_premise = std::move(closed_premise) &&
                             !Formula::exists(p_, Formula::exists(q_, step));
        }
        return forall(d_, implies(std::move(closed_premise), Formula::subset(w_, d_)));
    }

    Formula empty_suffix() {
        Formula premise = sing(n_);
        if (!f_.free_vars().empty()) {
            std::vector<Formula> marked;
            for (Var x : f_.free_vars()) marked.push_back(Formula::subset(w_, x));
            premise = std::move(premise) &&
                      !Formula::exists(w_, (sing(w_) && disj_all(marked)) && descendant_or_self());
        }
        std::vector<Formula> cases;
        for (std::size_t j = 0; j < space_.reachable.size(); ++j) {
            std::vector<Formula> letters;
            for (Label a : config_.alphabet) letters.push_back(Formula::label_atom(type_letter(a, j), n_));
            cases.push_back(disj_all(letters) && Formula::subset(n_, type_vars_[j]));
        }
        return !Formula::exists(n_, std::move(premise) && !disj_all(cases));
    }

    const Formula& f_;
    Synthesizer& synth_;
    const Config& config_;
    const TypeSpace& space_;
    std::uint64_t budget_;
    std::vector<Var> type_vars_;
    Var n_, c_, w_, d_, p_, q_;
    std::map<std::pair<unsigned, std::size_t>, std::optional<Formula>> child_in_;
};

} // namespace detail

/// MSO formula over the relabeled alphabet, with FV contained in FV(f),
/// that holds in Psi(T), nu iff f holds in T, nu. It guesses one set per
/// reachable type and checks that the sets partition the nodes, that each
/// node's set agrees with composition from its children, that nodes
/// without marked descendants carry their letter's type, and that the
/// root's type is true. Throws ResourceError past `budget` nodes.
inline Formula build_phi_mso(const Formula& f, Synthesizer& synth,
                             std::uint64_t budget = default_formula_budget) {
    return detail::MsoBuilder(f, synth, budget).build();
}

inline Formula build_phi_mso(const Formula& f, const Config& config = {},
                             std::uint64_t budget = default_formula_budget) {
    Synthesizer synth(config);
    return build_phi_mso(f, synth, budget);
}

struct Decomposition {
    Relabeling relabeling;
    Formula mso;
};

inline Decomposition decompose(const Formula& f, Synthesizer& synth, std::uint64_t budget = default_formula_budget) {
    Relabeling relabeling = build_relabeling(f, synth);
    Formula mso = build_phi_mso(f, synth, budget);
    return {std::move(relabeling), std::move(mso)};
}

struct Thm2Report {
    bool lhs = false;
    bool rhs = false;
    Tree relabeled;
};

/// Compares T, nu |= f with Psi(T), nu |= the MSO formula.
inline Thm2Report check_thm2(const Formula& f, const Tree& t, const Valuation& nu, const Decomposition& d,
                             unsigned node_cap = Config::default_node_cap()) {
    Thm2Report report;
    report.lhs = eval(f, t, nu, node_cap);
    report.relabeled = apply_relabeling(d.relabeling, t, node_cap);
    Evaluator ev(report.relabeled, node_cap);
    report.rhs = ev.eval_search(d.mso, nu);
    return report;
}

inline Thm2Report check_thm2(const Formula& f, const Tree& t, const Valuation& nu, const Config& config = {}) {
    Synthesizer synth(config);
    return check_thm2(f, t, nu, decompose(f, synth), config.node_cap);
}

} // namespace msou
