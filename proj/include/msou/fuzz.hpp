#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msou/compose.hpp"
#include "msou/corpus.hpp"
#include "msou/decompose.hpp"
#include "msou/formula_io.hpp"
#include "msou/oracle.hpp"
#include "msou/tree_io.hpp"
#include "msou/typespace.hpp"

namespace msou {

struct FuzzCase {
    Formula formula;
    Tree tree;
    Valuation nu;
};

inline FuzzCase random_case(Rng& rng, const FormulaShape& shape, std::size_t max_nodes, const Config& config) {
    Formula f = random_formula(rng, shape, config);
    Tree t = random_tree(rng, max_nodes, config);
    Valuation nu = random_valuation(rng, t, f.free_vars());
    return {std::move(f), std::move(t), std::move(nu)};
}

enum class Suite { lemma4, prop2, thm1, thm2 };

inline std::string_view suite_name(Suite s) {
    switch (s) {
    case Suite::lemma4: return "lemma4";
    case Suite::prop2: return "prop2";
    case Suite::thm1: return "thm1";
    case Suite::thm2: return "thm2";
    }
    return "?";
}

/// Outcome of one property on one case.
struct Verdict {
    enum Kind { pass, fail, skipped } kind = pass;
    std::string detail;

    static Verdict ok() { return {}; }
    static Verdict failed(std::string why) { return {fail, std::move(why)}; }
    static Verdict skip(std::string why) { return {skipped, std::move(why)}; }
};

/// Runs one property on one case. Resource limits yield `skipped`; any
/// other exception is a failure.
inline Verdict run_suite(Suite suite, const FuzzCase& c, const Config& config, std::uint64_t budget) {
    try {
        switch (suite) {
        case Suite::lemma4: {
            const PhType direct = direct_type(c.formula, c.tree, c.nu, config.node_cap);
            const PhType folded = bottom_up_type(c.formula, c.tree, c.nu, config);
            if (direct != folded) return Verdict::failed("direct " + print(direct) + " vs bottom-up " + print(folded));
            return Verdict::ok();
        }
        case Suite::prop2: {
            const bool truth = eval(c.formula, c.tree, c.nu, config.node_cap);
            const bool extracted = tv(c.formula, direct_type(c.formula, c.tree, c.nu, config.node_cap));
            if (truth != extracted) return Verdict::failed("eval " + std::to_string(truth) + " vs tv " + std::to_string(extracted));
            return Verdict::ok();
        }
        case Suite::thm1: {
            Synthesizer synth(config);
            const OmegaSet omega = build_omega(c.formula, synth);
            for (const OmegaTuple& tuple : omega.tuples) {
                if (!is_subset(tuple.root.free_vars(), c.formula.free_vars()))
                    return Verdict::failed("root formula has extra free variables");
                for (const Formula& g : tuple.children)
                    if (!is_subset(g.free_vars(), c.formula.free_vars()))
                        return Verdict::failed("child formula has extra free variables");
            }
            const Thm1Report report = check_thm1(c.formula, c.tree, c.nu, omega, config.node_cap);
            if (report.lhs != report.rhs)
                return Verdict::failed("lhs " + std::to_string(report.lhs) + " vs rhs " + std::to_string(report.rhs));
            if (report.witness) {
                TupleMatcher again(c.tree, c.nu, config.node_cap);
                if (!again.matches(*report.witness)) return Verdict::failed("witness does not re-verify");
            }
            return Verdict::ok();
        }
        case Suite::thm2: {
            Synthesizer synth(config);
            const Decomposition d = decompose(c.formula, synth, budget);
            if (!is_mso(d.mso)) return Verdict::failed("decomposed formula uses U");
            if (!is_subset(d.mso.free_vars(), c.formula.free_vars()))
                return Verdict::failed("decomposed formula has extra free variables");
            const Thm2Report report = check_thm2(c.formula, c.tree, c.nu, d, config.node_cap);
            if (report.lhs != report.rhs)
                return Verdict::failed("lhs " + std::to_string(report.lhs) + " vs rhs " + std::to_string(report.rhs));
            return Verdict::ok();
        }
        }
    } catch (const ResourceError& e) {
        return Verdict::skip(e.what());
    } catch (const std::exception& e) {
        return Verdict::failed(std::string("exception: ") + e.what());
    }
    return Verdict::ok();
}

namespace detail {

// Every formula obtained by replacing one subformula with one of its children.
inline void formula_reductions(const Formula& f, const std::function<Formula(Formula)>& wrap,
                               std::vector<Formula>& out) {
    switch (f.kind()) {
    case FormulaKind::conj:
        out.push_back(wrap(f.lhs()));
        out.push_back(wrap(f.rhs()));
        formula_reductions(f.lhs(), [&](Formula g) { return wrap(std::move(g) && f.rhs()); }, out);
        formula_reductions(f.rhs(), [&](Formula g) { return wrap(f.lhs() && std::move(g)); }, out);
        return;
    case FormulaKind::negation:
        out.push_back(wrap(f.body()));
        formula_reductions(f.body(), [&](Formula g) { return wrap(!std::move(g)); }, out);
        return;
    case FormulaKind::exists:
    case FormulaKind::unbound: {
        out.push_back(wrap(f.body()));
        const bool ex = f.kind() == FormulaKind::exists;
        formula_reductions(f.body(), [&](Formula g) {
            return wrap(ex ? Formula::exists(f.x(), std::move(g)) : Formula::unbound(f.x(), std::move(g)));
        }, out);
        return;
    }
    default: return;
    }
}

inline Valuation clip_valuation(const Valuation& nu, const Tree& t, const VarSet& vars) {
    Valuation out;
    for (Var v : vars) {
        NodeSet kept;
        for (const NodeAddr& u : nu.get(v))
            if (t.contains(u)) kept.insert(u);
        out.assign(v, std::move(kept));
    }
    return out;
}

inline void tree_reductions(const Tree& t, std::vector<Tree>& out, const std::function<Tree(Tree)>& wrap) {
    if (!t.children.empty()) {
        Tree fewer = t;
        fewer.children.pop_back();
        out.push_back(wrap(std::move(fewer)));
    }
    for (unsigned i = 0; i < t.children.size(); ++i)
        tree_reductions(t.children[i], out, [&](Tree sub) {
            Tree copy = t;
            copy.children[i] = std::move(sub);
            return wrap(std::move(copy));
        });
}

} // namespace detail

/// Strictly smaller variants of a case: smaller formulas, trees with a
/// subtree removed or promoted to the root, valuations with one address
/// dropped.
inline std::vector<FuzzCase> shrink_candidates(const FuzzCase& c) {
    std::vector<FuzzCase> out;
    std::vector<Formula> formulas;
    detail::formula_reductions(c.formula, [](Formula g) { return g; }, formulas);
    for (Formula& g : formulas) {
        Valuation nu = detail::clip_valuation(c.nu, c.tree, g.free_vars());
        out.push_back({std::move(g), c.tree, std::move(nu)});
    }
    for (unsigned i = 0; i < c.tree.children.size(); ++i)
        out.push_back({c.formula, c.tree.children[i], restrict_valuation(c.nu, NodeAddr{}.child(i + 1))});
    std::vector<Tree> trees;
    detail::tree_reductions(c.tree, trees, [](Tree t) { return t; });
    for (Tree& t : trees) {
        Valuation nu = detail::clip_valuation(c.nu, t, c.formula.free_vars());
        out.push_back({c.formula, std::move(t), std::move(nu)});
    }
    for (const auto& [v, nodes] : c.nu.entries())
        for (const NodeAddr& u : nodes) {
            Valuation nu = c.nu;
            NodeSet fewer = nodes;
            fewer.erase(u);
            nu.assign(v, std::move(fewer));
            out.push_back({c.formula, c.tree, std::move(nu)});
        }
    return out;
}

/// Greedy minimization: repeatedly moves to the first smaller variant on
/// which `fails` still holds.
inline FuzzCase shrink(FuzzCase c, const std::function<bool(const FuzzCase&)>& fails, std::size_t max_rounds = 1000) {
    for (std::size_t round = 0; round < max_rounds; ++round) {
        bool moved = false;
        for (FuzzCase& candidate : shrink_candidates(c)) {
            if (fails(candidate)) {
                c = std::move(candidate);
                moved = true;
                break;
            }
        }
        if (!moved) break;
    }
    return c;
}

struct FuzzOptions {
    std::uint64_t seed = 42;
    std::size_t cases = 100;
    std::size_t max_nodes = 6;
    FormulaShape shape;
    Config config;
    std::vector<Suite> suites{Suite::lemma4, Suite::prop2, Suite::thm1, Suite::thm2};
    std::uint64_t budget = default_formula_budget;
    bool shrink = true;
};

struct SuiteTally {
    std::size_t passed = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;
};

struct Counterexample {
    Suite suite;
    std::size_t case_index;
    FuzzCase original;
    FuzzCase shrunk;
    std::string detail;
};

struct FuzzSummary {
    std::size_t cases = 0;
    std::map<Suite, SuiteTally> tallies;
    std::vector<Counterexample> counterexamples;

    std::size_t failures() const {
        std::size_t n = 0;
        for (const auto& [s, t] : tallies) n += t.failed;
        return n;
    }
};

/// Generates `cases` random (formula, tree, valuation) triples from the
/// seed and runs each selected suite on each. `on_case`, if set, sees
/// every case and its verdicts.
inline FuzzSummary run_fuzz(const FuzzOptions& options,
                            const std::function<void(std::size_t, const FuzzCase&, Suite, const Verdict&)>& on_case = {}) {
    Rng rng(options.seed);
    FuzzSummary summary;
    for (Suite s : options.suites) summary.tallies[s];
    for (std::size_t i = 0; i < options.cases; ++i) {
        const FuzzCase c = random_case(rng, options.shape, options.max_nodes, options.config);
        ++summary.cases;
        for (Suite s : options.suites) {
            Verdict v = run_suite(s, c, options.config, options.budget);
            if (on_case) on_case(i, c, s, v);
            SuiteTally& tally = summary.tallies[s];
            switch (v.kind) {
            case Verdict::pass: ++tally.passed; break;
            case Verdict::skipped: ++tally.skipped; break;
            case Verdict::fail: {
                ++tally.failed;
                FuzzCase small = c;
                if (options.shrink) {
                    small = shrink(c, [&](const FuzzCase& k) {
                        return run_suite(s, k, options.config, options.budget).kind == Verdict::fail;
                    });
                }
                summary.counterexamples.push_back({s, i, c, std::move(small), v.detail});
                break;
            }
            }
        }
    }
    return summary;
}

} // namespace msou
