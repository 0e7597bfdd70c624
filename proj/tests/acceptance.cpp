// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "msou/compose.hpp"
#include "msou/corpus.hpp"
#include "msou/decompose.hpp"
#include "msou/formula_io.hpp"
#include "msou/oracle.hpp"
#include "msou/tree_io.hpp"
#include "msou/typespace.hpp"

using namespace msou;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
    bool pass = true;
    std::string summary;
    std::vector<std::string> problems;

    void fail(std::string what) {
        pass = false;
        if (problems.size() < 5) problems.push_back(std::move(what));
    }
};

std::string describe(const Formula& f, const Tree& t, const Valuation& nu) {
    std::string v = print(nu);
    for (char& c : v)
        if (c == '\n') c = ';';
    return print(f) + " on " + print(t) + " [" + v + "]";
}

struct Case {
    Formula formula;
    Tree tree;
    Valuation nu;
};

std::vector<Case> make_corpus(std::uint64_t seed, std::size_t n, const Config& config) {
    Rng rng(seed);
    FormulaShape shape;
    shape.max_qdepth = 2;
    std::vector<Case> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        Formula f = random_formula(rng, shape, config);
        Tree t = random_tree(rng, 6, config);
        Valuation nu = random_valuation(rng, t, f.free_vars());
        out.push_back({std::move(f), std::move(t), std::move(nu)});
    }
    return out;
}

bool unbounded_parts_empty(const Formula& f, PhType t) {
    switch (f.kind()) {
    case FormulaKind::conj: return unbounded_parts_empty(f.lhs(), t.lhs()) && unbounded_parts_empty(f.rhs(), t.rhs());
    case FormulaKind::negation: return unbounded_parts_empty(f.body(), t);
    case FormulaKind::exists:
    case FormulaKind::unbound:
        if (!t.unbounded_set().empty()) return false;
        for (PhType s : t.exists_set())
            if (!unbounded_parts_empty(f.body(), s)) return false;
        return true;
    default: return true;
    }
}

// Every formula over {X, Y} with at most `max_size` constructors, at most
// one quantifier and at most one free variable.
std::vector<Formula> enumerate_family(unsigned max_size, const Config& config) {
    const std::vector<Var> vars{Var{"X"}, Var{"Y"}};
    struct Entry {
        Formula f;
        unsigned quantifiers;
    };
    std::vector<std::vector<Entry>> by_size(max_size + 1);
    for (Label a : config.alphabet)
        for (Var x : vars) by_size[1].push_back({Formula::label_atom(a, x), 0});
    for (Var x : vars)
        for (Var y : vars) {
            by_size[1].push_back({Formula::subset(x, y), 0});
            for (unsigned i = 1; i <= config.rmax; ++i) by_size[1].push_back({Formula::child(i, x, y), 0});
        }
    for (unsigned n = 2; n <= max_size; ++n) {
        for (const Entry& e : by_size[n - 1]) {
            by_size[n].push_back({!e.f, e.quantifiers});
            if (e.quantifiers == 0)
                for (Var x : vars) {
                    by_size[n].push_back({Formula::exists(x, e.f), 1});
                    by_size[n].push_back({Formula::unbound(x, e.f), 1});
                }
        }
        for (unsigned i = 1; i + 1 < n; ++i)
            for (const Entry& l : by_size[i])
                for (const Entry& r : by_size[n - 1 - i])
                    if (l.quantifiers + r.quantifiers <= 1) by_size[n].push_back({l.f && r.f, l.quantifiers + r.quantifiers});
    }
    std::vector<Formula> out;
    for (const auto& level : by_size)
        for (const Entry& e : level)
            if (e.f.free_vars().size() <= 1) out.push_back(e.f);
    return out;
}

constexpr unsigned family_max_size = 4;

Outcome lemma4(const std::vector<Case>& corpus, const Config& config) {
    Outcome out;
    const auto start = Clock::now();
    Composer composer(config);
    std::size_t failures = 0;
    for (const Case& c : corpus) {
        try {
            const PhType direct = direct_type(c.formula, c.tree, c.nu, config.node_cap);
            const PhType folded = composer.bottom_up_type(c.formula, c.tree, c.nu);
            if (direct != folded) {
                ++failures;
                out.fail(describe(c.formula, c.tree, c.nu) + ": direct " + print(direct) + ", bottom-up " + print(folded));
            }
        } catch (const std::exception& e) {
            ++failures;
            out.fail(describe(c.formula, c.tree, c.nu) + ": " + e.what());
        }
    }
    const double secs = seconds_since(start);
    if (corpus.size() < 1000) out.fail("corpus has fewer than 1000 cases");
    if (secs >= 600) out.fail("runtime exceeds 10 minutes");
    std::size_t by_depth[3] = {0, 0, 0};
    for (const Case& c : corpus) ++by_depth[std::min(c.formula.quantifier_depth(), 2u)];
    std::ostringstream s;
    s << corpus.size() << " cases (quantifier depth 0/1/2: " << by_depth[0] << "/" << by_depth[1] << "/" << by_depth[2]
      << "), " << failures << " failures, " << secs << " s";
    out.summary = s.str();
    return out;
}

Outcome prop2(const std::vector<Case>& corpus, const Config& config) {
    Outcome out;
    std::size_t failures = 0;
    for (const Case& c : corpus) {
        try {
            const bool via_type = tv(c.formula, direct_type(c.formula, c.tree, c.nu, config.node_cap));
            if (via_type != eval(c.formula, c.tree, c.nu, config.node_cap)) {
                ++failures;
                out.fail(describe(c.formula, c.tree, c.nu));
            }
        } catch (const std::exception& e) {
            ++failures;
            out.fail(describe(c.formula, c.tree, c.nu) + ": " + e.what());
        }
    }
    out.summary = std::to_string(corpus.size()) + " cases, " + std::to_string(failures) + " failures";
    return out;
}

Outcome prop3(const std::vector<Formula>& family, const Config& config) {
    Outcome out;
    const std::vector<Tree> trees = all_trees_up_to(4, config);
    std::size_t checks = 0, failures = 0;
    for (const Formula& f : family) {
        try {
            Synthesizer synth(config);
            const std::vector<PhType>& reach = synth.space(f).reachable;
            std::vector<Formula> psis;
            for (PhType t : reach) psis.push_back(synth.psi(f, t));
            for (const Tree& t : trees) {
                Evaluator ev(t, config.node_cap);
                for (const Valuation& nu : all_valuations(t, f.free_vars())) {
                    const PhType direct = ev.direct_type(f, nu);
                    std::size_t hits = 0;
                    bool ok = true;
                    for (std::size_t i = 0; i < reach.size(); ++i) {
                        const bool holds = ev.eval(psis[i], nu);
                        hits += holds;
                        ok = ok && holds == (reach[i] == direct);
                        ++checks;
                    }
                    if (!ok || hits != 1) {
                        ++failures;
                        out.fail(describe(f, t, nu) + ": " + std::to_string(hits) + " type formulas hold");
                    }
                }
            }
        } catch (const std::exception& e) {
            ++failures;
            out.fail(print(f) + ": " + e.what());
        }
    }
    std::ostringstream s;
    s << family.size() << " formulas, " << trees.size() << " trees, " << checks << " checks, " << failures
      << " failures";
    out.summary = s.str();
    return out;
}

Outcome prop6(const std::vector<Formula>& family, const Config& config) {
    Outcome out;
    const std::vector<Tree> trees = all_trees_up_to(4, config);
    std::size_t checks = 0, failures = 0;
    for (const Formula& f : family) {
        try {
            Synthesizer synth(config);
            const std::vector<PhType>& reach = synth.space(f).reachable;
            std::vector<Formula> sentences;
            for (PhType t : reach) sentences.push_back(synth.psi_empty(f, t));
            for (const Tree& t : trees) {
                Evaluator ev(t, config.node_cap);
                const PhType direct = ev.direct_type(f, {});
                for (std::size_t i = 0; i < reach.size(); ++i) {
                    ++checks;
                    if (ev.eval(sentences[i], {}) != (reach[i] == direct)) {
                        ++failures;
                        out.fail(print(f) + " on " + print(t) + " for type " + print(reach[i]));
                    }
                }
            }
        } catch (const std::exception& e) {
            ++failures;
            out.fail(print(f) + ": " + e.what());
        }
    }
    std::ostringstream s;
    s << family.size() << " formulas, " << checks << " checks, " << failures << " failures";
    out.summary = s.str();
    return out;
}

bool tuple_holds(const OmegaTuple& tuple, const Tree& t, const Valuation& nu, unsigned cap) {
    if (tuple.arity() != t.children.size()) return false;
    if (!eval(tuple.root, root_tree(t), root_valuation(nu), cap)) return false;
    for (std::size_t i = 0; i < tuple.arity(); ++i) {
        const NodeAddr at = NodeAddr{}.child(static_cast<unsigned>(i + 1));
        if (!eval(tuple.children[i], subtree(t, at), restrict_valuation(nu, at), cap)) return false;
    }
    return true;
}

Outcome thm1(const std::vector<Case>& corpus, const Config& config) {
    Outcome out;
    std::size_t failures = 0, witnesses = 0, trips = 0, checked = 0;
    for (const Case& c : corpus) {
        try {
            Synthesizer synth(config);
            const OmegaSet omega = build_omega(c.formula, synth);
            bool fv_ok = true;
            for (const OmegaTuple& tuple : omega.tuples) {
                fv_ok = fv_ok && is_subset(tuple.root.free_vars(), c.formula.free_vars());
                for (const Formula& g : tuple.children) fv_ok = fv_ok && is_subset(g.free_vars(), c.formula.free_vars());
            }
            const Thm1Report report = check_thm1(c.formula, c.tree, c.nu, omega, config.node_cap);
            ++checked;
            bool ok = fv_ok && report.lhs == report.rhs && report.witness.has_value() == report.rhs;
            if (report.witness) {
                ++witnesses;
                ok = ok && tuple_holds(*report.witness, c.tree, c.nu, config.node_cap);
            }
            if (!ok) {
                ++failures;
                out.fail(describe(c.formula, c.tree, c.nu));
            }
        } catch (const ResourceError&) {
            ++trips;
        } catch (const std::exception& e) {
            ++failures;
            out.fail(describe(c.formula, c.tree, c.nu) + ": " + e.what());
        }
    }
    if (checked - failures < 200) out.fail("fewer than 200 cases completed");
    std::ostringstream s;
    s << corpus.size() << " cases, " << checked << " checked, " << witnesses << " witnesses re-verified, " << failures
      << " failures, " << trips << " resource-cap trips";
    out.summary = s.str();
    return out;
}

Outcome thm2(const std::vector<Case>& corpus, const Config& config) {
    Outcome out;
    std::size_t failures = 0, trips = 0, shallow_trips = 0, checked = 0;
    double slowest = 0;
    for (const Case& c : corpus) {
        const auto start = Clock::now();
        try {
            Synthesizer synth(config);
            const Decomposition d = decompose(c.formula, synth);
            const Thm2Report report = check_thm2(c.formula, c.tree, c.nu, d, config.node_cap);
            ++checked;
            if (!is_mso(d.mso) || !is_subset(d.mso.free_vars(), c.formula.free_vars()) || report.lhs != report.rhs) {
                ++failures;
                out.fail(describe(c.formula, c.tree, c.nu));
            }
        } catch (const ResourceError&) {
            ++trips;
            if (c.formula.quantifier_depth() <= 1) ++shallow_trips;
        } catch (const NotUniqueError& e) {
            ++failures;
            out.fail(describe(c.formula, c.tree, c.nu) + ": " + e.what());
        } catch (const std::exception& e) {
            ++failures;
            out.fail(describe(c.formula, c.tree, c.nu) + ": " + e.what());
        }
        slowest = std::max(slowest, seconds_since(start));
    }
    if (checked - failures < 200) out.fail("fewer than 200 cases completed");
    std::ostringstream s;
    s << corpus.size() << " cases, " << checked << " checked, " << failures << " failures, " << trips
      << " guard trips (" << shallow_trips << " at quantifier depth <= 1), slowest " << slowest << " s";
    out.summary = s.str();
    return out;
}

Outcome unbounded(const std::vector<Case>& corpus, const Config& config) {
    Outcome out;
    std::vector<Formula> heads;
    for (const Case& c : corpus)
        if (c.formula.kind() == FormulaKind::unbound) heads.push_back(c.formula);
    // Wrap shallow corpus formulas as well so the suite is not tiny.
    for (const Case& c : corpus)
        if (c.formula.quantifier_depth() <= 1) heads.push_back(Formula::unbound(Var{"X"}, c.formula));
    Rng rng(7);
    const std::vector<Tree> trees = all_trees_up_to(4, config);
    Composer composer(config);
    std::size_t checks = 0, failures = 0;
    for (const Formula& f : heads) {
        try {
            std::vector<std::pair<Tree, Valuation>> samples;
            for (const Tree& t : trees) samples.emplace_back(t, random_valuation(rng, t, f.free_vars()));
            for (int k = 0; k < 5; ++k) {
                Tree t = random_tree(rng, 6, config);
                Valuation nu = random_valuation(rng, t, f.free_vars());
                samples.emplace_back(std::move(t), std::move(nu));
            }
            for (const auto& [t, nu] : samples) {
                ++checks;
                if (eval(f, t, nu, config.node_cap) ||
                    !unbounded_parts_empty(f, composer.bottom_up_type(f, t, nu))) {
                    ++failures;
                    out.fail(describe(f, t, nu));
                }
            }
        } catch (const std::exception& e) {
            ++failures;
            out.fail(print(f) + ": exception " + e.what());
        }
    }
    std::ostringstream s;
    s << heads.size() << " U-headed formulas, " << checks << " checks, " << failures << " failures";
    out.summary = s.str();
    return out;
}

Outcome coherence(const Config& config) {
    Outcome out;
    Rng rng(31337);
    Composer composer(config);
    std::size_t cases = 0, with_holes = 0, failures = 0;
    while (with_holes < 300) {
        ++cases;
        const Formula f = random_formula(rng, FormulaShape{}, config);
        const PlugCase pc = random_plug_case(rng, 6, 3, 2, config);
        const Valuation nu = random_valuation(rng, pc.plugged, f.free_vars());
        const auto holes = pc.context.holes();
        with_holes += !holes.empty();
        try {
            std::map<unsigned, PhType> assumed;
            for (const auto& [id, at] : holes)
                assumed.emplace(id, direct_type(f, pc.parts.at(id), restrict_valuation(nu, at), config.node_cap));
            const PhType with_assumptions = composer.context_type(f, pc.context, outside_holes(nu, pc.context), assumed);
            if (with_assumptions != direct_type(f, pc.plugged, nu, config.node_cap)) {
                ++failures;
                out.fail(describe(f, pc.plugged, nu) + " cut as " + print(pc.context));
            }
        } catch (const std::exception& e) {
            ++failures;
            out.fail(describe(f, pc.plugged, nu) + ": " + e.what());
        }
    }

    const Formula u = parse_formula("U X. b(X)");
    const PhType arg[] = {parse_type(u, "q({tt},{tt})")};
    const PhType got = comp(u, Label{"a"}, 1, {}, arg, config);
    const bool example = got == parse_type(u, "q({tt,ff},{tt,ff})");
    if (!example) out.fail("U example gave " + print(got));
    std::ostringstream s;
    s << cases << " cases (" << with_holes << " with holes), " << failures << " failures; U example "
      << (example ? "exact" : "wrong");
    out.summary = s.str();
    return out;
}

Outcome round_trips(const std::vector<Case>& corpus, const Config& config) {
    Outcome out;
    Rng rng(99);
    FormulaShape shape;
    shape.max_size = 20;
    shape.max_qdepth = 3;
    std::size_t formulas = 0, failures = 0;
    auto check_formula = [&](const Formula& f) {
        ++formulas;
        try {
            if (!(parse_formula(print(f)) == f)) {
                ++failures;
                out.fail("formula " + print(f));
            }
        } catch (const std::exception& e) {
            ++failures;
            out.fail("formula " + print(f) + ": " + e.what());
        }
    };
    for (int i = 0; i < 1000; ++i) check_formula(random_formula(rng, shape, config));
    for (const Case& c : corpus) check_formula(c.formula);

    std::size_t structures = 0;
    auto check_tree = [&](const Tree& t, const Valuation& nu) {
        structures += 2;
        try {
            if (!(parse_tree(print(t)) == t)) {
                ++failures;
                out.fail("tree " + print(t));
            }
            if (!(parse_valuation(print(nu)) == nu)) {
                ++failures;
                out.fail("valuation on " + print(t));
            }
        } catch (const std::exception& e) {
            ++failures;
            out.fail(print(t) + ": " + e.what());
        }
    };
    for (const Case& c : corpus) check_tree(c.tree, c.nu);
    for (const Tree& t : all_trees_up_to(4, config))
        for (const Valuation& nu : all_valuations(t, make_varset({Var{"X"}}))) check_tree(t, nu);
    std::ostringstream s;
    s << formulas << " formulas, " << structures << " trees and valuations, " << failures << " failures";
    out.summary = s.str();
    return out;
}

} // namespace

int main() {
    const Config config;
    const std::vector<Case> corpus = make_corpus(20261015, 1000, config);
    const std::vector<Formula> family = enumerate_family(family_max_size, config);

    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 composition matches direct typing", [&] { return lemma4(corpus, config); }},
        {"2 truth value of the type matches evaluation", [&] { return prop2(corpus, config); }},
        {"3 type formulas characterize types", [&] { return prop3(family, config); }},
        {"4 type sentences under the empty valuation", [&] { return prop6(family, config); }},
        {"5 tuple decomposition", [&] { return thm1(corpus, config); }},
        {"6 relabeling and MSO form", [&] { return thm2(corpus, config); }},
        {"7 unbounding quantifier on finite trees", [&] { return unbounded(corpus, config); }},
        {"8 context coherence", [&] { return coherence(config); }},
        {"9 text round-trips", [&] { return round_trips(corpus, config); }},
    };

    int failed = 0;
    for (const auto& [name, run] : criteria) {
        const auto start = Clock::now();
        const Outcome o = run();
        std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << ": " << o.summary << " ["
                  << seconds_since(start) << " s]" << std::endl;
        for (const std::string& p : o.problems) std::cout << "      " << p << '\n';
        failed += !o.pass;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
    return failed == 0 ? 0 : 1;
}
