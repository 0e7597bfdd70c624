#include <catch_amalgamated.hpp>

#include "msou/corpus.hpp"
#include "msou/decompose.hpp"
#include "msou/formula_io.hpp"
#include "msou/oracle.hpp"
#include "msou/tree_io.hpp"

using namespace msou;

namespace {

const Var X{"X"}, Y{"Y"};
const Label a{"a"}, b{"b"}, p{"p"}, q{"q"};

Config with(std::vector<Label> alphabet, unsigned rmax) {
    Config c;
    c.alphabet = std::move(alphabet);
    c.rmax = rmax;
    return c;
}

// Re-evaluates a tuple against (T, nu) without going through TupleMatcher.
bool tuple_holds(const OmegaTuple& tuple, const Tree& t, const Valuation& nu) {
    if (tuple.arity() != t.children.size()) return false;
    if (!eval(tuple.root, root_tree(t), root_valuation(nu))) return false;
    for (std::size_t i = 0; i < tuple.arity(); ++i) {
        const NodeAddr at = NodeAddr{}.child(static_cast<unsigned>(i + 1));
        if (!eval(tuple.children[i], subtree(t, at), restrict_valuation(nu, at))) return false;
    }
    return true;
}

} // namespace

TEST_CASE("root formulas", "[decompose]") {
    CHECK(eta(b, make_varset({X}), make_varset({X})) == parse_formula("all Y. b(Y) & (all Y. Y sub X)"));
    CHECK(eval(eta(a, {}, make_varset({X})), parse_tree("a"), parse_valuation("")));
    CHECK_FALSE(eval(eta(a, {}, make_varset({X})), parse_tree("a"), parse_valuation("X = {eps}")));
    CHECK_THROWS_AS(eta(a, make_varset({Y}), make_varset({X})), std::invalid_argument);

    // On a single node: label is a and exactly R contains the root.
    const VarSet fv = make_varset({X, Y});
    for (Label letter : {a, b})
        for (const VarSet& R : subsets_of(fv)) {
            const Formula f = eta(letter, R, fv);
            CHECK(is_subset(f.free_vars(), fv));
            for (Label node : {a, b})
                for (const Valuation& nu : all_valuations(Tree(node), fv)) {
                    VarSet at_root;
                    for (Var v : fv)
                        if (!nu.get(v).empty()) at_root.push_back(v);
                    CHECK(eval(f, Tree(node), nu) == (node == letter && at_root == R));
                }
        }
}

TEST_CASE("tuple sets of an atom", "[decompose]") {
    const Formula bx = parse_formula("b(X)");
    const OmegaSet only_b = build_omega(bx, with({b}, 0));
    REQUIRE(only_b.tuples.size() == 2);
    CHECK(only_b.tuples[0] == OmegaTuple{eta(b, {}, make_varset({X})), {}});
    CHECK(only_b.tuples[1] == OmegaTuple{eta(b, make_varset({X}), make_varset({X})), {}});

    const OmegaSet only_a = build_omega(bx, with({a}, 0));
    REQUIRE(only_a.tuples.size() == 1);
    CHECK(only_a.tuples[0] == OmegaTuple{eta(a, {}, make_varset({X})), {}});

    for (const OmegaTuple& tuple : build_omega(bx).tuples) {
        CHECK(is_subset(tuple.root.free_vars(), make_varset({X})));
        for (const Formula& c : tuple.children) CHECK(is_subset(c.free_vars(), make_varset({X})));
    }
}

TEST_CASE("tuple decomposition on leaves", "[decompose]") {
    const Formula bx = parse_formula("b(X)");
    const OmegaSet omega = build_omega(bx);
    const Thm1Report yes = check_thm1(bx, parse_tree("b"), parse_valuation("X = {eps}"), omega);
    CHECK(yes.lhs);
    CHECK(yes.rhs);
    REQUIRE(yes.witness);
    CHECK(*yes.witness == OmegaTuple{eta(b, make_varset({X}), make_varset({X})), {}});
    const Thm1Report no = check_thm1(bx, parse_tree("a"), parse_valuation("X = {eps}"), omega);
    CHECK_FALSE(no.lhs);
    CHECK_FALSE(no.rhs);
    CHECK_FALSE(no.witness);
}

TEST_CASE("tuple decomposition agrees with evaluation", "[decompose][property]") {
    Rng rng(606);
    const Config config;
    Synthesizer synth(config);
    for (int i = 0; i < 150; ++i) {
        const Formula f = random_formula(rng, FormulaShape{}, config);
        const OmegaSet omega = build_omega(f, synth);
        for (const OmegaTuple& tuple : omega.tuples) {
            CHECK(is_subset(tuple.root.free_vars(), f.free_vars()));
            for (const Formula& c : tuple.children) CHECK(is_subset(c.free_vars(), f.free_vars()));
        }
        const Tree t = random_tree(rng, 6, config);
        const Valuation nu = random_valuation(rng, t, f.free_vars());
        const Thm1Report report = check_thm1(f, t, nu, omega);
        INFO(print(f) << " on " << print(t));
        CHECK(report.lhs == report.rhs);
        CHECK(report.witness.has_value() == report.rhs);
        if (report.witness) CHECK(tuple_holds(*report.witness, t, nu));
    }
}

TEST_CASE("relabeling sentences", "[decompose]") {
    const Relabeling psi = build_relabeling(parse_formula("b(X)"));
    CHECK(psi.sentences.size() == 4);
    CHECK(psi.legend == std::vector<PhType>{ff_type, tt_type});
    for (const auto& [letter, sentence] : psi.sentences) CHECK(sentence.free_vars().empty());
    CHECK(psi.sentences.count(type_letter(a, 1)));
    CHECK(type_letter(b, 0) == Label{"b#t0"});

    for (const Tree& t : all_trees_up_to(3, Config{}))
        for (Label letter : {a, b})
            for (unsigned rmax : {0u, 2u})
                if (rmax > 0 || t.size() == 1) CHECK(eval(root_labeled(letter, rmax), t) == (t.label == letter));
}

TEST_CASE("applying a relabeling", "[decompose]") {
    Relabeling psi;
    psi.sentences.emplace(p, verum());
    psi.sentences.emplace(q, falsum());
    CHECK(apply_relabeling(psi, parse_tree("a(b)")) == parse_tree("p(p)"));

    psi.sentences.at(q) = verum();
    try {
        apply_relabeling(psi, parse_tree("a(b)"));
        FAIL("expected a uniqueness error");
    } catch (const NotUniqueError& e) {
        CHECK(e.address() == "eps");
        CHECK(e.matches() == 2);
    }
    psi.sentences.at(p) = falsum();
    psi.sentences.at(q) = falsum();
    CHECK_THROWS_AS(apply_relabeling(psi, parse_tree("a")), NotUniqueError);
}

TEST_CASE("relabeled letters name the subtree types", "[decompose][property]") {
    Rng rng(71);
    const Config config;
    FormulaShape shape;
    shape.max_qdepth = 1;
    shape.max_size = 8;
    for (int i = 0; i < 30; ++i) {
        const Formula f = random_formula(rng, shape, config);
        Synthesizer synth(config);
        const Relabeling psi = build_relabeling(f, synth);
        for (int k = 0; k < 4; ++k) {
            const Tree t = random_tree(rng, 5, config);
            const Tree relabeled = apply_relabeling(psi, t);
            for (const NodeAddr& u : t.addresses()) {
                const Tree sub = subtree(t, u);
                const long index = synth.space(f).index_of(direct_type(f, sub));
                REQUIRE(index >= 0);
                CHECK(relabeled.find(u)->label == type_letter(sub.label, static_cast<std::size_t>(index)));
            }
        }
    }
}

TEST_CASE("MSO form of a formula", "[decompose]") {
    const Formula f = parse_formula("ex X. b(X) & sing(X)");
    Synthesizer synth;
    const Decomposition d = decompose(f, synth);
    CHECK(is_mso(d.mso));
    CHECK(d.mso.free_vars().empty());

    const Thm2Report yes = check_thm2(f, parse_tree("a(b)"), {}, d);
    CHECK(yes.lhs);
    CHECK(yes.rhs);
    const Thm2Report no = check_thm2(f, parse_tree("a(a)"), {}, d);
    CHECK_FALSE(no.lhs);
    CHECK_FALSE(no.rhs);
    CHECK(no.relabeled.size() == 2);

    const Formula open = parse_formula("U X. X sub Y");
    CHECK(is_mso(build_phi_mso(open)));
    CHECK(is_subset(build_phi_mso(open).free_vars(), make_varset({Y})));
    CHECK_THROWS_AS(build_phi_mso(f, Config{}, 100), ResourceError);
}

TEST_CASE("MSO form agrees with evaluation", "[decompose][property]") {
    Rng rng(2718);
    const Config config;
    FormulaShape shape;
    shape.max_qdepth = 1;
    shape.max_size = 7;
    int checked = 0;
    for (int i = 0; i < 40; ++i) {
        const Formula f = random_formula(rng, shape, config);
        Synthesizer synth(config);
        std::optional<Decomposition> d;
        try {
            d = decompose(f, synth);
        } catch (const ResourceError&) {
            continue;
        }
        CHECK(is_mso(d->mso));
        CHECK(is_subset(d->mso.free_vars(), f.free_vars()));
        for (int k = 0; k < 3; ++k) {
            const Tree t = random_tree(rng, 5, config);
            const Valuation nu = random_valuation(rng, t, f.free_vars());
            const Thm2Report report = check_thm2(f, t, nu, *d);
            INFO(print(f) << " on " << print(t));
            CHECK(report.lhs == report.rhs);
            ++checked;
        }
    }
    CHECK(checked >= 90);
}
