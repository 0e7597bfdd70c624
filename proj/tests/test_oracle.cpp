#include <cstdlib>
#include <functional>

#include <catch_amalgamated.hpp>

#include "msou/corpus.hpp"
#include "msou/formula_io.hpp"
#include "msou/oracle.hpp"
#include "msou/tree_io.hpp"

using namespace msou;

namespace {

const Var X{"X"}, Y{"Y"};

Valuation val(std::string_view text) { return parse_valuation(text); }

PhType q(std::string_view formula, std::string_view type) { return parse_type(parse_formula(formula), type); }

} // namespace

TEST_CASE("evaluation of atoms", "[oracle]") {
    CHECK(eval(parse_formula("b(X)"), parse_tree("b"), val("X = {eps}")));
    CHECK(eval(parse_formula("b(X)"), parse_tree("a"), val("")));
    CHECK_FALSE(eval(parse_formula("b(X)"), parse_tree("a"), val("X = {eps}")));
    CHECK(eval(parse_formula("child1(X,Y)"), parse_tree("a(b)"), val("X = {eps}\nY = {1}")));
    CHECK_FALSE(eval(parse_formula("child2(X,Y)"), parse_tree("a(b)"), val("X = {eps}\nY = {1}")));
    CHECK_FALSE(eval(parse_formula("child1(X,Y)"), parse_tree("a(b,b)"), val("X = {eps}\nY = {1, 2}")));
    CHECK(eval(parse_formula("child2(X,Y)"), parse_tree("a(b,b(a))"), val("X = {eps}\nY = {2}")));
    CHECK(eval(parse_formula("X sub Y"), parse_tree("a(b)"), val("X = {1}\nY = {eps, 1}")));
    CHECK_FALSE(eval(parse_formula("X sub Y"), parse_tree("a(b)"), val("X = {eps}\nY = {1}")));
    CHECK_THROWS_AS(eval(parse_formula("b(X)"), parse_tree("a"), val("X = {1}")), DomainError);
}

TEST_CASE("child indices beyond the arity never hold", "[oracle]") {
    const Formula f = parse_formula("ex X. ex Y. child3(X,Y)");
    const Config config;
    for (const Tree& t : all_trees_up_to(4, config)) CHECK_FALSE(eval(f, t));
}

TEST_CASE("U is false on finite trees", "[oracle]") {
    Rng rng(9);
    const Config config;
    for (const char* text : {"U X. b(X)", "U X. X sub X", "U X. !(X sub Y)", "!U X. a(X)"}) {
        const Formula f = parse_formula(text);
        for (int i = 0; i < 50; ++i) {
            const Tree t = random_tree(rng, 6, config);
            const Valuation nu = random_valuation(rng, t, f.free_vars());
            CHECK(eval(f, t, nu) == (text[0] == '!'));
        }
    }
}

TEST_CASE("direct types", "[oracle]") {
    const Formula child = parse_formula("child1(X,Y)");
    CHECK(direct_type(child, parse_tree("a"), val("Y = {eps}")) == PhType::child4(Child4::root));
    CHECK(direct_type(child, parse_tree("a"), val("")) == PhType::child4(Child4::empty));
    CHECK(direct_type(child, parse_tree("a(a)"), val("X = {eps}\nY = {1}")) == PhType::child4(Child4::tt));
    CHECK(direct_type(child, parse_tree("a(a)"), val("X = {1}")) == PhType::child4(Child4::ff));

    const Formula ex = parse_formula("ex X. b(X)");
    CHECK(direct_type(ex, parse_tree("c")) == q("ex X. b(X)", "q({ff,tt},{})"));
    CHECK(direct_type(ex, parse_tree("c"), val("X = {eps}")) == q("ex X. b(X)", "q({ff,tt},{})"));
    CHECK(direct_type(ex, parse_tree("b")) == q("ex X. b(X)", "q({tt},{})"));
}

TEST_CASE("quantifier types have an empty unbounded part", "[oracle][property]") {
    Rng rng(21);
    const Config config;
    std::function<void(const Formula&, PhType)> check = [&](const Formula& f, PhType t) {
        switch (f.kind()) {
        case FormulaKind::conj:
            check(f.lhs(), t.lhs());
            check(f.rhs(), t.rhs());
            return;
        case FormulaKind::negation: check(f.body(), t); return;
        case FormulaKind::exists:
        case FormulaKind::unbound:
            CHECK(t.unbounded_set().empty());
            CHECK_FALSE(t.exists_set().empty());
            for (PhType s : t.exists_set()) check(f.body(), s);
            return;
        default: return;
        }
    };
    for (int i = 0; i < 300; ++i) {
        const Formula f = random_formula(rng, FormulaShape{}, config);
        const Tree t = random_tree(rng, 5, config);
        const PhType ty = direct_type(f, t, random_valuation(rng, t, f.free_vars()));
        CHECK(has_shape(f, ty));
        check(f, ty);
    }
}

TEST_CASE("boolean connectives", "[oracle][property]") {
    Rng rng(33);
    const Config config;
    for (int i = 0; i < 300; ++i) {
        const Formula f = random_formula(rng, FormulaShape{}, config);
        const Formula g = random_formula(rng, FormulaShape{}, config);
        const Tree t = random_tree(rng, 5, config);
        const Valuation nu = random_valuation(rng, t, set_union(f.free_vars(), g.free_vars()));
        Evaluator ev(t);
        CHECK(ev.eval(!!f, nu) == ev.eval(f, nu));
        CHECK(ev.eval(f && g, nu) == (ev.eval(f, nu) && ev.eval(g, nu)));
    }
}

TEST_CASE("existential enumeration visits every subset once", "[oracle]") {
    const Tree t = parse_tree("a(b,a(b))");
    Evaluator ev(t);
    CHECK_FALSE(ev.eval(parse_formula("ex X. !(X sub X)"), {}));
    CHECK(ev.stats().candidate_sets == (1u << t.size()));
}

TEST_CASE("enumeration cap", "[oracle]") {
    CHECK_NOTHROW(Evaluator(parse_tree("a"), 1));
    const Tree t = parse_tree("a(b,a(b,b))");
    CHECK_THROWS_AS(Evaluator(t, 4), ResourceError);
    CHECK_THROWS_AS(eval(parse_formula("b(X)"), t, {}, 3), ResourceError);

    ::setenv("MSOU_NODE_CAP", "5", 1);
    CHECK(Config::default_node_cap() == 5);
    CHECK(Config{}.node_cap == 5);
    ::setenv("MSOU_NODE_CAP", "1000", 1);
    CHECK(Config::default_node_cap() == 62);
    ::unsetenv("MSOU_NODE_CAP");
    CHECK(Config::default_node_cap() == 16);
}

TEST_CASE("pruned search agrees with plain enumeration", "[oracle][property]") {
    Rng rng(77);
    const Config config;
    FormulaShape shape;
    shape.max_size = 14;
    shape.max_qdepth = 3;
    for (int i = 0; i < 1500; ++i) {
        const Formula f = random_formula(rng, shape, config);
        const Tree t = random_tree(rng, 6, config);
        const Valuation nu = random_valuation(rng, t, f.free_vars());
        Evaluator plain(t), searching(t);
        INFO(print(f) << " on " << print(t));
        REQUIRE(searching.eval_search(f, nu) == plain.eval(f, nu));
    }
}

TEST_CASE("pruned search on existential blocks with shadowing", "[oracle]") {
    const Config config;
    for (const char* text : {"ex X. ex X. b(X) & sing(X)", "ex X. ex Y. child1(X,Y) & b(Y) & sing(X)",
                             "ex X. ex Y. (X sub Y & !(Y sub X)) & a(Y)", "ex X. ex Y. ex Z. child1(X,Y) & child2(X,Z)"}) {
        const Formula f = parse_formula(text);
        for (const Tree& t : all_trees_up_to(4, config)) {
            Evaluator plain(t), searching(t);
            CHECK(searching.eval_search(f, {}) == plain.eval(f, {}));
        }
    }
}
