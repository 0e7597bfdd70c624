// Decomposes a formula into relabeling sentences plus an MSO formula and
// checks both sides on a few trees.

#include <iostream>

#include "msou/decompose.hpp"
#include "msou/formula_io.hpp"
#include "msou/tree_io.hpp"

int main() {
    using namespace msou;
    const Config config;
    const Formula f = parse_formula("ex X. b(X) & sing(X)");

    Synthesizer synth(config);
    const Decomposition d = decompose(f, synth);
    std::cout << "formula: " << print(f) << '\n';
    std::cout << "reachable types: " << d.relabeling.legend.size() << '\n';
    for (std::size_t i = 0; i < d.relabeling.legend.size(); ++i)
        std::cout << "  t" << i << " = " << print(d.relabeling.legend[i]) << '\n';
    std::cout << "MSO formula size: " << d.mso.size() << " nodes\n";

    for (const char* text : {"a", "b", "a(b)", "a(a,a(a))", "b(a,b(a))"}) {
        const Tree t = parse_tree(text);
        const Thm2Report report = check_thm2(f, t, {}, d);
        std::cout << text << " -> " << print(report.relabeled) << "  direct=" << report.lhs
                  << " mso=" << report.rhs << '\n';
    }
}
