#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "msou/decompose.hpp"
#include "msou/formula_io.hpp"
#include "msou/fuzz.hpp"
#include "msou/phtype.hpp"
#include "msou/tree_io.hpp"
#include "msou/typespace.hpp"

namespace msou {

using Json = nlohmann::ordered_json;

inline Json to_json(const OmegaTuple& tuple) {
    Json out = Json::array();
    out.push_back(print(tuple.root));
    for (const Formula& g : tuple.children) out.push_back(print(g));
    return out;
}

/// One array of formula texts per tuple: root formula first, then children.
inline Json to_json(const OmegaSet& omega) {
    Json out = Json::array();
    for (const OmegaTuple& tuple : omega.tuples) out.push_back(to_json(tuple));
    return out;
}

/// Letter -> sentence text.
inline Json sentences_json(const Relabeling& psi) {
    Json out = Json::object();
    for (const auto& [letter, sentence] : psi.sentences) out[std::string(letter.name())] = print(sentence);
    return out;
}

/// `t<index>` -> type text.
inline Json legend_json(const Relabeling& psi) {
    Json out = Json::object();
    for (std::size_t i = 0; i < psi.legend.size(); ++i) out["t" + std::to_string(i)] = print(psi.legend[i]);
    return out;
}

inline Json to_json(const TypeSpace& space) {
    Json reachable = Json::array();
    for (PhType t : space.reachable) reachable.push_back(print(t));
    Json truthy = Json::array();
    for (PhType t : space.truthy) truthy.push_back(print(t));
    return Json{{"formula", print(space.formula)}, {"reachable", reachable}, {"truthy", truthy}};
}

inline Json to_json(const Thm1Report& report) {
    Json out{{"lhs", report.lhs}, {"rhs", report.rhs}};
    if (report.witness) out["witness"] = to_json(*report.witness);
    return out;
}

inline Json to_json(const Thm2Report& report) {
    return Json{{"lhs", report.lhs}, {"rhs", report.rhs}, {"relabeled_tree", print(report.relabeled)}};
}

inline Json to_json(const FuzzCase& c) {
    return Json{{"formula", print(c.formula)}, {"tree", print(c.tree)}, {"valuation", print(c.nu)}};
}

inline Json to_json(const FuzzSummary& summary) {
    Json suites = Json::object();
    for (const auto& [suite, tally] : summary.tallies)
        suites[std::string(suite_name(suite))] =
            Json{{"passed", tally.passed}, {"failed", tally.failed}, {"skipped", tally.skipped}};
    Json counterexamples = Json::array();
    for (const Counterexample& ce : summary.counterexamples)
        counterexamples.push_back(Json{{"suite", std::string(suite_name(ce.suite))},
                                       {"case", ce.case_index},
                                       {"detail", ce.detail},
                                       {"original", to_json(ce.original)},
                                       {"shrunk", to_json(ce.shrunk)}});
    return Json{{"cases", summary.cases},
                {"failures", summary.failures()},
                {"suites", suites},
                {"counterexamples", counterexamples}};
}

} // namespace msou
