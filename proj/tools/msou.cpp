// msou: command-line front end for formulas, types and decompositions.
//
// Every command prints one JSON document on stdout. Exit codes:
//   0  holds / pass      1  does not hold
//   2  input or resource error      3  property violation

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "msou/compose.hpp"
#include "msou/decompose.hpp"
#include "msou/formula_io.hpp"
#include "msou/fuzz.hpp"
#include "msou/json.hpp"
#include "msou/oracle.hpp"
#include "msou/tree_io.hpp"
#include "msou/typespace.hpp"

namespace {

using namespace msou;

enum Exit : int { holds = 0, does_not_hold = 1, input_error = 2, violation = 3 };

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

struct Inputs {
    std::string formula_path;
    std::string tree_path;
    std::string valuation_path;
};

struct Loaded {
    Formula formula;
    Tree tree;
    Valuation nu;
};

class Cli {
public:
    Cli() : app_("Compositional model checking of MSO+U on finite trees") {
        app_.require_subcommand(1);
        app_.option_defaults()->always_capture_default();
        app_.add_option("--alphabet", alphabet_, "Comma-separated labels")->delimiter(',');
        app_.add_option("--rmax", rmax_, "Maximal arity");
        add_eval();
        add_type();
        add_fuzz();
        add_typespace();
        add_omega();
        add_check_thm1();
        add_decompose();
        add_relabel();
        add_check_thm2();
        add_comp_check();
    }

    int run(int argc, char** argv) {
        try {
            app_.parse(argc, argv);
        } catch (const CLI::CallForHelp& e) {
            return app_.exit(e);
        } catch (const CLI::ParseError& e) {
            app_.exit(e);
            return input_error;
        }
        try {
            return command_();
        } catch (const NotUniqueError& e) {
            std::cerr << "error: " << e.what() << '\n';
            return violation;
        } catch (const std::exception& e) {
            std::cerr << "error: " << e.what() << '\n';
            return input_error;
        }
    }

private:
    Config config() const {
        Config c;
        std::vector<Label> labels;
        for (const std::string& a : alphabet_) labels.emplace_back(a);
        if (labels.empty()) throw ConfigError("alphabet must be nonempty");
        c.alphabet = std::move(labels);
        c.rmax = rmax_;
        return c;
    }

    static void add_inputs(CLI::App* cmd, Inputs& in, bool with_tree) {
        cmd->add_option("formula", in.formula_path, "Formula file")->required();
        if (with_tree) {
            cmd->add_option("tree", in.tree_path, "Tree file")->required();
            cmd->add_option("valuation", in.valuation_path, "Valuation file");
        }
    }

    Loaded load(const Inputs& in, const Config& c) const {
        Loaded out{parse_formula(read_file(in.formula_path)), Tree{}, Valuation{}};
        if (!in.tree_path.empty()) {
            out.tree = parse_tree(read_file(in.tree_path));
            check_conforms(out.tree, c);
            if (!in.valuation_path.empty()) out.nu = parse_valuation(read_file(in.valuation_path));
            out.nu.check_in(out.tree);
        }
        return out;
    }

    static void emit(const Json& doc) { std::cout << doc.dump() << '\n'; }

    void add_eval() {
        CLI::App* cmd = app_.add_subcommand("eval", "Decide T, nu |= formula");
        add_inputs(cmd, inputs_, true);
        cmd->callback([this] {
            command_ = [this] {
                const Config c = config();
                const Loaded in = load(inputs_, c);
                const bool result = eval(in.formula, in.tree, in.nu, c.node_cap);
                emit(Json{{"holds", result}});
                return result ? holds : does_not_hold;
            };
        });
    }

    void add_type() {
        CLI::App* cmd = app_.add_subcommand("type", "Type of a tree under a valuation");
        add_inputs(cmd, inputs_, true);
        cmd->add_option("--method", method_, "direct or comp")->check(CLI::IsMember({"direct", "comp"}));
        cmd->add_flag("--check", check_, "Compute with both methods and compare");
        cmd->callback([this] {
            command_ = [this] {
                const Config c = config();
                const Loaded in = load(inputs_, c);
                auto by = [&](const std::string& m) {
                    return m == "direct" ? direct_type(in.formula, in.tree, in.nu, c.node_cap)
                                         : bottom_up_type(in.formula, in.tree, in.nu, c);
                };
                const PhType t = by(method_);
                Json doc{{"type", print(t)}, {"tv", tv(in.formula, t)}};
                if (check_) {
                    const PhType other = by(method_ == "direct" ? "comp" : "direct");
                    doc["agree"] = other == t;
                    emit(doc);
                    if (other != t) {
                        std::cerr << "mismatch: other method gives " << print(other) << '\n';
                        return violation;
                    }
                    return holds;
                }
                emit(doc);
                return holds;
            };
        });
    }

    void add_fuzz() {
        CLI::App* cmd = app_.add_subcommand("fuzz", "Random differential testing of all properties");
        cmd->add_option("--seed", fuzz_.seed, "Random seed");
        cmd->add_option("--cases", fuzz_.cases, "Number of cases");
        cmd->add_option("--max-nodes", fuzz_.max_nodes, "Maximal tree size")->check(CLI::PositiveNumber);
        cmd->add_option("--max-qdepth", fuzz_.shape.max_qdepth, "Maximal quantifier depth");
        cmd->add_option("--max-size", fuzz_.shape.max_size, "Maximal formula size")->check(CLI::PositiveNumber);
        cmd->add_option("--suites", suites_, "Subset of lemma4,prop2,thm1,thm2")->delimiter(',');
        cmd->add_flag("--no-shrink", no_shrink_, "Report counterexamples unminimized");
        cmd->callback([this] {
            command_ = [this] {
                FuzzOptions options = fuzz_;
                options.config = config();
                options.shrink = !no_shrink_;
                if (options.max_nodes > options.config.node_cap)
                    throw ResourceError("--max-nodes exceeds the enumeration cap");
                if (!suites_.empty()) {
                    options.suites.clear();
                    for (const std::string& s : suites_) {
                        if (s == "lemma4") options.suites.push_back(Suite::lemma4);
                        else if (s == "prop2") options.suites.push_back(Suite::prop2);
                        else if (s == "thm1") options.suites.push_back(Suite::thm1);
                        else if (s == "thm2") options.suites.push_back(Suite::thm2);
                        else throw ConfigError("unknown suite " + s);
                    }
                }
                const FuzzSummary summary = run_fuzz(options);
                Json doc = to_json(summary);
                doc["seed"] = options.seed;
                emit(doc);
                return summary.failures() == 0 ? holds : violation;
            };
        });
    }

    void add_typespace() {
        CLI::App* cmd = app_.add_subcommand("typespace", "Reachable types of a formula");
        add_inputs(cmd, inputs_, false);
        cmd->add_option("--max-states", max_states_, "Cap on the number of types");
        cmd->callback([this] {
            command_ = [this] {
                const Config c = config();
                const Loaded in = load(inputs_, c);
                const TypeSpace space = reachable_types(in.formula, c, max_states_);
                Json doc = to_json(space);
                try {
                    doc["potential_size"] = potential_size(in.formula).str();
                } catch (const ResourceError&) {
                    doc["potential_size"] = nullptr;
                }
                emit(doc);
                return holds;
            };
        });
    }

    void add_omega() {
        CLI::App* cmd = app_.add_subcommand("omega", "Root/children decomposition tuples");
        add_inputs(cmd, inputs_, false);
        cmd->callback([this] {
            command_ = [this] {
                const Config c = config();
                const Loaded in = load(inputs_, c);
                emit(to_json(build_omega(in.formula, c)));
                return holds;
            };
        });
    }

    void add_check_thm1() {
        CLI::App* cmd = app_.add_subcommand("check-thm1", "Compare a formula with its tuple decomposition");
        add_inputs(cmd, inputs_, true);
        cmd->callback([this] {
            command_ = [this] {
                const Config c = config();
                const Loaded in = load(inputs_, c);
                const OmegaSet omega = build_omega(in.formula, c);
                const Thm1Report report = check_thm1(in.formula, in.tree, in.nu, omega, c.node_cap);
                emit(to_json(report));
                return report.lhs == report.rhs ? holds : violation;
            };
        });
    }

    void add_decompose() {
        CLI::App* cmd = app_.add_subcommand("decompose", "Relabeling sentences and the MSO formula");
        add_inputs(cmd, inputs_, false);
        cmd->add_option("--legend", legend_path_, "Write the type legend to this file");
        cmd->add_option("--budget", budget_, "Node budget for the MSO formula");
        cmd->callback([this] {
            command_ = [this] {
                const Config c = config();
                const Loaded in = load(inputs_, c);
                Synthesizer synth(c);
                const Decomposition d = decompose(in.formula, synth, budget_);
                write_legend(d.relabeling);
                emit(Json{{"relabeling", sentences_json(d.relabeling)},
                          {"legend", legend_json(d.relabeling)},
                          {"mso", print(d.mso)}});
                return holds;
            };
        });
    }

    void add_relabel() {
        CLI::App* cmd = app_.add_subcommand("relabel", "Apply the type relabeling of a formula to a tree");
        add_inputs(cmd, inputs_, true);
        cmd->add_option("--legend", legend_path_, "Write the type legend to this file");
        cmd->callback([this] {
            command_ = [this] {
                const Config c = config();
                const Loaded in = load(inputs_, c);
                const Relabeling psi = build_relabeling(in.formula, c);
                write_legend(psi);
                emit(Json{{"relabeled_tree", print(apply_relabeling(psi, in.tree, c.node_cap))}});
                return holds;
            };
        });
    }

    void add_check_thm2() {
        CLI::App* cmd = app_.add_subcommand("check-thm2", "Compare a formula with its MSO form on the relabeled tree");
        add_inputs(cmd, inputs_, true);
        cmd->add_option("--budget", budget_, "Node budget for the MSO formula");
        cmd->callback([this] {
            command_ = [this] {
                const Config c = config();
                const Loaded in = load(inputs_, c);
                Synthesizer synth(c);
                const Decomposition d = decompose(in.formula, synth, budget_);
                const Thm2Report report = check_thm2(in.formula, in.tree, in.nu, d, c.node_cap);
                emit(to_json(report));
                return report.lhs == report.rhs ? holds : violation;
            };
        });
    }

    void add_comp_check() {
        CLI::App* cmd = app_.add_subcommand("comp-check", "Compare bottom-up and direct types");
        add_inputs(cmd, inputs_, true);
        cmd->callback([this] {
            command_ = [this] {
                const Config c = config();
                const Loaded in = load(inputs_, c);
                const PhType direct = direct_type(in.formula, in.tree, in.nu, c.node_cap);
                const PhType folded = bottom_up_type(in.formula, in.tree, in.nu, c);
                emit(Json{{"direct", print(direct)}, {"comp", print(folded)}, {"agree", direct == folded}});
                return direct == folded ? holds : violation;
            };
        });
    }

    void write_legend(const Relabeling& psi) const {
        if (legend_path_.empty()) return;
        std::ofstream out(legend_path_);
        if (!out) throw std::runtime_error("cannot write " + legend_path_);
        out << legend_json(psi).dump(2) << '\n';
    }

    CLI::App app_;
    std::function<int()> command_;
    std::vector<std::string> alphabet_{"a", "b"};
    unsigned rmax_ = 2;
    Inputs inputs_;
    std::string method_ = "direct";
    bool check_ = false;
    FuzzOptions fuzz_;
    std::vector<std::string> suites_;
    bool no_shrink_ = false;
    std::size_t max_states_ = default_max_states;
    std::string legend_path_;
    std::uint64_t budget_ = default_formula_budget;
};

} // namespace

int main(int argc, char** argv) {
    Cli cli;
    return cli.run(argc, argv);
}
