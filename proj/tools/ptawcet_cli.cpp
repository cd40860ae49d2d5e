#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "ptawcet/engine.hpp"
#include "ptawcet/error.hpp"
#include "ptawcet/explorer.hpp"
#include "ptawcet/model.hpp"
#include "ptawcet/report.hpp"

using ptawcet::AnalysisError;
using ptawcet::ParseError;
using ptawcet::Pta;
using ptawcet::Report;
using ptawcet::SimStats;
using ptawcet::Violation;

namespace {

struct Options {
    std::string model_path;
    double delta = 1e-6;
    std::string mode = "accel";
    std::int64_t trials = 100000;
    std::uint64_t seed = 0;
    bool json = false;
    std::string dot_path;
};

Pta load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream os;
    os << in.rdbuf();
    return ptawcet::parse_model(os.str());
}

// Hard violations block the run; warnings go to standard error so a piped
// report stays clean.
bool gate_on_violations(const Pta& pta) {
    std::vector<Violation> violations = ptawcet::validate(pta);
    for (const Violation& v : violations)
        if (v.warning) std::cerr << v.to_string() << "\n";
    if (!ptawcet::has_errors(violations)) return true;
    for (const Violation& v : violations)
        if (!v.warning) std::cerr << v.to_string() << "\n";
    return false;
}

void write_dot(const std::string& path, const Report& rep, const Pta& pta) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path + "'");
    out << ptawcet::report_dot(rep, pta);
}

int run_analyze(const Options& opt) {
    Pta pta = load_model(opt.model_path);
    if (!gate_on_violations(pta)) return 1;

    if (opt.mode == "compare") {
        Report accel = ptawcet::wcet_accelerated(pta, opt.delta);
        Report base = ptawcet::wcet_baseline(pta, opt.delta);
        if (opt.json) {
            std::cout << ptawcet::compare_json(accel, base, pta);
        } else {
            std::cout << ptawcet::report_text(accel, pta) << "\n"
                      << ptawcet::report_text(base, pta) << "\n"
                      << "rg identity:       " << ptawcet::reduction_gained(accel, base)
                      << " states avoided, formula check passed\n";
        }
        if (!opt.dot_path.empty()) write_dot(opt.dot_path, accel, pta);
        return 0;
    }

    Report rep = opt.mode == "baseline" ? ptawcet::wcet_baseline(pta, opt.delta)
                                        : ptawcet::wcet_accelerated(pta, opt.delta);
    std::cout << (opt.json ? ptawcet::report_json(rep, pta) : ptawcet::report_text(rep, pta));
    if (!opt.dot_path.empty()) write_dot(opt.dot_path, rep, pta);
    return 0;
}

int run_simulate(const Options& opt) {
    Pta pta = load_model(opt.model_path);
    if (!gate_on_violations(pta)) return 1;

    SimStats stats = ptawcet::simulate(pta, opt.trials, opt.seed);
    if (opt.json) {
        nlohmann::ordered_json j;
        j["model"] = pta.name;
        j["trials"] = stats.trials;
        j["seed"] = opt.seed;
        j["mean"] = stats.mean;
        j["std_err"] = stats.std_err;
        j["terminated_fraction"] = stats.terminated_fraction;
        std::cout << j.dump(2) << "\n";
    } else {
        std::ostringstream os;
        os.precision(15);
        os << "model:             " << pta.name << "\n"
           << "trials:            " << stats.trials << "\n"
           << "seed:              " << opt.seed << "\n"
           << "mean:              " << stats.mean << "\n"
           << "std err:           " << stats.std_err << "\n"
           << "terminated:        " << stats.terminated_fraction << "\n";
        std::cout << os.str();
    }
    return 0;
}

int run_validate(const Options& opt) {
    Pta pta = load_model(opt.model_path);
    std::vector<Violation> violations = ptawcet::validate(pta);
    int errors = 0;
    for (const Violation& v : violations) {
        std::cout << v.to_string() << "\n";
        errors += v.warning ? 0 : 1;
    }
    std::cout << errors << " violations\n";
    return errors > 0 ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv) {
    Options opt;
    CLI::App app{"expected worst-case execution time of probabilistic timed automata"};
    app.require_subcommand(1);

    // The truncation threshold must leave mass on both sides: 0 would never
    // truncate, 1 would cut the entire run.
    CLI::Validator open_unit(
        [](std::string& s) {
            double v = std::stod(s);
            return v > 0.0 && v < 1.0 ? std::string() : std::string("must lie in (0, 1)");
        },
        "FLOAT in (0, 1)");

    CLI::App* analyze = app.add_subcommand("analyze", "compute the expected WCET");
    analyze->add_option("model", opt.model_path, "model file")->required();
    analyze->add_option("--delta", opt.delta, "probability mass below which cycles are cut off")
        ->capture_default_str()
        ->check(open_unit);
    analyze->add_option("--mode", opt.mode, "accel, baseline, or compare")
        ->capture_default_str()
        ->check(CLI::IsMember({"accel", "baseline", "compare"}));
    analyze->add_flag("--json", opt.json, "structured output instead of text");
    analyze->add_option("--dot", opt.dot_path, "write the explored zone graph to this file");

    CLI::App* sim = app.add_subcommand("simulate", "Monte Carlo estimate of the expected WCET");
    sim->add_option("model", opt.model_path, "model file")->required();
    sim->add_option("--trials", opt.trials, "number of sampled runs")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    sim->add_option("--seed", opt.seed, "base seed; each trial derives its own stream")
        ->capture_default_str();
    sim->add_flag("--json", opt.json, "structured output instead of text");

    CLI::App* val = app.add_subcommand("validate", "check the modelling assumptions");
    val->add_option("model", opt.model_path, "model file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (analyze->parsed()) return run_analyze(opt);
        if (sim->parsed()) return run_simulate(opt);
        return run_validate(opt);
    } catch (const ParseError& e) {
        std::cerr << opt.model_path << ": " << e.what() << "\n";
        return 1;
    } catch (const AnalysisError& e) {
        std::cerr << "error: " << e.what() << "\n";
        bool unbounded = e.kind() == AnalysisError::Kind::WcetUnbounded ||
                         e.kind() == AnalysisError::Kind::NonConvergingCycle;
        return unbounded ? 2 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
