// hypmild: configuration-driven experiment runner.
#include "hypmild/error.hpp"
#include "hypmild/experiments.hpp"
#include "hypmild/io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace {

enum Exit : int {
    ok = 0,
    check_failed = 1,
    usage = 2,
    bad_config = 3,
    precondition = 4,
    constants_file = 5,
    solver_failure = 6,
};

}  // namespace

int main(int argc, char** argv) {
    using namespace hypmild;

    CLI::App app{"hypmild: mild solutions of the Boussinesq system on hyperbolic space"};
    app.require_subcommand(1);
    std::string config_path, out_dir = ".", constants_path;
    std::uint64_t seed = 0;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "run the experiment named in a config file");
    run->add_option("config", config_path, "experiment configuration (INI)")->required();
    run->add_option("--out", out_dir, "output directory for CSV files and the summary");
    auto* constants_opt = run->add_option("--constants", constants_path, "constants file to use instead of calibrating");
    auto* seed_opt = run->add_option("--seed", seed, "seed for the randomized part of the sample library");
    run->add_flag("--quiet", quiet, "print only the summary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? Exit::ok : Exit::usage;
    }

    RunOptions opt;
    opt.out_dir = out_dir;
    if (*seed_opt) opt.seed = seed;
    if (!quiet) opt.log = [](const std::string& line) { std::cerr << line << '\n'; };

    try {
        std::filesystem::create_directories(out_dir);
        if (*constants_opt) {
            try {
                opt.constants = load_constants(constants_path);
            } catch (const Error& e) {
                throw ConstantsFileError(e.what());
            }
        }
        const auto cfg = Config::load(config_path);
        const auto report = run_experiments(cfg, opt);
        std::cout << report.summary();
        return report.pass() ? Exit::ok : Exit::check_failed;
    } catch (const UnknownExperiment& e) {
        std::cerr << "error: " << e.what() << '\n';
        return Exit::usage;
    } catch (const ConstantsFileError& e) {
        std::cerr << "constants file error: " << e.what() << '\n';
        return Exit::constants_file;
    } catch (const PreconditionViolation& e) {
        std::cerr << "precondition violation: " << e.what() << '\n';
        return Exit::precondition;
    } catch (const FormatError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return Exit::bad_config;
    } catch (const InvalidArgument& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return Exit::bad_config;
    } catch (const GridMismatch& e) {
        std::cerr << "invalid parameter: " << e.what() << '\n';
        return Exit::bad_config;
    } catch (const ConvergenceFailure& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return Exit::solver_failure;
    } catch (const InfeasibleFit& e) {
        std::cerr << "solver failure: " << e.what() << '\n';
        return Exit::solver_failure;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return Exit::bad_config;
    }
}
