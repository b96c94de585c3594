// Runs the shipped criterion configs and prints one PASS/FAIL line per criterion.
#include "hypmild/experiments.hpp"

#include <chrono>
#include <filesystem>
#include <iostream>

namespace {

struct Criterion {
    int id;
    const char* title;
    const char* config;
};

const Criterion kCriteria[] = {
    {1, "kernel fidelity", "criterion1_kernel.ini"},
    {2, "dispersive estimate", "criterion2_dispersive.ini"},
    {3, "smoothing estimate", "criterion3_smoothing.ini"},
    {4, "linear bound and Duhamel residual", "criterion4_linear.ini"},
    {5, "Picard contraction", "criterion5_picard.ini"},
    {6, "periodic solution", "criterion6_periodic.ini"},
    {7, "uniqueness and decay", "criterion7_uniqueness.ini"},
    {8, "constant formulas", "criterion8_constants.ini"},
    {9, "refinement stability", "criterion9_refinement.ini"},
};

}  // namespace

int main(int argc, char** argv) {
    namespace fs = std::filesystem;
    const fs::path config_dir = argc > 1 ? argv[1] : HYPMILD_CONFIG_DIR;
    const fs::path out_root = argc > 2 ? argv[2] : "acceptance_out";

    std::vector<std::string> lines;
    int failed = 0;
    for (const auto& c : kCriteria) {
        const auto out = out_root / ("criterion" + std::to_string(c.id));
        fs::create_directories(out);
        hypmild::RunOptions opt;
        opt.out_dir = out.string();
        const auto start = std::chrono::steady_clock::now();
        std::string verdict, note;
        try {
            const auto report = hypmild::run_experiments(hypmild::Config::load((config_dir / c.config).string()), opt);
            std::cout << report.summary() << std::flush;
            verdict = report.pass() ? "PASS" : "FAIL";
            for (const auto& chk : report.checks) {
                if (!chk.informational && !chk.pass) note += (note.empty() ? "" : "; ") + chk.name;
            }
        } catch (const std::exception& e) {
            verdict = "FAIL";
            note = std::string("error: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (verdict != "PASS") ++failed;
        std::string line = "criterion " + std::to_string(c.id) + " (" + c.title + "): " + verdict;
        line += "  [" + std::to_string(static_cast<int>(secs + 0.5)) + " s]";
        if (!note.empty()) line += "  failing: " + note;
        lines.push_back(line);
    }
    std::cout << "\n== acceptance ==\n";
    for (const auto& l : lines) std::cout << l << '\n';
    std::cout << (9 - failed) << " of 9 criteria pass\n";
    return failed == 0 ? 0 : 1;
}
