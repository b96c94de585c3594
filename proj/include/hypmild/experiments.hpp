#pragma once

#include "hypmild/error.hpp"
#include "hypmild/io.hpp"

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace hypmild {

/// Experiment name not among the known ones.
class UnknownExperiment : public Error {
public:
    using Error::Error;
};

/// Error while reading a constants file; wraps the underlying message.
class ConstantsFileError : public Error {
public:
    using Error::Error;
};

struct RunOptions {
    std::string out_dir = ".";
    std::optional<EstimateConstants> constants;  // from --constants; must match the experiment's d and p
    std::optional<std::uint64_t> seed;
    std::function<void(const std::string&)> log;  // progress lines; empty = silent
};

/// One assertion. Informational checks are reported but do not decide pass/fail.
struct Check {
    std::string name;
    double value = 0.0;
    double limit = 0.0;
    bool pass = true;
    bool informational = false;
    std::string detail;
};

struct ExperimentReport {
    std::string experiment;
    std::vector<Check> checks;
    std::vector<std::string> files;

    bool pass() const;
    /// Plain-text summary, one line per check.
    std::string summary() const;
};

const std::vector<std::string>& experiment_names();

/// Runs every experiment named in experiment.name (comma-separated) and writes CSV files and a
/// summary into opt.out_dir.
ExperimentReport run_experiments(const Config& cfg, const RunOptions& opt);
ExperimentReport run_experiment(const std::string& name, const Config& cfg, const RunOptions& opt);

// Building blocks shared with the acceptance suite.

/// a e^{-r^2/w^2} ("gauss"), a e^{-(r^2-w^2)^2/4} ("ring") or 0 ("zero").
RadialField make_profile(const GridPtr& grid, const std::string& kind, double amp, double width);
/// Profile and waveform read from keys <prefix>_profile, _amp, _width, _a0, _cos, _sin.
ModulatedField modulated_from_config(const Config& cfg, const GridPtr& grid, const std::string& prefix,
                                     double period);
ForcingSpec forcing_from_config(const Config& cfg, const GridPtr& grid);
StateVector state_from_config(const Config& cfg, const GridPtr& grid, const std::string& section);
GridPtr grid_from_config(const Config& cfg, int d);

/// Calibrated constants for dimension d at solver exponent p on the given grid: the t grid and
/// exponent pairs of the verification criteria plus the pairs the solver bounds use.
FitResult calibrate(const GridPtr& grid, double p, const Config& cfg, std::optional<std::uint64_t> seed);

/// s = u^{1/(1-theta)} substitution and double-exponential quadrature; independent of std::tgamma.
double gamma_integral_numeric(double theta, double beta);

}  // namespace hypmild
