#include "hypmild/experiments.hpp"

#include "hypmild/heat_kernel.hpp"
#include "hypmild/semigroup.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace hypmild {

namespace {

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(6);
    os << x;
    return os.str();
}

// shortest representation that reads back to x
std::string shortest(double x) {
    if (!std::isfinite(x)) return format_double(x);
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

Check check_le(std::string name, double value, double limit, std::string detail = {}) {
    return Check{std::move(name), value, limit, value <= limit, false, std::move(detail)};
}

Check check_ge(std::string name, double value, double limit, std::string detail = {}) {
    return Check{std::move(name), value, limit, value >= limit, false, std::move(detail)};
}

Check info(std::string name, double value, std::string detail = {}) {
    return Check{std::move(name), value, 0.0, true, true, std::move(detail)};
}

class Context {
public:
    Context(const std::string& name, const Config& cfg, const RunOptions& opt) : cfg(cfg), opt(opt) {
        report.experiment = name;
        std::filesystem::create_directories(opt.out_dir);
    }

    void log(const std::string& line) const {
        if (opt.log) opt.log(report.experiment + ": " + line);
    }

    void write(const CsvTable& table, const std::string& file) {
        const auto path = (std::filesystem::path(opt.out_dir) / file).string();
        table.write(path);
        report.files.push_back(path);
    }

    void add(Check c) {
        log((c.informational ? "info " : (c.pass ? "pass " : "FAIL ")) + c.name + " = " + fmt(c.value) +
            (c.informational ? "" : " (limit " + fmt(c.limit) + ")"));
        report.checks.push_back(std::move(c));
    }

    const Config& cfg;
    const RunOptions& opt;
    ExperimentReport report;
};

std::vector<ExponentPair> parse_pairs(const std::string& text) {
    std::vector<std::string> items;
    boost::algorithm::split(items, text, boost::algorithm::is_any_of(","));
    std::vector<ExponentPair> out;
    for (const auto& item : items) {
        std::vector<std::string> pq;
        boost::algorithm::split(pq, item, boost::algorithm::is_any_of(":"));
        if (pq.size() != 2) throw FormatError("exponent pair '" + item + "' is not of the form p:q");
        out.push_back({parse_double(pq[0], "p"), parse_double(pq[1], "q")});
    }
    return out;
}

std::vector<ExponentPair> pairs_from_config(const Config& cfg, const std::string& key, const std::string& fallback) {
    return parse_pairs(cfg.get_string(key, fallback));
}

void add_unique(std::vector<ExponentPair>& to, const std::vector<ExponentPair>& from) {
    for (const auto& pq : from) {
        const bool seen = std::any_of(to.begin(), to.end(), [&](const ExponentPair& x) {
            return std::abs(x.p - pq.p) < 1e-12 && (x.q == pq.q || std::abs(x.q - pq.q) < 1e-12);
        });
        if (!seen) to.push_back(pq);
    }
}

const char* kDispersivePairs = "1:1, 2:2, 2:4, 2:inf, 4:4, 1:inf";
const char* kSmoothingPairs = "2:2, 2:4, 4:4";

double solver_p_for(const Config& cfg, int d) {
    const double p = cfg.get_double("constants.p_d" + std::to_string(d), cfg.get_double("solver.p", d + 1.0));
    if (!(p > d)) {
        std::ostringstream os;
        os << "solver exponent p = " << p << " with d = " << d
           << ": the Gamma-function bounds for N and M hold only for p > d";
        throw PreconditionViolation(os.str());
    }
    return p;
}

// constants for (d, p): --constants file, explicit [constants] C and delta_d, or calibration on grid
EstimateConstants constants_for(Context& ctx, const GridPtr& grid, double p) {
    const int d = grid->dimension();
    if (ctx.opt.constants && ctx.opt.constants->d == d) {
        if (ctx.opt.constants->p != p) {
            throw InvalidArgument("constants file has p = " + fmt(ctx.opt.constants->p) + ", experiment uses p = " +
                                  fmt(p));
        }
        return *ctx.opt.constants;
    }
    if (ctx.cfg.has("constants.C") || ctx.cfg.has("constants.delta_d")) {
        EstimateConstants c{d, ctx.cfg.get_double("constants.C"), ctx.cfg.get_double("constants.delta_d"), p};
        validate(c);
        return c;
    }
    ctx.log("calibrating constants for d = " + std::to_string(d));
    const auto fit = calibrate(grid, p, ctx.cfg, ctx.opt.seed);
    ctx.log("C = " + fmt(fit.constants.C) + ", delta_d = " + fmt(fit.constants.delta_d));
    return fit.constants;
}

CsvTable bound_row_table() {
    return CsvTable({"d", "t", "p", "q", "sample", "lhs", "rhs", "ratio", "pass", "ratio_u", "ratio_theta"});
}

}  // namespace

bool ExperimentReport::pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.informational || c.pass; });
}

std::string ExperimentReport::summary() const {
    std::ostringstream os;
    os << "experiment " << experiment << ": " << (pass() ? "PASS" : "FAIL") << '\n';
    for (const auto& c : checks) {
        os << "  " << (c.informational ? "info" : (c.pass ? "pass" : "FAIL")) << "  " << c.name << " = "
           << shortest(c.value);
        if (!c.informational) os << "  limit " << shortest(c.limit);
        if (!c.detail.empty()) os << "  [" << c.detail << ']';
        os << '\n';
    }
    for (const auto& f : files) os << "  wrote " << f << '\n';
    return os.str();
}

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"kernel-check",    "verify-dispersive", "verify-smoothing",
                                                "solve-linear",    "solve-nonlinear",   "periodic-linear",
                                                "periodic-nonlinear", "uniqueness",     "calibrate"};
    return names;
}

RadialField make_profile(const GridPtr& grid, const std::string& kind, double amp, double width) {
    if (kind == "zero" || amp == 0.0) return RadialField::zeros(grid);
    if (!(width > 0.0)) throw InvalidArgument("profile width must be positive");
    if (kind == "gauss") {
        return RadialField::from_function(grid, [=](double r) { return amp * std::exp(-r * r / (width * width)); });
    }
    if (kind == "ring") {
        return RadialField::from_function(grid, [=](double r) {
            const double s = r * r - width * width;
            return amp * std::exp(-0.25 * s * s);
        });
    }
    throw InvalidArgument("unknown profile kind '" + kind + "' (gauss, ring, zero)");
}

ModulatedField modulated_from_config(const Config& cfg, const GridPtr& grid, const std::string& prefix,
                                     double period) {
    const auto profile = make_profile(grid, cfg.get_string(prefix + "_profile", "gauss"),
                                      cfg.get_double(prefix + "_amp", 0.0), cfg.get_double(prefix + "_width", 1.0));
    const double a0 = cfg.get_double(prefix + "_a0", 0.0);
    const auto cos_c = cfg.get_doubles(prefix + "_cos", {});
    const auto sin_c = cfg.get_doubles(prefix + "_sin", {1.0});
    return ModulatedField{profile, Waveform(period, a0, cos_c, sin_c)};
}

ForcingSpec forcing_from_config(const Config& cfg, const GridPtr& grid) {
    const double T = cfg.get_double("forcing.period", 1.0);
    if (!(T > 0.0)) throw InvalidArgument("forcing.period must be positive");
    return ForcingSpec{modulated_from_config(cfg, grid, "forcing.F", T), modulated_from_config(cfg, grid, "forcing.f", T),
                       modulated_from_config(cfg, grid, "forcing.h", T), T};
}

StateVector state_from_config(const Config& cfg, const GridPtr& grid, const std::string& section) {
    auto field = [&](const std::string& slot) {
        const std::string k = section + "." + slot;
        return make_profile(grid, cfg.get_string(k + "_profile", "gauss"), cfg.get_double(k + "_amp", 0.0),
                            cfg.get_double(k + "_width", 1.0));
    };
    return StateVector(field("u"), field("theta"));
}

GridPtr grid_from_config(const Config& cfg, int d) {
    GridSpec spec{d, cfg.get_double("grid.r_max", 32.0), cfg.get_int("grid.panels", 64), cfg.get_int("grid.order", 8)};
    return RadialGrid::make(spec);
}

FitResult calibrate(const GridPtr& grid, double p, const Config& cfg, std::optional<std::uint64_t> seed) {
    const int d = grid->dimension();
    auto pq = pairs_from_config(cfg, "calibration.pq", kDispersivePairs);
    add_unique(pq, solver_dispersive_pairs(p));
    FitOptions opt;
    opt.solver_p = p;
    opt.safety = cfg.get_double("calibration.safety", 0.9);
    opt.smoothing_pq = pairs_from_config(cfg, "calibration.smoothing_pq", kSmoothingPairs);
    add_unique(opt.smoothing_pq, solver_smoothing_pairs(p));
    const auto slot = cfg.get_string("calibration.slot", "velocity");
    if (slot == "velocity") {
        opt.slot = Slot::velocity;
    } else if (slot == "product") {
        opt.slot = Slot::product;
    } else if (slot == "theta") {
        opt.slot = Slot::theta;
    } else {
        throw InvalidArgument("calibration.slot must be velocity, theta or product");
    }
    const auto ts = cfg.get_doubles("calibration.t", cfg.get_doubles("verify.t", {0.25, 0.5, 1.0, 2.0, 4.0}));
    auto fit = fit_constants(sample_library(grid, seed), ts, pq, opt);
    if (fit.constants.d != d) throw Error("calibration returned constants for another dimension");
    return fit;
}

double gamma_integral_numeric(double theta, double beta) {
    if (!(theta < 1.0) || !(beta > 0.0)) throw InvalidArgument("gamma_integral_numeric: need theta < 1, beta > 0");
    const double k = 1.0 / (1.0 - theta);
    boost::math::quadrature::exp_sinh<double> integrator;
    return k * integrator.integrate([&](double u) { return std::exp(-beta * std::pow(u, k)); }, 1e-14);
}

namespace {

void kernel_check(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto ds = cfg.get_ints("kernel.d", {2, 3, 4});
    const auto ts = cfg.get_doubles("kernel.t", {0.1, 1.0, 10.0});
    const double mass_tol = cfg.get_double("kernel.mass_tol", 1e-6);
    CsvTable masses({"d", "t", "mass", "residual"});
    double worst = 0.0;
    for (int d : ds) {
        for (double t : ts) {
            const double m = kernel_table(d, t)->mass();
            masses.row() << d << t << m << m - 1.0;
            worst = std::max(worst, std::abs(m - 1.0));
            ctx.log("d = " + std::to_string(d) + ", t = " + fmt(t) + ": mass - 1 = " + fmt(m - 1.0));
        }
    }
    ctx.write(masses, "kernel_mass.csv");
    ctx.add(check_le("max |mass - 1|", worst, mass_tol));

    if (std::find(ds.begin(), ds.end(), 3) != ds.end()) {
        const double exact = std::pow(4.0 * std::numbers::pi, -1.5) * std::exp(-1.0);
        const double value = heat_kernel(3, 1.0, 0.0);
        ctx.add(check_le("d=3 kernel at (t=1, r=0), relative error vs (4 pi)^{-3/2} e^{-1}",
                         std::abs(value - exact) / exact, cfg.get_double("kernel.value_tol", 1e-6)));
        ctx.add(info("d=3 kernel at (t=1, r=0), relative gap to the rounded literal 8.2586e-3",
                     std::abs(value - 8.2586e-3) / value, "value " + format_double(value)));
    }

    const auto t1s = cfg.get_doubles("kernel.law_t1", {0.25, 1.0});
    const auto t2s = cfg.get_doubles("kernel.law_t2", {0.75, 1.0});
    if (t1s.size() != t2s.size()) throw FormatError("kernel.law_t1 and kernel.law_t2 differ in length");
    CsvTable law({"d", "t1", "t2", "defect_l2"});
    double worst_law = 0.0;
    for (int d : ds) {
        const auto grid = grid_from_config(cfg, d);
        const auto f = make_profile(grid, "gauss", 1.0, cfg.get_double("kernel.law_width", 1.0));
        const double fn = lp_norm(f, 2.0);
        for (std::size_t k = 0; k < t1s.size(); ++k) {
            const auto two = semigroup_matrices(grid, t1s[k])->smoothing() *
                             (semigroup_matrices(grid, t2s[k])->smoothing() * f.values());
            const Eigen::VectorXd one = semigroup_matrices(grid, t1s[k] + t2s[k])->smoothing() * f.values();
            const double defect = lp_norm(RadialField(grid, two - one), 2.0) / fn;
            law.row() << d << t1s[k] << t2s[k] << defect;
            worst_law = std::max(worst_law, defect);
        }
        clear_semigroup_cache();
    }
    ctx.write(law, "kernel_semigroup_law.csv");
    ctx.add(check_le("semigroup-law defect |S(t1)S(t2)f - S(t1+t2)f|_2 / |f|_2", worst_law,
                     cfg.get_double("kernel.law_tol", 1e-6)));
}

void verify_bounds(Context& ctx, BoundKind kind) {
    const auto& cfg = ctx.cfg;
    const bool disp = kind == BoundKind::dispersive;
    const auto ds = cfg.get_ints("verify.d", disp ? std::vector<int>{2, 3} : std::vector<int>{3});
    const auto ts = cfg.get_doubles("verify.t", disp ? std::vector<double>{0.25, 0.5, 1, 2, 4}
                                                     : std::vector<double>{0.25, 1, 4});
    const auto pq = pairs_from_config(cfg, "verify.pq", disp ? kDispersivePairs : kSmoothingPairs);
    CsvTable rows = bound_row_table();
    std::size_t total = 0, passed = 0, passed_u = 0;
    double worst = 0.0, worst_u = 0.0, worst_theta = 0.0;
    std::string worst_tuple;
    for (int d : ds) {
        const auto grid = grid_from_config(cfg, d);
        const auto c = constants_for(ctx, grid, solver_p_for(cfg, d));
        const auto lib = sample_library(grid, ctx.opt.seed);
        for (double t : ts) {
            for (const auto& [p, q] : pq) {
                for (const auto& s : lib) {
                    const auto r = disp ? verify_dispersive(s.field, t, p, q, c) : verify_smoothing(s.field, t, p, q, c);
                    rows.row() << d << t << p << q << s.id << r.lhs << r.rhs << r.ratio << (r.pass ? 1 : 0) << r.ratio_u
                               << r.ratio_theta;
                    ++total;
                    passed += r.pass ? 1 : 0;
                    passed_u += r.ratio_u <= 1.0 + 1e-9 ? 1 : 0;
                    if (r.ratio > worst) {
                        worst = r.ratio;
                        std::ostringstream os;
                        os << "d=" << d << " t=" << t << " p=" << p << " q=" << q << " " << s.id;
                        worst_tuple = os.str();
                    }
                    worst_u = std::max(worst_u, r.ratio_u);
                    worst_theta = std::max(worst_theta, r.ratio_theta);
                }
            }
        }
        clear_semigroup_cache();
    }
    const std::string stem = disp ? "verify_dispersive" : "verify_smoothing";
    ctx.write(rows, stem + ".csv");
    const double rate = total ? static_cast<double>(passed) / static_cast<double>(total) : 1.0;
    ctx.add(check_ge("pass rate (product norm)", rate, 1.0,
                     std::to_string(passed) + " of " + std::to_string(total) + " tuples"));
    ctx.add(info("worst ratio (product norm)", worst, worst_tuple));
    if (disp) ctx.add(check_ge("worst ratio (non-vacuous fit)", worst, cfg.get_double("verify.min_worst_ratio", 0.5)));
    ctx.add(info("pass rate (velocity slot)", total ? static_cast<double>(passed_u) / static_cast<double>(total) : 1.0));
    ctx.add(info("worst ratio (velocity slot)", worst_u));
    ctx.add(info("worst ratio (temperature slot)", worst_theta));
}

struct Problem {
    GridPtr grid;
    ForcingSpec forcing;
    StateVector init;
    ModulatedField eta;  // theta-slot coupling of the linear problems
};

Problem problem_from_config(const Config& cfg, const GridPtr& grid) {
    auto forcing = forcing_from_config(cfg, grid);
    auto eta = modulated_from_config(cfg, grid, "eta.theta", forcing.period);
    return Problem{grid, forcing, state_from_config(cfg, grid, "init"), eta};
}

GridPtr refined_grid(const GridPtr& g) {
    GridSpec spec = g->spec();
    spec.panels *= 2;
    return RadialGrid::make(spec);
}

Trajectory eta_trajectory(const Problem& pr, double dt, std::size_t steps) {
    std::vector<StateVector> states;
    for (std::size_t k = 0; k <= steps; ++k) {
        states.emplace_back(RadialField::zeros(pr.grid), pr.eta.at(dt * static_cast<double>(k)));
    }
    return Trajectory(dt, std::move(states));
}

double eta_norm(const Problem& pr, const Trajectory& eta, double p) {
    return std::max(pr.eta.sup_norm(p), sup_norm_theta(eta, p));
}

SolverConfig solver_config(Context& ctx, const GridPtr& grid, const ForcingSpec& forcing, bool nonlinear) {
    SolverConfig sc;
    sc.p = solver_p_for(ctx.cfg, grid->dimension());
    sc.steps_per_period = ctx.cfg.get_int("solver.steps_per_period", 64);
    sc.picard_tol = ctx.cfg.get_double("solver.picard_tol", 1e-8);
    sc.max_iters = ctx.cfg.get_int("solver.max_iters", 200);
    if (sc.steps_per_period < 1 || sc.steps_per_period > 256) {
        throw InvalidArgument("solver.steps_per_period must lie in [1, 256]");
    }
    sc.constants = constants_for(ctx, grid, sc.p);
    if (nonlinear) {
        sc.rho = ctx.cfg.has("solver.rho") ? ctx.cfg.get_double("solver.rho")
                                           : rho_for_margin(ctx.cfg.get_double("solver.margin", 0.5), forcing, sc);
    }
    return sc;
}

CsvTable norm_table(const Trajectory& traj, double p, double bound) {
    CsvTable t({"t", "norm_u", "norm_theta", "product_norm", "bound"});
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double nu = lp_norm(traj[k].u, p), nt = lp_norm(traj[k].theta, p);
        t.row() << traj.time(k) << nu << nt << std::max(nu, nt) << bound;
    }
    return t;
}

// Compares the sup-norm and the per-node norms |x(t_k)|_p of the base run with runs at dt/2 and dr/2.
void refinement_checks(Context& ctx, const std::string& what, const Trajectory& base, double p,
                       const std::function<Trajectory(const GridPtr&, int)>& run, const GridPtr& grid, int spp) {
    if (!ctx.cfg.get_string("check.refinement", "false").starts_with("t")) return;
    const double tol = ctx.cfg.get_double("check.refinement_tol", 5e-3);
    const double sup = sup_norm(base, p);
    auto nodewise = [&](const Trajectory& fine, std::size_t stride) {
        double worst = 0.0;
        for (std::size_t k = 0; k < base.size(); ++k) {
            worst = std::max(worst, std::abs(product_norm(fine[k * stride], p) - product_norm(base[k], p)) / sup);
        }
        return worst;
    };
    ctx.log("refinement runs for " + what);
    const auto half_dt = run(grid, 2 * spp);
    const auto half_dr = run(refined_grid(grid), spp);
    ctx.add(check_le("relative sup-norm change, dt halved", std::abs(sup_norm(half_dt, p) - sup) / sup, tol));
    ctx.add(check_le("relative sup-norm change, dr halved", std::abs(sup_norm(half_dr, p) - sup) / sup, tol));
    ctx.add(check_le("max_k | |x(t_k)| change | / sup-norm, dt halved", nodewise(half_dt, 2), tol));
    ctx.add(check_le("max_k | |x(t_k)| change | / sup-norm, dr halved", nodewise(half_dr, 1), tol));
    clear_semigroup_cache();
}

void solve_linear_experiment(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto grid = grid_from_config(cfg, cfg.get_int("grid.d", 3));
    const auto pr = problem_from_config(cfg, grid);
    const auto sc = solver_config(ctx, grid, pr.forcing, false);
    const int periods = cfg.get_int("solver.periods", 2);
    const std::size_t steps = static_cast<std::size_t>(periods * sc.steps_per_period);
    const double dt = solver_dt(pr.forcing, sc);
    const auto eta = eta_trajectory(pr, dt, steps);
    const auto traj = solve_linear(pr.init, pr.forcing, eta);
    const double bound = linear_bound(pr.init, pr.forcing, eta_norm(pr, eta, sc.p), sc.constants);
    ctx.write(norm_table(traj, sc.p, bound), "solve_linear_trajectory.csv");
    ctx.write(state_table(traj[steps]), "solve_linear_final_state.csv");
    double worst = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) worst = std::max(worst, product_norm(traj[k], sc.p) / bound);
    ctx.add(check_le("max_k |state_k| / (Bounded) right-hand side", worst, 1.0,
                     "C = " + fmt(sc.constants.C) + ", N = " + fmt(sc.constants.N()) + ", M = " + fmt(sc.constants.M())));

    const auto stride = static_cast<std::size_t>(cfg.get_int("check.residual_stride", 8));
    CsvTable res({"t", "residual"});
    double worst_res = 0.0;
    for (std::size_t k = 0; k <= steps; k += std::max<std::size_t>(stride, 1)) {
        const double r = product_norm(traj[k] - duhamel_rhs(pr.init, eta, pr.forcing, traj.time(k)), sc.p);
        res.row() << traj.time(k) << r;
        worst_res = std::max(worst_res, r);
    }
    clear_semigroup_cache();
    ctx.write(res, "solve_linear_residual.csv");
    ctx.add(check_le("Duhamel residual (direct convolution sum)", worst_res, cfg.get_double("check.residual_tol", 1e-6)));

    const double base = sup_norm(traj, sc.p);
    ctx.add(info("sup-norm of the solution", base));
    refinement_checks(
        ctx, "solve-linear", traj, sc.p,
        [&](const GridPtr& g, int spp) {
            const auto prg = problem_from_config(cfg, g);
            const double dtg = pr.forcing.period / spp;
            const auto steps_g = static_cast<std::size_t>(periods * spp);
            return solve_linear(prg.init, prg.forcing, eta_trajectory(prg, dtg, steps_g));
        },
        grid, sc.steps_per_period);
}

void solve_nonlinear_experiment(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto grid = grid_from_config(cfg, cfg.get_int("grid.d", 3));
    const auto pr = problem_from_config(cfg, grid);
    const auto sc = solver_config(ctx, grid, pr.forcing, true);
    const auto steps = static_cast<std::size_t>(cfg.get_int("solver.periods", 1) * sc.steps_per_period);
    const auto res = picard_solve(pr.init, pr.forcing, sc, steps);
    ctx.write(convergence_table(res.report), "solve_nonlinear_convergence.csv");
    ctx.write(norm_table(res.trajectory, sc.p, sc.rho), "solve_nonlinear_trajectory.csv");
    ctx.add(info("contraction margin 2 M rho + N |h|", res.report.margin, "rho = " + fmt(sc.rho)));
    ctx.add(info("ball condition left-hand side", res.report.ball_lhs));
    const double max_ratio =
        res.report.ratios.empty() ? 0.0 : *std::max_element(res.report.ratios.begin(), res.report.ratios.end());
    ctx.add(check_le("max consecutive-iterate ratio", max_ratio, cfg.get_double("check.max_ratio", 0.55)));
    ctx.add(check_le("iterations to tolerance", res.report.iterations, cfg.get_int("check.max_iterations", 40),
                     "picard_tol = " + fmt(sc.picard_tol)));
    ctx.add(check_le("max iterate norm / rho", res.report.max_iterate_norm / sc.rho, 1.0));
    const auto phi = mild_map(pr.init, res.trajectory, pr.forcing);
    ctx.add(info("fixed-point residual |Phi(x) - x|", sup_distance(phi, res.trajectory, sc.p)));
}

void periodic_linear_experiment(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto grid = grid_from_config(cfg, cfg.get_int("grid.d", 3));
    const auto pr = problem_from_config(cfg, grid);
    PoincareSetup setup;
    setup.cfg = solver_config(ctx, grid, pr.forcing, false);
    const int spp = setup.cfg.steps_per_period;
    const double dt = solver_dt(pr.forcing, setup.cfg);
    setup.eta = eta_trajectory(pr, dt, static_cast<std::size_t>(spp));
    const double tol = cfg.get_double("periodic.tol", 1e-7);
    const auto terms = static_cast<std::size_t>(cfg.get_double("periodic.cesaro_terms", 16777216.0));
    const auto res = find_periodic_linear(pr.forcing, setup, tol, cfg.get_int("periodic.max_iters", 400), terms);
    const double p = setup.cfg.p;
    const auto& c = setup.cfg.constants;
    const double bound = (c.C + 1.0) * (c.N() * pr.forcing.h.sup_norm(p / 2.0) * eta_norm(pr, *setup.eta, p) +
                                        c.M() * pr.forcing.pair_norm(p / 2.0));
    ctx.write(norm_table(res.trajectory, p, bound), "periodic_linear_trajectory.csv");
    ctx.write(state_table(res.trajectory[0]), "periodic_linear_state.csv");
    CsvTable defects({"iteration", "defect"});
    for (std::size_t k = 0; k < res.defects.size(); ++k) defects.row() << k + 1 << res.defects[k];
    ctx.write(defects, "periodic_linear_defects.csv");

    ctx.add(check_le("periodicity defect |x(T) - x(0)|", check_periodicity(res.trajectory, pr.forcing.period, p),
                     cfg.get_double("periodic.defect_tol", 1e-7),
                     std::to_string(res.iterations) + " Poincare iterations"));
    ctx.add(check_le("Cesaro vs direct iteration", res.cesaro_gap, cfg.get_double("periodic.cesaro_tol", 1e-6),
                     std::to_string(terms) + " Cesaro terms"));

    const int periods = cfg.get_int("periodic.return_periods", 3);
    const auto long_steps = static_cast<std::size_t>(periods * spp);
    std::vector<StateVector> eta_long;
    for (std::size_t k = 0; k <= long_steps; ++k) eta_long.push_back((*setup.eta)[k % static_cast<std::size_t>(spp)]);
    const auto long_run = solve_linear(res.trajectory[0], pr.forcing, Trajectory(dt, std::move(eta_long)));
    double worst_return = 0.0;
    for (int k = 1; k <= periods; ++k) {
        worst_return = std::max(worst_return, product_norm(long_run[static_cast<std::size_t>(k * spp)] - res.trajectory[0], p));
    }
    ctx.add(check_le("multi-period return max_k |x(kT) - x(0)|", worst_return, cfg.get_double("periodic.return_tol", 3e-7)));
    const double sup = sup_norm(res.trajectory, p);
    ctx.add(check_le("sup-norm / (C+1)(N |h| |(0,eta)| + M |(F,f)|)", sup / bound, 1.0));
    ctx.add(info("sup-norm of the periodic solution", sup));

    refinement_checks(
        ctx, "periodic-linear", res.trajectory, p,
        [&](const GridPtr& g, int steps) {
            const auto prg = problem_from_config(cfg, g);
            PoincareSetup s = setup;
            s.cfg.steps_per_period = steps;
            s.eta = eta_trajectory(prg, pr.forcing.period / steps, static_cast<std::size_t>(steps));
            return find_periodic_linear(prg.forcing, s, tol, 400, 0).trajectory;
        },
        grid, spp);
}

void periodic_nonlinear_experiment(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto grid = grid_from_config(cfg, cfg.get_int("grid.d", 3));
    const auto pr = problem_from_config(cfg, grid);
    const auto sc = solver_config(ctx, grid, pr.forcing, true);
    const double tol = cfg.get_double("periodic.tol", 1e-7);
    const auto res = find_periodic_nonlinear(pr.forcing, sc, tol, cfg.get_int("periodic.max_iters", 200));
    ctx.write(norm_table(res.trajectory, sc.p, sc.rho), "periodic_nonlinear_trajectory.csv");
    ctx.write(state_table(res.trajectory[0]), "periodic_nonlinear_state.csv");
    CsvTable defects({"iteration", "defect", "picard_iterations"});
    for (std::size_t k = 0; k < res.defects.size(); ++k) defects.row() << k + 1 << res.defects[k] << res.inner_iterations[k];
    ctx.write(defects, "periodic_nonlinear_defects.csv");
    ctx.add(check_le("periodicity defect |x(T) - x(0)|", check_periodicity(res.trajectory, pr.forcing.period, sc.p),
                     cfg.get_double("periodic.defect_tol", 1e-7),
                     std::to_string(res.iterations) + " Poincare iterations"));
    ctx.add(check_le("sup-norm / rho", sup_norm(res.trajectory, sc.p) / sc.rho, 1.0));
    const int periods = cfg.get_int("periodic.return_periods", 3);
    const auto long_run =
        picard_solve(res.trajectory[0], pr.forcing, sc, static_cast<std::size_t>(periods * sc.steps_per_period)).trajectory;
    double worst_return = 0.0;
    for (int k = 1; k <= periods; ++k) {
        worst_return = std::max(
            worst_return, product_norm(long_run[static_cast<std::size_t>(k * sc.steps_per_period)] - res.trajectory[0], sc.p));
    }
    ctx.add(check_le("multi-period return max_k |x(kT) - x(0)|", worst_return, cfg.get_double("periodic.return_tol", 3e-7)));
    ctx.add(info("sup-norm of the periodic solution", sup_norm(res.trajectory, sc.p)));
}

void uniqueness_experiment_run(Context& ctx) {
    const auto& cfg = ctx.cfg;
    const auto grid = grid_from_config(cfg, cfg.get_int("grid.d", 3));
    const int d = grid->dimension();
    const auto pr = problem_from_config(cfg, grid);
    const auto other = state_from_config(cfg, grid, "init_b");
    const double horizon = cfg.get_double("uniqueness.horizon", 4.0);
    const double fit_from = cfg.get_double("uniqueness.fit_from", horizon / 2.0);
    const double same_tol = cfg.get_double("uniqueness.same_tol", 1e-7);

    PoincareSetup lin;
    lin.cfg = solver_config(ctx, grid, pr.forcing, false);
    const double dt = solver_dt(pr.forcing, lin.cfg);
    lin.eta = eta_trajectory(pr, dt, static_cast<std::size_t>(lin.cfg.steps_per_period));
    const auto same = uniqueness_experiment(pr.init, pr.init, pr.forcing, horizon, lin, fit_from);
    ctx.add(check_le("identical initial data, linear: max delta", same.max_delta, same_tol));

    if (cfg.get_string("uniqueness.nonlinear", "true").starts_with("t")) {
        PoincareSetup nl;
        nl.mode = PoincareMode::nonlinear;
        nl.cfg = solver_config(ctx, grid, pr.forcing, true);
        const auto same_nl = uniqueness_experiment(pr.init, pr.init, pr.forcing, horizon, nl, fit_from);
        ctx.add(check_le("identical initial data, nonlinear: max delta", same_nl.max_delta, same_tol));
    }

    const auto rep = uniqueness_experiment(pr.init, other, pr.forcing, horizon, lin, fit_from);
    ctx.write(decay_table(rep), "uniqueness_decay.csv");
    const StateVector diff = pr.init - other;
    double closed = 0.0;
    const auto stride = static_cast<std::size_t>(lin.cfg.steps_per_period);
    for (std::size_t k = stride; k < rep.times.size(); k += stride) {
        const double exact = product_norm(apply_matrix_semigroup(rep.times[k], diff), lin.cfg.p);
        closed = std::max(closed, std::abs(rep.delta[k] - exact) / product_norm(diff, lin.cfg.p));
    }
    clear_semigroup_cache();
    ctx.add(check_le("linear difference vs e^{-tA}(init_a - init_b), relative", closed, 1e-8));
    ctx.add(check_ge("fitted decay rate (product norm)", rep.rate, 0.9 * (d - 1),
                     "fit on t >= " + fmt(fit_from)));
    ctx.add(info("fitted decay rate (velocity slot)", rep.rate_u));
    ctx.add(info("fitted decay rate (temperature slot)", rep.rate_theta));
}

void calibrate_experiment(Context& ctx) {
    const auto& cfg = ctx.cfg;
    for (int d : cfg.get_ints("calibration.d", {2, 3})) {
        const auto grid = grid_from_config(cfg, d);
        const double p = solver_p_for(cfg, d);
        ctx.log("fitting d = " + std::to_string(d) + ", p = " + fmt(p));
        const auto fit = calibrate(grid, p, cfg, ctx.opt.seed);
        clear_semigroup_cache();
        const auto& c = fit.constants;
        const std::string tag = "d=" + std::to_string(d);
        const auto path = (std::filesystem::path(ctx.opt.out_dir) / ("constants_d" + std::to_string(d) + ".ini")).string();
        emit_constants(c, path);
        ctx.report.files.push_back(path);
        const auto back = load_constants(path);
        const bool same = back.d == c.d && back.C == c.C && back.delta_d == c.delta_d && back.p == c.p;
        ctx.add(check_le(tag + ": constants file round-trip mismatch", same ? 0.0 : 1.0, 0.0));
        CsvTable tuples({"kind", "sample", "t", "p", "q", "ratio"});
        for (const auto& tp : fit.tuples) {
            tuples.row() << (tp.kind == BoundKind::dispersive ? "dispersive" : "smoothing") << tp.sample << tp.t << tp.p
                         << tp.q << tp.ratio;
        }
        ctx.write(tuples, "calibration_d" + std::to_string(d) + ".csv");
        ctx.add(info(tag + ": C", c.C));
        ctx.add(info(tag + ": delta_d", c.delta_d));
        ctx.add(info(tag + ": N", c.N()));
        ctx.add(info(tag + ": M", c.M()));
        ctx.add(info(tag + ": worst fitted ratio", fit.worst_ratio, fit.worst.sample));
        const double n_num = std::pow(c.C, 2.0 / p) * (gamma_integral_numeric(c.theta_exp(), c.beta()) + 1.0 / c.beta());
        const double m_num = std::pow(c.C, 1.0 / p + 1.0 / d) *
                             (gamma_integral_numeric(c.theta_tilde(), c.beta_tilde()) + 1.0 / c.beta_tilde());
        ctx.add(check_le(tag + ": N vs numeric Gamma integral, relative", std::abs(c.N() - n_num) / n_num, 1e-6));
        ctx.add(check_le(tag + ": M vs numeric Gamma integral, relative", std::abs(c.M() - m_num) / m_num, 1e-6));
    }
    const auto thetas = cfg.get_doubles("gamma.theta", {0.75, 0.875});
    const auto betas = cfg.get_doubles("gamma.beta", {2.5, 2.6875});
    if (thetas.size() != betas.size()) throw FormatError("gamma.theta and gamma.beta differ in length");
    CsvTable g({"theta", "beta", "closed_form", "numeric", "relative_error"});
    double worst = 0.0;
    for (std::size_t k = 0; k < thetas.size(); ++k) {
        const double a = gamma_integral(thetas[k], betas[k]);
        const double b = gamma_integral_numeric(thetas[k], betas[k]);
        g.row() << thetas[k] << betas[k] << a << b << std::abs(a - b) / b;
        worst = std::max(worst, std::abs(a - b) / b);
    }
    ctx.write(g, "gamma_identity.csv");
    ctx.add(check_le("Gamma identity beta^{theta-1} Gamma(1-theta) vs numeric integral, relative", worst,
                     cfg.get_double("gamma.tol", 1e-6)));
}

}  // namespace

ExperimentReport run_experiment(const std::string& name, const Config& cfg, const RunOptions& opt) {
    Context ctx(name, cfg, opt);
    if (name == "kernel-check") {
        kernel_check(ctx);
    } else if (name == "verify-dispersive") {
        verify_bounds(ctx, BoundKind::dispersive);
    } else if (name == "verify-smoothing") {
        verify_bounds(ctx, BoundKind::smoothing);
    } else if (name == "solve-linear") {
        solve_linear_experiment(ctx);
    } else if (name == "solve-nonlinear") {
        solve_nonlinear_experiment(ctx);
    } else if (name == "periodic-linear") {
        periodic_linear_experiment(ctx);
    } else if (name == "periodic-nonlinear") {
        periodic_nonlinear_experiment(ctx);
    } else if (name == "uniqueness") {
        uniqueness_experiment_run(ctx);
    } else if (name == "calibrate") {
        calibrate_experiment(ctx);
    } else {
        throw UnknownExperiment("unknown experiment '" + name + "'; known: " +
                                boost::algorithm::join(experiment_names(), ", "));
    }
    const auto path = (std::filesystem::path(opt.out_dir) / (name + "_summary.txt")).string();
    ctx.report.files.push_back(path);
    std::ofstream(path) << ctx.report.summary();
    return ctx.report;
}

ExperimentReport run_experiments(const Config& cfg, const RunOptions& opt) {
    std::vector<std::string> names;
    const auto text = cfg.get_string("experiment.name");
    boost::algorithm::split(names, text, boost::algorithm::is_any_of(","));
    for (auto& n : names) {
        boost::algorithm::trim(n);
        if (std::find(experiment_names().begin(), experiment_names().end(), n) == experiment_names().end()) {
            throw UnknownExperiment("unknown experiment '" + n + "'; known: " +
                                    boost::algorithm::join(experiment_names(), ", "));
        }
    }
    if (names.size() == 1) return run_experiment(names.front(), cfg, opt);
    ExperimentReport all;
    all.experiment = boost::algorithm::join(names, ",");
    for (const auto& n : names) {
        auto r = run_experiment(n, cfg, opt);
        for (auto& c : r.checks) {
            c.name = n + ": " + c.name;
            all.checks.push_back(std::move(c));
        }
        all.files.insert(all.files.end(), r.files.begin(), r.files.end());
    }
    return all;
}

}  // namespace hypmild
