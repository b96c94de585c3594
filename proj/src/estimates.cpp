#include "hypmild/estimates.hpp"

#include "hypmild/error.hpp"
#include "hypmild/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hypmild {

namespace {

double inv(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

// gamma without domain checks; N evaluates it at p/3, which may fall below 1
double gamma_raw(double p, double q, double delta) {
    return 0.5 * delta * ((inv(p) - inv(q)) + 8.0 * inv(q) * (1.0 - inv(p)));
}

void require_supercritical(double p, int d, const char* what) {
    if (!(p > d)) {
        std::ostringstream os;
        os << what << ": exponent p = " << p << " must satisfy p > d = " << d
           << " (the Gamma-function bound holds only for p > d)";
        throw PreconditionViolation(os.str());
    }
}

double t_factor(double t, int d) { return std::max(std::pow(t, -0.5 * d), 1.0); }

std::string describe(const FitTuple& f) {
    std::ostringstream os;
    os << (f.kind == BoundKind::dispersive ? "dispersive" : "smoothing") << " sample=" << f.sample
       << " t=" << f.t << " p=" << f.p << " q=" << f.q << " ratio=" << f.ratio;
    return os.str();
}

}  // namespace

double EstimateConstants::gamma_pq(double p_, double q_) const { return hypmild::gamma_pq(p_, q_, *this); }
double EstimateConstants::beta() const { return d - 1 + gamma_raw(p / 3.0, p, delta_d); }
double EstimateConstants::theta_exp() const { return d / p; }
double EstimateConstants::beta_tilde() const {
    return d - 1 + 0.5 * (gamma_raw(p, p, delta_d) + gamma_raw(p / 2.0, p, delta_d));
}
double EstimateConstants::theta_tilde() const { return 0.5 * d * (1.0 / p + 1.0 / d); }
double EstimateConstants::N() const { return linear_constant_N(p, *this); }
double EstimateConstants::M() const { return smoothing_constant_M(p, *this); }

void validate(const EstimateConstants& c) {
    if (c.d < 2) throw InvalidArgument("constants: dimension d must be >= 2");
    if (!(c.C > 0.0) || !std::isfinite(c.C)) throw InvalidArgument("constants: C must be positive and finite");
    if (!(c.delta_d > 0.0) || !std::isfinite(c.delta_d)) {
        throw InvalidArgument("constants: delta_d must be positive and finite");
    }
    if (!(c.theta_exp() < 1.0)) {
        std::ostringstream os;
        os << "constants: invariant theta_exp = d/p < 1 violated (theta_exp = " << c.theta_exp()
           << "); requires p > d";
        throw PreconditionViolation(os.str());
    }
    if (!(c.theta_tilde() < 1.0)) {
        throw PreconditionViolation("constants: invariant theta_tilde = (d/2)(1/p + 1/d) < 1 violated");
    }
}

double h_d(double t, const EstimateConstants& c) {
    if (!(t > 0.0)) throw InvalidArgument("h_d: time must be positive");
    return c.C * t_factor(t, c.d);
}

double gamma_pq(double p, double q, const EstimateConstants& c) {
    if (!(p >= 1.0) || !(q >= 1.0)) throw InvalidArgument("gamma_pq: exponents must be >= 1");
    if (p > q) throw InvalidArgument("gamma_pq: requires p <= q");
    return gamma_raw(p, q, c.delta_d);
}

double gamma_integral(double theta, double beta) {
    if (!(theta < 1.0) || !(beta > 0.0)) throw InvalidArgument("gamma_integral: needs theta < 1, beta > 0");
    return std::pow(beta, theta - 1.0) * std::tgamma(1.0 - theta);
}

double linear_constant_N(double p, const EstimateConstants& c) {
    require_supercritical(p, c.d, "linear_constant_N");
    EstimateConstants at = c;
    at.p = p;
    const double beta = at.beta();
    return std::pow(c.C, 2.0 / p) * (gamma_integral(at.theta_exp(), beta) + 1.0 / beta);
}

double smoothing_constant_M(double p, const EstimateConstants& c) {
    require_supercritical(p, c.d, "smoothing_constant_M");
    EstimateConstants at = c;
    at.p = p;
    const double beta = at.beta_tilde();
    return std::pow(c.C, 1.0 / p + 1.0 / c.d) * (gamma_integral(at.theta_tilde(), beta) + 1.0 / beta);
}

bool outside_proof_exponent_range(double p) { return p < 3.0; }

const char* slot_name(Slot s) {
    switch (s) {
        case Slot::velocity: return "velocity";
        case Slot::theta: return "theta";
        case Slot::product: return "product";
    }
    return "?";
}

namespace {

BoundReport finish(double lhs_u, double lhs_theta, double rhs) {
    BoundReport r;
    r.lhs = std::max(lhs_u, lhs_theta);
    r.rhs = rhs;
    auto ratio = [rhs](double lhs) { return lhs == 0.0 ? 0.0 : lhs / rhs; };
    r.ratio = ratio(r.lhs);
    r.ratio_u = ratio(lhs_u);
    r.ratio_theta = ratio(lhs_theta);
    r.pass = r.lhs <= rhs * (1.0 + 1e-9);
    return r;
}

}  // namespace

BoundReport verify_dispersive(const StateVector& s, double t, double p, double q, const EstimateConstants& c) {
    const double gamma = gamma_pq(p, q, c);
    const double a = inv(p) - inv(q);
    const double rhs = std::pow(h_d(t, c), a) * std::exp(-t * (c.d - 1 + gamma)) * product_norm(s, p);
    const auto out = apply_matrix_semigroup(t, s);
    return finish(lp_norm(out.u, q), lp_norm(out.theta, q), rhs);
}

BoundReport verify_dispersive(const RadialField& f, double t, double p, double q, const EstimateConstants& c) {
    return verify_dispersive(StateVector(f, f), t, p, q, c);
}

BoundReport verify_smoothing(const StateVector& s, double t, double p, double q, const EstimateConstants& c) {
    if (!(p > 1.0) || std::isinf(q) || p > q) {
        throw InvalidArgument("verify_smoothing: requires 1 < p <= q < inf");
    }
    const double rate = 0.5 * (gamma_pq(q, q, c) + gamma_pq(p, q, c));
    const double a = inv(p) - inv(q) + 1.0 / c.d;
    const double rhs = std::pow(h_d(t, c), a) * std::exp(-t * (c.d - 1 + rate)) * product_norm(s, p);
    const auto out = apply_matrix_semigroup_div(t, s);
    return finish(lp_norm(out.u, q), lp_norm(out.theta, q), rhs);
}

BoundReport verify_smoothing(const RadialField& f, double t, double p, double q, const EstimateConstants& c) {
    return verify_smoothing(StateVector(f, f), t, p, q, c);
}

std::vector<ExponentPair> solver_dispersive_pairs(double p) { return {{p / 3.0, p}, {p / 2.0, p}, {p, p}}; }
std::vector<ExponentPair> solver_smoothing_pairs(double p) { return {{p / 2.0, p}, {p, p}}; }

FitResult fit_constants(const std::vector<Sample>& library, const std::vector<double>& t_grid,
                        const std::vector<ExponentPair>& pq_grid, const FitOptions& options) {
    if (library.empty()) throw InvalidArgument("fit_constants: empty sample library");
    if (t_grid.empty()) throw InvalidArgument("fit_constants: empty time grid");
    const int d = library.front().field.grid()->dimension();
    const EstimateConstants unit{d, 1.0, 1.0, options.solver_p};
    const double log_safety = std::log(options.safety);

    // log of ratio at C = 1, delta = 0, plus the coefficients of log C and delta
    struct Row {
        FitTuple tuple;
        double l0, a, g;
    };
    std::vector<Row> rows;
    auto add = [&](BoundKind kind, const Sample& s, double t, ExponentPair pq, double lhs_scalar) {
        const double base = lp_norm(s.field, pq.p);
        const double damp = std::exp(-(d - 1) * t);
        double lhs = 0.0;
        switch (options.slot) {
            case Slot::velocity: lhs = damp * lhs_scalar; break;
            case Slot::theta:
            case Slot::product: lhs = lhs_scalar; break;
        }
        if (lhs == 0.0 || base == 0.0) return;
        Row row;
        row.tuple = FitTuple{kind, s.id, t, pq.p, pq.q, 0.0};
        if (kind == BoundKind::dispersive) {
            row.a = inv(pq.p) - inv(pq.q);
            row.g = gamma_pq(pq.p, pq.q, unit);
        } else {
            row.a = inv(pq.p) - inv(pq.q) + 1.0 / d;
            row.g = 0.5 * (gamma_pq(pq.q, pq.q, unit) + gamma_pq(pq.p, pq.q, unit));
        }
        row.l0 = std::log(lhs) - std::log(base) - row.a * std::log(t_factor(t, d)) + (d - 1) * t;
        rows.push_back(row);
    };
    for (double t : t_grid) {
        for (const auto& s : library) {
            const auto image = apply_scalar_semigroup(t, s.field);
            for (const auto& pq : pq_grid) add(BoundKind::dispersive, s, t, pq, lp_norm(image, pq.q));
            if (!options.smoothing_pq.empty()) {
                const auto div_image = apply_scalar_semigroup_div(t, s.field);
                for (const auto& pq : options.smoothing_pq) {
                    add(BoundKind::smoothing, s, t, pq, lp_norm(div_image, pq.q));
                }
            }
        }
    }

    constexpr double kExact = 1e-9;  // p = q, gamma = 0 rows: plain contraction, ratio <= 1
    double delta = options.delta_cap;
    for (auto& row : rows) {
        if (row.a == 0.0 && row.g == 0.0) {
            if (row.l0 > kExact) {
                row.tuple.ratio = std::exp(row.l0);
                throw InfeasibleFit("fit_constants: ratio exceeds 1 for every choice of constants at " +
                                    describe(row.tuple));
            }
        } else if (row.a == 0.0) {
            const double bound = (log_safety - row.l0) / (row.tuple.t * row.g);
            if (!(bound > 0.0)) {
                row.tuple.ratio = std::exp(row.l0);
                throw InfeasibleFit(std::string("fit_constants: no positive delta_d satisfies the ") + slot_name(options.slot) +
                                    " slot at " + describe(row.tuple));
            }
            delta = std::min(delta, bound);
        }
    }
    double log_c = -std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
        if (row.a > 0.0) {
            log_c = std::max(log_c, (row.l0 + row.tuple.t * delta * row.g - log_safety) / row.a);
        }
    }
    FitResult result;
    result.constants = EstimateConstants{d, std::isfinite(log_c) ? std::exp(log_c) : 1.0, delta, options.solver_p};
    const double lc = std::log(result.constants.C);
    for (auto& row : rows) {
        row.tuple.ratio = std::exp(row.l0 - row.a * lc + row.tuple.t * delta * row.g);
        result.tuples.push_back(row.tuple);
        if (row.tuple.ratio >= result.worst_ratio) {
            result.worst_ratio = row.tuple.ratio;
            result.worst = row.tuple;
        }
    }
    return result;
}

}  // namespace hypmild
