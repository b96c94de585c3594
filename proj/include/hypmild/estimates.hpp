#pragma once

#include "hypmild/samples.hpp"
#include "hypmild/state.hpp"

#include <string>
#include <vector>

namespace hypmild {

/// Kernel-bound prefactor C and dispersion constant delta_d for dimension d, plus the
/// solver exponent p at which the derived quantities are evaluated.
struct EstimateConstants {
    int d = 3;
    double C = 1.0;
    double delta_d = 1.0;
    double p = 4.0;

    double gamma_pq(double p_, double q_) const;
    double beta() const;         // d - 1 + gamma_{p/3, p}
    double theta_exp() const;    // d / p
    double beta_tilde() const;   // d - 1 + (gamma_{p,p} + gamma_{p/2,p}) / 2
    double theta_tilde() const;  // (d/2)(1/p + 1/d)
    double N() const;
    double M() const;
};

/// Throws InvalidArgument / PreconditionViolation naming the violated invariant.
void validate(const EstimateConstants& c);

/// C max(t^{-d/2}, 1).
double h_d(double t, const EstimateConstants& c);
/// (delta_d / 2)[(1/p - 1/q) + (8/q)(1 - 1/p)] with 1/inf = 0; requires 1 <= p <= q.
double gamma_pq(double p, double q, const EstimateConstants& c);
/// int_0^inf s^{-theta} e^{-beta s} ds = beta^{theta - 1} Gamma(1 - theta).
double gamma_integral(double theta, double beta);
/// C^{2/p}(beta^{theta-1} Gamma(1-theta) + 1/beta), beta = d-1+gamma_{p/3,p}, theta = d/p.
double linear_constant_N(double p, const EstimateConstants& c);
/// C^{1/p+1/d}(beta~^{theta~-1} Gamma(1-theta~) + 1/beta~).
double smoothing_constant_M(double p, const EstimateConstants& c);
/// True for p < 3, where the exponent p/3 used for N is not a Lebesgue exponent.
bool outside_proof_exponent_range(double p);

enum class Slot { velocity, theta, product };
const char* slot_name(Slot s);

struct BoundReport {
    double lhs = 0.0;
    double rhs = 0.0;
    double ratio = 0.0;
    bool pass = true;
    double ratio_u = 0.0;      // velocity slot alone
    double ratio_theta = 0.0;  // temperature slot alone
};

/// |e^{-tA} s|_q against [h_d(t)]^{1/p-1/q} e^{-t(d-1+gamma_{p,q})} |s|_p.
BoundReport verify_dispersive(const StateVector& s, double t, double p, double q, const EstimateConstants& c);
/// Same, with the state (f, f).
BoundReport verify_dispersive(const RadialField& f, double t, double p, double q, const EstimateConstants& c);
/// |e^{-tA} div s|_q against [h_d(t)]^{1/p-1/q+1/d} e^{-t(d-1+(gamma_{q,q}+gamma_{p,q})/2)} |s|_p.
BoundReport verify_smoothing(const StateVector& s, double t, double p, double q, const EstimateConstants& c);
BoundReport verify_smoothing(const RadialField& f, double t, double p, double q, const EstimateConstants& c);

struct ExponentPair {
    double p;
    double q;
};

enum class BoundKind { dispersive, smoothing };

struct FitTuple {
    BoundKind kind = BoundKind::dispersive;
    std::string sample;
    double t = 0.0;
    double p = 0.0;
    double q = 0.0;
    double ratio = 0.0;
};

struct FitOptions {
    Slot slot = Slot::velocity;
    double safety = 0.9;          // fitted ratios are pushed to at most this value
    double delta_cap = 50.0;
    double solver_p = 4.0;        // stored in the returned constants
    std::vector<ExponentPair> smoothing_pq;
};

struct FitResult {
    EstimateConstants constants;
    double worst_ratio = 0.0;
    FitTuple worst;
    std::vector<FitTuple> tuples;
};

/// Smallest C and largest delta_d making every (sample, t, p, q) ratio at most `safety`.
/// Tuples whose ratio does not depend on either constant (p = q with gamma coefficient 0)
/// only need ratio <= 1. Throws InfeasibleFit naming the first tuple no positive delta_d satisfies.
FitResult fit_constants(const std::vector<Sample>& library, const std::vector<double>& t_grid,
                        const std::vector<ExponentPair>& pq_grid, const FitOptions& options = {});

/// Exponent pairs used by the solver bounds at exponent p: dispersive (p/3,p), (p/2,p), (p,p).
std::vector<ExponentPair> solver_dispersive_pairs(double p);
/// Smoothing pairs (p/2, p), (p, p).
std::vector<ExponentPair> solver_smoothing_pairs(double p);

}  // namespace hypmild
