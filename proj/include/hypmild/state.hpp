#pragma once

#include "hypmild/geometry.hpp"

#include <optional>
#include <vector>

namespace hypmild {

/// The pair (u, theta); the velocity slot u is the radial surrogate of the vector field.
struct StateVector {
    RadialField u;
    RadialField theta;

    StateVector(RadialField u_, RadialField theta_);
    static StateVector zeros(const GridPtr& grid);

    const GridPtr& grid() const { return u.grid(); }

    StateVector& operator+=(const StateVector& other);
    StateVector& operator-=(const StateVector& other);
    StateVector& operator*=(double s);
    friend StateVector operator+(StateVector a, const StateVector& b) { return a += b; }
    friend StateVector operator-(StateVector a, const StateVector& b) { return a -= b; }
    friend StateVector operator*(double s, StateVector a) { return a *= s; }
};

/// Product norm max(|u|_p, |theta|_p).
double product_norm(const StateVector& s, double p);

/// Uniformly sampled states t_k = k * dt, k = 0..K.
class Trajectory {
public:
    Trajectory(double dt, std::vector<StateVector> states);

    double dt() const { return dt_; }
    std::size_t size() const { return states_.size(); }
    double time(std::size_t k) const { return dt_ * static_cast<double>(k); }
    double horizon() const { return time(states_.size() - 1); }
    const StateVector& operator[](std::size_t k) const { return states_[k]; }
    StateVector& operator[](std::size_t k) { return states_[k]; }
    const std::vector<StateVector>& states() const { return states_; }
    const GridPtr& grid() const { return states_.front().grid(); }

    /// Index of time t; throws GridMismatch when t is not a node.
    std::size_t index_of(double t) const;

private:
    double dt_;
    std::vector<StateVector> states_;
};

/// sup_k of the product norm.
double sup_norm(const Trajectory& traj, double p);
/// sup_k |traj_k|_p of one slot.
double sup_norm_u(const Trajectory& traj, double p);
double sup_norm_theta(const Trajectory& traj, double p);
/// sup_k product norm of a - b.
double sup_distance(const Trajectory& a, const Trajectory& b, double p);

/// T-periodic scalar waveform a0 + sum_k (a_k cos(2 pi k t / T) + b_k sin(2 pi k t / T)).
class Waveform {
public:
    static Waveform constant(double value);
    Waveform(double period, double a0, std::vector<double> cos_coeffs, std::vector<double> sin_coeffs);

    double period() const { return period_; }
    bool is_constant() const { return cos_.empty() && sin_.empty(); }
    double operator()(double t) const;
    /// max |w(t)| bound from the coefficients.
    double bound() const;

private:
    double period_ = 1.0;
    double a0_ = 0.0;
    std::vector<double> cos_;
    std::vector<double> sin_;
};

/// profile(r) * waveform(t).
struct ModulatedField {
    RadialField profile;
    Waveform wave;

    RadialField at(double t) const { return profile * wave(t); }
    /// sup_t |profile * wave(t)|_p, sampled over one period.
    double sup_norm(double p) const;
};

struct ForcingSpec {
    ModulatedField F;  // scalar stand-in for the tensor forcing
    ModulatedField f;
    ModulatedField h;
    double period = 1.0;

    static ForcingSpec zeros(const GridPtr& grid, double period = 1.0);
    bool is_periodic_with(double T) const;
    /// sup_t max(|F|_q, |f|_q): the norm of (F, f).
    double pair_norm(double q) const;
};

}  // namespace hypmild
