#pragma once

#include "hypmild/estimates.hpp"
#include "hypmild/periodic.hpp"

#include <boost/property_tree/ptree.hpp>

#include <string>
#include <vector>

namespace hypmild {

/// 17 significant digits; inf and nan spelled "inf", "-inf", "nan".
std::string format_double(double x);
/// Exact inverse of format_double; throws FormatError naming what it could not parse.
double parse_double(const std::string& text, const std::string& what = "value");

/// INI file, section [constants]. Derived quantities are written for reference and ignored on load,
/// except theta_exp which must satisfy theta_exp < 1 and match d/p.
void emit_constants(const EstimateConstants& c, const std::string& path);
EstimateConstants load_constants(const std::string& path);

/// Experiment configuration: INI sections addressed as "section.key".
class Config {
public:
    static Config load(const std::string& path);
    static Config parse(const std::string& text);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key) const;
    int get_int(const std::string& key, int fallback) const;
    /// Comma-separated list.
    std::vector<double> get_doubles(const std::string& key) const;
    std::vector<double> get_doubles(const std::string& key, const std::vector<double>& fallback) const;
    std::vector<int> get_ints(const std::string& key) const;
    std::vector<int> get_ints(const std::string& key, const std::vector<int>& fallback) const;

private:
    boost::property_tree::ptree tree_;
};

/// A CSV table with a fixed header; numbers are written with format_double.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);

    class Row {
    public:
        Row& operator<<(double x);
        Row& operator<<(int x);
        Row& operator<<(std::size_t x);
        Row& operator<<(const std::string& s);
        Row& operator<<(const char* s) { return *this << std::string(s); }

    private:
        friend class CsvTable;
        std::vector<std::string> cells_;
    };

    Row& row();
    std::size_t size() const { return rows_.size(); }
    const std::vector<std::string>& header() const { return header_; }
    std::string str() const;
    /// Writes the table; throws FormatError when the file cannot be written or a row has the wrong width.
    void write(const std::string& path) const;

private:
    std::vector<std::string> header_;
    std::vector<Row> rows_;
};

/// Columns: t, norm_u, norm_theta, product_norm for the given exponent.
CsvTable trajectory_table(const Trajectory& traj, double p);
/// Columns: r, u, theta.
CsvTable state_table(const StateVector& s);
/// Columns: iteration, diff, ratio.
CsvTable convergence_table(const ConvergenceReport& report);
/// Columns: t, delta, delta_u, delta_theta.
CsvTable decay_table(const DecayReport& report);

}  // namespace hypmild
