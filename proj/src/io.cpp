#include "hypmild/io.hpp"

#include "hypmild/error.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hypmild {

namespace pt = boost::property_tree;

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& text, const std::string& what) {
    const std::string s = boost::algorithm::trim_copy(text);
    if (s == "inf" || s == "+inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    if (s == "nan") return std::nan("");
    double x = 0.0;
    const char* first = s.data();
    if (!s.empty() && s.front() == '+') ++first;
    const auto res = std::from_chars(first, s.data() + s.size(), x);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw FormatError(what + ": cannot parse '" + text + "' as a number");
    }
    return x;
}

namespace {

pt::ptree read_ini_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open '" + path + "'");
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw FormatError(path + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    return tree;
}

std::string required(const pt::ptree& tree, const std::string& key, const std::string& where) {
    const auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) throw FormatError(where + ": missing key '" + key + "'");
    return *v;
}

}  // namespace

void emit_constants(const EstimateConstants& c, const std::string& path) {
    validate(c);
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write constants file '" + path + "'");
    out << "[constants]\n";
    out << "d = " << c.d << '\n';
    out << "p = " << format_double(c.p) << '\n';
    out << "C = " << format_double(c.C) << '\n';
    out << "delta_d = " << format_double(c.delta_d) << '\n';
    out << "\n[derived]\n";
    out << "theta_exp = " << format_double(c.theta_exp()) << '\n';
    out << "beta = " << format_double(c.beta()) << '\n';
    out << "theta_tilde = " << format_double(c.theta_tilde()) << '\n';
    out << "beta_tilde = " << format_double(c.beta_tilde()) << '\n';
    out << "N = " << format_double(c.N()) << '\n';
    out << "M = " << format_double(c.M()) << '\n';
    if (!out) throw FormatError("failed writing constants file '" + path + "'");
}

EstimateConstants load_constants(const std::string& path) {
    const auto tree = read_ini_file(path);
    const std::string where = "constants file '" + path + "'";
    EstimateConstants c;
    const double d = parse_double(required(tree, "constants.d", where), "constants.d");
    if (d != std::floor(d) || d < 2 || d > 64) throw FormatError(where + ": d must be an integer >= 2");
    c.d = static_cast<int>(d);
    c.p = parse_double(required(tree, "constants.p", where), "constants.p");
    c.C = parse_double(required(tree, "constants.C", where), "constants.C");
    c.delta_d = parse_double(required(tree, "constants.delta_d", where), "constants.delta_d");
    if (const auto th = tree.get_optional<std::string>(pt::ptree::path_type("derived.theta_exp", '.'))) {
        const double theta = parse_double(*th, "derived.theta_exp");
        if (!(theta < 1.0)) {
            std::ostringstream os;
            os << where << ": invariant theta_exp = d/p < 1 violated (theta_exp = " << format_double(theta) << ")";
            throw PreconditionViolation(os.str());
        }
        if (std::abs(theta - c.theta_exp()) > 1e-12) {
            throw FormatError(where + ": theta_exp does not equal d/p");
        }
    }
    validate(c);
    return c;
}

Config Config::load(const std::string& path) {
    Config c;
    c.tree_ = read_ini_file(path);
    return c;
}

Config Config::parse(const std::string& text) {
    std::istringstream in(text);
    Config c;
    try {
        pt::read_ini(in, c.tree_);
    } catch (const pt::ini_parser_error& e) {
        throw FormatError("config: " + e.message());
    }
    return c;
}

bool Config::has(const std::string& key) const {
    return static_cast<bool>(tree_.get_optional<std::string>(pt::ptree::path_type(key, '.')));
}

std::string Config::get_string(const std::string& key) const {
    return boost::algorithm::trim_copy(required(tree_, key, "config"));
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    return has(key) ? get_string(key) : fallback;
}

double Config::get_double(const std::string& key) const { return parse_double(get_string(key), key); }

double Config::get_double(const std::string& key, double fallback) const {
    return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
    const double x = get_double(key);
    if (x != std::floor(x) || std::abs(x) > 1e9) throw FormatError(key + ": expected an integer");
    return static_cast<int>(x);
}

int Config::get_int(const std::string& key, int fallback) const { return has(key) ? get_int(key) : fallback; }

std::vector<double> Config::get_doubles(const std::string& key) const {
    std::vector<std::string> parts;
    const std::string text = get_string(key);
    boost::algorithm::split(parts, text, boost::algorithm::is_any_of(","));
    std::vector<double> out;
    for (const auto& part : parts) out.push_back(parse_double(part, key));
    return out;
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    return has(key) ? get_doubles(key) : fallback;
}

std::vector<int> Config::get_ints(const std::string& key) const {
    std::vector<int> out;
    for (double x : get_doubles(key)) {
        if (x != std::floor(x) || std::abs(x) > 1e9) throw FormatError(key + ": expected integers");
        out.push_back(static_cast<int>(x));
    }
    return out;
}

std::vector<int> Config::get_ints(const std::string& key, const std::vector<int>& fallback) const {
    return has(key) ? get_ints(key) : fallback;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable::Row& CsvTable::Row::operator<<(double x) {
    cells_.push_back(format_double(x));
    return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(int x) {
    cells_.push_back(std::to_string(x));
    return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(std::size_t x) {
    cells_.push_back(std::to_string(x));
    return *this;
}

CsvTable::Row& CsvTable::Row::operator<<(const std::string& s) {
    if (s.find_first_of(",\"\n") != std::string::npos) {
        cells_.push_back('"' + boost::algorithm::replace_all_copy(s, "\"", "\"\"") + '"');
    } else {
        cells_.push_back(s);
    }
    return *this;
}

CsvTable::Row& CsvTable::row() {
    rows_.emplace_back();
    return rows_.back();
}

std::string CsvTable::str() const {
    std::ostringstream os;
    os << boost::algorithm::join(header_, ",") << '\n';
    for (const auto& r : rows_) {
        if (r.cells_.size() != header_.size()) {
            throw FormatError("csv row has " + std::to_string(r.cells_.size()) + " cells, header has " +
                              std::to_string(header_.size()));
        }
        os << boost::algorithm::join(r.cells_, ",") << '\n';
    }
    return os.str();
}

void CsvTable::write(const std::string& path) const {
    const std::string text = str();
    std::ofstream out(path);
    if (!out) throw FormatError("cannot write '" + path + "'");
    out << text;
    if (!out) throw FormatError("failed writing '" + path + "'");
}

CsvTable trajectory_table(const Trajectory& traj, double p) {
    CsvTable t({"t", "norm_u", "norm_theta", "product_norm"});
    for (std::size_t k = 0; k < traj.size(); ++k) {
        const double nu = lp_norm(traj[k].u, p), nt = lp_norm(traj[k].theta, p);
        t.row() << traj.time(k) << nu << nt << std::max(nu, nt);
    }
    return t;
}

CsvTable state_table(const StateVector& s) {
    CsvTable t({"r", "u", "theta"});
    const auto& r = s.grid()->nodes();
    for (std::size_t i = 0; i < r.size(); ++i) t.row() << r[i] << s.u[i] << s.theta[i];
    return t;
}

CsvTable convergence_table(const ConvergenceReport& report) {
    CsvTable t({"iteration", "diff", "ratio"});
    for (std::size_t k = 0; k < report.diffs.size(); ++k) {
        const double ratio = k == 0 || k > report.ratios.size() ? std::nan("") : report.ratios[k - 1];
        t.row() << k + 1 << report.diffs[k] << ratio;
    }
    return t;
}

CsvTable decay_table(const DecayReport& report) {
    CsvTable t({"t", "delta", "delta_u", "delta_theta"});
    for (std::size_t k = 0; k < report.times.size(); ++k) {
        t.row() << report.times[k] << report.delta[k] << report.delta_u[k] << report.delta_theta[k];
    }
    return t;
}

}  // namespace hypmild
