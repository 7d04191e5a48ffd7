#include "riskpen/scenario.hpp"

#include "riskpen/error.hpp"
#include "riskpen/numfmt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

namespace riskpen {

namespace {

constexpr const char* kTableTag = "riskpen-scenarios";
constexpr int kTableVersion = 1;

double uniform_pm1(std::mt19937_64& engine) {
    const std::uint64_t bits = engine() >> 11;
    return -1.0 + 2.0 * (static_cast<double>(bits) * 0x1.0p-53);
}

double psi_at(const BoundSpec& spec, double s, double shift) {
    if (spec.kind == BoundSpec::Kind::Affine) {
        return spec.intercept + spec.slope * s + shift;
    }
    return spec.value + shift;
}

} // namespace

void ScenarioSet::validate() const {
    const std::size_t count = weights.size();
    require(count > 0, ErrorKind::InvalidArgument, "scenario set is empty");
    require(conductivities.size() == count && node_bounds.size() == count &&
                cell_bounds.size() == count && scalar_bounds.size() == count,
            ErrorKind::ShapeMismatch, "scenario set: per-scenario arrays disagree in count");
    require(a_min > 0.0, ErrorKind::InvalidArgument, "scenario set: a_min must be positive");
    double total = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        require(weights[k] >= 0.0 && std::isfinite(weights[k]), ErrorKind::InvalidArgument,
                "scenario " + std::to_string(k) + ": weight must be nonnegative");
        total += weights[k];
        require(conductivities[k].size() == n_interior + 1 && node_bounds[k].size() == n_interior &&
                    cell_bounds[k].size() == n_interior + 1,
                ErrorKind::ShapeMismatch, "scenario " + std::to_string(k) + ": field length mismatch");
        for (double a : conductivities[k]) {
            require(a >= a_min, ErrorKind::EllipticityViolation,
                    "scenario " + std::to_string(k) + ": conductivity below a_min");
        }
    }
    require(std::abs(total - 1.0) <= 1e-12, ErrorKind::InvalidArgument,
            "scenario weights sum to " + format_real(total) + ", expected 1");
}

ScenarioSet sample(const Grid& grid, const ScenarioConfig& config) {
    require(config.n_scenarios > 0, ErrorKind::InvalidArgument, "n_scenarios must be positive");
    require(config.a_min > 0.0, ErrorKind::InvalidArgument, "a_min must be positive");
    require(config.a0 >= config.a_min, ErrorKind::InvalidArgument, "a0 must be at least a_min");
    require(config.bound_spec.bound_sigma >= 0.0, ErrorKind::InvalidArgument,
            "bound_sigma must be nonnegative");

    if (config.bound_spec.kind == BoundSpec::Kind::File) {
        ScenarioSet set = load_scenario_table(config.bound_spec.path);
        require(set.n_interior == grid.size(), ErrorKind::ShapeMismatch,
                "scenario table n_interior " + std::to_string(set.n_interior) +
                    " does not match grid " + std::to_string(grid.size()));
        return set;
    }

    const std::size_t n = grid.size();
    const std::size_t count = config.n_scenarios;
    ScenarioSet set;
    set.n_interior = n;
    set.seed = config.seed;
    set.a_min = config.a_min;
    set.weights.assign(count, 1.0 / static_cast<double>(count));
    set.conductivities.resize(count);
    set.node_bounds.resize(count);
    set.cell_bounds.resize(count);
    set.scalar_bounds.resize(count);

    std::mt19937_64 engine(config.seed);
    std::vector<double> xi(config.sigma.size());
    for (std::size_t k = 0; k < count; ++k) {
        for (double& x : xi) {
            x = uniform_pm1(engine);
        }
        auto& a = set.conductivities[k];
        a.resize(n + 1);
        for (std::size_t c = 0; c <= n; ++c) {
            const double s = grid.cell_midpoint(c);
            double value = config.a0;
            for (std::size_t m = 0; m < xi.size(); ++m) {
                value += xi[m] * config.sigma[m] * std::sin(static_cast<double>(m + 1) * std::numbers::pi * s);
            }
            a[c] = std::max(value, config.a_min);
        }

        const BoundSpec& spec = config.bound_spec;
        const double shift = spec.bound_sigma > 0.0 ? spec.bound_sigma * uniform_pm1(engine) : 0.0;
        auto& nb = set.node_bounds[k];
        nb.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            nb[j] = psi_at(spec, grid.node(j), shift);
        }
        auto& cb = set.cell_bounds[k];
        cb.resize(n + 1);
        for (std::size_t c = 0; c <= n; ++c) {
            cb[c] = psi_at(spec, grid.cell_midpoint(c), shift);
        }
        set.scalar_bounds[k] = psi_at(spec, 0.5, shift);
    }
    return set;
}

double empirical_expectation(const ScenarioSet& set, std::span<const double> values) {
    require(values.size() == set.size(), ErrorKind::ShapeMismatch,
            "expectation: expected " + std::to_string(set.size()) + " values, got " +
                std::to_string(values.size()));
    // Compensated dot product: error-free products via fma, two-sum accumulation.
    double sum = 0.0;
    double carry = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double p = set.weights[k] * values[k];
        const double p_err = std::fma(set.weights[k], values[k], -p);
        const double t = sum + p;
        const double z = t - sum;
        carry += (sum - (t - z)) + (p - z) + p_err;
        sum = t;
    }
    return sum + carry;
}

void write_scenario_table(std::ostream& out, const ScenarioSet& set) {
    out << "# " << kTableTag << ' ' << kTableVersion << " n_interior " << set.n_interior
        << " n_scenarios " << set.size() << " seed " << set.seed << " a_min " << format_real(set.a_min)
        << " generator " << set.generator << '\n';
    for (std::size_t k = 0; k < set.size(); ++k) {
        out << format_real(set.weights[k]);
        for (double a : set.conductivities[k]) out << ' ' << format_real(a);
        for (double b : set.node_bounds[k]) out << ' ' << format_real(b);
        for (double b : set.cell_bounds[k]) out << ' ' << format_real(b);
        out << ' ' << format_real(set.scalar_bounds[k]) << '\n';
    }
}

ScenarioSet read_scenario_table(std::istream& in) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorKind::Io, "scenario table: missing header");
    std::istringstream header(line);
    std::string hash, tag, key;
    int version = 0;
    header >> hash >> tag >> version;
    require(hash == "#" && tag == kTableTag, ErrorKind::Io, "scenario table: bad header tag");
    require(version == kTableVersion, ErrorKind::Io,
            "scenario table: unsupported version " + std::to_string(version));

    ScenarioSet set;
    std::size_t count = 0;
    std::string a_min_text;
    while (header >> key) {
        if (key == "n_interior") header >> set.n_interior;
        else if (key == "n_scenarios") header >> count;
        else if (key == "seed") header >> set.seed;
        else if (key == "a_min") header >> a_min_text;
        else if (key == "generator") header >> set.generator;
        else throw Error(ErrorKind::Io, "scenario table: unknown header key '" + key + "'");
    }
    require(set.n_interior > 0 && count > 0, ErrorKind::Io, "scenario table: header lacks sizes");
    require(parse_real(a_min_text, set.a_min), ErrorKind::Io, "scenario table: bad a_min");

    const std::size_t n = set.n_interior;
    const std::size_t row_len = 1 + (n + 1) + n + (n + 1) + 1;
    for (std::size_t k = 0; k < count; ++k) {
        require(static_cast<bool>(std::getline(in, line)), ErrorKind::Io,
                "scenario table: expected " + std::to_string(count) + " rows, got " + std::to_string(k));
        std::istringstream row(line);
        std::vector<double> values;
        values.reserve(row_len);
        std::string token;
        while (row >> token) {
            double v = 0.0;
            require(parse_real(token, v), ErrorKind::Io,
                    "scenario table row " + std::to_string(k) + ": bad number '" + token + "'");
            values.push_back(v);
        }
        require(values.size() == row_len, ErrorKind::Io,
                "scenario table row " + std::to_string(k) + ": expected " + std::to_string(row_len) +
                    " columns, got " + std::to_string(values.size()));
        auto it = values.begin();
        set.weights.push_back(*it++);
        set.conductivities.emplace_back(it, it + static_cast<std::ptrdiff_t>(n + 1));
        it += static_cast<std::ptrdiff_t>(n + 1);
        set.node_bounds.emplace_back(it, it + static_cast<std::ptrdiff_t>(n));
        it += static_cast<std::ptrdiff_t>(n);
        set.cell_bounds.emplace_back(it, it + static_cast<std::ptrdiff_t>(n + 1));
        it += static_cast<std::ptrdiff_t>(n + 1);
        set.scalar_bounds.push_back(*it);
    }
    set.validate();
    return set;
}

ScenarioSet load_scenario_table(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorKind::Io, "cannot open scenario table '" + path + "'");
    return read_scenario_table(in);
}

} // namespace riskpen
