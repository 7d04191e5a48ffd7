#include "riskpen/config.hpp"

#include "riskpen/error.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace riskpen {

using nlohmann::json;

GridFunction ProfileSpec::sample(const Grid& grid) const {
    GridFunction out(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double s = grid.node(j);
        switch (kind) {
        case Kind::Constant: out[j] = value; break;
        case Kind::Affine: out[j] = intercept + slope * s; break;
        case Kind::Sine: out[j] = amplitude * std::sin(std::numbers::pi * s); break;
        }
    }
    return out;
}

RunConfig::RunConfig() {
    scenarios.n_scenarios = 16;
    scenarios.seed = 42;
    scenarios.a0 = 1.0;
    scenarios.sigma = {0.3, 0.15};
    scenarios.a_min = 0.1;
    scenarios.bound_spec.kind = BoundSpec::Kind::Constant;
    scenarios.bound_spec.value = 0.05;
    gamma_schedule = GammaSchedule::decades(0, 6).values();
    solver.record_log = true;
}

namespace {

// Walks one JSON object, collecting type errors and unknown keys under a dotted path.
class Reader {
public:
    Reader(const json& node, std::string prefix, std::vector<std::string>& errors)
        : node_(node), prefix_(std::move(prefix)), errors_(errors) {
        if (!node_.is_object()) {
            errors_.push_back(label("") + "expected an object");
            valid_ = false;
        }
    }

    template <typename T>
    void get(const std::string& key, T& out) {
        if (!valid_ || !node_.contains(key)) return;
        seen_.insert(key);
        try {
            out = node_.at(key).get<T>();
        } catch (const json::exception&) {
            errors_.push_back(label(key) + "has the wrong type");
        }
    }

    [[nodiscard]] bool has(const std::string& key) const { return valid_ && node_.contains(key); }
    const json& raw(const std::string& key) {
        seen_.insert(key);
        return node_.at(key);
    }

    std::string label(const std::string& key) const {
        std::string path = prefix_;
        if (!key.empty()) path += (path.empty() ? "" : ".") + key;
        return path.empty() ? "config: " : path + ": ";
    }

    std::string path_of(const std::string& key) const { return prefix_.empty() ? key : prefix_ + "." + key; }

    void finish() {
        if (!valid_) return;
        for (const auto& [key, value] : node_.items()) {
            if (!seen_.count(key)) errors_.push_back(label(key) + "unknown key");
        }
    }

private:
    const json& node_;
    std::string prefix_;
    std::vector<std::string>& errors_;
    std::set<std::string> seen_;
    bool valid_ = true;
};

template <typename Fn>
void with_child(Reader& parent, const std::string& key, std::vector<std::string>& errors, Fn&& fn) {
    if (!parent.has(key)) return;
    Reader child(parent.raw(key), parent.path_of(key), errors);
    fn(child);
    child.finish();
}

void read_profile(Reader& r, ProfileSpec& p, std::vector<std::string>& errors) {
    std::string type;
    r.get("type", type);
    if (type == "constant") p.kind = ProfileSpec::Kind::Constant;
    else if (type == "affine") p.kind = ProfileSpec::Kind::Affine;
    else if (type == "sine" || type.empty()) p.kind = ProfileSpec::Kind::Sine;
    else errors.push_back(r.label("type") + "expected constant | affine | sine, got '" + type + "'");
    r.get("value", p.value);
    r.get("intercept", p.intercept);
    r.get("slope", p.slope);
    r.get("amplitude", p.amplitude);
}

const char* profile_name(ProfileSpec::Kind k) {
    switch (k) {
    case ProfileSpec::Kind::Constant: return "constant";
    case ProfileSpec::Kind::Affine: return "affine";
    case ProfileSpec::Kind::Sine: return "sine";
    }
    return "sine";
}

const char* bound_name(BoundSpec::Kind k) {
    switch (k) {
    case BoundSpec::Kind::Constant: return "constant";
    case BoundSpec::Kind::Affine: return "affine";
    case BoundSpec::Kind::File: return "file";
    }
    return "constant";
}

} // namespace

RunConfig RunConfig::from_json(const json& root) {
    RunConfig cfg;
    std::vector<std::string> errors;
    Reader top(root, "", errors);

    with_child(top, "problem", errors, [&](Reader& r) {
        auto& p = cfg.problem;
        r.get("n_interior", p.n_interior);
        r.get("mu_tik", p.mu_tik);
        with_child(r, "target", errors, [&](Reader& t) { read_profile(t, p.target, errors); });
        with_child(r, "control_bounds", errors, [&](Reader& b) {
            b.get("lo", p.control_lo);
            b.get("hi", p.control_hi);
        });
        with_child(r, "constraint", errors, [&](Reader& c) {
            c.get("kind", p.constraint_kind);
            c.get("epsilon", p.epsilon);
            c.get("delta", p.delta);
        });
        r.get("tol_feas", p.tol_feas);
        r.get("initial_control", p.initial_control);
    });

    with_child(top, "scenarios", errors, [&](Reader& r) {
        auto& s = cfg.scenarios;
        r.get("n_scenarios", s.n_scenarios);
        r.get("seed", s.seed);
        r.get("a0", s.a0);
        r.get("sigma", s.sigma);
        r.get("a_min", s.a_min);
        std::string generator = kScenarioGenerator;
        r.get("generator", generator);
        if (generator != kScenarioGenerator) {
            errors.push_back(r.label("generator") + "only " + std::string(kScenarioGenerator) + " is available");
        }
        with_child(r, "bound_spec", errors, [&](Reader& b) {
            std::string type;
            b.get("type", type);
            auto& spec = s.bound_spec;
            if (type == "constant" || type.empty()) spec.kind = BoundSpec::Kind::Constant;
            else if (type == "affine") spec.kind = BoundSpec::Kind::Affine;
            else if (type == "file") spec.kind = BoundSpec::Kind::File;
            else errors.push_back(b.label("type") + "expected constant | affine | file, got '" + type + "'");
            b.get("value", spec.value);
            b.get("intercept", spec.intercept);
            b.get("slope", spec.slope);
            b.get("bound_sigma", spec.bound_sigma);
            b.get("path", spec.path);
        });
    });

    with_child(top, "risk", errors, [&](Reader& r) {
        r.get("risk", cfg.risk.risk);
        r.get("alpha", cfg.risk.alpha);
        r.get("avar_mode", cfg.risk.avar_mode);
        r.get("avar_tau", cfg.risk.avar_tau);
    });

    with_child(top, "solver", errors, [&](Reader& r) {
        auto& o = cfg.solver;
        r.get("max_iters", o.max_iters);
        r.get("tol_stationarity", o.tol_stationarity);
        std::string rule = o.step_rule == SolveOptions::StepRule::Fixed ? "fixed" : "backtracking";
        r.get("step_rule", rule);
        if (rule == "fixed") o.step_rule = SolveOptions::StepRule::Fixed;
        else if (rule == "backtracking") o.step_rule = SolveOptions::StepRule::Backtracking;
        else errors.push_back(r.label("step_rule") + "expected fixed | backtracking");
        r.get("armijo", o.armijo);
        r.get("shrink", o.shrink);
        r.get("accelerated", o.accelerated);
        r.get("subgradient_scale", o.subgradient_scale);
        r.get("power_iters", o.power_iters);
    });

    if (top.has("gamma_schedule")) {
        const json& g = top.raw("gamma_schedule");
        if (g.is_array()) {
            try {
                cfg.gamma_schedule = g.get<std::vector<double>>();
            } catch (const json::exception&) {
                errors.emplace_back("gamma_schedule: expected an array of numbers");
            }
        } else {
            Reader r(g, "gamma_schedule", errors);
            int first = 0, last = 6, per = 1;
            r.get("first_exponent", first);
            r.get("last_exponent", last);
            r.get("per_decade", per);
            r.finish();
            if (per <= 0 || last < first) {
                errors.emplace_back("gamma_schedule: need per_decade > 0 and last_exponent >= first_exponent");
            } else {
                cfg.gamma_schedule = GammaSchedule::decades(first, last, per).values();
            }
        }
    }

    with_child(top, "path", errors, [&](Reader& r) {
        r.get("warm_start", cfg.path.warm_start);
        r.get("bound_factor", cfg.path.bound_factor);
        r.get("concentration_q", cfg.path.concentration_q);
    });
    with_child(top, "feasible_reference", errors, [&](Reader& r) {
        r.get("mode", cfg.feasible_reference.mode);
        r.get("bisection_steps", cfg.feasible_reference.bisection_steps);
    });
    top.get("output_dir", cfg.output_dir);
    top.finish();

    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw Error(ErrorKind::Config, msg);
    }
    cfg.validate();
    return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), ErrorKind::Io, "cannot open config '" + path + "'");
    json root;
    try {
        root = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Config, "config '" + path + "' is not valid JSON: " + e.what());
    }
    return from_json(root);
}

json RunConfig::to_json() const {
    json target = {{"type", profile_name(problem.target.kind)}};
    switch (problem.target.kind) {
    case ProfileSpec::Kind::Constant: target["value"] = problem.target.value; break;
    case ProfileSpec::Kind::Affine:
        target["intercept"] = problem.target.intercept;
        target["slope"] = problem.target.slope;
        break;
    case ProfileSpec::Kind::Sine: target["amplitude"] = problem.target.amplitude; break;
    }
    const auto& b = scenarios.bound_spec;
    json bound = {{"type", bound_name(b.kind)}};
    switch (b.kind) {
    case BoundSpec::Kind::Constant:
        bound["value"] = b.value;
        bound["bound_sigma"] = b.bound_sigma;
        break;
    case BoundSpec::Kind::Affine:
        bound["intercept"] = b.intercept;
        bound["slope"] = b.slope;
        bound["bound_sigma"] = b.bound_sigma;
        break;
    case BoundSpec::Kind::File: bound["path"] = b.path; break;
    }
    return json{
        {"problem",
         {{"n_interior", problem.n_interior},
          {"mu_tik", problem.mu_tik},
          {"target", target},
          {"control_bounds", {{"lo", problem.control_lo}, {"hi", problem.control_hi}}},
          {"constraint", {{"kind", problem.constraint_kind}, {"epsilon", problem.epsilon}, {"delta", problem.delta}}},
          {"tol_feas", problem.tol_feas},
          {"initial_control", problem.initial_control}}},
        {"scenarios",
         {{"n_scenarios", scenarios.n_scenarios},
          {"seed", scenarios.seed},
          {"a0", scenarios.a0},
          {"sigma", scenarios.sigma},
          {"a_min", scenarios.a_min},
          {"bound_spec", bound},
          {"generator", kScenarioGenerator}}},
        {"risk",
         {{"risk", risk.risk}, {"alpha", risk.alpha}, {"avar_mode", risk.avar_mode}, {"avar_tau", risk.avar_tau}}},
        {"solver",
         {{"max_iters", solver.max_iters},
          {"tol_stationarity", solver.tol_stationarity},
          {"step_rule", solver.step_rule == SolveOptions::StepRule::Fixed ? "fixed" : "backtracking"},
          {"armijo", solver.armijo},
          {"shrink", solver.shrink},
          {"accelerated", solver.accelerated},
          {"subgradient_scale", solver.subgradient_scale},
          {"power_iters", solver.power_iters}}},
        {"gamma_schedule", gamma_schedule},
        {"path",
         {{"warm_start", path.warm_start},
          {"bound_factor", path.bound_factor},
          {"concentration_q", path.concentration_q}}},
        {"feasible_reference",
         {{"mode", feasible_reference.mode}, {"bisection_steps", feasible_reference.bisection_steps}}},
        {"output_dir", output_dir},
    };
}

std::string fnv1a_hex(std::string_view text) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

std::string RunConfig::content_hash() const {
    json j = to_json();
    // The output location does not change any computed number.
    j.erase("output_dir");
    return fnv1a_hex(j.dump());
}

void RunConfig::validate() const {
    std::vector<std::string> errors;
    auto check = [&](bool ok, const std::string& field, const std::string& msg) {
        if (!ok) errors.push_back(field + ": " + msg);
    };
    const auto& p = problem;
    check(p.n_interior > 0, "problem.n_interior", "must be positive");
    check(p.mu_tik > 0.0 && std::isfinite(p.mu_tik), "problem.mu_tik", "must be > 0");
    check(p.control_lo <= p.control_hi, "problem.control_bounds", "lo must not exceed hi (C would be empty)");
    check(p.constraint_kind == "mixed" || p.constraint_kind == "volume" || p.constraint_kind == "gradient",
          "problem.constraint.kind", "expected mixed | volume | gradient");
    check(p.epsilon >= 0.0, "problem.constraint.epsilon", "must be >= 0");
    check(p.delta >= 0.0, "problem.constraint.delta", "must be >= 0");
    check(p.tol_feas >= 0.0, "problem.tol_feas", "must be >= 0");

    const auto& s = scenarios;
    check(s.n_scenarios > 0, "scenarios.n_scenarios", "must be positive");
    check(s.a_min > 0.0, "scenarios.a_min", "must be > 0");
    check(s.a0 >= s.a_min, "scenarios.a0", "must be >= a_min");
    check(s.bound_spec.bound_sigma >= 0.0, "scenarios.bound_spec.bound_sigma", "must be >= 0");
    check(s.bound_spec.kind != BoundSpec::Kind::File || !s.bound_spec.path.empty(), "scenarios.bound_spec.path",
          "required for type file");

    check(risk.risk == "expectation" || risk.risk == "avar", "risk.risk", "expected expectation | avar");
    check(risk.alpha > 0.0 && risk.alpha <= 1.0, "risk.alpha", "must lie in (0, 1]");
    check(risk.avar_mode == "subgradient" || risk.avar_mode == "smooth", "risk.avar_mode",
          "expected subgradient | smooth");
    check(risk.avar_tau > 0.0, "risk.avar_tau", "must be > 0");

    check(solver.max_iters > 0, "solver.max_iters", "must be positive");
    check(solver.tol_stationarity > 0.0, "solver.tol_stationarity", "must be > 0");
    check(solver.armijo > 0.0 && solver.armijo < 0.5, "solver.armijo", "must lie in (0, 0.5)");
    check(solver.shrink > 0.0 && solver.shrink < 1.0, "solver.shrink", "must lie in (0, 1)");

    bool schedule_ok = !gamma_schedule.empty();
    for (std::size_t i = 0; i < gamma_schedule.size(); ++i) {
        if (!(gamma_schedule[i] > 0.0) || !std::isfinite(gamma_schedule[i]) ||
            (i > 0 && !(gamma_schedule[i] > gamma_schedule[i - 1]))) {
            schedule_ok = false;
        }
    }
    check(schedule_ok, "gamma_schedule", "must be a nonempty, strictly increasing list of positive numbers");

    check(path.bound_factor > 1.0, "path.bound_factor", "must be > 1");
    check(path.concentration_q > 0.0 && path.concentration_q < 1.0, "path.concentration_q", "must lie in (0, 1)");
    check(feasible_reference.mode == "scale_first_solution" || feasible_reference.mode == "none",
          "feasible_reference.mode", "expected scale_first_solution | none");

    if (!errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw Error(ErrorKind::Config, msg);
    }
}

RiskMeasure build_risk(const RiskConfig& cfg) {
    if (cfg.risk == "expectation") return RiskMeasure::expectation();
    return RiskMeasure::avar(cfg.alpha, cfg.avar_mode == "smooth" ? cfg.avar_tau : 0.0);
}

ProblemData build_problem(const RunConfig& cfg) {
    cfg.validate();
    const Grid grid(cfg.problem.n_interior);
    ScenarioSet set = sample(grid, cfg.scenarios);
    const ConstraintMap map(constraint_kind_from_string(cfg.problem.constraint_kind), cfg.problem.epsilon,
                            cfg.problem.delta);
    const std::size_t n = grid.size();
    return ProblemData::make(grid, std::move(set), map, build_risk(cfg.risk), cfg.problem.target.sample(grid),
                             cfg.problem.mu_tik, GridFunction(n, cfg.problem.control_lo),
                             GridFunction(n, cfg.problem.control_hi), cfg.problem.tol_feas);
}

PathOptions build_path_options(const RunConfig& cfg) {
    PathOptions opts;
    opts.solve = cfg.solver;
    opts.warm_start = cfg.path.warm_start;
    opts.initial.assign(cfg.problem.n_interior, cfg.problem.initial_control);
    opts.reference_from_first_solution = cfg.feasible_reference.mode == "scale_first_solution";
    opts.reference_bisection_steps = cfg.feasible_reference.bisection_steps;
    opts.limit.concentration_q = cfg.path.concentration_q;
    return opts;
}

} // namespace riskpen
