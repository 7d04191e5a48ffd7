#include "riskpen/path.hpp"

#include "riskpen/error.hpp"
#include "riskpen/numfmt.hpp"

#include <algorithm>
#include <cmath>

namespace riskpen {

GammaSchedule::GammaSchedule(std::vector<double> values) : values_(std::move(values)) {
    require(!values_.empty(), ErrorKind::InvalidArgument, "gamma schedule is empty");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        require(values_[i] > 0.0 && std::isfinite(values_[i]), ErrorKind::InvalidArgument,
                "gamma schedule entries must be positive and finite");
        if (i > 0) {
            require(values_[i] > values_[i - 1], ErrorKind::InvalidArgument,
                    "gamma schedule must be strictly increasing (entry " + std::to_string(i) + ")");
        }
    }
}

GammaSchedule GammaSchedule::decades(int first_exponent, int last_exponent, int per_decade) {
    require(per_decade > 0, ErrorKind::InvalidArgument, "per_decade must be positive");
    require(last_exponent >= first_exponent, ErrorKind::InvalidArgument, "empty decade range");
    std::vector<double> values;
    for (int e = first_exponent * per_decade; e <= last_exponent * per_decade; ++e) {
        // Exact powers of ten on decade points.
        if (e % per_decade == 0) {
            values.push_back(std::pow(10.0, e / per_decade));
        } else {
            values.push_back(std::pow(10.0, static_cast<double>(e) / per_decade));
        }
    }
    return GammaSchedule(std::move(values));
}

std::optional<Control> feasible_by_scaling(const ProblemData& data, const Control& base, std::size_t steps) {
    const std::size_t n = data.grid.size();
    require(base.size() == n, ErrorKind::ShapeMismatch, "reference base length mismatch");
    for (std::size_t j = 0; j < n; ++j) {
        if (data.lo[j] > 0.0 || data.hi[j] < 0.0) return std::nullopt;
    }
    auto scaled = [&](double t) {
        Control x(n);
        for (std::size_t j = 0; j < n; ++j) x[j] = t * base[j];
        return clamp_to_box(data, x);
    };
    if (unpenalized_objective(data, scaled(1.0)).feasible) return scaled(1.0);
    if (!unpenalized_objective(data, scaled(0.0)).feasible) return std::nullopt;
    double lo = 0.0;
    double hi = 1.0;
    for (std::size_t s = 0; s < steps; ++s) {
        const double mid = 0.5 * (lo + hi);
        if (unpenalized_objective(data, scaled(mid)).feasible) lo = mid;
        else hi = mid;
    }
    return scaled(lo);
}

PathResult run_path(const ProblemData& data, const GammaSchedule& schedule, const PathOptions& opts) {
    const std::size_t n = data.grid.size();
    PathResult out;
    Control initial = opts.initial.empty() ? Control(n, 0.0) : opts.initial;
    require(initial.size() == n, ErrorKind::ShapeMismatch, "initial control length mismatch");
    if (opts.feasible_reference) {
        out.feasible_reference = opts.feasible_reference;
        out.reference_objective = unpenalized_objective(data, *opts.feasible_reference).j;
    }

    Control previous = initial;
    for (std::size_t idx = 0; idx < schedule.size(); ++idx) {
        const double gamma = schedule.values()[idx];
        try {
            const Control& start = (opts.warm_start && idx > 0) ? previous : initial;
            SolveResult res = minimize(data, gamma, opts.solve, std::span<const double>(start));

            PathRecord rec;
            rec.gamma = gamma;
            rec.kkt = full_report(data, res, opts.limit);
            const auto unpen = unpenalized_objective(data, res.x1_opt);
            rec.j = unpen.j;
            rec.j_gamma = res.bundle.j_gamma;
            rec.penalty_term = res.bundle.penalty_term;
            rec.max_violation = unpen.max_violation;
            rec.sq_violation = rec.kkt.sq_violation;
            rec.complementarity = rec.kkt.complementarity_signed;
            rec.multiplier_l1 = rec.kkt.multiplier_l1;
            rec.adjoint_l1 = rec.kkt.adjoint_l1;
            rec.concentration_index = rec.kkt.concentration_index;
            if (idx > 0) {
                Control diff(n);
                for (std::size_t j = 0; j < n; ++j) diff[j] = res.x1_opt[j] - previous[j];
                rec.control_change = norm_h(data.grid, diff);
            }
            rec.iterations = res.iterations;
            rec.converged = res.converged;
            if (opts.compare_cold) {
                rec.cold_iterations = minimize(data, gamma, opts.solve, std::span<const double>(initial)).iterations;
            }

            if (idx == 0 && opts.reference_from_first_solution && !out.feasible_reference) {
                out.feasible_reference = feasible_by_scaling(data, res.x1_opt, opts.reference_bisection_steps);
                if (out.feasible_reference) {
                    out.reference_objective = unpenalized_objective(data, *out.feasible_reference).j;
                }
            }

            previous = res.x1_opt;
            out.controls.push_back(std::move(res.x1_opt));
            out.records.push_back(std::move(rec));
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Diverged) throw;
            out.aborted = true;
            out.abort_reason = "gamma=" + format_real(gamma) + ": " + e.what();
            break;
        }
    }
    return out;
}

double record_field(const PathRecord& r, const std::string& field) {
    if (field == "gamma") return r.gamma;
    if (field == "j") return r.j;
    if (field == "j_gamma") return r.j_gamma;
    if (field == "penalty_term") return r.penalty_term;
    if (field == "max_violation") return r.max_violation;
    if (field == "sq_violation") return r.sq_violation;
    if (field == "complementarity") return r.complementarity;
    if (field == "multiplier_l1") return r.multiplier_l1;
    if (field == "adjoint_l1") return r.adjoint_l1;
    if (field == "concentration_index") return r.concentration_index;
    if (field == "control_change") return r.control_change;
    if (field == "iterations") return static_cast<double>(r.iterations);
    throw Error(ErrorKind::InvalidArgument, "unknown path record field '" + field + "'");
}

SlopeFit fit_decay_slope(const std::vector<PathRecord>& records, const std::string& field) {
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto& r : records) {
        const double v = record_field(r, field);
        if (v > 0.0 && r.gamma > 0.0) {
            xs.push_back(std::log(r.gamma));
            ys.push_back(std::log(v));
        }
    }
    require(xs.size() >= 4, ErrorKind::InsufficientData,
            "slope fit of '" + field + "' needs at least 4 positive points, got " + std::to_string(xs.size()));
    const double m = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= m;
    my /= m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    require(sxx > 0.0, ErrorKind::InsufficientData, "slope fit needs distinct gamma values");
    SlopeFit fit;
    fit.points = xs.size();
    fit.slope = sxy / sxx;
    const double intercept = my - fit.slope * mx;
    double ss_res = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double e = ys[i] - (intercept + fit.slope * xs[i]);
        ss_res += e * e;
    }
    fit.r2 = syy > 0.0 ? 1.0 - ss_res / syy : (ss_res <= 1e-24 ? 1.0 : 0.0);
    return fit;
}

std::vector<PathCheck> check_path(const PathResult& path, const PathCheckOptions& opts) {
    std::vector<PathCheck> checks;
    const auto& recs = path.records;

    {
        PathCheck c{"sandwich", true, true, {}};
        if (!path.reference_objective) {
            c.detail = "skipped: no feasible reference";
        } else {
            const double ref = *path.reference_objective;
            for (const auto& r : recs) {
                if (r.j > r.j_gamma + opts.sandwich_slack || r.j_gamma > ref + opts.sandwich_slack) {
                    c.passed = false;
                    c.detail = "violated at gamma=" + format_real(r.gamma) + ": j=" + format_real(r.j) +
                               " j_gamma=" + format_real(r.j_gamma) + " j_ref=" + format_real(ref);
                    break;
                }
            }
        }
        checks.push_back(std::move(c));
    }
    {
        PathCheck c{"sq_violation_decreasing", true, true, {}};
        if (!recs.empty()) {
            const double first_decade = 10.0 * recs.front().gamma;
            const PathRecord* prev = nullptr;
            for (const auto& r : recs) {
                if (r.gamma < first_decade * (1.0 - 1e-12)) continue;
                if (prev && !(r.sq_violation < prev->sq_violation) &&
                    !(r.sq_violation == 0.0 && prev->sq_violation == 0.0)) {
                    c.passed = false;
                    c.detail = "not decreasing at gamma=" + format_real(r.gamma);
                    break;
                }
                prev = &r;
            }
        }
        checks.push_back(std::move(c));
    }
    {
        PathCheck c{"j_gamma_nondecreasing", true, false, {}};
        for (std::size_t i = 1; i < recs.size(); ++i) {
            const double slack = opts.monotone_rel_slack * std::max(1.0, std::abs(recs[i - 1].j_gamma));
            if (recs[i].j_gamma < recs[i - 1].j_gamma - slack) {
                c.passed = false;
                c.detail = "decrease at gamma=" + format_real(recs[i].gamma);
                break;
            }
        }
        checks.push_back(std::move(c));
    }
    {
        PathCheck c{"penalty_identity", true, false, {}};
        for (const auto& r : recs) {
            const double expected = 0.5 * r.gamma * r.sq_violation;
            if (std::abs(r.penalty_term - expected) > opts.identity_tol * std::max(1.0, std::abs(expected))) {
                c.passed = false;
                c.detail = "penalty != gamma/2 sq_violation at gamma=" + format_real(r.gamma);
                break;
            }
        }
        checks.push_back(std::move(c));
    }
    {
        PathCheck c{"multipliers_bounded", true, false, {}};
        if (!recs.empty()) {
            const double first_decade = 10.0 * recs.front().gamma;
            double lmin = INFINITY, lmax = 0.0, emin = INFINITY, emax = 0.0;
            for (const auto& r : recs) {
                if (r.gamma < first_decade * (1.0 - 1e-12)) continue;
                lmin = std::min(lmin, r.multiplier_l1);
                lmax = std::max(lmax, r.multiplier_l1);
                emin = std::min(emin, r.adjoint_l1);
                emax = std::max(emax, r.adjoint_l1);
            }
            auto ratio = [](double lo, double hi) { return hi == 0.0 ? 1.0 : (lo > 0.0 ? hi / lo : INFINITY); };
            if (lmax > 0.0 || emax > 0.0) {
                const double rl = ratio(lmin, lmax);
                const double re = ratio(emin, emax);
                c.passed = rl < opts.bound_factor && re < opts.bound_factor;
                c.detail = "multiplier_l1 ratio " + format_real(rl) + ", adjoint_l1 ratio " + format_real(re);
            }
        }
        checks.push_back(std::move(c));
    }
    {
        PathCheck c{"control_change_vanishing", true, false, {}};
        if (recs.size() >= 2) {
            const double last = recs.back().control_change;
            c.passed = last <= opts.control_change_tol;
            c.detail = "last control_change " + format_real(last) + " vs " + format_real(opts.control_change_tol);
        }
        checks.push_back(std::move(c));
    }
    {
        PathCheck c{"all_converged", true, false, {}};
        for (const auto& r : recs) {
            if (!r.converged) {
                c.passed = false;
                c.detail = "not converged at gamma=" + format_real(r.gamma);
                break;
            }
        }
        checks.push_back(std::move(c));
    }
    if (path.aborted) {
        checks.push_back({"path_completed", false, true, path.abort_reason});
    }
    return checks;
}

} // namespace riskpen
