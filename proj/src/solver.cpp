#include "riskpen/solver.hpp"

#include "riskpen/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace riskpen {

void SolveOptions::validate() const {
    require(max_iters > 0, ErrorKind::InvalidArgument, "max_iters must be positive");
    require(tol_stationarity > 0.0, ErrorKind::InvalidArgument, "tol_stationarity must be positive");
    require(armijo > 0.0 && armijo < 0.5, ErrorKind::InvalidArgument, "armijo constant must lie in (0, 0.5)");
    require(shrink > 0.0 && shrink < 1.0, ErrorKind::InvalidArgument, "shrink factor must lie in (0, 1)");
}

Control clamp_to_box(const ProblemData& data, std::span<const double> x) {
    Control out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        out[j] = std::clamp(x[j], data.lo[j], data.hi[j]);
    }
    return out;
}

double projected_gradient_norm(const ProblemData& data, std::span<const double> x1,
                               std::span<const double> gradient) {
    const double h = data.grid.h();
    double sum = 0.0;
    for (std::size_t j = 0; j < x1.size(); ++j) {
        const double r = x1[j] - std::clamp(x1[j] - gradient[j] / h, data.lo[j], data.hi[j]);
        sum += r * r;
    }
    return std::sqrt(h * sum);
}

GridFunction normal_cone_element(const ProblemData& data, std::span<const double> x1,
                                 std::span<const double> gradient) {
    GridFunction xi(x1.size(), 0.0);
    for (std::size_t j = 0; j < x1.size(); ++j) {
        const bool at_lo = x1[j] <= data.lo[j];
        const bool at_hi = x1[j] >= data.hi[j];
        if ((at_lo && at_hi) || (at_lo && gradient[j] > 0.0) || (at_hi && gradient[j] < 0.0)) {
            xi[j] = -gradient[j];
        }
    }
    return xi;
}

double stationarity_residual(const ProblemData& data, double gamma, std::span<const double> x1) {
    const EvalBundle b = evaluate(data, gamma, x1);
    return projected_gradient_norm(data, x1, b.gradient);
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double dual_pairing(std::span<const double> g, std::span<const double> d) {
    double sum = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) sum += g[j] * d[j];
    return sum;
}

double h_norm_sq(const Grid& grid, std::span<const double> d) { return inner_h(grid, d, d); }

// Objective differences below this are not resolvable in double precision.
double roundoff_margin(double f) { return 1e3 * kEps * (1.0 + std::abs(f)); }

Control gradient_step(const ProblemData& data, std::span<const double> from, std::span<const double> g,
                      double step) {
    Control x(from.size());
    const double h = data.grid.h();
    for (std::size_t j = 0; j < from.size(); ++j) {
        x[j] = std::clamp(from[j] - step * g[j] / h, data.lo[j], data.hi[j]);
    }
    return x;
}

// Largest Hessian eigenvalue of the smooth part at x, from a few power
// iterations on gradient differences.
double estimate_lipschitz(const ProblemData& data, double gamma, const EvalBundle& at, std::size_t iters) {
    const Grid& grid = data.grid;
    const std::size_t n = grid.size();
    Control v(n);
    for (std::size_t j = 0; j < n; ++j) {
        v[j] = 1.0 + 0.5 * std::sin(3.0 * grid.node(j));
    }
    double estimate = data.mu_tik;
    const double x_scale = 1.0 + norm_h(grid, at.x1);
    for (std::size_t it = 0; it < iters; ++it) {
        const double v_norm = norm_h(grid, v);
        if (!(v_norm > 0.0)) break;
        const double t = 1e-6 * x_scale / v_norm;
        Control shifted(n);
        for (std::size_t j = 0; j < n; ++j) shifted[j] = at.x1[j] + t * v[j];
        const EvalBundle b = evaluate(data, gamma, shifted);
        Control hv(n);
        for (std::size_t j = 0; j < n; ++j) hv[j] = (b.gradient[j] - at.gradient[j]) / (grid.h() * t);
        const double hv_norm = norm_h(grid, hv);
        estimate = std::max(estimate, hv_norm / v_norm);
        if (!(hv_norm > 0.0)) break;
        v = std::move(hv);
    }
    return estimate;
}

SolveResult finish(const ProblemData& data, EvalBundle bundle, SolveResult result) {
    result.x1_opt = bundle.x1;
    result.stationarity_norm = projected_gradient_norm(data, bundle.x1, bundle.gradient);
    result.xi = normal_cone_element(data, bundle.x1, bundle.gradient);
    result.bundle = std::move(bundle);
    return result;
}

void log_iteration(SolveResult& result, const SolveOptions& opts, std::size_t iter, double f, double stat,
                   double step) {
    if (opts.record_log) result.log.push_back({iter, f, stat, step});
}

SolveResult run_projected_gradient(const ProblemData& data, double gamma, const SolveOptions& opts,
                                   EvalBundle current, SolveResult result) {
    const Grid& grid = data.grid;
    const double base_step = 1.0 / result.lipschitz_estimate;
    double step = base_step;
    for (std::size_t iter = 1; iter <= opts.max_iters; ++iter) {
        bool accepted = false;
        EvalBundle next;
        double trial = opts.step_rule == SolveOptions::StepRule::Fixed ? base_step
                                                                       : std::min(step / opts.shrink, 1e6 * base_step);
        for (int attempt = 0; attempt < 80; ++attempt) {
            Control x_new = gradient_step(data, current.x1, current.gradient, trial);
            std::vector<double> d(x_new.size());
            for (std::size_t j = 0; j < d.size(); ++j) d[j] = x_new[j] - current.x1[j];
            if (h_norm_sq(grid, d) == 0.0) {
                break;
            }
            next = evaluate(data, gamma, x_new);
            if (opts.step_rule == SolveOptions::StepRule::Fixed) {
                accepted = true;
                break;
            }
            const double predicted = dual_pairing(current.gradient, d);
            const double change = next.j_gamma - current.j_gamma;
            bool ok = change <= opts.armijo * predicted;
            if (!ok && std::abs(change) <= roundoff_margin(current.j_gamma)) {
                // Armijo is unresolvable here; the curvature bound still
                // certifies j(x+) <= j(x) - ||d||^2 / (2 s) for convex j.
                std::vector<double> dg(d.size());
                for (std::size_t j = 0; j < d.size(); ++j) dg[j] = next.gradient[j] - current.gradient[j];
                ok = dual_pairing(dg, d) <= h_norm_sq(grid, d) / (2.0 * trial);
            }
            if (ok) {
                accepted = true;
                break;
            }
            trial *= opts.shrink;
        }
        if (!accepted) {
            break;
        }
        step = trial;
        current = std::move(next);
        result.iterations = iter;
        const double stat = projected_gradient_norm(data, current.x1, current.gradient);
        log_iteration(result, opts, iter, current.j_gamma, stat, step);
        if (stat <= opts.tol_stationarity) {
            result.converged = true;
            break;
        }
    }
    return finish(data, std::move(current), std::move(result));
}

SolveResult run_fista(const ProblemData& data, double gamma, const SolveOptions& opts, EvalBundle current,
                      SolveResult result) {
    const Grid& grid = data.grid;
    double step = 1.0 / result.lipschitz_estimate;
    const bool fixed = opts.step_rule == SolveOptions::StepRule::Fixed;
    EvalBundle y = current;
    double momentum = 1.0;
    for (std::size_t iter = 1; iter <= opts.max_iters; ++iter) {
        bool accepted = false;
        EvalBundle next;
        std::vector<double> d;
        for (int attempt = 0; attempt < 80; ++attempt) {
            Control x_new = gradient_step(data, y.x1, y.gradient, step);
            d.assign(x_new.size(), 0.0);
            for (std::size_t j = 0; j < d.size(); ++j) d[j] = x_new[j] - y.x1[j];
            next = evaluate(data, gamma, x_new);
            const double d_sq = h_norm_sq(grid, d);
            if (fixed || d_sq == 0.0) {
                accepted = true;
                break;
            }
            std::vector<double> dg(d.size());
            for (std::size_t j = 0; j < d.size(); ++j) dg[j] = next.gradient[j] - y.gradient[j];
            bool ok = dual_pairing(dg, d) <= d_sq / (2.0 * step);
            if (!ok) {
                const double gap = next.j_gamma - y.j_gamma - dual_pairing(y.gradient, d);
                ok = std::abs(next.j_gamma - y.j_gamma) > roundoff_margin(y.j_gamma) && gap <= d_sq / (2.0 * step);
            }
            if (ok) {
                accepted = true;
                break;
            }
            step *= opts.shrink;
        }
        if (!accepted) {
            break;
        }
        result.iterations = iter;
        const double stat = projected_gradient_norm(data, next.x1, next.gradient);
        log_iteration(result, opts, iter, next.j_gamma, stat, step);
        if (stat <= opts.tol_stationarity) {
            current = std::move(next);
            result.converged = true;
            break;
        }

        // Adaptive restart: objective increase or momentum pointing uphill.
        std::vector<double> x_move(d.size());
        double uphill = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) {
            x_move[j] = next.x1[j] - current.x1[j];
            uphill += (y.x1[j] - next.x1[j]) * x_move[j];
        }
        const bool increased = next.j_gamma > current.j_gamma + roundoff_margin(current.j_gamma);
        double beta = 0.0;
        if (increased || uphill > 0.0) {
            momentum = 1.0;
        } else {
            const double momentum_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
            beta = (momentum - 1.0) / momentum_next;
            momentum = momentum_next;
        }
        current = std::move(next);
        if (beta > 0.0) {
            Control y_new(d.size());
            for (std::size_t j = 0; j < d.size(); ++j) y_new[j] = current.x1[j] + beta * x_move[j];
            y = evaluate(data, gamma, y_new);
        } else {
            y = current;
        }
    }
    return finish(data, std::move(current), std::move(result));
}

SolveResult run_subgradient(const ProblemData& data, double gamma, const SolveOptions& opts, EvalBundle current,
                            SolveResult result) {
    const Grid& grid = data.grid;
    double scale = opts.subgradient_scale;
    if (!(scale > 0.0)) {
        scale = norm_h(grid, riesz(grid, current.gradient)) / result.lipschitz_estimate;
        if (!(scale > 0.0)) scale = 1.0 / result.lipschitz_estimate;
    }
    EvalBundle best = current;
    for (std::size_t iter = 1; iter <= opts.max_iters; ++iter) {
        const double stat = projected_gradient_norm(data, current.x1, current.gradient);
        if (stat <= opts.tol_stationarity) {
            result.converged = true;
            break;
        }
        const double g_norm = norm_h(grid, riesz(grid, current.gradient));
        if (!(g_norm > 0.0)) break;
        const double step = scale / (g_norm * std::sqrt(static_cast<double>(iter)));
        current = evaluate(data, gamma, gradient_step(data, current.x1, current.gradient, step));
        result.iterations = iter;
        log_iteration(result, opts, iter, current.j_gamma,
                      projected_gradient_norm(data, current.x1, current.gradient), step);
        if (current.j_gamma < best.j_gamma) best = current;
    }
    if (result.converged) best = std::move(current);
    return finish(data, std::move(best), std::move(result));
}

} // namespace

SolveResult minimize(const ProblemData& data, double gamma, const SolveOptions& opts,
                     std::optional<std::span<const double>> warm_start) {
    opts.validate();
    require(gamma > 0.0 && std::isfinite(gamma), ErrorKind::InvalidArgument, "gamma must be positive and finite");
    const std::size_t n = data.grid.size();
    Control x0(n, 0.0);
    if (warm_start) {
        require(warm_start->size() == n, ErrorKind::ShapeMismatch, "warm start length mismatch");
        x0.assign(warm_start->begin(), warm_start->end());
    }
    x0 = clamp_to_box(data, x0);

    SolveResult result;
    EvalBundle start = evaluate(data, gamma, x0);
    if (data.singleton_controls()) {
        result.method = "fixed-point";
        result.converged = true;
        SolveResult out = finish(data, std::move(start), std::move(result));
        out.stationarity_norm = 0.0;
        return out;
    }

    const double stat0 = projected_gradient_norm(data, start.x1, start.gradient);
    log_iteration(result, opts, 0, start.j_gamma, stat0, 0.0);
    result.lipschitz_estimate = estimate_lipschitz(data, gamma, start, opts.power_iters);

    if (!data.risk.is_smooth()) {
        result.method = "subgradient";
        return run_subgradient(data, gamma, opts, std::move(start), std::move(result));
    }
    if (stat0 <= opts.tol_stationarity) {
        result.converged = true;
        result.method = opts.accelerated ? "fista" : "projected-gradient";
        return finish(data, std::move(start), std::move(result));
    }
    if (opts.accelerated) {
        result.method = "fista";
        return run_fista(data, gamma, opts, std::move(start), std::move(result));
    }
    result.method = "projected-gradient";
    return run_projected_gradient(data, gamma, opts, std::move(start), std::move(result));
}

} // namespace riskpen
