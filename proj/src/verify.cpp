#include "riskpen/verify.hpp"

#include "riskpen/kkt.hpp"
#include "riskpen/numfmt.hpp"
#include "riskpen/risk.hpp"
#include "riskpen/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace riskpen {

namespace {

class Sampler {
public:
    explicit Sampler(std::uint64_t seed) : engine_(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    std::vector<double> vector(std::size_t n, double lo, double hi) {
        std::vector<double> v(n);
        for (double& x : v) x = uniform(lo, hi);
        return v;
    }

private:
    std::mt19937_64 engine_;
};

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

VerifyCheck check_pde(const ProblemData& data, Sampler& rng) {
    VerifyCheck c{"pde_self_adjoint", true, {}};
    double worst_sym = 0.0, worst_res = 0.0;
    const Grid& grid = data.grid;
    for (const auto& op : data.operators) {
        const auto r = rng.vector(grid.size(), -1.0, 1.0);
        const auto q = rng.vector(grid.size(), -1.0, 1.0);
        const auto sr = solve_state(op, r);
        const auto sq = solve_state(op, q);
        const double lhs = inner_h(grid, sr, q);
        const double rhs = inner_h(grid, r, sq);
        worst_sym = std::max(worst_sym, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
        const auto back = op.apply(sr);
        double res = 0.0, nrm = 0.0;
        for (std::size_t j = 0; j < r.size(); ++j) {
            res = std::max(res, std::abs(back[j] - r[j]));
            nrm = std::max(nrm, std::abs(r[j]));
        }
        worst_res = std::max(worst_res, res / nrm);
    }
    c.passed = worst_sym <= 1e-10 && worst_res <= 1e-10;
    c.detail = "symmetry " + format_real(worst_sym) + ", solve residual " + format_real(worst_res);
    return c;
}

std::vector<VerifyCheck> check_cone(const ProblemData& data, const VerifyOptions& opts, Sampler& rng) {
    const ConeSpec& cone = data.cone;
    const double gamma = opts.gamma;
    std::size_t proj_fail = 0, grad_fail = 0, zero_fail = 0, sign_fail = 0;
    for (std::size_t t = 0; t < opts.random_instances; ++t) {
        const auto k = rng.vector(cone.dim, -1.0, 1.0);
        const auto k2 = rng.vector(cone.dim, -1.0, 1.0);
        const auto p = project(cone, k);
        const auto p2 = project(cone, k2);
        // p in K, (p, k - p) = 0, (p - k, e_j) >= 0, idempotence, nonexpansive.
        std::vector<double> kp(k.size()), diff(k.size()), pdiff(k.size());
        bool ok = project(cone, p) == p;
        for (std::size_t j = 0; j < k.size(); ++j) {
            ok = ok && p[j] >= 0.0 && p[j] - k[j] >= 0.0;
            kp[j] = k[j] - p[j];
            diff[j] = k[j] - k2[j];
            pdiff[j] = p[j] - p2[j];
        }
        ok = ok && cone.inner(p, kp) == 0.0 && cone.norm(pdiff) <= cone.norm(diff) * (1.0 + 1e-15);
        if (!ok) ++proj_fail;

        // grad beta = gamma (id - proj), central differences on each coordinate.
        const auto grad = envelope_gradient(cone, gamma, k);
        for (std::size_t j = 0; j < k.size(); ++j) {
            const double step = 1e-6;
            auto kp1 = k, km1 = k;
            kp1[j] += step;
            km1[j] -= step;
            const double fd = (envelope(cone, gamma, kp1) - envelope(cone, gamma, km1)) / (2.0 * step);
            const double expected = cone.weight * grad[j];
            if (std::abs(fd - expected) > 1e-6 * std::max(1.0, std::abs(expected))) {
                ++grad_fail;
                break;
            }
        }

        // penalty(i) = 0 iff i <= 0.
        const auto pen = penalty(cone, gamma, k);
        const bool feasible = std::all_of(k.begin(), k.end(), [](double v) { return v <= 0.0; });
        if ((pen.value == 0.0) != feasible) ++zero_fail;
        std::vector<double> neg(k.size());
        std::transform(k.begin(), k.end(), neg.begin(), [](double v) { return -std::abs(v); });
        if (penalty(cone, gamma, neg).value != 0.0) ++zero_fail;

        // Multiplier in the dual cone and orthogonal to proj(-i).
        const auto lam = penalty_multiplier(cone, gamma, k);
        std::vector<double> minus_k(k.size());
        std::transform(k.begin(), k.end(), minus_k.begin(), [](double v) { return -v; });
        const auto pm = project(cone, minus_k);
        bool sign_ok = cone.inner(lam, pm) == 0.0;
        for (std::size_t j = 0; j < k.size(); ++j) sign_ok = sign_ok && lam[j] >= 0.0;
        if (!sign_ok) ++sign_fail;
    }
    const std::string of = " of " + std::to_string(opts.random_instances);
    return {
        {"cone_projection", proj_fail == 0, std::to_string(proj_fail) + " failures" + of},
        {"cone_envelope_gradient", grad_fail == 0, std::to_string(grad_fail) + " failures" + of},
        {"penalty_zero_iff_feasible", zero_fail == 0, std::to_string(zero_fail) + " failures" + of},
        {"multiplier_sign", sign_fail == 0, std::to_string(sign_fail) + " failures" + of},
    };
}

VerifyCheck check_risk(const ProblemData& data, const VerifyOptions& opts, Sampler& rng) {
    RiskMeasure rm = data.risk;
    rm.smoothing = 0.0;
    const auto& w = data.scenarios.weights;
    const std::size_t n = w.size();
    std::size_t fails = 0;
    std::string first;
    auto fail = [&](const std::string& what) {
        if (fails++ == 0) first = what;
    };
    for (std::size_t t = 0; t < opts.random_instances; ++t) {
        const auto a = rng.vector(n, -2.0, 2.0);
        const auto b = rng.vector(n, -2.0, 2.0);
        const double ra = evaluate(rm, a, w);
        const double rb = evaluate(rm, b, w);
        const double scale = 1e-12 * (1.0 + std::abs(ra) + std::abs(rb));
        for (double lam : {0.25, 0.5, 0.75}) {
            std::vector<double> mix(n);
            for (std::size_t k = 0; k < n; ++k) mix[k] = lam * a[k] + (1.0 - lam) * b[k];
            if (evaluate(rm, mix, w) > lam * ra + (1.0 - lam) * rb + scale) fail("convexity");
        }
        std::vector<double> up(n), shifted(n), scaled(n);
        const double c = rng.uniform(-3.0, 3.0);
        const double pos = rng.uniform(0.1, 3.0);
        for (std::size_t k = 0; k < n; ++k) {
            up[k] = a[k] + std::abs(b[k]);
            shifted[k] = a[k] + c;
            scaled[k] = pos * a[k];
        }
        if (evaluate(rm, up, w) < ra - scale) fail("monotonicity");
        if (std::abs(evaluate(rm, shifted, w) - (ra + c)) > scale + 1e-12 * std::abs(c)) fail("translation");
        if (std::abs(evaluate(rm, scaled, w) - pos * ra) > scale * (1.0 + pos)) fail("homogeneity");
        const auto theta = subgradient(rm, a, w).theta;
        double lin = ra;
        for (std::size_t k = 0; k < n; ++k) lin += w[k] * theta[k] * (b[k] - a[k]);
        if (rb < lin - scale) fail("subgradient inequality");
        const auto gap = duality_gap(rm, a, theta, w);
        if (!gap.feasible || std::abs(gap.value) > 1e-12) fail("duality gap");
    }
    return {"risk_axioms", fails == 0,
            fails == 0 ? rm.name() + ": monotonicity, translation equivariance, positive homogeneity, subadditivity, subgradient inequality and duality gap hold"
                       : std::to_string(fails) + " failures, first: " + first};
}

VerifyCheck check_constraint_adjoint(const ProblemData& data, Sampler& rng) {
    const Grid& grid = data.grid;
    const std::size_t n = grid.size();
    double worst = 0.0;
    for (std::size_t k = 0; k < std::min<std::size_t>(data.n_scenarios(), 4); ++k) {
        const auto x1 = rng.vector(n, -1.0, 1.0);
        const auto x2 = rng.vector(n, -1.0, 1.0);
        const auto du = rng.vector(n, -1.0, 1.0);
        const auto dy = rng.vector(n, -1.0, 1.0);
        const auto lam = rng.vector(data.cone.dim, 0.0, 1.0);
        const auto adj = data.constraint.adjoints(grid, data.scenarios, k, x1, x2, lam);
        double pairing = 0.0;
        for (std::size_t j = 0; j < n; ++j) pairing += adj.d_control[j] * du[j] + adj.d_state[j] * dy[j];
        const double t = 1e-6;
        std::vector<double> x1p(n), x1m(n), x2p(n), x2m(n);
        for (std::size_t j = 0; j < n; ++j) {
            x1p[j] = x1[j] + t * du[j];
            x1m[j] = x1[j] - t * du[j];
            x2p[j] = x2[j] + t * dy[j];
            x2m[j] = x2[j] - t * dy[j];
        }
        const auto ip = data.constraint.evaluate(grid, data.scenarios, k, x1p, x2p);
        const auto im = data.constraint.evaluate(grid, data.scenarios, k, x1m, x2m);
        std::vector<double> di(ip.size());
        for (std::size_t c = 0; c < di.size(); ++c) di[c] = (ip[c] - im[c]) / (2.0 * t);
        const double fd = data.cone.inner(lam, di);
        worst = std::max(worst, std::abs(fd - pairing) / std::max(1.0, std::abs(pairing)));
    }
    return {"constraint_adjoint_identity", worst <= 1e-6, "max relative error " + format_real(worst)};
}

Control random_control(const ProblemData& data, Sampler& rng) {
    Control x = rng.vector(data.grid.size(), -5.0, 5.0);
    return clamp_to_box(data, x);
}

VerifyCheck check_gradient(const ProblemData& base, const VerifyOptions& opts, Sampler& rng) {
    const ProblemData* data = &base;
    ProblemData smoothed;
    std::string note;
    if (!base.risk.is_smooth()) {
        smoothed = base;
        smoothed.risk.smoothing = 1e-3;
        data = &smoothed;
        note = " (nonsmooth risk checked through its softplus smoothing, tau=1e-3)";
    }
    const double tol = data->risk.smoothing > 0.0 ? 1e-4 : 1e-6;
    const Control x = random_control(*data, rng);
    const EvalBundle b = evaluate(*data, opts.gamma, x);
    double worst = 0.0;
    const std::size_t n = x.size();
    for (std::size_t d = 0; d < opts.gradient_directions; ++d) {
        const auto dir = rng.vector(n, -1.0, 1.0);
        double gd = 0.0;
        for (std::size_t j = 0; j < n; ++j) gd += b.gradient[j] * dir[j];
        const double t = 1e-5;
        Control xp(n), xm(n);
        for (std::size_t j = 0; j < n; ++j) {
            xp[j] = x[j] + t * dir[j];
            xm[j] = x[j] - t * dir[j];
        }
        const double fd = (objective_only(*data, opts.gamma, xp) - objective_only(*data, opts.gamma, xm)) / (2.0 * t);
        worst = std::max(worst, rel_err(fd, gd));
    }
    return {"adjoint_gradient", worst <= tol,
            "max relative error " + format_real(worst) + " (tol " + format_real(tol) + ")" + note};
}

VerifyCheck check_structural_kkt(const ProblemData& data, const VerifyOptions& opts, Sampler& rng) {
    const Control x = random_control(data, rng);
    SolveResult res;
    res.bundle = evaluate(data, opts.gamma, x);
    res.x1_opt = x;
    res.xi = normal_cone_element(data, x, res.bundle.gradient);
    const KktReport r = check_gamma_system(data, res.bundle, res);
    // Scale: size of the terms entering the adjoint equation.
    double scale = 0.0;
    for (std::size_t k = 0; k < data.n_scenarios(); ++k) {
        for (double v : res.bundle.zeta2[k]) scale = std::max(scale, std::abs(v));
    }
    scale = std::max(scale, 1e-300) / std::sqrt(data.grid.h());
    const double adj = r.adjoint_residual_max / std::max(1.0, scale);
    const bool ok = adj <= 1e-10 && r.rho_consistency <= 1e-10 && r.state_residual <= 1e-10 &&
                    r.multiplier_formula_residual <= 1e-10;
    return {"adjoint_equation", ok,
            "adjoint " + format_real(adj) + ", rho " + format_real(r.rho_consistency) + ", state " +
                format_real(r.state_residual) + ", multiplier " + format_real(r.multiplier_formula_residual)};
}

} // namespace

std::vector<VerifyCheck> run_verification(const ProblemData& data, const VerifyOptions& opts) {
    Sampler rng(opts.seed);
    std::vector<VerifyCheck> checks;
    checks.push_back(check_pde(data, rng));
    for (auto& c : check_cone(data, opts, rng)) checks.push_back(std::move(c));
    checks.push_back(check_risk(data, opts, rng));
    checks.push_back(check_constraint_adjoint(data, rng));
    checks.push_back(check_gradient(data, opts, rng));
    checks.push_back(check_structural_kkt(data, opts, rng));

    if (data.constraint.kind() == ConstraintMap::Kind::Gradient && data.constraint.delta() == 0.0) {
        const EvalBundle at_zero = evaluate(data, opts.gamma, Control(data.grid.size(), 0.0));
        VerifyCheck c{"gradient_tie_break", true, {}};
        c.detail = at_zero.tie_breaks > 0
                       ? "delta=0: zero subgradient used on " + std::to_string(at_zero.tie_breaks) +
                             " cells with vanishing state gradient"
                       : "delta=0: no vanishing state gradients at the zero control";
        checks.push_back(std::move(c));
    }
    return checks;
}

} // namespace riskpen
