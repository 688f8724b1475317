#include "aidx/optimizer.hpp"

#include "aidx/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

namespace aidx::opt {

std::string to_string(Status s)
{
    switch (s) {
    case Status::converged_gradient: return "converged_gradient";
    case Status::converged_step: return "converged_step";
    case Status::converged_simplex: return "converged_simplex";
    case Status::max_iterations: return "max_iterations";
    case Status::line_search_failed: return "line_search_failed";
    }
    return "unknown";
}

Vector fd_gradient(const Objective& f, const Vector& x, const FdOptions& opt, long* evals)
{
    const auto n = x.size();
    Vector g(n);
    std::vector<double> fp(static_cast<std::size_t>(n)), fm(static_cast<std::size_t>(n));
    std::vector<double> h(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        h[static_cast<std::size_t>(i)] = std::max(opt.min_step, opt.rel_step * std::abs(x[i]));

    const auto probes = static_cast<std::ptrdiff_t>(2 * n);
#pragma omp parallel for schedule(dynamic) if (opt.policy == ExecPolicy::parallel && probes > 1)
    for (std::ptrdiff_t k = 0; k < probes; ++k) {
        const auto i = static_cast<std::size_t>(k / 2);
        Vector xp = x;
        const double step = (k % 2 == 0) ? h[i] : -h[i];
        xp[static_cast<Eigen::Index>(i)] += step;
        (k % 2 == 0 ? fp : fm)[i] = f(xp);
    }
    if (evals) *evals += probes;

    for (Eigen::Index i = 0; i < n; ++i) {
        const auto k = static_cast<std::size_t>(i);
        if (!std::isfinite(fp[k]) || !std::isfinite(fm[k]))
            throw SimulationError("fd_gradient: objective is not finite at a probe point");
        // Use the realized step so rounding in x + h does not bias the quotient.
        Vector xp = x, xm = x;
        xp[i] += h[k];
        xm[i] -= h[k];
        g[i] = (fp[k] - fm[k]) / (xp[i] - xm[i]);
    }
    return g;
}

namespace {

struct LineSearch {
    double alpha = 0.0;
    double f = 0.0;
    bool ok = false;
};

// Backtracking Armijo search. Each trial step is followed by one parabolic
// refinement through f(0), f'(0) and f(alpha); the refined point is taken
// when it satisfies Armijo and improves on the trial.
LineSearch armijo_search(const Objective& f, const Vector& x, double f0, const Vector& p, double slope,
                         const BfgsOptions& opt, long& evals)
{
    auto armijo = [&](double a, double fa) { return std::isfinite(fa) && fa <= f0 + opt.c1 * a * slope; };
    double alpha = 1.0;
    while (alpha >= opt.alpha_min) {
        const double fa = f(x + alpha * p);
        ++evals;
        if (std::isfinite(fa)) {
            const double curv = fa - f0 - slope * alpha;
            if (curv > 0.0) {
                const double aq = -slope * alpha * alpha / (2.0 * curv);
                if (aq > opt.alpha_min && aq < 10.0 * alpha && std::abs(aq - alpha) > 1e-3 * alpha) {
                    const double fq = f(x + aq * p);
                    ++evals;
                    if (armijo(aq, fq) && fq <= fa) return {aq, fq, true};
                }
            }
            if (armijo(alpha, fa)) return {alpha, fa, true};
        }
        alpha *= opt.shrink;
    }
    return {0.0, f0, false};
}

double inf_norm(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

} // namespace

Result bfgs_minimize(const Objective& f, const Vector& x0, const BfgsOptions& opt, const GradientFn& grad)
{
    long evals = 0;
    auto gradient = [&](const Vector& x) -> Vector {
        if (grad) return grad(x);
        return fd_gradient(f, x, opt.fd, &evals);
    };

    const auto n = x0.size();
    OptimizerState st;
    st.x_k = x0;
    st.b_k = Matrix::Identity(n, n);
    double fx = f(x0);
    ++evals;
    if (!std::isfinite(fx)) throw SimulationError("bfgs_minimize: objective not finite at x0");
    st.grad_k = gradient(st.x_k);

    Result res;
    res.trace.push_back({0, fx, inf_norm(st.grad_k), 0.0, evals, st.x_k});
    res.status = Status::max_iterations;

    if (inf_norm(st.grad_k) < opt.tol) {
        res.status = Status::converged_gradient;
    } else {
        for (int k = 1; k <= opt.max_iter; ++k) {
            st.iteration = k;
            Eigen::LLT<Matrix> llt(st.b_k);
            if (llt.info() != Eigen::Success) {
                st.b_k = Matrix::Identity(n, n);
                llt.compute(st.b_k);
            }
            st.p_k = llt.solve(-st.grad_k);
            double slope = st.grad_k.dot(st.p_k);
            if (!(slope < 0.0)) {
                // Lost descent through round-off; restart from steepest descent.
                st.b_k = Matrix::Identity(n, n);
                st.p_k = -st.grad_k;
                slope = st.grad_k.dot(st.p_k);
            }

            const auto ls = armijo_search(f, st.x_k, fx, st.p_k, slope, opt, evals);
            if (!ls.ok) {
                res.status = Status::line_search_failed;
                break;
            }
            st.alpha_k = ls.alpha;
            st.s_k = ls.alpha * st.p_k;
            const Vector x_next = st.x_k + st.s_k;
            const Vector g_next = gradient(x_next);
            st.y_k = g_next - st.grad_k;

            const double ys = st.y_k.dot(st.s_k);
            if (ys > opt.curvature_eps) {
                const Vector bs = st.b_k * st.s_k;
                st.b_k += (st.y_k * st.y_k.transpose()) / ys - (bs * bs.transpose()) / st.s_k.dot(bs);
                st.b_k = 0.5 * (st.b_k + st.b_k.transpose());
            } else {
                ++st.skipped_updates;
            }

            st.x_k = x_next;
            st.grad_k = g_next;
            fx = ls.f;
            const double gnorm = inf_norm(st.grad_k);
            const double snorm = inf_norm(st.s_k);
            res.trace.push_back({k, fx, gnorm, snorm, evals, st.x_k});
            if (gnorm < opt.tol) {
                res.status = Status::converged_gradient;
                break;
            }
            if (snorm < opt.tol) {
                res.status = Status::converged_step;
                break;
            }
        }
    }
    res.x = st.x_k;
    res.f = fx;
    res.evals = evals;
    res.state = std::move(st);
    return res;
}

Result nelder_mead_minimize(const Objective& f, const Vector& x0, const NelderMeadOptions& opt)
{
    const auto n = x0.size();
    const auto m = static_cast<std::size_t>(n + 1);
    std::vector<Vector> simplex(m, x0);
    std::vector<double> fv(m);
    long evals = 0;
    auto eval = [&](const Vector& x) {
        ++evals;
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    for (Eigen::Index i = 0; i < n; ++i)
        simplex[static_cast<std::size_t>(i) + 1][i] += std::max(0.05, 0.05 * std::abs(x0[i]));
    for (std::size_t k = 0; k < m; ++k) fv[k] = eval(simplex[k]);

    Result res;
    res.status = Status::max_iterations;
    std::vector<std::size_t> order(m);
    Vector prev_best = x0;

    for (int it = 0; it <= opt.max_iter; ++it) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return fv[a] < fv[b]; });
        const std::size_t best = order.front(), worst = order.back(), second = order[m - 2];
        const double spread = fv[worst] - fv[best];
        res.trace.push_back({it, fv[best], spread, inf_norm(simplex[best] - prev_best), evals, simplex[best]});
        prev_best = simplex[best];
        if (spread < opt.tol) {
            res.status = Status::converged_simplex;
            break;
        }
        if (it == opt.max_iter) break;

        Vector centroid = Vector::Zero(n);
        for (std::size_t k = 0; k < m; ++k)
            if (k != worst) centroid += simplex[k];
        centroid /= static_cast<double>(n);

        const Vector xr = centroid + opt.reflect * (centroid - simplex[worst]);
        const double fr = eval(xr);
        if (fr < fv[best]) {
            const Vector xe = centroid + opt.expand * (xr - centroid);
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                fv[worst] = fe;
            } else {
                simplex[worst] = xr;
                fv[worst] = fr;
            }
            continue;
        }
        if (fr < fv[second]) {
            simplex[worst] = xr;
            fv[worst] = fr;
            continue;
        }
        // Contraction: outside if the reflection improved on the worst point.
        const bool outside = fr < fv[worst];
        const Vector xc = outside ? Vector(centroid + opt.contract * (xr - centroid))
                                  : Vector(centroid + opt.contract * (simplex[worst] - centroid));
        const double fc = eval(xc);
        if (fc < (outside ? fr : fv[worst])) {
            simplex[worst] = xc;
            fv[worst] = fc;
            continue;
        }
        for (std::size_t k = 0; k < m; ++k) {
            if (k == best) continue;
            simplex[k] = simplex[best] + opt.shrink * (simplex[k] - simplex[best]);
            fv[k] = eval(simplex[k]);
        }
    }
    const auto best = static_cast<std::size_t>(std::min_element(fv.begin(), fv.end()) - fv.begin());
    res.x = simplex[best];
    res.f = fv[best];
    res.evals = evals;
    return res;
}

ScalarMin golden_section(const std::function<double(double)>& f, double lo, double hi, double tol)
{
    require(hi >= lo, "golden_section: empty interval");
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = lo, b = hi;
    double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
    double fc = f(c), fd = f(d);
    int evals = 2;
    while (b - a > tol) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        ++evals;
    }
    // Bracket endpoints are candidates too, so an optimum on the boundary of
    // [lo, hi] is returned exactly.
    ScalarMin best{fc <= fd ? c : d, std::min(fc, fd), evals};
    for (double e : {lo, hi}) {
        const double fe = f(e);
        ++best.evals;
        if (fe < best.f) best = {e, fe, best.evals};
    }
    return best;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace)
{
    os << "iteration,f,grad_norm,step_norm,evals\n";
    os.precision(17);
    for (const auto& r : trace)
        os << r.iteration << ',' << r.f << ',' << r.grad_norm << ',' << r.step_norm << ',' << r.evals << '\n';
}

} // namespace aidx::opt
