#include "aidx/preprocess.hpp"

#include "aidx/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aidx {

std::string to_string(RatioMode m)
{
    return m == RatioMode::scalar ? "scalar" : "per_row";
}

RatioMode parse_ratio_mode(const std::string& text)
{
    if (text == "scalar") return RatioMode::scalar;
    if (text == "per_row") return RatioMode::per_row;
    throw ValidationError("unknown ratio mode: " + text);
}

double inversion_objective(std::span<const InputDistribution> rows, std::span<const DeviceParams> devices,
                           const PulseConfig& cfg, double a, double w)
{
    require(!rows.empty() && !devices.empty(), "inversion objective: need rows and devices");
    require(cfg.rows() == rows.size() || cfg.rows() == 1, "inversion objective: config rows mismatch");
    PulseConfig c = cfg;
    c.inversion_fraction = a;
    double total = 0.0;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t cr = cfg.rows() == 1 ? 0 : r;
        for (const auto& d : devices) total += std::abs(expected_drift_rate(rows[r], d, c, w, cr));
    }
    return total / static_cast<double>(rows.size() * devices.size());
}

InversionSearch optimize_inversion(std::span<const InputDistribution> rows, const DeviceParams& device,
                                   const PulseConfig& cfg, const InversionOptions& opt)
{
    for (const auto& r : rows) r.validate();
    std::vector<DeviceParams> devices;
    if (opt.variation_samples == 0 || opt.variation.scale == 0.0) {
        devices.push_back(device);
    } else {
        for (std::size_t m = 0; m < opt.variation_samples; ++m)
            devices.push_back(sample_variation(device, mix_seed(opt.seed, m, 0x1a), opt.variation));
    }
    auto f = [&](double a) { return inversion_objective(rows, devices, cfg, a, opt.w); };
    const auto best = opt::golden_section(f, 0.0, 0.5, opt.tol);
    InversionSearch out;
    out.objective_at_zero = f(0.0);
    out.evals = best.evals + 1;
    // Flat or non-improving: keep the inputs as they are.
    if (best.f >= out.objective_at_zero * (1.0 - 1e-9)) {
        out.a = 0.0;
        out.objective = out.objective_at_zero;
    } else {
        out.a = best.x;
        out.objective = best.f;
    }
    return out;
}

namespace {

using opt::Vector;

// Decision variables live in an unconstrained space. D = exp(u); A follows a
// logistic curve with A(0) = 1 that saturates just below the largest
// sub-threshold amplitude.
struct VarMap {
    PulseConfig base;
    RatioMode mode = RatioMode::per_row;
    bool use_a = true;
    bool use_d = true;
    double a_cap = 2.0;

    std::size_t per() const { return mode == RatioMode::scalar ? 1 : base.rows(); }
    Eigen::Index dim() const { return static_cast<Eigen::Index>((use_a ? per() : 0) + (use_d ? per() : 0)); }

    double amp(double u) const
    {
        const double c = -std::log(a_cap - 1.0);
        return a_cap / (1.0 + std::exp(-(u + c)));
    }
    double amp_inverse(double a) const
    {
        const double c = -std::log(a_cap - 1.0);
        const double r = std::clamp(a / a_cap, 1e-12, 1.0 - 1e-12);
        return std::log(r / (1.0 - r)) - c;
    }

    PulseConfig to_config(const Vector& u) const
    {
        PulseConfig c = base;
        c.scalar = mode == RatioMode::scalar;
        std::size_t k = 0;
        if (use_a) {
            for (std::size_t i = 0; i < per(); ++i) {
                const double a = amp(u[static_cast<Eigen::Index>(k++)]);
                if (mode == RatioMode::scalar)
                    std::fill(c.A.begin(), c.A.end(), a);
                else
                    c.A[i] = a;
            }
        }
        if (use_d) {
            for (std::size_t i = 0; i < per(); ++i) {
                const double d = std::exp(u[static_cast<Eigen::Index>(k++)]);
                if (mode == RatioMode::scalar)
                    std::fill(c.D.begin(), c.D.end(), d);
                else
                    c.D[i] = d;
            }
        }
        return c;
    }

    Vector from_config(const PulseConfig& c) const
    {
        Vector u(dim());
        Eigen::Index k = 0;
        if (use_a)
            for (std::size_t i = 0; i < per(); ++i) u[k++] = amp_inverse(c.A[i]);
        if (use_d)
            for (std::size_t i = 0; i < per(); ++i) u[k++] = std::log(c.D[i]);
        return u;
    }
};

struct Candidate {
    ScenarioReport report;
    PulseConfig cfg;
};

Candidate run_scenario(const std::string& name, const DriftObjective& obj, const VarMap& vm, const Vector& u0,
                       const opt::BfgsOptions& bfgs)
{
    // Far steps can underflow a ratio to 0 or overflow it; the line search
    // treats those as infeasible and backs off.
    auto f = [&](const Vector& u) {
        const auto c = vm.to_config(u);
        auto ok = [](double r) { return r > 0.0 && std::isfinite(r); };
        if (!std::all_of(c.A.begin(), c.A.end(), ok) || !std::all_of(c.D.begin(), c.D.end(), ok))
            return std::numeric_limits<double>::infinity();
        return obj.evaluate_unbounded(c);
    };
    const auto r = opt::bfgs_minimize(f, u0, bfgs);
    Candidate c{{}, vm.to_config(r.x)};
    c.report.name = name;
    c.report.objective = r.f;
    c.report.in_bounds = c.cfg.within_bounds();
    c.report.A = c.cfg.A;
    c.report.D = c.cfg.D;
    c.report.status = opt::to_string(r.status);
    c.report.iterations = r.state.iteration;
    c.report.evals = r.evals;
    return c;
}

std::vector<Candidate> run_scenarios(const DriftObjective& obj, const PulseConfig& base, const PreprocessOptions& opt,
                                     double a_cap)
{
    std::vector<Candidate> out;
    VarMap va{base, opt.ratio_mode, true, false, a_cap};
    VarMap vd{base, opt.ratio_mode, false, true, a_cap};
    VarMap vj{base, opt.ratio_mode, true, true, a_cap};

    if (opt.optimize_amplitude) out.push_back(run_scenario("amplitude", obj, va, Vector::Zero(va.dim()), opt.bfgs));
    if (opt.optimize_width) out.push_back(run_scenario("width", obj, vd, Vector::Zero(vd.dim()), opt.bfgs));
    if (opt.optimize_amplitude && opt.optimize_width) {
        const Candidate& seed = out[0].report.objective <= out[1].report.objective ? out[0] : out[1];
        out.push_back(run_scenario("joint", obj, vj, vj.from_config(seed.cfg), opt.bfgs));
    }
    return out;
}

PulseConfig project(PulseConfig c)
{
    for (auto* v : {&c.A, &c.D})
        for (auto& r : *v) r = std::clamp(r, c.bounds.min, c.bounds.max);
    return c;
}

} // namespace

PulseConfig optimize_layer(DriftObjective& objective, const PulseConfig& base_in, const PreprocessOptions& opt,
                           LayerReport& report)
{
    require(base_in.rows() == objective.rows(), "optimize_layer: base config rows mismatch");
    PulseConfig base = base_in;
    base.A.assign(base.rows(), 1.0);
    base.D.assign(base.rows(), 1.0);
    base.inversion_fraction = 0.0;
    base.inversion_mask.clear();
    base.scalar = opt.ratio_mode == RatioMode::scalar;
    base.validate(objective.v_limit());

    const double raw = objective.raw_e_drift(base);
    report.identity_e_drift = raw;
    if (!(std::abs(raw) > 0.0) || (!opt.optimize_amplitude && !opt.optimize_width)) {
        objective.set_normalization(1.0);
        report.normalization = 1.0;
        report.selected_objective = objective.evaluate(base);
        report.selected = "identity";
        return base;
    }
    objective.set_normalization(1.0 / std::abs(raw));
    report.normalization = 1.0 / std::abs(raw);

    const double a_cap = 0.999 * objective.v_limit() / base.base_amplitude_v;
    require(a_cap > 1.0, "optimize_layer: base amplitude leaves no sub-threshold headroom");

    std::vector<Candidate> candidates;
    {
        Candidate id{{}, base};
        id.report.name = "identity";
        id.report.objective = objective.evaluate(base);
        id.report.A = base.A;
        id.report.D = base.D;
        id.report.status = "baseline";
        candidates.push_back(id);
    }

    auto first = run_scenarios(objective, base, opt, a_cap);
    for (const auto& c : first) report.scenarios.push_back(c.report);
    const auto best_first = std::min_element(first.begin(), first.end(), [](const auto& a, const auto& b) {
        return a.report.objective < b.report.objective;
    });

    if (best_first != first.end() && !best_first->report.in_bounds &&
        best_first->report.objective < candidates.front().report.objective) {
        report.inversion_triggered = true;
        const auto dists = objective.workload().row_distributions();
        report.inversion = optimize_inversion(dists, objective.device(), base, opt.inversion);
        if (report.inversion.a > 0.0) {
            PulseConfig inv = base;
            inv.inversion_fraction = report.inversion.a;
            inv.inversion_mask = inversion_mask(static_cast<std::size_t>(objective.workload().inputs.rows()),
                                                report.inversion.a, mix_seed(opt.seed, 0x1f));
            Candidate idinv{{}, inv};
            idinv.report.name = "identity+inversion";
            idinv.report.objective = objective.evaluate(inv);
            idinv.report.A = inv.A;
            idinv.report.D = inv.D;
            idinv.report.status = "baseline";
            candidates.push_back(idinv);
            auto second = run_scenarios(objective, inv, opt, a_cap);
            for (auto& c : second) {
                c.report.name += "+inversion";
                report.scenarios_after_inversion.push_back(c.report);
                candidates.push_back(std::move(c));
            }
        }
    }
    for (auto& c : first) candidates.push_back(std::move(c));

    // Out-of-bounds optima are clamped into the hardware range and re-scored.
    std::vector<Candidate> feasible;
    for (auto& c : candidates) {
        if (c.cfg.within_bounds()) {
            feasible.push_back(c);
            continue;
        }
        Candidate p{c.report, project(c.cfg)};
        p.report.name += "+projected";
        p.report.objective = objective.evaluate(p.cfg);
        p.report.in_bounds = true;
        p.report.A = p.cfg.A;
        p.report.D = p.cfg.D;
        feasible.push_back(std::move(p));
    }

    const Candidate& identity = feasible.front();
    const Candidate* best = &identity;
    for (const auto& c : feasible)
        if (c.report.objective < best->report.objective) best = &c;
    if (identity.report.objective - best->report.objective <= opt.tie_eps) best = &identity;

    report.selected = best->report.name;
    report.selected_objective = best->report.objective;
    report.projected = best->report.name.find("+projected") != std::string::npos;
    return best->cfg;
}

PreprocessResult aidx_preprocess(const std::vector<LayerWorkload>& layers, const DeviceParams& device,
                                 const PulseConfig& base, const DriftObjectiveOptions& objective,
                                 const PreprocessOptions& opt)
{
    require(!layers.empty(), "aidx_preprocess: no layers");
    PreprocessResult out;
    for (std::size_t l = 0; l < layers.size(); ++l) {
        DriftObjective obj(layers[l], device, objective);
        PulseConfig layer_base = PulseConfig::identity(layers[l].rows(), base.base_amplitude_v, base.base_width_s);
        layer_base.bounds = base.bounds;
        LayerReport rep;
        rep.layer = l;
        PreprocessOptions lopt = opt;
        lopt.seed = mix_seed(opt.seed, l);
        out.configs.push_back(optimize_layer(obj, layer_base, lopt, rep));
        out.reports.push_back(std::move(rep));
    }
    return out;
}

} // namespace aidx
