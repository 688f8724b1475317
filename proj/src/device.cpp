#include "aidx/device.hpp"

#include "aidx/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aidx {

std::string Window::to_string() const
{
    switch (kind) {
    case WindowKind::rectangular: return "rectangular";
    case WindowKind::linear: return "linear";
    case WindowKind::polynomial: return "polynomial(" + std::to_string(p) + ")";
    }
    return "rectangular";
}

Window Window::parse(const std::string& text)
{
    if (text == "rectangular") return {WindowKind::rectangular, 1};
    if (text == "linear") return {WindowKind::linear, 1};
    if (text == "polynomial") return {WindowKind::polynomial, 1};
    if (text.rfind("polynomial(", 0) == 0 && text.back() == ')') {
        const auto inner = text.substr(11, text.size() - 12);
        int p = 0;
        try {
            p = std::stoi(inner);
        } catch (const std::exception&) {
            throw ValidationError("bad polynomial window exponent: " + text);
        }
        require(p >= 1, "polynomial window exponent must be >= 1");
        return {WindowKind::polynomial, p};
    }
    throw ValidationError("unknown window kind: " + text);
}

void DeviceParams::validate() const
{
    const double vals[] = {v_on, v_off, k_s_on, k_s_off, alpha_s_on, alpha_s_off,
                           k_on, k_off, alpha_on, alpha_off, r_on, r_off};
    for (double v : vals) require(std::isfinite(v), "device parameters must be finite");
    require(v_on < 0.0 && v_off > 0.0, "thresholds must satisfy v_on < 0 < v_off");
    require(r_on > 0.0 && r_off > r_on, "resistances must satisfy r_off > r_on > 0");
    require(alpha_s_on >= 1.0 && alpha_s_off >= 1.0, "sub-threshold exponents must be >= 1");
    require(alpha_on >= 1.0 && alpha_off >= 1.0, "above-threshold exponents must be >= 1");
    require(k_s_on <= 0.0 && k_on <= 0.0, "SET-direction rate coefficients must be <= 0");
    require(k_s_off >= 0.0 && k_off >= 0.0, "RESET-direction rate coefficients must be >= 0");
    require(window.p >= 1, "window exponent must be >= 1");
}

DeviceParams DeviceParams::tiox()
{
    return DeviceParams{};
}

DeviceParams DeviceParams::drift_free()
{
    DeviceParams p;
    p.k_s_on = 0.0;
    p.k_s_off = 0.0;
    p.k_on = 0.0;
    p.k_off = 0.0;
    return p;
}

double resistance_at(const DeviceParams& p, double w)
{
    return p.r_off * w + p.r_on * (1.0 - w);
}

double conductance_at(const DeviceParams& p, double w)
{
    return 1.0 / resistance_at(p, w);
}

double state_for_conductance(const DeviceParams& p, double g)
{
    const double w = (1.0 / g - p.r_on) / (p.r_off - p.r_on);
    return std::clamp(w, 0.0, 1.0);
}

namespace {

// Direction-aware windows: the "on" window governs motion toward w = 0,
// the "off" window motion toward w = 1.
double window_on(const Window& win, double w)
{
    switch (win.kind) {
    case WindowKind::rectangular: return w > 0.0 ? 1.0 : 0.0;
    case WindowKind::linear: return std::max(w, 0.0);
    case WindowKind::polynomial: return std::max(0.0, 1.0 - std::pow(2.0 * w - 1.0, 2 * win.p));
    }
    return 0.0;
}

double window_off(const Window& win, double w)
{
    switch (win.kind) {
    case WindowKind::rectangular: return w < 1.0 ? 1.0 : 0.0;
    case WindowKind::linear: return std::max(1.0 - w, 0.0);
    case WindowKind::polynomial: return std::max(0.0, 1.0 - std::pow(2.0 * w - 1.0, 2 * win.p));
    }
    return 0.0;
}

double window_on_dw(const Window& win, double w)
{
    switch (win.kind) {
    case WindowKind::rectangular: return 0.0;
    case WindowKind::linear: return w > 0.0 ? 1.0 : 0.0;
    case WindowKind::polynomial: return -4.0 * win.p * std::pow(2.0 * w - 1.0, 2 * win.p - 1);
    }
    return 0.0;
}

double window_off_dw(const Window& win, double w)
{
    switch (win.kind) {
    case WindowKind::rectangular: return 0.0;
    case WindowKind::linear: return w < 1.0 ? -1.0 : 0.0;
    case WindowKind::polynomial: return -4.0 * win.p * std::pow(2.0 * w - 1.0, 2 * win.p - 1);
    }
    return 0.0;
}

/// d(state_rate)/dw at fixed v, from the window derivative.
double state_rate_dw(const DeviceParams& p, double w, double v)
{
    if (v == 0.0) return 0.0;
    if (v > 0.0) {
        const double g = v < p.v_off ? p.k_s_off * std::pow(v / p.v_off, p.alpha_s_off)
                                     : p.k_off * std::pow(v / p.v_off - 1.0, p.alpha_off);
        return g * window_off_dw(p.window, w);
    }
    const double g = v > p.v_on ? p.k_s_on * std::pow(v / p.v_on, p.alpha_s_on)
                                : p.k_on * std::pow(v / p.v_on - 1.0, p.alpha_on);
    return g * window_on_dw(p.window, w);
}

} // namespace

double state_rate(const DeviceParams& p, double w, double v)
{
    if (v == 0.0) return 0.0;
    if (v > 0.0) {
        if (v < p.v_off)
            return p.k_s_off * std::pow(v / p.v_off, p.alpha_s_off) * window_off(p.window, w);
        return p.k_off * std::pow(v / p.v_off - 1.0, p.alpha_off) * window_off(p.window, w);
    }
    if (v > p.v_on)
        return p.k_s_on * std::pow(v / p.v_on, p.alpha_s_on) * window_on(p.window, w);
    return p.k_on * std::pow(v / p.v_on - 1.0, p.alpha_on) * window_on(p.window, w);
}

double resistance_rate(const DeviceParams& p, double w, double v)
{
    return (p.r_off - p.r_on) * state_rate(p, w, v);
}

void advance_state(double& w, const DeviceParams& p, double v, double dt, double max_dw, double local_tol)
{
    if (v == 0.0) return;
    if (p.window.kind == WindowKind::rectangular) {
        // Constant rate until a bound is hit, where the window stops motion:
        // the Euler sub-steps sum exactly to one clamped step.
        w = std::clamp(w + state_rate(p, w, v) * dt, 0.0, 1.0);
        return;
    }
    double remaining = dt;
    // Each sub-step keeps |dw| <= max_dw and the Euler local error
    // h^2 |r r'| / 2 <= local_tol, both at the start of the sub-step.
    while (remaining > 0.0) {
        const double rate = state_rate(p, w, v);
        if (rate == 0.0) return;
        double h = max_dw / std::abs(rate);
        const double curv = std::abs(rate * state_rate_dw(p, w, v));
        if (curv > 0.0) h = std::min(h, std::sqrt(2.0 * local_tol / curv));
        if (h >= remaining) h = remaining;
        w = std::clamp(w + rate * h, 0.0, 1.0);
        remaining -= h;
        if (remaining <= dt * 1e-15) return;
    }
}

MemristorState integrate_step(MemristorState state, double v, double dt, IntegratorOptions opt)
{
    if (!std::isfinite(v)) throw ValidationError("integrate_step: voltage must be finite");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("integrate_step: dt must be > 0");
    require(opt.max_dw > 0.0 && opt.local_tol > 0.0, "integrate_step: max_dw and local_tol must be > 0");
    advance_state(state.w, state.params, v, dt, opt.max_dw, opt.local_tol);
    return state;
}

std::string VariationModel::form_name() const
{
    return form == Form::literal ? "literal" : "relative";
}

VariationModel::Form VariationModel::parse_form(const std::string& text)
{
    if (text == "literal") return Form::literal;
    if (text == "relative") return Form::relative;
    throw ValidationError("unknown variation form: " + text);
}

DeviceParams sample_variation(const DeviceParams& base, std::mt19937_64& rng, const VariationModel& model)
{
    if (model.scale == 0.0) return base;
    require(model.scale > 0.0, "variation scale must be >= 0");

    auto draw = [&](double nominal) {
        const double sd = model.form == VariationModel::Form::literal
                              ? std::sqrt(model.scale * std::abs(nominal))
                              : model.scale * std::abs(nominal);
        if (sd == 0.0) return nominal;
        std::normal_distribution<double> dist(nominal, sd);
        return dist(rng);
    };

    DeviceParams out = base;
    out.k_s_on = std::min(draw(base.k_s_on), 0.0);
    out.k_s_off = std::max(draw(base.k_s_off), 0.0);
    out.alpha_s_on = std::max(draw(base.alpha_s_on), 1.0);
    out.alpha_s_off = std::max(draw(base.alpha_s_off), 1.0);
    out.k_on = std::min(draw(base.k_on), 0.0);
    out.k_off = std::max(draw(base.k_off), 0.0);
    out.alpha_on = std::max(draw(base.alpha_on), 1.0);
    out.alpha_off = std::max(draw(base.alpha_off), 1.0);
    return out;
}

DeviceParams sample_variation(const DeviceParams& base, std::uint64_t seed, const VariationModel& model)
{
    std::mt19937_64 rng(seed);
    return sample_variation(base, rng, model);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b)
{
    auto splitmix = [](std::uint64_t x) {
        x += 0x9E3779B97F4A7C15ull;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
        return x ^ (x >> 31);
    };
    return splitmix(splitmix(splitmix(seed) ^ a) ^ (b * 0xD6E8FEB86659FD93ull));
}

} // namespace aidx
