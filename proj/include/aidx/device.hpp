#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace aidx {

enum class WindowKind { rectangular, linear, polynomial };

/// Window applied to the state rate. `p` is only used by the polynomial kind,
/// f(w) = 1 - (2w - 1)^(2p).
struct Window {
    WindowKind kind = WindowKind::rectangular;
    int p = 1;

    std::string to_string() const;
    static Window parse(const std::string& text);
    bool operator==(const Window&) const = default;
};

/// Extended VTEAM parameter set. The internal state w maps to resistance as
/// R = r_off * w + r_on * (1 - w), so w rising is the RESET direction.
struct DeviceParams {
    double v_on = -0.6;   ///< SET threshold (V), negative
    double v_off = 0.6;   ///< RESET threshold (V), positive

    // sub-threshold drift
    double k_s_on = -8.445e-6;
    double k_s_off = 1.126e-7;
    double alpha_s_on = 6.0;
    double alpha_s_off = 5.0;

    // above-threshold switching (synthetic values, only used when programming
    // or when a pulse crosses a threshold)
    double k_on = -5.0e2;
    double k_off = 2.0e2;
    double alpha_on = 3.0;
    double alpha_off = 3.0;

    double r_on = 100.0;
    double r_off = 16000.0;

    Window window{};

    /// Throws ValidationError when a sign or ordering invariant is broken.
    void validate() const;

    /// Sub-threshold values fitted to the TiOx device; resistances and the
    /// above-threshold branch are synthetic.
    static DeviceParams tiox();

    /// Same as `tiox()` with every sub-threshold and above-threshold rate set
    /// to zero. Handy for control experiments.
    static DeviceParams drift_free();

    bool operator==(const DeviceParams&) const = default;
};

struct MemristorState {
    double w = 0.5;
    DeviceParams params{};

    double resistance() const { return params.r_off * w + params.r_on * (1.0 - w); }
    double conductance() const { return 1.0 / resistance(); }
};

double resistance_at(const DeviceParams& p, double w);
double conductance_at(const DeviceParams& p, double w);
/// Inverse of conductance_at, clamped to [0, 1].
double state_for_conductance(const DeviceParams& p, double g);

/// dw/dt at state w under bias v.
double state_rate(const DeviceParams& p, double w, double v);
inline double state_rate(const MemristorState& s, double v) { return state_rate(s.params, s.w, v); }

/// dR/dt = (R_off - R_on) * dw/dt.
double resistance_rate(const DeviceParams& p, double w, double v);

struct IntegratorOptions {
    double max_dw = 1e-3;       ///< cap on |dw| per Euler sub-step
    double local_tol = 1e-12;   ///< cap on the local truncation error per sub-step
};

/// Explicit Euler with sub-stepping; the state is clamped to [0, 1].
MemristorState integrate_step(MemristorState state, double v, double dt, IntegratorOptions opt = {});

/// In-place variant used by the crossbar kernels. No argument validation.
void advance_state(double& w, const DeviceParams& p, double v, double dt, double max_dw, double local_tol = 1e-12);

/// Device-to-device variation. `literal` draws each parameter from a Gaussian
/// with variance scale*|nominal|; `relative` uses standard deviation
/// scale*|nominal|.
struct VariationModel {
    enum class Form { literal, relative };
    double scale = 0.15;
    Form form = Form::relative;

    static VariationModel none() { return {0.0, Form::relative}; }
    std::string form_name() const;
    static Form parse_form(const std::string& text);
};

DeviceParams sample_variation(const DeviceParams& base, std::mt19937_64& rng, const VariationModel& model);
DeviceParams sample_variation(const DeviceParams& base, std::uint64_t seed, const VariationModel& model = {});

/// SplitMix64 mixing, used to derive independent per-cell / per-trial seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

} // namespace aidx
