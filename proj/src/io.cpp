#include "aidx/io.hpp"

#include "aidx/error.hpp"

#include <fstream>
#include <ostream>
#include <set>
#include <sstream>

namespace aidx {

const char* version() { return AIDX_VERSION; }

Json load_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open '" + path.string() + "'");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ValidationError("'" + path.string() + "' is not valid JSON: " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << text;
}

namespace {

void reject_unknown(const Json& j, std::initializer_list<const char*> known, const std::string& where)
{
    require(j.is_object(), where + " must be a JSON object");
    std::set<std::string> k(known.begin(), known.end());
    for (const auto& [key, _] : j.items())
        if (!k.count(key)) throw ValidationError(where + ": unknown field '" + key + "'");
}

template <class T>
void take(const Json& j, const char* key, T& out, const std::string& where)
{
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw ValidationError(where + ": field '" + key + "' has the wrong type");
    }
}

} // namespace

Json device_to_json(const DeviceParams& p)
{
    return Json{{"v_on", p.v_on},           {"v_off", p.v_off},     {"k_s_on", p.k_s_on},
                {"k_s_off", p.k_s_off},     {"alpha_s_on", p.alpha_s_on}, {"alpha_s_off", p.alpha_s_off},
                {"k_on", p.k_on},           {"k_off", p.k_off},     {"alpha_on", p.alpha_on},
                {"alpha_off", p.alpha_off}, {"r_on", p.r_on},       {"r_off", p.r_off},
                {"window_kind", p.window.to_string()}};
}

DeviceParams device_from_json(const Json& j, const DeviceParams& defaults)
{
    const std::string w = "device";
    reject_unknown(j, {"v_on", "v_off", "k_s_on", "k_s_off", "alpha_s_on", "alpha_s_off", "k_on", "k_off", "alpha_on",
                       "alpha_off", "r_on", "r_off", "window_kind"},
                   w);
    DeviceParams p = defaults;
    take(j, "v_on", p.v_on, w);
    take(j, "v_off", p.v_off, w);
    take(j, "k_s_on", p.k_s_on, w);
    take(j, "k_s_off", p.k_s_off, w);
    take(j, "alpha_s_on", p.alpha_s_on, w);
    take(j, "alpha_s_off", p.alpha_s_off, w);
    take(j, "k_on", p.k_on, w);
    take(j, "k_off", p.k_off, w);
    take(j, "alpha_on", p.alpha_on, w);
    take(j, "alpha_off", p.alpha_off, w);
    take(j, "r_on", p.r_on, w);
    take(j, "r_off", p.r_off, w);
    std::string window = p.window.to_string();
    take(j, "window_kind", window, w);
    p.window = Window::parse(window);
    p.validate();
    return p;
}

Json pulse_config_to_json(const PulseConfig& c)
{
    Json mask = Json::array();
    for (auto m : c.inversion_mask) mask.push_back(static_cast<int>(m));
    return Json{{"A", c.A},
                {"D", c.D},
                {"base_amplitude_v", c.base_amplitude_v},
                {"base_width_s", c.base_width_s},
                {"inversion_fraction", c.inversion_fraction},
                {"inversion_mask", mask},
                {"bounds", {c.bounds.min, c.bounds.max}},
                {"scalar", c.scalar}};
}

PulseConfig pulse_config_from_json(const Json& j)
{
    const std::string w = "pulse config";
    reject_unknown(j, {"A", "D", "base_amplitude_v", "base_width_s", "inversion_fraction", "inversion_mask", "bounds",
                       "scalar"},
                   w);
    require(j.contains("A") && j.contains("D"), "pulse config: A and D are required");
    PulseConfig c;
    take(j, "A", c.A, w);
    take(j, "D", c.D, w);
    take(j, "base_amplitude_v", c.base_amplitude_v, w);
    take(j, "base_width_s", c.base_width_s, w);
    take(j, "inversion_fraction", c.inversion_fraction, w);
    std::vector<int> mask;
    take(j, "inversion_mask", mask, w);
    for (int m : mask) {
        require(m == 0 || m == 1, "pulse config: inversion_mask entries must be 0 or 1");
        c.inversion_mask.push_back(static_cast<std::uint8_t>(m));
    }
    std::vector<double> b{c.bounds.min, c.bounds.max};
    take(j, "bounds", b, w);
    require(b.size() == 2, "pulse config: bounds must be [min, max]");
    c.bounds = {b[0], b[1]};
    take(j, "scalar", c.scalar, w);
    return c;
}

namespace {

Json scenario_json(const ScenarioReport& s)
{
    return Json{{"name", s.name},     {"objective", s.objective}, {"in_bounds", s.in_bounds},
                {"status", s.status}, {"iterations", s.iterations}, {"evals", s.evals},
                {"A", s.A},           {"D", s.D}};
}

} // namespace

Json manifest_to_json(const PreprocessResult& r, const std::string& mode)
{
    Json layers = Json::array();
    for (const auto& c : r.configs) layers.push_back(pulse_config_to_json(c));
    Json reports = Json::array();
    for (const auto& rep : r.reports) {
        Json sc = Json::array(), sc2 = Json::array();
        for (const auto& s : rep.scenarios) sc.push_back(scenario_json(s));
        for (const auto& s : rep.scenarios_after_inversion) sc2.push_back(scenario_json(s));
        reports.push_back(Json{{"layer", rep.layer},
                               {"identity_e_drift", rep.identity_e_drift},
                               {"normalization", rep.normalization},
                               {"scenarios", sc},
                               {"inversion_triggered", rep.inversion_triggered},
                               {"inversion_fraction", rep.inversion.a},
                               {"inversion_objective", rep.inversion.objective},
                               {"inversion_objective_at_zero", rep.inversion.objective_at_zero},
                               {"scenarios_after_inversion", sc2},
                               {"selected", rep.selected},
                               {"selected_objective", rep.selected_objective},
                               {"projected", rep.projected}});
    }
    return Json{{"version", version()}, {"mode", mode}, {"layers", layers}, {"report", reports}};
}

std::vector<PulseConfig> manifest_configs(const Json& manifest)
{
    require(manifest.is_object() && manifest.contains("layers") && manifest["layers"].is_array(),
            "manifest needs a 'layers' array");
    std::vector<PulseConfig> out;
    for (const auto& l : manifest["layers"]) out.push_back(pulse_config_from_json(l));
    return out;
}

Json crossbar_snapshot(const CrossbarArray& xbar, long reads)
{
    Json w = Json::array();
    Json params = Json::array();
    for (std::size_t i = 0; i < xbar.rows(); ++i) {
        Json row = Json::array();
        for (std::size_t j = 0; j < xbar.cols(); ++j) {
            row.push_back(xbar.cell(i, j).w);
            params.push_back(device_to_json(xbar.cell(i, j).params));
        }
        w.push_back(row);
    }
    const auto& c = xbar.config();
    return Json{{"rows", xbar.rows()},
                {"cols", xbar.cols()},
                {"reads", reads},
                {"g_min", c.g_min},
                {"g_max", c.g_max},
                {"line_resistance", c.line_resistance},
                {"w", w},
                {"params", params}};
}

void write_csv_preamble(std::ostream& os, std::uint64_t seed, const std::string& what)
{
    os << "# aidx " << version() << " seed=" << seed << ' ' << what << '\n';
}

void write_delta_g_csv(std::ostream& os, const Eigen::MatrixXd& dg, long reads, std::uint64_t seed,
                       const Eigen::MatrixXd* reference)
{
    if (reference)
        require(reference->rows() == dg.rows() && reference->cols() == dg.cols(), "heatmap reference shape mismatch");
    std::ostringstream what;
    what << "delta_g" << (reference ? "_percent" : "_siemens") << " rows=" << dg.rows() << " cols=" << dg.cols()
         << " reads=" << reads;
    write_csv_preamble(os, seed, what.str());
    for (Eigen::Index j = 0; j < dg.cols(); ++j) os << (j ? "," : "") << "c" << j;
    os << '\n';
    os.precision(10);
    for (Eigen::Index i = 0; i < dg.rows(); ++i) {
        for (Eigen::Index j = 0; j < dg.cols(); ++j) {
            const double v = reference ? 100.0 * dg(i, j) / (*reference)(i, j) : dg(i, j);
            os << (j ? "," : "") << v;
        }
        os << '\n';
    }
}

void RunConfig::sync()
{
    objective.variation = variation;
    objective.crossbar = crossbar;
    trajectory.variation = variation;
    trajectory.crossbar = crossbar;
    preprocess.inversion.variation = variation;
}

void apply_overrides(RunConfig& cfg, const Json& j)
{
    reject_unknown(j, {"device", "variation", "integrator", "crossbar", "signal", "optimizer", "aidx", "network",
                       "fitting", "seed"},
                   "run config");
    take(j, "seed", cfg.seed, "run config");
    if (j.contains("device")) cfg.device = device_from_json(j["device"], cfg.device);
    if (j.contains("variation")) {
        const auto& v = j["variation"];
        reject_unknown(v, {"scale", "form"}, "variation");
        take(v, "scale", cfg.variation.scale, "variation");
        std::string form = cfg.variation.form_name();
        take(v, "form", form, "variation");
        cfg.variation.form = VariationModel::parse_form(form);
        require(cfg.variation.scale >= 0.0, "variation scale must be >= 0");
    }
    if (j.contains("integrator")) {
        reject_unknown(j["integrator"], {"max_dw"}, "integrator");
        take(j["integrator"], "max_dw", cfg.crossbar.max_dw, "integrator");
    }
    if (j.contains("crossbar")) {
        const auto& c = j["crossbar"];
        reject_unknown(c, {"g_min", "g_max", "line_resistance", "parallel"}, "crossbar");
        take(c, "g_min", cfg.crossbar.g_min, "crossbar");
        take(c, "g_max", cfg.crossbar.g_max, "crossbar");
        take(c, "line_resistance", cfg.crossbar.line_resistance, "crossbar");
        bool par = cfg.crossbar.policy == ExecPolicy::parallel;
        take(c, "parallel", par, "crossbar");
        cfg.crossbar.policy = par ? ExecPolicy::parallel : ExecPolicy::serial;
    }
    if (j.contains("signal")) {
        const auto& s = j["signal"];
        reject_unknown(s, {"base_amplitude_v", "base_width_s", "bounds", "ratio_mode"}, "signal");
        take(s, "base_amplitude_v", cfg.base_amplitude_v, "signal");
        take(s, "base_width_s", cfg.base_width_s, "signal");
        std::vector<double> b{cfg.bounds.min, cfg.bounds.max};
        take(s, "bounds", b, "signal");
        require(b.size() == 2 && b[0] > 0.0 && b[1] >= b[0], "signal.bounds must be [min, max] with 0 < min <= max");
        cfg.bounds = {b[0], b[1]};
        std::string mode = to_string(cfg.preprocess.ratio_mode);
        take(s, "ratio_mode", mode, "signal");
        cfg.preprocess.ratio_mode = parse_ratio_mode(mode);
    }
    if (j.contains("optimizer")) {
        const auto& o = j["optimizer"];
        reject_unknown(o, {"tol", "max_iter", "c1", "shrink", "curvature_eps", "fd_rel_step"}, "optimizer");
        auto& b = cfg.preprocess.bfgs;
        take(o, "tol", b.tol, "optimizer");
        take(o, "max_iter", b.max_iter, "optimizer");
        take(o, "c1", b.c1, "optimizer");
        take(o, "shrink", b.shrink, "optimizer");
        take(o, "curvature_eps", b.curvature_eps, "optimizer");
        take(o, "fd_rel_step", b.fd.rel_step, "optimizer");
    }
    if (j.contains("aidx")) {
        const auto& a = j["aidx"];
        reject_unknown(a, {"horizon_k", "trial_seeds", "lambda1", "lambda2", "eval_samples", "tie_eps",
                           "inversion_tol", "inversion_variation_samples", "eval_seeds", "optimize_amplitude",
                           "optimize_width"},
                       "aidx");
        take(a, "horizon_k", cfg.objective.horizon_k, "aidx");
        std::size_t trials = cfg.objective.trial_seeds.size();
        take(a, "trial_seeds", trials, "aidx");
        require(trials >= 1, "aidx.trial_seeds must be >= 1");
        cfg.objective.trial_seeds.clear();
        for (std::size_t t = 1; t <= trials; ++t) cfg.objective.trial_seeds.push_back(t);
        take(a, "lambda1", cfg.objective.lambda1, "aidx");
        take(a, "lambda2", cfg.objective.lambda2, "aidx");
        take(a, "eval_samples", cfg.objective.eval_samples, "aidx");
        take(a, "tie_eps", cfg.preprocess.tie_eps, "aidx");
        take(a, "inversion_tol", cfg.preprocess.inversion.tol, "aidx");
        take(a, "inversion_variation_samples", cfg.preprocess.inversion.variation_samples, "aidx");
        take(a, "eval_seeds", cfg.eval_seeds, "aidx");
        take(a, "optimize_amplitude", cfg.preprocess.optimize_amplitude, "aidx");
        take(a, "optimize_width", cfg.preprocess.optimize_width, "aidx");
        require(cfg.objective.horizon_k >= 1, "aidx.horizon_k must be >= 1");
        require(cfg.objective.lambda1 >= 0.0 && cfg.objective.lambda2 >= 0.0, "aidx lambdas must be >= 0");
    }
    if (j.contains("network")) {
        const auto& n = j["network"];
        reject_unknown(n, {"total_ops", "checkpoint_every", "lifetime_threshold", "threshold_relative"}, "network");
        take(n, "total_ops", cfg.trajectory.total_ops, "network");
        take(n, "checkpoint_every", cfg.trajectory.checkpoint_every, "network");
        take(n, "lifetime_threshold", cfg.trajectory.lifetime_threshold, "network");
        take(n, "threshold_relative", cfg.trajectory.threshold_relative, "network");
    }
    if (j.contains("fitting")) {
        const auto& f = j["fitting"];
        reject_unknown(f, {"v_max", "points_per_leg", "dwell_reset_s", "dwell_set_s", "dwell_power",
                           "dwell_cap", "w0", "noise", "temperature_decay", "temperatures", "proposals", "chains"},
                       "fitting");
        take(f, "v_max", cfg.sweep.v_max, "fitting");
        take(f, "points_per_leg", cfg.sweep.points_per_leg, "fitting");
        take(f, "dwell_reset_s", cfg.sweep.dwell_reset_s, "fitting");
        take(f, "dwell_set_s", cfg.sweep.dwell_set_s, "fitting");
        take(f, "dwell_power", cfg.sweep.dwell_power, "fitting");
        take(f, "dwell_cap", cfg.sweep.dwell_cap, "fitting");
        take(f, "w0", cfg.sweep.w0, "fitting");
        take(f, "noise", cfg.sweep.noise, "fitting");
        take(f, "temperature_decay", cfg.fit.temperature_decay, "fitting");
        take(f, "temperatures", cfg.fit.temperatures, "fitting");
        take(f, "proposals", cfg.fit.proposals, "fitting");
        take(f, "chains", cfg.fit.chains, "fitting");
    }
    cfg.sync();
}

Json run_config_to_json(const RunConfig& c)
{
    return Json{
        {"seed", c.seed},
        {"device", device_to_json(c.device)},
        {"variation", {{"scale", c.variation.scale}, {"form", c.variation.form_name()}}},
        {"integrator", {{"max_dw", c.crossbar.max_dw}}},
        {"crossbar",
         {{"g_min", c.crossbar.g_min},
          {"g_max", c.crossbar.g_max},
          {"line_resistance", c.crossbar.line_resistance},
          {"parallel", c.crossbar.policy == ExecPolicy::parallel}}},
        {"signal",
         {{"base_amplitude_v", c.base_amplitude_v},
          {"base_width_s", c.base_width_s},
          {"bounds", {c.bounds.min, c.bounds.max}},
          {"ratio_mode", to_string(c.preprocess.ratio_mode)}}},
        {"optimizer",
         {{"tol", c.preprocess.bfgs.tol},
          {"max_iter", c.preprocess.bfgs.max_iter},
          {"c1", c.preprocess.bfgs.c1},
          {"shrink", c.preprocess.bfgs.shrink},
          {"curvature_eps", c.preprocess.bfgs.curvature_eps},
          {"fd_rel_step", c.preprocess.bfgs.fd.rel_step}}},
        {"aidx",
         {{"horizon_k", c.objective.horizon_k},
          {"trial_seeds", c.objective.trial_seeds.size()},
          {"lambda1", c.objective.lambda1},
          {"lambda2", c.objective.lambda2},
          {"eval_samples", c.objective.eval_samples},
          {"tie_eps", c.preprocess.tie_eps},
          {"inversion_tol", c.preprocess.inversion.tol},
          {"inversion_variation_samples", c.preprocess.inversion.variation_samples},
          {"eval_seeds", c.eval_seeds},
          {"optimize_amplitude", c.preprocess.optimize_amplitude},
          {"optimize_width", c.preprocess.optimize_width}}},
        {"network",
         {{"total_ops", c.trajectory.total_ops},
          {"checkpoint_every", c.trajectory.checkpoint_every},
          {"lifetime_threshold", c.trajectory.lifetime_threshold},
          {"threshold_relative", c.trajectory.threshold_relative}}},
        {"fitting",
         {{"v_max", c.sweep.v_max},
          {"points_per_leg", c.sweep.points_per_leg},
          {"dwell_reset_s", c.sweep.dwell_reset_s},
          {"dwell_set_s", c.sweep.dwell_set_s},
          {"dwell_power", c.sweep.dwell_power},
          {"dwell_cap", c.sweep.dwell_cap},
          {"w0", c.sweep.w0},
          {"noise", c.sweep.noise},
          {"temperature_decay", c.fit.temperature_decay},
          {"temperatures", c.fit.temperatures},
          {"proposals", c.fit.proposals},
          {"chains", c.fit.chains}}}};
}

} // namespace aidx
