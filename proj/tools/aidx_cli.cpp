// aidx: command-line front end. Exit codes: 0 ok, 2 validation error,
// 3 simulation or optimizer failure.

#include "aidx/error.hpp"
#include "aidx/experiments.hpp"
#include "aidx/fitting.hpp"
#include "aidx/io.hpp"
#include "aidx/training.hpp"
#include "aidx/workload.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace aidx;

namespace {

struct Common {
    std::string config;
    std::string device;
    std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c, bool with_device = true)
{
    cmd->add_option("--config", c.config, "run config JSON (overrides defaults and workload settings)");
    if (with_device) cmd->add_option("--device", c.device, "DeviceParams JSON");
    cmd->add_option("--seed", c.seed, "run seed");
}

/// Layering: defaults < workload "run" section < --config file < --device < flags.
RunConfig resolve_config(const Common& c, const Json* workload_run = nullptr)
{
    RunConfig cfg;
    if (workload_run && !workload_run->empty()) apply_overrides(cfg, *workload_run);
    if (!c.config.empty()) apply_overrides(cfg, load_json_file(c.config));
    if (!c.device.empty()) cfg.device = device_from_json(load_json_file(c.device), cfg.device);
    if (c.seed) cfg.seed = *c.seed;
    cfg.sync();
    return cfg;
}

std::vector<std::uint64_t> seed_list(std::uint64_t base, std::size_t n)
{
    std::vector<std::uint64_t> s;
    for (std::size_t i = 0; i < n; ++i) s.push_back(base + i);
    return s;
}

std::string to_text(const std::function<void(std::ostream&)>& f)
{
    std::ostringstream os;
    f(os);
    return os.str();
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Memristance drift simulator and AIDX pulse optimizer"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version()));

    // fit
    Common fit_c;
    std::string fit_iv, fit_out;
    auto* fit = app.add_subcommand("fit", "fit sub-threshold parameters to an I-V sweep CSV");
    fit->add_option("--iv", fit_iv, "CSV with voltage_v,current_a,dwell_s")->required();
    fit->add_option("--out", fit_out, "DeviceParams JSON to write")->required();
    add_common(fit, fit_c);

    // generate-sweep
    Common gen_c;
    std::string gen_out;
    std::optional<double> gen_noise;
    auto* gen = app.add_subcommand("generate-sweep", "write a synthetic sub-threshold I-V sweep");
    gen->add_option("--out", gen_out, "CSV to write")->required();
    gen->add_option("--noise", gen_noise, "relative current noise");
    add_common(gen, gen_c);

    // optimize
    Common opt_c;
    std::string opt_workload, opt_out, opt_mode = "aidx-a";
    std::optional<double> opt_l1, opt_l2;
    auto* optc = app.add_subcommand("optimize", "run AIDX preprocessing and write a pulse manifest");
    optc->add_option("--workload", opt_workload, "workload manifest JSON")->required();
    optc->add_option("--mode", opt_mode, "aidx-a or aidx-p")->check(CLI::IsMember({"aidx-a", "aidx-p"}));
    optc->add_option("--lambda1", opt_l1, "L2 weight on A (aidx-p)");
    optc->add_option("--lambda2", opt_l2, "L2 weight on D (aidx-p)");
    optc->add_option("--out", opt_out, "manifest JSON to write")->required();
    add_common(optc, opt_c);

    // benchmark
    Common bench_c;
    std::string bench_workload, bench_manifest = "identity", bench_out, bench_summary, bench_heatmap;
    std::optional<long> bench_ops, bench_every;
    std::optional<std::size_t> bench_seeds;
    auto* bench = app.add_subcommand("benchmark", "paired baseline / AIDX trajectories");
    bench->add_option("--workload", bench_workload, "workload manifest JSON")->required();
    bench->add_option("--manifest", bench_manifest, "pulse manifest JSON, or 'identity'");
    bench->add_option("--total-ops", bench_ops, "inference operations per trajectory");
    bench->add_option("--checkpoint-every", bench_every, "operations between checkpoints");
    bench->add_option("--seeds", bench_seeds, "number of mapping seeds");
    bench->add_option("--out", bench_out, "metrics CSV to write")->required();
    bench->add_option("--summary", bench_summary, "summary JSON to write");
    bench->add_option("--heatmap-prefix", bench_heatmap, "write <prefix>_{baseline,aidx}.csv dG heatmaps");
    add_common(bench, bench_c);

    // drift-demo
    Common demo_c;
    std::string demo_out;
    DriftDemoOptions demo;
    auto* dd = app.add_subcommand("drift-demo", "single-conductance drift experiment");
    dd->add_option("--out", demo_out, "CSV to write")->required();
    dd->add_option("--pulses", demo.pulses, "pulses per device");
    dd->add_option("--devices", demo.devices_per_group, "devices per group");
    dd->add_option("--p-positive", demo.p_positive, "positive-input probability of the first group");
    dd->add_option("--base-width", demo.base_width_s, "pulse width (s)");
    add_common(dd, demo_c);

    // make-workload
    std::string mk_kind, mk_out, mk_data = "data/digits8x8.csv";
    std::uint64_t mk_seed = 1;
    std::size_t mk_hidden = 16;
    int mk_epochs = 60;
    auto* mk = app.add_subcommand("make-workload", "train a desk-scale network and write its workload manifest");
    mk->add_option("--kind", mk_kind, "blobs-mlp, blobs-mlp2 or digits-ae")
        ->required()
        ->check(CLI::IsMember({"blobs-mlp", "blobs-mlp2", "digits-ae"}));
    mk->add_option("--out", mk_out, "manifest JSON to write")->required();
    mk->add_option("--data", mk_data, "digits CSV (digits-ae)");
    mk->add_option("--hidden", mk_hidden, "hidden units");
    mk->add_option("--epochs", mk_epochs, "training epochs");
    mk->add_option("--seed", mk_seed, "training seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*fit) {
            auto cfg = resolve_config(fit_c);
            const auto data = read_iv_csv(fit_iv);
            auto fo = cfg.fit;
            fo.seed = cfg.seed;
            const auto rep = fit_subthreshold(data, cfg.device, fo);
            write_text_file(fit_out, device_to_json(rep.params).dump(2) + "\n");
            std::cout << Json{{"objective", rep.final_objective},
                              {"anneal_objective", rep.anneal_objective},
                              {"w0", rep.w0},
                              {"evaluations", rep.evaluations}}
                             .dump()
                      << '\n';
        } else if (*gen) {
            auto cfg = resolve_config(gen_c);
            auto so = cfg.sweep;
            so.seed = cfg.seed;
            if (gen_noise) so.noise = *gen_noise;
            const auto data = generate_sweep(cfg.device, so);
            write_text_file(gen_out, to_text([&](std::ostream& os) {
                write_csv_preamble(os, cfg.seed, "iv_sweep");
                write_iv_csv(os, data);
            }));
        } else if (*optc) {
            const auto w = load_workload(opt_workload);
            auto cfg = resolve_config(opt_c, &w.run);
            if (opt_mode == "aidx-a") {
                require(!opt_l1 && !opt_l2, "aidx-a takes no lambdas; use --mode aidx-p");
                cfg.objective.lambda1 = cfg.objective.lambda2 = 0.0;
            } else {
                cfg.objective.lambda1 = opt_l1.value_or(cfg.objective.lambda1 > 0 ? cfg.objective.lambda1 : 1e-2);
                cfg.objective.lambda2 = opt_l2.value_or(cfg.objective.lambda2 > 0 ? cfg.objective.lambda2 : 1e-2);
                require(cfg.objective.lambda1 >= 0.0 && cfg.objective.lambda2 >= 0.0, "lambdas must be >= 0");
            }
            const auto res = optimize_workload(w, cfg);
            auto j = manifest_to_json(res, opt_mode);
            j["seed"] = cfg.seed;
            j["lambda1"] = cfg.objective.lambda1;
            j["lambda2"] = cfg.objective.lambda2;
            write_text_file(opt_out, j.dump(2) + "\n");
        } else if (*bench) {
            const auto w = load_workload(bench_workload);
            auto cfg = resolve_config(bench_c, &w.run);
            if (bench_ops) cfg.trajectory.total_ops = *bench_ops;
            if (bench_every) cfg.trajectory.checkpoint_every = *bench_every;
            if (bench_seeds) cfg.eval_seeds = *bench_seeds;
            cfg.sync();
            require(cfg.eval_seeds >= 1, "--seeds must be >= 1");
            const auto cfgs = bench_manifest == "identity" ? identity_configs(w.net, cfg)
                                                           : manifest_configs(load_json_file(bench_manifest));
            const auto res = run_benchmark(w, cfg, cfgs, seed_list(cfg.seed, cfg.eval_seeds));
            write_text_file(bench_out, to_text([&](std::ostream& os) { write_benchmark_csv(os, res, cfg.seed); }));
            const auto summary = benchmark_summary(res, w.task.kind);
            if (!bench_summary.empty()) write_text_file(bench_summary, summary.dump(2) + "\n");
            if (!bench_heatmap.empty()) {
                write_text_file(bench_heatmap + "_baseline.csv", to_text([&](std::ostream& os) {
                    write_delta_g_csv(os, res.dg_baseline, cfg.trajectory.total_ops, cfg.seed, &res.g_programmed);
                }));
                write_text_file(bench_heatmap + "_aidx.csv", to_text([&](std::ostream& os) {
                    write_delta_g_csv(os, res.dg_aidx, cfg.trajectory.total_ops, cfg.seed, &res.g_programmed);
                }));
            }
            std::cout << summary.dump() << '\n';
        } else if (*dd) {
            auto cfg = resolve_config(demo_c);
            demo.device = cfg.device;
            demo.variation = cfg.variation;
            demo.bounds = cfg.bounds;
            demo.seed = cfg.seed;
            const auto res = run_drift_demo(demo);
            write_text_file(demo_out, to_text([&](std::ostream& os) { write_drift_demo_csv(os, res, cfg.seed); }));
        } else if (*mk) {
            Workload w;
            const fs::path out(mk_out);
            SgdOptions sgd;
            sgd.seed = mk_seed;
            sgd.epochs = mk_epochs;
            if (mk_kind == "digits-ae") {
                w.name = "digits-autoencoder";
                fs::path data = fs::absolute(mk_data);
                w.data_spec = Json{{"source", "csv"},
                                   {"path", fs::relative(data, fs::absolute(out).parent_path()).generic_string()},
                                   {"label_column", true},
                                   {"eval_fraction", 0.2},
                                   {"split_seed", 17}};
                w.task = build_task(w.data_spec, TaskKind::reconstruction, out.parent_path());
                w.net = make_mlp({64, mk_hidden, 64}, Activation::sigmoid, Activation::sigmoid, mk_seed);
                sgd.learning_rate = 1.0;
                train_autoencoder(w.net, w.task.stream, sgd);
            } else {
                w.name = mk_kind;
                w.data_spec = Json{{"source", "blobs"}, {"per_class", 600}, {"separation", 0.5}, {"noise", 1.0},
                                   {"pattern_seed", 2024}, {"seed", 1}, {"eval_fraction", 0.25}, {"split_seed", 17}};
                w.task = build_task(w.data_spec, TaskKind::classification, out.parent_path());
                std::vector<std::size_t> sizes{64, mk_hidden, 2};
                if (mk_kind == "blobs-mlp2") sizes = {64, mk_hidden, mk_hidden, 2};
                w.net = make_mlp(sizes, Activation::relu, Activation::identity, mk_seed);
                train_classifier(w.net, Dataset{w.task.stream, w.task.stream_labels}, sgd);
            }
            w.net.calibrate_input_scales(w.task.stream);
            // Stress settings under which the bundled tasks show measurable
            // drift within 1e4 reads: wide read pulses stand in for long
            // deployment, and a low conductance window keeps programmed
            // states away from the w = 0 end.
            w.run = Json{{"signal", {{"base_width_s", 3e6}, {"ratio_mode", "scalar"}}},
                         {"crossbar", {{"g_min", 8e-5}, {"g_max", 3e-4}}}};
            save_workload(out, w);
            std::cout << Json{{"name", w.name}, {"layers", w.net.layers.size()}}.dump() << '\n';
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const SimulationError& e) {
        std::cerr << "simulation failed: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "failed: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
