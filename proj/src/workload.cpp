#include "aidx/workload.hpp"

#include "aidx/error.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>

namespace aidx {

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open matrix '" + path.string() + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    for (std::size_t ln = 1; std::getline(in, line); ++ln) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> r;
        std::stringstream ss(line);
        bool numeric = true;
        for (std::string cell; std::getline(ss, cell, ',');) {
            try {
                std::size_t used = 0;
                r.push_back(std::stod(cell, &used));
                if (used != cell.size() && cell.find_first_not_of(" \r", used) != std::string::npos) numeric = false;
            } catch (const std::exception&) {
                numeric = false;
            }
        }
        if (!numeric) {
            if (rows.empty()) continue;   // header row
            throw ValidationError(path.string() + ":" + std::to_string(ln) + ": non-numeric cell");
        }
        if (!rows.empty() && r.size() != rows.front().size())
            throw ValidationError(path.string() + ":" + std::to_string(ln) + ": inconsistent column count");
        rows.push_back(std::move(r));
    }
    require(!rows.empty(), "matrix '" + path.string() + "' is empty");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m)
{
    for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << "c" << j;
    os << '\n';
    os.precision(17);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) os << (j ? "," : "") << m(i, j);
        os << '\n';
    }
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p)
{
    const std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
}

Json conv_json(const ConvGeometry& g)
{
    return Json{{"in_channels", g.in_channels}, {"in_height", g.in_height}, {"in_width", g.in_width},
                {"out_channels", g.out_channels}, {"kernel", g.kernel}, {"stride", g.stride},
                {"padding", g.padding}};
}

ConvGeometry conv_from_json(const Json& j)
{
    ConvGeometry g;
    try {
        g.in_channels = j.value("in_channels", g.in_channels);
        g.in_height = j.at("in_height").get<std::size_t>();
        g.in_width = j.at("in_width").get<std::size_t>();
        g.out_channels = j.value("out_channels", g.out_channels);
        g.kernel = j.value("kernel", g.kernel);
        g.stride = j.value("stride", g.stride);
        g.padding = j.value("padding", g.padding);
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("conv geometry: ") + e.what());
    }
    return g;
}

} // namespace

TaskData build_task(const Json& spec, TaskKind kind, const std::filesystem::path& base_dir)
{
    require(spec.is_object() && spec.contains("source"), "workload data needs a 'source'");
    Dataset all;
    try {
        const auto source = spec.at("source").get<std::string>();
        if (source == "blobs") {
            BlobOptions b;
            b.per_class = spec.value("per_class", b.per_class);
            b.side = spec.value("side", b.side);
            b.separation = spec.value("separation", b.separation);
            b.noise = spec.value("noise", b.noise);
            b.pattern_seed = spec.value("pattern_seed", b.pattern_seed);
            b.seed = spec.value("seed", b.seed);
            all = make_blobs(b);
        } else if (source == "csv") {
            all = load_csv_dataset(resolve(base_dir, spec.at("path").get<std::string>()),
                                   spec.value("label_column", false));
        } else {
            throw ValidationError("unknown data source '" + source + "'");
        }
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("workload data: ") + e.what());
    }
    const double frac = spec.value("eval_fraction", 0.25);
    const auto [eval, stream] = split(all, frac, spec.value("split_seed", std::uint64_t{17}));
    TaskData t;
    t.kind = kind;
    t.stream = stream.x;
    t.stream_labels = stream.labels;
    t.eval = eval.x;
    if (kind == TaskKind::classification) {
        require(!eval.labels.empty(), "classification data needs labels");
        t.eval_labels = eval.labels;
    } else {
        t.eval_targets = eval.x;
    }
    t.validate();
    return t;
}

Workload load_workload(const std::filesystem::path& manifest)
{
    const auto j = load_json_file(manifest);
    const auto base = manifest.parent_path();
    Workload w;
    try {
        w.name = j.value("name", manifest.stem().string());
        const auto kind = parse_task_kind(j.at("task").get<std::string>());
        for (const auto& l : j.at("layers")) {
            Layer layer;
            layer.weights = read_matrix_csv(resolve(base, l.at("weights").get<std::string>()));
            layer.activation = parse_activation(l.value("activation", std::string("identity")));
            layer.kind = parse_layer_kind(l.value("kind", std::string("dense")));
            layer.input_scale = l.value("input_scale", 1.0);
            if (layer.kind == LayerKind::conv) layer.conv = conv_from_json(l.at("conv"));
            w.net.layers.push_back(std::move(layer));
        }
        w.data_spec = j.at("data");
        w.run = j.value("run", Json::object());
        w.task = build_task(w.data_spec, kind, base);
    } catch (const Json::exception& e) {
        throw ValidationError("workload '" + manifest.string() + "': " + e.what());
    }
    w.net.validate();
    const auto in = w.net.layers.front().kind == LayerKind::conv ? w.net.layers.front().conv.input_size()
                                                                  : w.net.layers.front().inputs();
    require(static_cast<std::size_t>(w.task.stream.cols()) == in, "workload data width does not match the network input");
    return w;
}

void save_workload(const std::filesystem::path& manifest, const Workload& w)
{
    const auto base = manifest.parent_path();
    const auto stem = manifest.stem().string();
    Json layers = Json::array();
    for (std::size_t l = 0; l < w.net.layers.size(); ++l) {
        const auto& L = w.net.layers[l];
        const auto file = stem + "_l" + std::to_string(l) + ".csv";
        std::ostringstream os;
        os << "# layer " << l << " weights, final row = bias\n";
        write_matrix_csv(os, L.weights);
        write_text_file(base / file, os.str());
        Json lj{{"weights", file}, {"activation", to_string(L.activation)}, {"kind", to_string(L.kind)},
                {"input_scale", L.input_scale}};
        if (L.kind == LayerKind::conv) lj["conv"] = conv_json(L.conv);
        layers.push_back(lj);
    }
    Json j{{"name", w.name}, {"task", to_string(w.task.kind)}, {"layers", layers}, {"data", w.data_spec}, {"run", w.run}};
    write_text_file(manifest, j.dump(2) + "\n");
}

std::vector<LayerWorkload> layer_workloads(const Network& net, const Eigen::MatrixXd& inputs, std::size_t max_samples)
{
    net.validate();
    require(inputs.rows() >= 1, "layer_workloads: no input samples");
    const auto n = std::min<std::size_t>(max_samples, static_cast<std::size_t>(inputs.rows()));
    std::vector<LayerWorkload> out(net.layers.size());
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
        const auto& L = net.layers[l];
        require(L.kind == LayerKind::dense, "layer_workloads: dense layers only");
        Eigen::MatrixXd w = L.weights;
        w.topRows(w.rows() - 1) *= L.input_scale;
        out[l].map = DifferentialWeightMap::interleaved(std::move(w), true);
        out[l].inputs.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(L.inputs()));
    }
    for (std::size_t s = 0; s < n; ++s) {
        const auto acts = net.activations(inputs.row(static_cast<Eigen::Index>(s)).transpose());
        for (std::size_t l = 0; l < net.layers.size(); ++l)
            out[l].inputs.row(static_cast<Eigen::Index>(s)) =
                (acts[l] / net.layers[l].input_scale).cwiseMax(-1.0).cwiseMin(1.0).transpose();
    }
    return out;
}

} // namespace aidx
