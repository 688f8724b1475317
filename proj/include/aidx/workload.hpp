#pragma once

#include "aidx/datasets.hpp"
#include "aidx/io.hpp"
#include "aidx/network.hpp"
#include "aidx/objective.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace aidx {

/// A trained network plus the data it is exercised with.
///
/// Manifest layout:
///   {"name", "task": "classification"|"reconstruction",
///    "layers": [{"weights": "<csv>", "activation", "kind", "input_scale", "conv"?}],
///    "data": {"source": "blobs", ...BlobOptions, "eval_fraction", "split_seed"}
///          | {"source": "csv", "path", "label_column", "eval_fraction", "split_seed"},
///    "run": {...run config overrides}}
/// Relative paths resolve against the manifest's directory.
struct Workload {
    std::string name;
    Network net;
    TaskData task;
    Json data_spec;
    Json run = Json::object();
};

Workload load_workload(const std::filesystem::path& manifest);
/// Writes the manifest and one weight CSV per layer next to it.
void save_workload(const std::filesystem::path& manifest, const Workload& w);

/// Builds the task sets described by a data spec.
TaskData build_task(const Json& data_spec, TaskKind kind, const std::filesystem::path& base_dir);

/// Per-layer crossbar workloads: inputs are the normalized software
/// activations of the first `max_samples` rows of `inputs`.
std::vector<LayerWorkload> layer_workloads(const Network& net, const Eigen::MatrixXd& inputs, std::size_t max_samples);

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path);
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);

} // namespace aidx
