#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <vector>

namespace aidx {

struct Dataset {
    Eigen::MatrixXd x;         ///< one sample per row
    std::vector<int> labels;   ///< empty for unlabeled data

    std::size_t size() const { return static_cast<std::size_t>(x.rows()); }
};

/// Two classes of 8x8 intensity "images": each class is a fixed random
/// pattern around mid-grey plus isotropic Gaussian noise, clipped to [0, 1].
struct BlobOptions {
    std::size_t per_class = 400;
    std::size_t side = 8;
    double separation = 0.5;   ///< pattern contrast, in units of half the intensity range
    double noise = 1.0;        ///< per-pixel noise sigma, same units
    std::uint64_t pattern_seed = 2024;
    std::uint64_t seed = 1;
};

Dataset make_blobs(const BlobOptions& opt);

/// Numeric CSV with a header row. With `label_column` the last column is an
/// integer label.
Dataset load_csv_dataset(const std::filesystem::path& path, bool label_column);

/// Deterministic shuffled split; the first part holds round(fraction * n) samples.
std::pair<Dataset, Dataset> split(const Dataset& d, double fraction, std::uint64_t seed);

} // namespace aidx
