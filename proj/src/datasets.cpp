#include "aidx/datasets.hpp"

#include "aidx/device.hpp"
#include "aidx/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

namespace aidx {

Dataset make_blobs(const BlobOptions& opt)
{
    require(opt.per_class >= 1 && opt.side >= 1, "blobs: need samples and a positive side");
    require(opt.noise >= 0.0 && opt.separation >= 0.0, "blobs: noise and separation must be >= 0");
    const auto dim = static_cast<Eigen::Index>(opt.side * opt.side);
    std::mt19937_64 prng(opt.pattern_seed);
    std::normal_distribution<double> n01(0.0, 1.0);
    Eigen::MatrixXd means(2, dim);
    for (Eigen::Index c = 0; c < 2; ++c)
        for (Eigen::Index i = 0; i < dim; ++i) means(c, i) = 0.5 + 0.5 * opt.separation * n01(prng);

    Dataset d;
    d.x.resize(static_cast<Eigen::Index>(2 * opt.per_class), dim);
    std::mt19937_64 rng(mix_seed(opt.seed, 0xb10b));
    for (std::size_t n = 0; n < 2 * opt.per_class; ++n) {
        const int c = static_cast<int>(n % 2);
        for (Eigen::Index i = 0; i < dim; ++i)
            d.x(static_cast<Eigen::Index>(n), i) = std::clamp(means(c, i) + 0.5 * opt.noise * n01(rng), 0.0, 1.0);
        d.labels.push_back(c);
    }
    return d;
}

Dataset load_csv_dataset(const std::filesystem::path& path, bool label_column)
{
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open dataset '" + path.string() + "'");
    std::string line;
    std::getline(in, line);   // header
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    for (std::size_t ln = 2; std::getline(in, line); ++ln) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> r;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) {
            try {
                r.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw ValidationError(path.string() + ":" + std::to_string(ln) + ": non-numeric cell '" + cell + "'");
            }
        }
        if (width == 0) width = r.size();
        if (r.size() != width || width < (label_column ? 2u : 1u))
            throw ValidationError(path.string() + ":" + std::to_string(ln) + ": inconsistent column count");
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw ValidationError("dataset '" + path.string() + "' has no rows");
    const auto feat = label_column ? width - 1 : width;
    Dataset d;
    d.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(feat));
    for (std::size_t n = 0; n < rows.size(); ++n) {
        for (std::size_t i = 0; i < feat; ++i) d.x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(i)) = rows[n][i];
        if (label_column) d.labels.push_back(static_cast<int>(std::lround(rows[n].back())));
    }
    return d;
}

std::pair<Dataset, Dataset> split(const Dataset& d, double fraction, std::uint64_t seed)
{
    require(fraction > 0.0 && fraction < 1.0, "split fraction must be in (0, 1)");
    std::vector<std::size_t> idx(d.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    const auto first = static_cast<std::size_t>(std::lround(fraction * static_cast<double>(d.size())));
    auto take = [&](std::size_t from, std::size_t to) {
        Dataset out;
        out.x.resize(static_cast<Eigen::Index>(to - from), d.x.cols());
        for (std::size_t k = from; k < to; ++k) {
            out.x.row(static_cast<Eigen::Index>(k - from)) = d.x.row(static_cast<Eigen::Index>(idx[k]));
            if (!d.labels.empty()) out.labels.push_back(d.labels[idx[k]]);
        }
        return out;
    };
    return {take(0, first), take(first, d.size())};
}

} // namespace aidx
