#pragma once

#include <cstdint>

#include "entimg/grid.hpp"
#include "entimg/measure.hpp"

namespace entimg {

using CountMatrix = Eigen::Matrix<std::uint64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Histogram of coincidence events, rows on grid1.
struct CoincidenceCounts {
    Grid grid1;
    Grid grid2;
    CountMatrix counts;
    std::uint64_t total;
};

struct EmpiricalDensities {
    JointDensity joint;
    Density marginal1;
    Density marginal2;
};

/// Draws are split into fixed blocks of this many events; block b uses an
/// mt19937_64 stream seeded with splitmix64(seed, b). Counts therefore do not
/// depend on the number of worker threads.
inline constexpr std::uint64_t kSampleBlock = 1u << 16;

/// n independent draws from the cells of p (probability p * dx1 * dx2),
/// by inverse CDF over the row-major flattened cells.
CoincidenceCounts sample_joint(const JointDensity& p, std::uint64_t n, std::uint64_t seed, int jobs = 1);

EmpiricalDensities empirical_densities(const CoincidenceCounts& c);

/// 1/2 * sum |p - q| dx for densities on the same grid.
double total_variation(const Density& p, const Density& q);

struct ChiSquare {
    double statistic;
    double dof;
};

/// Pearson chi-square of counts against n * p * dx1 * dx2. Cells expecting
/// fewer than `min_expected` events are pooled into one bin.
ChiSquare pearson_chi_square(const CoincidenceCounts& c, const JointDensity& p, double min_expected = 5.0);

/// Quantile of the chi-square distribution with `dof` degrees of freedom.
double chi_square_quantile(double dof, double probability);

/// splitmix64 finalizer, used to derive per-block seeds.
std::uint64_t splitmix64(std::uint64_t x);

} // namespace entimg
