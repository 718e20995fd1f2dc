#include "entimg/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include <boost/math/distributions/chi_squared.hpp>

#include "entimg/errors.hpp"

namespace entimg {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

namespace {

std::uint64_t block_seed(std::uint64_t seed, std::uint64_t block)
{
    return splitmix64(splitmix64(seed) ^ (block * 0xd1b54a32d192ed03ULL));
}

// 53-bit uniform in [0, 1)
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

} // namespace

CoincidenceCounts sample_joint(const JointDensity& p, std::uint64_t n, std::uint64_t seed, int jobs)
{
    if (n == 0) throw ValidationError("n", "need at least one draw");
    const Index rows = p.values().rows();
    const Index cols = p.values().cols();
    const Index cells = rows * cols;

    // row-major flattening: cell (i, j) -> i * cols + j
    std::vector<double> cdf(static_cast<std::size_t>(cells));
    double acc = 0.0;
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) {
            acc += p.values()(i, j);
            cdf[static_cast<std::size_t>(i * cols + j)] = acc;
        }
    }
    if (!(acc > 0.0)) throw PhysicsError("cannot sample an all-zero density");

    const std::uint64_t blocks = (n + kSampleBlock - 1) / kSampleBlock;
    using Histogram = std::vector<std::uint64_t>;

    auto run_block = [&](std::uint64_t b, Histogram& hist) {
        std::mt19937_64 rng(block_seed(seed, b));
        const std::uint64_t draws = std::min(kSampleBlock, n - b * kSampleBlock);
        for (std::uint64_t k = 0; k < draws; ++k) {
            const double u = unit_uniform(rng) * acc;
            auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
            if (it == cdf.end()) --it;
            ++hist[static_cast<std::size_t>(it - cdf.begin())];
        }
    };

    // Integer histograms add exactly, so the block-to-worker assignment
    // does not affect the result.
    const int workers = std::max(1, std::min<int>(jobs, static_cast<int>(std::min<std::uint64_t>(blocks, 1024))));
    std::vector<Histogram> hists(static_cast<std::size_t>(workers), Histogram(static_cast<std::size_t>(cells), 0));
    if (workers == 1) {
        for (std::uint64_t b = 0; b < blocks; ++b) run_block(b, hists[0]);
    } else {
        std::atomic<std::uint64_t> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::uint64_t b = next++; b < blocks; b = next++) run_block(b, hists[static_cast<std::size_t>(w)]);
            });
        }
        for (auto& t : pool) t.join();
    }

    CoincidenceCounts out{p.grid1(), p.grid2(), CountMatrix::Zero(rows, cols), n};
    for (const auto& hist : hists) {
        for (Index i = 0; i < rows; ++i) {
            for (Index j = 0; j < cols; ++j) out.counts(i, j) += hist[static_cast<std::size_t>(i * cols + j)];
        }
    }
    return out;
}

EmpiricalDensities empirical_densities(const CoincidenceCounts& c)
{
    if (c.total == 0) throw ValidationError("counts", "no events recorded");
    const RMatrix raw = c.counts.cast<double>();
    const double n = static_cast<double>(c.total);
    RMatrix joint = raw / (n * c.grid1.dx() * c.grid2.dx());
    RVector m1 = raw.rowwise().sum() / (n * c.grid1.dx());
    RVector m2 = raw.colwise().sum().transpose() / (n * c.grid2.dx());
    return {JointDensity::from_unnormalized(c.grid1, c.grid2, std::move(joint)),
            Density::from_unnormalized(c.grid1, std::move(m1)), Density::from_unnormalized(c.grid2, std::move(m2))};
}

double total_variation(const Density& p, const Density& q)
{
    if (!(p.grid() == q.grid())) throw ValidationError("density", "grids do not match");
    return 0.5 * (p.values() - q.values()).cwiseAbs().sum() * p.grid().dx();
}

ChiSquare pearson_chi_square(const CoincidenceCounts& c, const JointDensity& p, double min_expected)
{
    if (!(c.grid1 == p.grid1()) || !(c.grid2 == p.grid2())) throw ValidationError("counts", "grids do not match");
    const double n = static_cast<double>(c.total);
    const double cell = p.grid1().dx() * p.grid2().dx();
    double stat = 0.0;
    double bins = 0.0;
    double pooled_expected = 0.0;
    double pooled_observed = 0.0;
    for (Index i = 0; i < p.values().rows(); ++i) {
        for (Index j = 0; j < p.values().cols(); ++j) {
            const double expected = n * p.values()(i, j) * cell;
            const double observed = static_cast<double>(c.counts(i, j));
            if (expected >= min_expected) {
                stat += (observed - expected) * (observed - expected) / expected;
                bins += 1.0;
            } else {
                pooled_expected += expected;
                pooled_observed += observed;
            }
        }
    }
    if (pooled_expected > 0.0) {
        stat += (pooled_observed - pooled_expected) * (pooled_observed - pooled_expected) / pooled_expected;
        bins += 1.0;
    }
    return {stat, std::max(1.0, bins - 1.0)};
}

double chi_square_quantile(double dof, double probability)
{
    boost::math::chi_squared dist(dof);
    return boost::math::quantile(dist, probability);
}

} // namespace entimg
