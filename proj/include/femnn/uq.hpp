#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "femnn/linalg.hpp"
#include "femnn/rng.hpp"

namespace femnn::uq {

struct Normal {
    double mean = 0.0;
    double std = 1.0;
};
struct Weibull {
    double mean = 1.0;   // scale derived as mean / Gamma(1 + 1/shape)
    double shape = 1.0;
};
struct Uniform {
    double lo = 0.0;
    double hi = 1.0;
};

using DistributionSpec = std::variant<Normal, Weibull, Uniform>;

void validate(const DistributionSpec& spec);

double weibull_scale(const Weibull& w);

double draw(const DistributionSpec& spec, Rng& rng);

// n i.i.d. draws; each draw uses its own counter-derived sub-stream so
// sequential and parallel evaluation agree.
Vector sample(const DistributionSpec& spec, std::uint64_t seed, std::size_t n);

struct McSummary {
    std::size_t n_samples = 0;
    double mean = 0.0;
    double std = 0.0;             // sample std, n-1 divisor
    double skewness = 0.0;        // m3 / m2^(3/2)
    double kurtosis = 0.0;        // raw: m4 / m2^2
    double excess_kurtosis = 0.0; // kurtosis - 3
    bool moments_defined = true;  // false for (near-)constant ensembles
    Vector hist_edges;            // n_bins + 1 edges
    Vector hist_density;          // densities integrating to 1
    Vector cdf_values;            // sorted ensemble
    Vector cdf_levels;            // (i+1)/n
};

McSummary summarize(const Vector& ensemble, std::size_t n_bins);

std::string summary_to_json(const McSummary& s);

}  // namespace femnn::uq
