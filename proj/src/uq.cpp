#include "femnn/uq.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "femnn/errors.hpp"

namespace femnn::uq {

using nlohmann::json;

void validate(const DistributionSpec& spec) {
    std::visit(
        [](const auto& d) {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Normal>) {
                if (d.std <= 0.0) throw ParameterError("Normal: std must be > 0");
            } else if constexpr (std::is_same_v<T, Weibull>) {
                if (d.shape <= 0.0) throw ParameterError("Weibull: shape must be > 0");
                if (d.mean <= 0.0) throw ParameterError("Weibull: mean must be > 0");
            } else {
                if (!(d.lo < d.hi)) throw ParameterError("Uniform: need lo < hi");
            }
        },
        spec);
}

double weibull_scale(const Weibull& w) {
    return w.mean / std::tgamma(1.0 + 1.0 / w.shape);
}

double draw(const DistributionSpec& spec, Rng& rng) {
    return std::visit(
        [&rng](const auto& d) -> double {
            using T = std::decay_t<decltype(d)>;
            if constexpr (std::is_same_v<T, Normal>) {
                return rng.normal(d.mean, d.std);
            } else if constexpr (std::is_same_v<T, Weibull>) {
                return rng.weibull(weibull_scale(d), d.shape);
            } else {
                return rng.uniform(d.lo, d.hi);
            }
        },
        spec);
}

Vector sample(const DistributionSpec& spec, std::uint64_t seed, std::size_t n) {
    if (n < 1)
        throw ParameterError("sample: n must be >= 1");
    validate(spec);
    Rng base(seed);
    Vector out(n);
    for (std::size_t i = 0; i < n; ++i) {
        Rng r = base.derive(rng_stream::sampling, i);
        out[i] = draw(spec, r);
    }
    return out;
}

McSummary summarize(const Vector& ensemble, std::size_t n_bins) {
    const std::size_t n = ensemble.size();
    if (n < 4)
        throw ParameterError("summarize: need at least 4 samples for kurtosis");
    if (n_bins < 1)
        throw ParameterError("summarize: n_bins must be >= 1");

    McSummary s;
    s.n_samples = n;
    double sum = 0.0;
    for (double v : ensemble) sum += v;
    s.mean = sum / static_cast<double>(n);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : ensemble) {
        const double d = v - s.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    s.std = std::sqrt(m2 / static_cast<double>(n - 1));
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    const double scale = std::max(std::abs(s.mean), 1.0);
    if (m2 <= 1e-28 * scale * scale) {
        // Degenerate (constant) ensemble: flagged, not NaN.
        s.moments_defined = false;
        s.std = 0.0;
        s.skewness = s.kurtosis = s.excess_kurtosis = 0.0;
    } else {
        s.skewness = m3 / std::pow(m2, 1.5);
        s.kurtosis = m4 / (m2 * m2);
        s.excess_kurtosis = s.kurtosis - 3.0;
    }

    const auto [mn_it, mx_it] = std::minmax_element(ensemble.begin(), ensemble.end());
    double lo = *mn_it, hi = *mx_it;
    if (hi <= lo) {  // constant ensemble: one unit-width bin around the value
        lo -= 0.5;
        hi += 0.5;
    }
    const double width = (hi - lo) / static_cast<double>(n_bins);
    s.hist_edges.resize(n_bins + 1);
    for (std::size_t b = 0; b <= n_bins; ++b)
        s.hist_edges[b] = lo + width * static_cast<double>(b);
    std::vector<std::size_t> counts(n_bins, 0);
    for (double v : ensemble) {
        std::size_t b = static_cast<std::size_t>((v - lo) / width);
        if (b >= n_bins) b = n_bins - 1;  // right edge goes to the last bin
        counts[b] += 1;
    }
    s.hist_density.resize(n_bins);
    for (std::size_t b = 0; b < n_bins; ++b)
        s.hist_density[b] = static_cast<double>(counts[b]) / (static_cast<double>(n) * width);

    s.cdf_values = ensemble;
    std::sort(s.cdf_values.begin(), s.cdf_values.end());
    s.cdf_levels.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        s.cdf_levels[i] = static_cast<double>(i + 1) / static_cast<double>(n);
    return s;
}

std::string summary_to_json(const McSummary& s) {
    json j;
    j["n_samples"] = s.n_samples;
    j["mean"] = s.mean;
    j["std"] = s.std;
    j["skewness"] = s.skewness;
    j["kurtosis"] = s.kurtosis;
    j["excess_kurtosis"] = s.excess_kurtosis;
    j["moments_defined"] = s.moments_defined;
    j["hist_edges"] = s.hist_edges;
    j["hist_density"] = s.hist_density;
    return j.dump(2);
}

}  // namespace femnn::uq
