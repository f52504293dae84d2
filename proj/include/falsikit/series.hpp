#pragma once
// Sampled input records and stacked multi-channel output vectors.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "falsikit/errors.hpp"
#include "falsikit/random.hpp"

namespace falsikit {

/// Ground acceleration [m/s^2] or reference force [N] sampled on a uniform
/// grid. Multi-channel records are stored interleaved by time step.
struct ExcitationRecord {
    double dt = 0.0;
    std::size_t channel_count = 1;
    std::vector<double> samples;
    std::string label;

    std::size_t steps() const { return channel_count ? samples.size() / channel_count : 0; }
    double duration() const { return dt * static_cast<double>(steps()); }
    double at(std::size_t step, std::size_t channel = 0) const {
        return samples[step * channel_count + channel];
    }

    void validate() const {
        if (!(dt > 0.0)) throw ConfigError("excitation '" + label + "': dt must be > 0");
        if (channel_count < 1 || channel_count > 2)
            throw ConfigError("excitation '" + label + "': channel_count must be 1 or 2");
        if (samples.empty() || samples.size() % channel_count != 0)
            throw ConfigError("excitation '" + label + "': sample count not a multiple of channels");
        for (double v : samples)
            if (!std::isfinite(v)) throw ConfigError("excitation '" + label + "': non-finite sample");
    }
};

/// Outputs stacked as [y(0) y(dt) ...], each y holding one value per channel
/// in declared order. Used both for simulated h(theta) and measured d.
struct StackedSeries {
    double dt = 0.0;
    std::vector<std::string> channels;
    std::vector<double> values;

    std::size_t channel_count() const { return channels.size(); }
    std::size_t steps() const { return channels.empty() ? 0 : values.size() / channels.size(); }
    double at(std::size_t step, std::size_t channel) const {
        return values[step * channels.size() + channel];
    }
    std::vector<double> channel(std::size_t c) const {
        std::vector<double> out(steps());
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = at(k, c);
        return out;
    }
};

using SimulationOutput = StackedSeries;
using MeasurementSet = StackedSeries;

/// Population standard deviation of one channel.
inline double channel_std(const StackedSeries& s, std::size_t c) {
    const std::size_t n = s.steps();
    if (n == 0) return 0.0;
    double mean = 0.0;
    for (std::size_t k = 0; k < n; ++k) mean += s.at(k, c);
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d = s.at(k, c) - mean;
        ss += d * d;
    }
    return std::sqrt(ss / static_cast<double>(n));
}

/// d = clean + v, v i.i.d. zero-mean Gaussian with std = fraction * std(channel).
inline MeasurementSet add_measurement_noise(const SimulationOutput& clean, double noise_fraction,
                                            Rng& rng) {
    if (!(noise_fraction >= 0.0)) throw ConfigError("noise_fraction must be >= 0");
    MeasurementSet d = clean;
    if (noise_fraction == 0.0) return d;
    const std::size_t nc = clean.channel_count();
    std::vector<double> sd(nc);
    for (std::size_t c = 0; c < nc; ++c) sd[c] = noise_fraction * channel_std(clean, c);
    for (std::size_t i = 0; i < d.values.size(); ++i) d.values[i] += sd[i % nc] * standard_normal(rng);
    return d;
}

} // namespace falsikit
