#pragma once
// Band-limited synthetic excitation records (filtered Gaussian white noise).
// These stand in for recorded earthquakes and wind forces in tests and
// bundled examples.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include "falsikit/errors.hpp"
#include "falsikit/random.hpp"
#include "falsikit/series.hpp"

namespace falsikit {

/// Direct-form-I biquad with bilinear-transform Butterworth sections.
class Biquad {
public:
    static Biquad lowpass(double fc, double fs) { return design(fc, fs, false); }
    static Biquad highpass(double fc, double fs) { return design(fc, fs, true); }

    double operator()(double x) {
        const double y = b0_ * x + b1_ * x1_ + b2_ * x2_ - a1_ * y1_ - a2_ * y2_;
        x2_ = x1_;
        x1_ = x;
        y2_ = y1_;
        y1_ = y;
        return y;
    }

private:
    static Biquad design(double fc, double fs, bool high) {
        if (!(fc > 0.0 && fc < 0.5 * fs)) throw ConfigError("filter corner must lie in (0, fs/2)");
        const double w0 = 2.0 * std::numbers::pi * fc / fs;
        const double alpha = std::sin(w0) * std::numbers::sqrt2 / 2.0; // Q = 1/sqrt(2)
        const double cw = std::cos(w0);
        const double a0 = 1.0 + alpha;
        Biquad f;
        if (high) {
            f.b0_ = (1.0 + cw) / 2.0 / a0;
            f.b1_ = -(1.0 + cw) / a0;
        } else {
            f.b0_ = (1.0 - cw) / 2.0 / a0;
            f.b1_ = (1.0 - cw) / a0;
        }
        f.b2_ = f.b0_;
        f.a1_ = -2.0 * cw / a0;
        f.a2_ = (1.0 - alpha) / a0;
        return f;
    }

    double b0_ = 1, b1_ = 0, b2_ = 0, a1_ = 0, a2_ = 0;
    double x1_ = 0, x2_ = 0, y1_ = 0, y2_ = 0;
};

struct BandLimitedNoiseSpec {
    double duration = 30.0; // s
    double dt = 0.02;       // s
    double f_low = 0.35;    // Hz
    double f_high = 1.5;    // Hz
    int sections = 1;       // high-pass and low-pass biquads each; 1 -> 4th-order band-pass
    std::uint64_t seed = 1;
};

/// Zero-mean band-passed white noise scaled to unit standard deviation.
inline std::vector<double> band_limited_noise(const BandLimitedNoiseSpec& s) {
    if (!(s.dt > 0.0) || !(s.duration > 0.0)) throw ConfigError("noise: dt and duration must be > 0");
    if (s.sections < 1) throw ConfigError("noise: need at least one filter section");
    const auto n = static_cast<std::size_t>(std::llround(s.duration / s.dt));
    const double fs = 1.0 / s.dt;
    std::vector<Biquad> chain;
    for (int i = 0; i < s.sections; ++i) {
        chain.push_back(Biquad::highpass(s.f_low, fs));
        chain.push_back(Biquad::lowpass(s.f_high, fs));
    }
    Rng rng(derive_seed(s.seed, "band_limited_noise", 0));
    // Run-in so the filter transient is discarded.
    const std::size_t warm = static_cast<std::size_t>(std::ceil(10.0 / (s.f_low * s.dt)));
    std::vector<double> out(n);
    for (std::size_t i = 0; i < warm + n; ++i) {
        double v = standard_normal(rng);
        for (auto& f : chain) v = f(v);
        if (i >= warm) out[i - warm] = v;
    }
    double mean = 0.0;
    for (double v : out) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double& v : out) {
        v -= mean;
        ss += v * v;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n));
    for (double& v : out) v /= sd;
    return out;
}

struct GroundMotionSpec {
    BandLimitedNoiseSpec noise{30.0, 0.02, 0.2, 8.0, 2, 1};
    double pga = 3.42;      // m/s^2
    double rise_time = 2.0; // s, quadratic build-up
    double strong_end = 12.0; // s, end of the strong-motion plateau
    double decay = 0.25;    // 1/s, exponential tail
    std::string label = "synthetic";
};

/// Enveloped band-limited ground acceleration with peak |a| == pga.
inline ExcitationRecord synthetic_ground_motion(const GroundMotionSpec& g) {
    std::vector<double> a = band_limited_noise(g.noise);
    double peak = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = static_cast<double>(i) * g.noise.dt;
        double env = 1.0;
        if (t < g.rise_time) env = (t / g.rise_time) * (t / g.rise_time);
        else if (t > g.strong_end) env = std::exp(-g.decay * (t - g.strong_end));
        a[i] *= env;
        peak = std::max(peak, std::fabs(a[i]));
    }
    for (double& v : a) v *= g.pga / peak;
    return {g.noise.dt, 1, std::move(a), g.label};
}

struct WindForceSpec {
    BandLimitedNoiseSpec noise{600.0, 0.05, 0.35, 1.5, 1, 1};
    double std_dev = 1.0e5; // N, reference (roof) force fluctuation
    double ramp = 5.0;      // s, linear fade-in
    std::string label = "wind";
};

/// Narrow-band reference wind force fluctuation [N].
inline ExcitationRecord synthetic_wind_force(const WindForceSpec& w) {
    std::vector<double> f = band_limited_noise(w.noise);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double t = static_cast<double>(i) * w.noise.dt;
        const double env = w.ramp > 0.0 ? std::min(1.0, t / w.ramp) : 1.0;
        f[i] *= w.std_dev * env;
    }
    return {w.noise.dt, 1, std::move(f), w.label};
}

/// Two independent components with the same spectrum, interleaved (x, y).
inline ExcitationRecord synthetic_biaxial_ground_motion(const GroundMotionSpec& gx, double y_scale,
                                                        std::uint64_t y_seed) {
    const ExcitationRecord x = synthetic_ground_motion(gx);
    GroundMotionSpec gy = gx;
    gy.noise.seed = y_seed;
    gy.pga = gx.pga * y_scale;
    const ExcitationRecord y = synthetic_ground_motion(gy);
    ExcitationRecord out{gx.noise.dt, 2, {}, gx.label};
    out.samples.reserve(2 * x.samples.size());
    for (std::size_t i = 0; i < x.samples.size(); ++i) {
        out.samples.push_back(x.samples[i]);
        out.samples.push_back(y.samples[i]);
    }
    return out;
}

} // namespace falsikit
