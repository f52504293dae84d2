#pragma once
// Fixed-step RK4 time integration of first-order structural systems.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "falsikit/errors.hpp"
#include "falsikit/series.hpp"

namespace falsikit {

/// First-order state-space model driven by a piecewise-constant input.
class DynamicSystem {
public:
    virtual ~DynamicSystem() = default;

    virtual std::size_t state_size() const = 0;
    virtual std::size_t input_channels() const { return 1; }

    /// dx = f(x, u)
    virtual void derivative(std::span<const double> x, std::span<const double> input,
                            std::span<double> dx) const = 0;

    virtual std::vector<std::string> output_names() const = 0;

    /// Output `channel` given the state, its derivative and the input.
    virtual double output(std::size_t channel, std::span<const double> x,
                          std::span<const double> dx, std::span<const double> input) const = 0;

    virtual std::vector<double> initial_state() const { return std::vector<double>(state_size(), 0.0); }

    /// Largest RK4 step the model tolerates; simulate() splits dt_int
    /// into equal parts no longer than this.
    virtual double max_stable_step() const { return std::numeric_limits<double>::infinity(); }

    std::size_t output_index(const std::string& name) const {
        const auto names = output_names();
        const auto it = std::find(names.begin(), names.end(), name);
        if (it == names.end()) {
            std::string all;
            for (const auto& n : names) all += (all.empty() ? "" : ", ") + n;
            throw ConfigError("unknown output channel '" + name + "' (available: " + all + ")");
        }
        return static_cast<std::size_t>(it - names.begin());
    }
};

/// Scratch buffers for one RK4 step.
class Rk4 {
public:
    explicit Rk4(std::size_t n) : k1_(n), k2_(n), k3_(n), k4_(n), tmp_(n) {}

    /// Advances x by h; f(x, dx) evaluates the derivative.
    template <class F>
    void step(F&& f, std::span<double> x, double h) {
        const std::size_t n = x.size();
        f(std::span<const double>(x), std::span<double>(k1_));
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k1_[i];
        f(std::span<const double>(tmp_), std::span<double>(k2_));
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + 0.5 * h * k2_[i];
        f(std::span<const double>(tmp_), std::span<double>(k3_));
        for (std::size_t i = 0; i < n; ++i) tmp_[i] = x[i] + h * k3_[i];
        f(std::span<const double>(tmp_), std::span<double>(k4_));
        for (std::size_t i = 0; i < n; ++i)
            x[i] += h / 6.0 * (k1_[i] + 2.0 * k2_[i] + 2.0 * k3_[i] + k4_[i]);
    }

private:
    std::vector<double> k1_, k2_, k3_, k4_, tmp_;
};

struct SimulationOptions {
    double dt_int = 0.0;      // integrator step [s]
    double output_dt = 0.0;   // output sampling interval [s]
    double duration = 0.0;    // simulated span [s]; outputs at k*output_dt, k < duration/output_dt
    std::vector<std::string> channels;
    double overflow_guard = 1e12;
};

namespace detail {

inline std::size_t checked_ratio(double num, double den, const char* what) {
    const double r = num / den;
    const double rr = std::round(r);
    if (!(rr >= 1.0) || std::fabs(r - rr) > 1e-9 * std::max(1.0, rr))
        throw ConfigError(std::string(what) + " must be a positive integer multiple");
    return static_cast<std::size_t>(rr);
}

} // namespace detail

/// Integrates `system` under `excitation` and samples the requested output
/// channels. The input is held constant over each record interval
/// (zero-order hold) regardless of the integrator step.
inline SimulationOutput simulate(const DynamicSystem& system, const ExcitationRecord& excitation,
                                 const SimulationOptions& opt) {
    excitation.validate();
    if (!(opt.dt_int > 0.0)) throw ConfigError("dt_int must be > 0");
    if (!(opt.output_dt > 0.0)) throw ConfigError("output dt must be > 0");
    if (excitation.channel_count != system.input_channels())
        throw ConfigError("excitation '" + excitation.label + "' has " +
                          std::to_string(excitation.channel_count) + " channel(s), model expects " +
                          std::to_string(system.input_channels()));
    const std::size_t per_int = static_cast<std::size_t>(
        std::max(1.0, std::ceil(opt.dt_int / system.max_stable_step() - 1e-9)));
    const double h = opt.dt_int / static_cast<double>(per_int);
    const std::size_t substeps =
        detail::checked_ratio(opt.output_dt, opt.dt_int, "output dt / dt_int") * per_int;
    const std::size_t n_out = detail::checked_ratio(opt.duration, opt.output_dt, "duration / output dt");
    if (opt.duration > excitation.duration() * (1.0 + 1e-9))
        throw ConfigError("duration exceeds excitation record '" + excitation.label + "'");

    std::vector<std::size_t> idx;
    for (const auto& name : opt.channels) idx.push_back(system.output_index(name));
    if (idx.empty()) throw ConfigError("no output channels requested");

    const std::size_t n = system.state_size();
    const std::size_t nin = excitation.channel_count;
    std::vector<double> x = system.initial_state();
    std::vector<double> dx(n), u(nin);
    Rk4 rk(n);

    auto load_input = [&](double t) {
        auto k = static_cast<std::size_t>(std::floor(t / excitation.dt + 1e-9));
        k = std::min(k, excitation.steps() - 1);
        for (std::size_t c = 0; c < nin; ++c) u[c] = excitation.at(k, c);
    };
    auto rhs = [&](std::span<const double> s, std::span<double> ds) {
        system.derivative(s, u, ds);
    };

    SimulationOutput out;
    out.dt = opt.output_dt;
    out.channels = opt.channels;
    out.values.reserve(n_out * idx.size());

    for (std::size_t k = 0; k < n_out; ++k) {
        const double t_k = static_cast<double>(k) * opt.output_dt;
        load_input(t_k);
        system.derivative(x, u, dx);
        for (std::size_t c : idx) out.values.push_back(system.output(c, x, dx, u));
        if (k + 1 == n_out) break;
        for (std::size_t s = 0; s < substeps; ++s) {
            const double t = t_k + static_cast<double>(s) * h;
            load_input(t);
            rk.step(rhs, x, h);
            for (double v : x) {
                if (!std::isfinite(v) || std::fabs(v) > opt.overflow_guard)
                    throw SimulationError("state diverged at t = " + std::to_string(t + h) + " s", t + h);
            }
        }
    }
    for (double v : out.values)
        if (!std::isfinite(v)) throw SimulationError("non-finite output");
    return out;
}

} // namespace falsikit
