#pragma once
// Model classes, priors and seeded candidate ensembles.

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include "falsikit/errors.hpp"
#include "falsikit/parallel.hpp"
#include "falsikit/random.hpp"

namespace falsikit {

enum class PriorKind { Normal, Lognormal, Uniform };

inline const char* to_string(PriorKind k) {
    switch (k) {
    case PriorKind::Normal: return "normal";
    case PriorKind::Lognormal: return "lognormal";
    case PriorKind::Uniform: return "uniform";
    }
    return "?";
}

/// Prior of one parameter, described by the mean and standard deviation of
/// the variate itself (also for Lognormal).
struct PriorSpec {
    PriorKind kind = PriorKind::Normal;
    double mean = 0.0;
    double std_dev = 1.0;
    /// Normal only: redraw non-positive values.
    bool positive = false;

    void validate(const std::string& name = "parameter") const {
        if (!std::isfinite(mean) || !std::isfinite(std_dev))
            throw ConfigError("prior of '" + name + "': mean and std_dev must be finite");
        if (!(std_dev > 0.0))
            throw ConfigError("prior of '" + name + "': std_dev must be > 0");
        if (kind == PriorKind::Lognormal && !(mean > 0.0))
            throw ConfigError("prior of '" + name + "': lognormal mean must be > 0");
        if (kind == PriorKind::Normal && positive && !(mean > 0.0))
            throw ConfigError("prior of '" + name + "': positive normal needs mean > 0");
    }

    /// Log-space location/scale of a Lognormal matched to the variate moments:
    /// s_ln^2 = ln(1 + (s/m)^2), mu_ln = ln m - s_ln^2 / 2.
    double log_sigma() const { return std::sqrt(std::log1p((std_dev / mean) * (std_dev / mean))); }
    double log_mu() const {
        const double s = log_sigma();
        return std::log(mean) - 0.5 * s * s;
    }

    double lower() const { return mean - std_dev * std::numbers::sqrt3; }
    double upper() const { return mean + std_dev * std::numbers::sqrt3; }

    bool in_support(double x) const {
        switch (kind) {
        case PriorKind::Normal: return std::isfinite(x) && (!positive || x > 0.0);
        case PriorKind::Lognormal: return std::isfinite(x) && x > 0.0;
        case PriorKind::Uniform: return x >= lower() && x <= upper();
        }
        return false;
    }

    /// Log density up to a constant that is shared by all draws of this prior.
    double log_pdf(double x) const {
        constexpr double half_log_2pi = 0.91893853320467274178;
        switch (kind) {
        case PriorKind::Normal: {
            const double u = (x - mean) / std_dev;
            return -half_log_2pi - std::log(std_dev) - 0.5 * u * u;
        }
        case PriorKind::Lognormal: {
            if (!(x > 0.0)) return -INFINITY;
            const double s = log_sigma();
            const double u = (std::log(x) - log_mu()) / s;
            return -half_log_2pi - std::log(s * x) - 0.5 * u * u;
        }
        case PriorKind::Uniform:
            return in_support(x) ? -std::log(upper() - lower()) : -INFINITY;
        }
        return -INFINITY;
    }
};

/// One draw from `spec`. Normal and Lognormal use two generator outputs,
/// Uniform one; a positive Normal may redraw.
inline double sample_prior(const PriorSpec& spec, Rng& rng, const std::string& name = "parameter") {
    double x = NAN;
    switch (spec.kind) {
    case PriorKind::Normal: {
        constexpr int max_attempts = 1000;
        for (int attempt = 0; attempt < max_attempts; ++attempt) {
            x = spec.mean + spec.std_dev * standard_normal(rng);
            if (!spec.positive || x > 0.0) break;
            x = NAN;
        }
        if (std::isnan(x))
            throw SamplingError("prior of '" + name + "': no positive normal draw in 1000 attempts");
        break;
    }
    case PriorKind::Lognormal:
        x = std::exp(spec.log_mu() + spec.log_sigma() * standard_normal(rng));
        break;
    case PriorKind::Uniform:
        x = spec.lower() + (spec.upper() - spec.lower()) * uniform01(rng);
        break;
    }
    if (!std::isfinite(x)) throw SamplingError("prior of '" + name + "': non-finite draw");
    if (spec.kind == PriorKind::Lognormal && !(x > 0.0))
        throw SamplingError("prior of '" + name + "': lognormal draw underflowed to 0");
    return x;
}

struct ModelClassSpec {
    std::string class_id;
    std::vector<std::string> parameter_names;
    std::vector<PriorSpec> priors;
    std::string physics_binding;
    std::map<std::string, double> fixed_constants;

    void validate() const {
        if (class_id.empty()) throw ConfigError("model class with empty class_id");
        if (parameter_names.size() != priors.size())
            throw ConfigError("model class '" + class_id + "': " +
                              std::to_string(parameter_names.size()) + " parameter names but " +
                              std::to_string(priors.size()) + " priors");
        std::set<std::string> seen;
        for (std::size_t i = 0; i < parameter_names.size(); ++i) {
            if (!seen.insert(parameter_names[i]).second)
                throw ConfigError("model class '" + class_id + "': duplicate parameter '" +
                                  parameter_names[i] + "'");
            priors[i].validate(class_id + "." + parameter_names[i]);
        }
    }

    std::size_t index_of(const std::string& name) const {
        for (std::size_t i = 0; i < parameter_names.size(); ++i)
            if (parameter_names[i] == name) return i;
        throw ConfigError("model class '" + class_id + "' has no parameter '" + name + "'");
    }
};

struct ModelSample {
    std::string class_id;
    std::vector<double> theta;
    std::size_t sample_index = 0;

    friend bool operator==(const ModelSample&, const ModelSample&) = default;
};

struct EnsembleSpec {
    std::vector<ModelClassSpec> class_specs;
    std::size_t samples_per_class = 1;
    std::uint64_t master_seed = 0;

    void validate() const {
        if (samples_per_class < 1) throw ConfigError("samples_per_class must be >= 1");
        std::set<std::string> ids;
        for (const auto& c : class_specs) {
            c.validate();
            if (!ids.insert(c.class_id).second)
                throw ConfigError("duplicate class_id '" + c.class_id + "'");
        }
    }
};

/// Draws sample `index` of class `spec`; depends only on (master_seed, class_id, index).
inline ModelSample draw_sample(const ModelClassSpec& spec, std::uint64_t master_seed, std::size_t index) {
    Rng rng(derive_seed(master_seed, spec.class_id, index));
    ModelSample s{spec.class_id, {}, index};
    s.theta.reserve(spec.priors.size());
    for (std::size_t p = 0; p < spec.priors.size(); ++p) {
        try {
            s.theta.push_back(sample_prior(spec.priors[p], rng, spec.parameter_names[p]));
        } catch (const SamplingError& e) {
            throw SamplingError("class '" + spec.class_id + "' sample " + std::to_string(index) +
                                ": " + e.what());
        }
    }
    return s;
}

/// N_s samples per class, ordered by class then sample index.
inline std::vector<std::vector<ModelSample>> generate_ensemble(const EnsembleSpec& spec,
                                                               unsigned threads = 1) {
    spec.validate();
    std::vector<std::vector<ModelSample>> out(spec.class_specs.size());
    for (std::size_t c = 0; c < spec.class_specs.size(); ++c) {
        out[c].resize(spec.samples_per_class);
        parallel_for(spec.samples_per_class, threads, [&](std::size_t i) {
            out[c][i] = draw_sample(spec.class_specs[c], spec.master_seed, i);
        });
    }
    return out;
}

/// Sum of prior log densities of theta (used when weights keep the prior factor).
inline double log_prior(const ModelClassSpec& spec, const std::vector<double>& theta) {
    double acc = 0.0;
    for (std::size_t i = 0; i < theta.size(); ++i) acc += spec.priors[i].log_pdf(theta[i]);
    return acc;
}

} // namespace falsikit
