#pragma once
// Likelihood weights over unfalsified models, parameter estimates and
// weighted response prediction.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <tuple>
#include <string>
#include <vector>

#include "falsikit/ensemble.hpp"
#include "falsikit/errors.hpp"
#include "falsikit/falsification.hpp"
#include "falsikit/parallel.hpp"
#include "falsikit/series.hpp"

namespace falsikit {

/// Whether weights keep the prior density factor. Candidates are drawn from
/// the prior, so `Cancel` (likelihood only) is the consistent default.
enum class WeightPrior { Cancel, Include };

struct WeightedEntry {
    ModelSample sample;
    double log_likelihood = 0.0;
    double weight = 0.0;
};

struct WeightedEnsemble {
    std::string class_id;
    std::vector<WeightedEntry> entries; // ascending sample_index, weight > 0 only where kept

    std::size_t size() const { return entries.size(); }
    double weight_sum() const {
        double s = 0.0;
        for (const auto& e : entries) s += e.weight;
        return s;
    }
};

/// exp(l_i - LSE(l)), accumulated in the given order.
inline std::vector<double> normalize_log_weights(std::span<const double> log_w) {
    if (log_w.empty()) throw DomainError("normalize_log_weights: empty input");
    double m = -std::numeric_limits<double>::infinity();
    for (double v : log_w) {
        if (std::isnan(v)) throw DomainError("normalize_log_weights: NaN log-weight");
        m = std::max(m, v);
    }
    if (!std::isfinite(m)) throw DomainError("normalize_log_weights: no finite log-weight");
    // exp(l - m) / sum rather than exp(l - LSE): LSE rounds at the scale of
    // |m|, which costs digits when log-likelihoods are large
    std::vector<double> w(log_w.size());
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) s += (w[i] = std::exp(log_w[i] - m));
    for (double& v : w) v /= s;
    return w;
}

namespace detail {

inline WeightedEnsemble weigh(const std::string& class_id, const std::vector<const FalsificationVerdict*>& members,
                              const ModelClassSpec* spec, WeightPrior mode) {
    if (mode == WeightPrior::Include && spec == nullptr)
        throw ConfigError("weights: prior factor requested but no class spec given");
    std::vector<double> log_w(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
        log_w[i] = members[i]->log_likelihood;
        if (mode == WeightPrior::Include) log_w[i] += log_prior(*spec, members[i]->theta);
    }
    const auto w = normalize_log_weights(log_w);
    WeightedEnsemble out{class_id, {}};
    out.entries.reserve(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) {
        const auto& v = *members[i];
        out.entries.push_back({ModelSample{v.class_id, v.theta, v.sample_index}, v.log_likelihood, w[i]});
    }
    return out;
}

} // namespace detail

/// Weights over the unfalsified models of one class; falsified models are
/// left out (zero weight).
inline WeightedEnsemble post_falsification_weights(const ClassFalsification& cls, const ModelClassSpec* spec = nullptr,
                                                   WeightPrior mode = WeightPrior::Cancel) {
    std::vector<const FalsificationVerdict*> kept;
    for (const auto& v : cls.verdicts)
        if (v.unfalsified) kept.push_back(&v);
    if (kept.empty())
        throw AllFalsifiedError("all " + std::to_string(cls.verdicts.size()) + " models of class '" + cls.class_id +
                                "' were falsified; enlarge samples_per_class, lower the target identification "
                                "probability (raise alpha), or add model classes");
    return detail::weigh(cls.class_id, kept, spec, mode);
}

/// Bayesian weights over every model of the class, ignoring verdicts.
inline WeightedEnsemble bayesian_weights(const ClassFalsification& cls, const ModelClassSpec* spec = nullptr,
                                         WeightPrior mode = WeightPrior::Cancel) {
    if (cls.verdicts.empty()) throw DomainError("bayesian_weights: empty class '" + cls.class_id + "'");
    std::vector<const FalsificationVerdict*> all;
    for (const auto& v : cls.verdicts) all.push_back(&v);
    return detail::weigh(cls.class_id, all, spec, mode);
}

/// theta_hat = sum_i W_i theta_i.
inline std::vector<double> estimate_parameters(const WeightedEnsemble& ens) {
    if (ens.entries.empty()) throw DomainError("estimate_parameters: empty ensemble");
    std::vector<double> theta(ens.entries.front().sample.theta.size(), 0.0);
    for (const auto& e : ens.entries) {
        if (e.sample.theta.size() != theta.size()) throw DomainError("estimate_parameters: inconsistent theta length");
        for (std::size_t p = 0; p < theta.size(); ++p) theta[p] += e.weight * e.sample.theta[p];
    }
    return theta;
}

/// Largest log-likelihood; ties go to the lowest (class_id, sample_index).
inline const FalsificationVerdict& max_likelihood_model(std::span<const FalsificationVerdict> verdicts) {
    if (verdicts.empty()) throw DomainError("max_likelihood_model: no verdicts");
    const FalsificationVerdict* best = &verdicts[0];
    for (const auto& v : verdicts.subspan(1)) {
        if (v.log_likelihood > best->log_likelihood ||
            (v.log_likelihood == best->log_likelihood &&
             std::tie(v.class_id, v.sample_index) < std::tie(best->class_id, best->sample_index)))
            best = &v;
    }
    return *best;
}

/// Simulates one model under one input; must be safe to call concurrently.
using ModelSimulator = std::function<SimulationOutput(const ModelSample&, const ExcitationRecord&)>;

struct PredictionResult {
    std::string input_label;
    std::string class_id;
    SimulationOutput mean;         // weighted prediction q_hat
    std::vector<double> std_dev;   // weighted pointwise spread, same layout as mean.values
    std::size_t simulations = 0;   // member simulations executed
};

/// q_hat = sum_i W_i q(theta_i | I). Members run in parallel; the reduction
/// runs afterwards in entry order, so the result does not depend on `threads`.
inline PredictionResult predict_response(const WeightedEnsemble& ens, const ModelSimulator& sim,
                                         const ExcitationRecord& input, unsigned threads = 1) {
    if (ens.entries.empty()) throw DomainError("predict_response: empty ensemble");
    const std::size_t n = ens.entries.size();
    std::vector<SimulationOutput> outs(n);
    std::vector<std::string> failures(n);
    parallel_for(n, threads, [&](std::size_t i) {
        try {
            outs[i] = sim(ens.entries[i].sample, input);
        } catch (const Error& e) {
            failures[i] = e.what();
        }
    });
    std::string failed;
    for (std::size_t i = 0; i < n; ++i)
        if (!failures[i].empty())
            failed += "\n  " + ens.entries[i].sample.class_id + "#" + std::to_string(ens.entries[i].sample.sample_index) +
                      ": " + failures[i];
    if (!failed.empty()) throw SimulationError("prediction under '" + input.label + "' failed for:" + failed);

    PredictionResult r;
    r.input_label = input.label;
    r.class_id = ens.class_id;
    r.simulations = n;
    r.mean.dt = outs[0].dt;
    r.mean.channels = outs[0].channels;
    const std::size_t len = outs[0].values.size();
    for (const auto& o : outs)
        if (o.values.size() != len || o.channels != r.mean.channels)
            throw SimulationError("prediction under '" + input.label + "': member outputs differ in layout");
    r.mean.values.assign(len, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = ens.entries[i].weight;
        for (std::size_t k = 0; k < len; ++k) r.mean.values[k] += w * outs[i].values[k];
    }
    r.std_dev.assign(len, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = ens.entries[i].weight;
        for (std::size_t k = 0; k < len; ++k) {
            const double d = outs[i].values[k] - r.mean.values[k];
            r.std_dev[k] += w * d * d;
        }
    }
    for (double& s : r.std_dev) s = std::sqrt(s);
    return r;
}

/// ||u_true - u_est|| / ||u_true||.
inline double relative_rms_error(std::span<const double> u_true, std::span<const double> u_est) {
    if (u_true.size() != u_est.size()) throw DomainError("relative_rms_error: length mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u_true.size(); ++i) {
        const double d = u_true[i] - u_est[i];
        num += d * d;
        den += u_true[i] * u_true[i];
    }
    if (!(den > 0.0)) throw DomainError("relative_rms_error: reference series has zero norm");
    return std::sqrt(num / den);
}

} // namespace falsikit
