#pragma once
// Residuals, Gaussian log-likelihoods and the FDR (Benjamini-Hochberg)
// likelihood bound used to accept or falsify candidate models.
//
// A model is kept when its log-likelihood strictly exceeds the log of
//   L_bound = prod_i min_{lo_i <= e <= hi_i} p_i(e),
// where residuals are ranked by ascending two-sided p-value and rank i gets
// the interval whose two tails each hold alpha_i / 2, alpha_i = (i/N) alpha.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "falsikit/errors.hpp"
#include "falsikit/gaussian.hpp"
#include "falsikit/series.hpp"

namespace falsikit {

enum class NoiseKind { DiagonalIID, DiagonalPerChannel, DiagonalPerEntry };

/// Diagonal Gaussian residual covariance.
struct ResidualNoiseModel {
    NoiseKind kind = NoiseKind::DiagonalIID;
    std::vector<double> std_devs; // 1, one per channel, or one per entry

    static ResidualNoiseModel iid(double sigma) { return {NoiseKind::DiagonalIID, {sigma}}; }
    static ResidualNoiseModel per_channel(std::vector<double> s) { return {NoiseKind::DiagonalPerChannel, std::move(s)}; }
    static ResidualNoiseModel per_entry(std::vector<double> s) { return {NoiseKind::DiagonalPerEntry, std::move(s)}; }

    void validate(std::size_t n_entries) const {
        if (std_devs.empty()) throw ConfigError("noise model: no standard deviations");
        for (double s : std_devs)
            if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError("noise model: standard deviations must be finite and > 0");
        if (kind == NoiseKind::DiagonalIID && std_devs.size() != 1)
            throw ConfigError("noise model: i.i.d. kind takes exactly one standard deviation");
        if (kind == NoiseKind::DiagonalPerChannel && n_entries % std_devs.size() != 0)
            throw ConfigError("noise model: residual length is not a multiple of the channel count");
        if (kind == NoiseKind::DiagonalPerEntry && n_entries != std_devs.size())
            throw ConfigError("noise model: per-entry standard deviations do not match residual length");
    }

    double sigma(std::size_t i) const {
        switch (kind) {
        case NoiseKind::DiagonalIID: return std_devs[0];
        case NoiseKind::DiagonalPerChannel: return std_devs[i % std_devs.size()];
        case NoiseKind::DiagonalPerEntry: return std_devs[i];
        }
        return std_devs[0];
    }

    friend bool operator==(const ResidualNoiseModel&, const ResidualNoiseModel&) = default;
};

/// Target identification probability phi = 1 - alpha.
struct FdrConfig {
    double alpha = 0.05;

    static FdrConfig from_phi(double phi) { return {1.0 - phi}; }
    double phi() const { return 1.0 - alpha; }

    void validate() const {
        if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("fdr: alpha must lie in (0, 1)");
    }
};

/// epsilon = h - d, elementwise; layouts must match.
inline std::vector<double> residuals(const StackedSeries& h, const StackedSeries& d) {
    if (h.values.size() != d.values.size())
        throw DomainError("residuals: length mismatch (" + std::to_string(h.values.size()) + " vs " +
                          std::to_string(d.values.size()) + ")");
    if (!h.channels.empty() && !d.channels.empty() && h.channels != d.channels)
        throw DomainError("residuals: channel layouts differ");
    std::vector<double> e(h.values.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = h.values[i] - d.values[i];
    return e;
}

inline std::vector<double> residuals(std::span<const double> h, std::span<const double> d) {
    if (h.size() != d.size()) throw DomainError("residuals: length mismatch");
    std::vector<double> e(h.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = h[i] - d[i];
    return e;
}

namespace detail {

inline void check_finite(std::span<const double> e, const char* who) {
    for (double v : e)
        if (!std::isfinite(v)) throw DomainError(std::string(who) + ": non-finite residual");
}

inline double sum_log_sigma(const ResidualNoiseModel& noise, std::size_t n) {
    if (noise.kind == NoiseKind::DiagonalIID) return static_cast<double>(n) * std::log(noise.std_devs[0]);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += std::log(noise.sigma(i));
    return acc;
}

} // namespace detail

/// ln N(eps; 0, Sigma) = -(N/2) ln 2pi - (1/2) ln|Sigma| - (1/2) eps' Sigma^-1 eps.
inline double log_likelihood(std::span<const double> eps, const ResidualNoiseModel& noise) {
    noise.validate(eps.size());
    detail::check_finite(eps, "log_likelihood");
    double quad = 0.0;
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double u = eps[i] / noise.sigma(i);
        quad += u * u;
    }
    return -static_cast<double>(eps.size()) * gaussian::half_log_2pi - detail::sum_log_sigma(noise, eps.size()) -
           0.5 * quad;
}

/// Two-sided p-values of zero-mean Gaussian marginals.
inline std::vector<double> p_values(std::span<const double> eps, const ResidualNoiseModel& noise) {
    noise.validate(eps.size());
    std::vector<double> p(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) p[i] = gaussian::two_sided_p(eps[i] / noise.sigma(i));
    return p;
}

/// Entry indices sorted by ascending p-value (ties by index).
inline std::vector<std::size_t> bh_order(std::span<const double> eps, const ResidualNoiseModel& noise) {
    noise.validate(eps.size());
    // ascending p == descending |eps|/sigma; comparing standardized
    // magnitudes avoids ties from p underflowing to 0
    std::vector<double> mag(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) mag[i] = std::fabs(eps[i] / noise.sigma(i));
    std::vector<std::size_t> order(eps.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mag[a] > mag[b]; });
    return order;
}

/// Per-rank significance alpha_i = (i / N) alpha, i = 1..N.
inline std::vector<double> bh_significance(const FdrConfig& cfg, std::size_t n_o) {
    cfg.validate();
    std::vector<double> a(n_o);
    for (std::size_t i = 0; i < n_o; ++i) a[i] = static_cast<double>(i + 1) / static_cast<double>(n_o) * cfg.alpha;
    return a;
}

/// Standardized upper bounds q_i with P(Z >= q_i) = alpha_i / 2.
inline std::vector<double> bh_standard_bounds(const FdrConfig& cfg, std::size_t n_o) {
    std::vector<double> q = bh_significance(cfg, n_o);
    for (double& v : q) v = gaussian::upper_quantile(0.5 * v);
    return q;
}

struct ErrorBound {
    double lower = 0.0;
    double upper = 0.0;
};

/// [lo_i, hi_i] per rank. `order[i]` names the entry holding rank i (its
/// sigma scales the bound); identity when empty.
inline std::vector<ErrorBound> bh_error_bounds(const ResidualNoiseModel& noise, const FdrConfig& cfg, std::size_t n_o,
                                               std::span<const std::size_t> order = {}) {
    noise.validate(n_o);
    if (!order.empty() && order.size() != n_o) throw DomainError("bh_error_bounds: order length mismatch");
    const std::vector<double> q = bh_standard_bounds(cfg, n_o);
    std::vector<ErrorBound> b(n_o);
    for (std::size_t i = 0; i < n_o; ++i) {
        const double s = noise.sigma(order.empty() ? i : order[i]);
        b[i] = {-s * q[i], s * q[i]};
    }
    return b;
}

namespace detail {

// Sum over ranks of ln phi(q_i), rank order.
inline double sum_rank_log_density(const std::vector<double>& q) {
    double acc = 0.0;
    for (double v : q) acc += gaussian::log_pdf(v);
    return acc;
}

} // namespace detail

/// ln L_bound for the residual vector `eps`. The minimum of a zero-mean
/// Gaussian density over [-s q, s q] sits at the endpoint, so rank i
/// contributes ln phi(q_i) - ln s_(i). The sigma term sums the same values
/// whatever the ranking and is accumulated in entry order, which keeps the
/// result identical to LikelihoodBoundCache.
inline double likelihood_bound(std::span<const double> eps, const ResidualNoiseModel& noise, const FdrConfig& cfg) {
    noise.validate(eps.size());
    detail::check_finite(eps, "likelihood_bound");
    return detail::sum_rank_log_density(bh_standard_bounds(cfg, eps.size())) -
           detail::sum_log_sigma(noise, eps.size());
}

/// Number of entries lying outside the interval of their rank (measurement-level rejections).
inline std::size_t rejected_count(std::span<const double> eps, const ResidualNoiseModel& noise, const FdrConfig& cfg) {
    const auto order = bh_order(eps, noise);
    const auto bounds = bh_error_bounds(noise, cfg, eps.size(), order);
    std::size_t n = 0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        const double e = eps[order[i]];
        if (e < bounds[i].lower || e > bounds[i].upper) ++n;
    }
    return n;
}

/// Memoizes the bound per (noise, alpha, N). Thread-safe.
class LikelihoodBoundCache {
public:
    double get(const ResidualNoiseModel& noise, const FdrConfig& cfg, std::size_t n_o) {
        std::lock_guard lock(mutex_);
        for (const auto& e : entries_)
            if (e.n_o == n_o && e.alpha == cfg.alpha && e.noise == noise) return e.log_bound;
        noise.validate(n_o);
        const double b = detail::sum_rank_log_density(bh_standard_bounds(cfg, n_o)) - detail::sum_log_sigma(noise, n_o);
        entries_.push_back({noise, cfg.alpha, n_o, b});
        return b;
    }

    std::size_t size() const {
        std::lock_guard lock(mutex_);
        return entries_.size();
    }

private:
    struct Entry {
        ResidualNoiseModel noise;
        double alpha;
        std::size_t n_o;
        double log_bound;
    };
    mutable std::mutex mutex_;
    std::vector<Entry> entries_;
};

struct FalsificationVerdict {
    std::string class_id;
    std::size_t sample_index = 0;
    std::vector<double> theta;
    double log_likelihood = 0.0;
    double log_bound = 0.0;
    bool unfalsified = false;
    std::size_t rejected_count = 0;
};

/// Verdict for one residual vector; ties at the bound are falsified.
inline FalsificationVerdict evaluate_model(std::string class_id, std::size_t sample_index, std::vector<double> theta,
                                           std::span<const double> eps, const ResidualNoiseModel& noise,
                                           const FdrConfig& cfg, LikelihoodBoundCache& cache) {
    FalsificationVerdict v;
    v.class_id = std::move(class_id);
    v.sample_index = sample_index;
    v.theta = std::move(theta);
    v.log_likelihood = log_likelihood(eps, noise);
    v.log_bound = cache.get(noise, cfg, eps.size());
    v.unfalsified = v.log_likelihood > v.log_bound;
    v.rejected_count = rejected_count(eps, noise, cfg);
    return v;
}

struct ClassFalsification {
    std::string class_id;
    std::vector<FalsificationVerdict> verdicts; // ascending sample_index
    std::size_t unfalsified = 0;

    std::size_t falsified() const { return verdicts.size() - unfalsified; }
    double unfalsified_fraction() const {
        return verdicts.empty() ? 0.0 : static_cast<double>(unfalsified) / static_cast<double>(verdicts.size());
    }
};

struct FalsificationReport {
    std::vector<ClassFalsification> classes;
    double alpha = 0.0;
    std::size_t n_o = 0;
    ResidualNoiseModel noise;

    std::size_t total() const {
        std::size_t n = 0;
        for (const auto& c : classes) n += c.verdicts.size();
        return n;
    }
    std::size_t total_unfalsified() const {
        std::size_t n = 0;
        for (const auto& c : classes) n += c.unfalsified;
        return n;
    }
    const ClassFalsification& at(const std::string& id) const {
        for (const auto& c : classes)
            if (c.class_id == id) return c;
        throw ConfigError("no model class '" + id + "' in falsification report");
    }
};

/// Groups verdicts by class (input order of first appearance), sorted by sample index.
inline FalsificationReport make_report(std::vector<FalsificationVerdict> verdicts, const ResidualNoiseModel& noise,
                                       const FdrConfig& cfg, std::size_t n_o) {
    FalsificationReport r;
    r.alpha = cfg.alpha;
    r.n_o = n_o;
    r.noise = noise;
    std::map<std::string, std::size_t> slot;
    for (auto& v : verdicts) {
        auto [it, fresh] = slot.try_emplace(v.class_id, r.classes.size());
        if (fresh) r.classes.push_back({v.class_id, {}, 0});
        auto& c = r.classes[it->second];
        if (v.unfalsified) ++c.unfalsified;
        c.verdicts.push_back(std::move(v));
    }
    for (auto& c : r.classes)
        std::sort(c.verdicts.begin(), c.verdicts.end(),
                  [](const auto& a, const auto& b) { return a.sample_index < b.sample_index; });
    return r;
}

/// Residual vectors paired with their samples -> report.
struct ResidualCase {
    std::string class_id;
    std::size_t sample_index = 0;
    std::vector<double> theta;
    std::vector<double> eps;
};

inline FalsificationReport falsify(const std::vector<ResidualCase>& cases, const ResidualNoiseModel& noise,
                                   const FdrConfig& cfg) {
    cfg.validate();
    if (cases.empty()) throw DomainError("falsify: no models");
    const std::size_t n_o = cases.front().eps.size();
    LikelihoodBoundCache cache;
    std::vector<FalsificationVerdict> verdicts;
    verdicts.reserve(cases.size());
    for (const auto& c : cases) {
        if (c.eps.size() != n_o) throw DomainError("falsify: residual vectors differ in length");
        verdicts.push_back(evaluate_model(c.class_id, c.sample_index, c.theta, c.eps, noise, cfg, cache));
    }
    return make_report(std::move(verdicts), noise, cfg, n_o);
}

} // namespace falsikit
