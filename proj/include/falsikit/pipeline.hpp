#pragma once
// Orchestration: ensemble -> calibration simulations -> falsification ->
// weights -> predictions, with ledgers, a JSON manifest and a text report.

#include <chrono>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "falsikit/bindings.hpp"
#include "falsikit/config.hpp"
#include "falsikit/ensemble.hpp"
#include "falsikit/excitation.hpp"
#include "falsikit/falsification.hpp"
#include "falsikit/parallel.hpp"
#include "falsikit/prediction.hpp"
#include "falsikit/random.hpp"
#include "falsikit/simulate.hpp"
#include "falsikit/timeseries_io.hpp"

namespace falsikit {

enum class Stage { Simulate, Falsify, Predict, All };

inline Stage parse_stage(const std::string& s) {
    if (s == "simulate") return Stage::Simulate;
    if (s == "falsify") return Stage::Falsify;
    if (s == "predict") return Stage::Predict;
    if (s == "all") return Stage::All;
    throw ConfigError("unknown stage '" + s + "' (simulate, falsify, predict, all)");
}

struct ClassCounts {
    std::string class_id;
    std::size_t samples = 0;
    std::size_t unfalsified = 0;
    std::size_t falsified = 0;
};

struct ClassEstimate {
    std::string class_id;
    std::vector<std::string> parameter_names;
    std::vector<double> theta_hat;
    std::size_t max_likelihood_index = 0;
    double max_log_likelihood = 0.0;
};

struct PredictionSummary {
    std::string input_label;
    std::string class_id;
    std::size_t simulations = 0;
    std::string file;
    std::vector<std::string> channels;
    std::vector<double> relative_rms_error; // per channel, empty without truth
};

struct RunManifest {
    std::string config_hash;
    std::string config_path;
    std::uint64_t master_seed = 0;
    unsigned threads = 1;
    nlohmann::json resolved_config;
    std::vector<std::string> completed_stages;
    std::map<std::string, double> timings_s;
    std::vector<ClassCounts> counts;
    std::vector<ClassEstimate> estimates;
    std::vector<PredictionSummary> predictions;
    std::size_t calibration_simulations = 0;
    std::size_t prediction_simulations = 0;
    std::size_t prediction_inputs = 0;
    std::size_t n_o = 0;
    double log_bound = 0.0;
    double alpha = 0.0;
    double dt_int = 0.0; // resolved integration step, 0 for modal runs
    std::vector<std::string> artifacts;
    std::string status = "running";
    std::string error;

    std::size_t total_samples() const {
        std::size_t n = 0;
        for (const auto& c : counts) n += c.samples;
        return n;
    }
    std::size_t total_falsified() const {
        std::size_t n = 0;
        for (const auto& c : counts) n += c.falsified;
        return n;
    }
    std::size_t total_unfalsified() const { return total_samples() - total_falsified(); }
    /// N_f / N_s: fraction of prediction-stage simulations avoided.
    double savings_ratio() const {
        const std::size_t n = total_samples();
        return n ? static_cast<double>(total_falsified()) / static_cast<double>(n) : 0.0;
    }

    nlohmann::json to_json() const {
        using nlohmann::json;
        json j;
        j["config_hash"] = config_hash;
        j["config_path"] = config_path;
        j["master_seed"] = master_seed;
        j["threads"] = threads;
        j["status"] = status;
        if (!error.empty()) j["error"] = error;
        j["completed_stages"] = completed_stages;
        j["timings_s"] = timings_s;
        j["n_o"] = n_o;
        j["alpha"] = alpha;
        j["dt_int"] = dt_int;
        j["log_likelihood_bound"] = log_bound;
        json cc = json::array();
        for (const auto& c : counts)
            cc.push_back({{"class_id", c.class_id}, {"N_s", c.samples}, {"N_u", c.unfalsified}, {"N_f", c.falsified}});
        j["counts"] = cc;
        j["total"] = {{"N_s", total_samples()}, {"N_u", total_unfalsified()}, {"N_f", total_falsified()}};
        j["savings_ratio"] = savings_ratio();
        j["calibration_simulations"] = calibration_simulations;
        j["prediction_inputs"] = prediction_inputs;
        j["prediction_simulations"] = prediction_simulations;
        json est = json::array();
        for (const auto& e : estimates) {
            json p = json::object();
            for (std::size_t i = 0; i < e.parameter_names.size(); ++i) p[e.parameter_names[i]] = e.theta_hat[i];
            est.push_back({{"class_id", e.class_id},
                           {"theta_hat", p},
                           {"max_likelihood_sample", e.max_likelihood_index},
                           {"max_log_likelihood", e.max_log_likelihood}});
        }
        j["estimates"] = est;
        json pr = json::array();
        for (const auto& p : predictions) {
            json e{{"input", p.input_label}, {"class_id", p.class_id}, {"simulations", p.simulations}, {"file", p.file}};
            if (!p.relative_rms_error.empty()) {
                json r = json::object();
                for (std::size_t c = 0; c < p.channels.size(); ++c) r[p.channels[c]] = p.relative_rms_error[c];
                e["relative_rms_error"] = r;
            }
            pr.push_back(e);
        }
        j["predictions"] = pr;
        j["artifacts"] = artifacts;
        j["resolved_config"] = resolved_config;
        return j;
    }
};

namespace detail {

// Canonical hash of the settings that determine results (thread count and
// output location excluded).
inline std::string config_hash(const RunConfig& cfg) {
    nlohmann::json j = cfg.resolved;
    j.erase("threads");
    j.erase("output_dir");
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
    return buf;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
    return out + "\"";
}

inline std::string file_safe(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return out;
}

class BinaryWriter {
public:
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void str(const std::string& s) {
        u64(s.size());
        buf_.append(s);
    }
    void vec(const std::vector<double>& v) {
        u64(v.size());
        raw(v.data(), v.size() * sizeof(double));
    }
    const std::string& bytes() const { return buf_; }

private:
    void raw(const void* p, std::size_t n) { buf_.append(static_cast<const char*>(p), n); }
    std::string buf_;
};

class BinaryReader {
public:
    BinaryReader(std::string bytes, std::string name) : buf_(std::move(bytes)), name_(std::move(name)) {}
    std::uint64_t u64() {
        std::uint64_t v;
        raw(&v, sizeof v);
        return v;
    }
    double f64() {
        double v;
        raw(&v, sizeof v);
        return v;
    }
    std::string str() {
        const auto n = u64();
        need(n);
        std::string s = buf_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::vector<double> vec() {
        const auto n = u64();
        std::vector<double> v(n);
        raw(v.data(), n * sizeof(double));
        return v;
    }

private:
    void need(std::size_t n) const {
        if (pos_ + n > buf_.size()) throw ParseError(name_ + ": truncated file");
    }
    void raw(void* p, std::size_t n) {
        need(n);
        std::memcpy(p, buf_.data() + pos_, n);
        pos_ += n;
    }
    std::string buf_;
    std::string name_;
    std::size_t pos_ = 0;
};

inline constexpr const char* cache_magic = "falsikit-calibration-v1";

} // namespace detail

/// Everything the falsify and predict stages need from the simulate stage.
struct CalibrationData {
    std::string config_hash;
    ResidualNoiseModel noise;
    std::vector<ResidualCase> cases; // class order, then sample index

    std::string serialize() const {
        detail::BinaryWriter w;
        w.str(detail::cache_magic);
        w.str(config_hash);
        w.u64(static_cast<std::uint64_t>(noise.kind));
        w.vec(noise.std_devs);
        w.u64(cases.size());
        for (const auto& c : cases) {
            w.str(c.class_id);
            w.u64(c.sample_index);
            w.vec(c.theta);
            w.vec(c.eps);
        }
        return w.bytes();
    }

    static CalibrationData deserialize(std::string bytes, const std::string& name) {
        detail::BinaryReader r(std::move(bytes), name);
        if (r.str() != detail::cache_magic) throw ParseError(name + ": not a calibration cache");
        CalibrationData d;
        d.config_hash = r.str();
        const auto kind = r.u64();
        if (kind > 2) throw ParseError(name + ": bad noise kind");
        d.noise.kind = static_cast<NoiseKind>(kind);
        d.noise.std_devs = r.vec();
        const auto n = r.u64();
        d.cases.resize(n);
        for (auto& c : d.cases) {
            c.class_id = r.str();
            c.sample_index = r.u64();
            c.theta = r.vec();
            c.eps = r.vec();
        }
        return d;
    }
};

inline ExcitationRecord load_input(const InputSpec& in) {
    if (in.synthetic_kind == "ground_motion") return synthetic_ground_motion(in.ground);
    if (in.synthetic_kind == "biaxial_ground_motion") {
        ExcitationRecord r = synthetic_biaxial_ground_motion(in.ground, in.y_scale, in.y_seed);
        r.label = in.label;
        return r;
    }
    if (in.synthetic_kind == "wind_force") return synthetic_wind_force(in.wind);
    return ingest_excitation(in.file, in.channels, in.label);
}

/// Builds the time-domain system for a sample of class `spec`.
inline std::unique_ptr<DynamicSystem> make_system(const StructureSpec& s, const ModelClassSpec& spec,
                                                  const std::vector<double>& theta) {
    return find_binding(spec.physics_binding)
        .make_system(s, make_param_map(spec.parameter_names, theta, spec.fixed_constants));
}

/// Resolved run: config plus everything derived from it before simulating.
class Pipeline {
public:
    explicit Pipeline(RunConfig cfg) : cfg_(std::move(cfg)) {
        modal_ = cfg_.structure.kind == StructureKind::ShearChainModal;
        manifest_.config_hash = detail::config_hash(cfg_);
        manifest_.config_path = cfg_.source.string();
        manifest_.resolved_config = cfg_.resolved;
        manifest_.master_seed = cfg_.ensemble.master_seed;
        manifest_.threads = cfg_.threads;
        manifest_.alpha = cfg_.fdr.alpha;
        manifest_.prediction_inputs = cfg_.predictions.size();
    }

    const RunConfig& config() const { return cfg_; }
    const RunManifest& manifest() const { return manifest_; }
    const std::optional<FalsificationReport>& report() const { return report_; }
    const std::vector<WeightedEnsemble>& ensembles() const { return ensembles_; }
    const std::vector<PredictionResult>& prediction_results() const { return predictions_; }

    std::filesystem::path cache_path() const { return cfg_.output_dir / "calibration_outputs.bin"; }

    /// Runs the requested stage(s). On failure the manifest is written with
    /// status "failed" and the completed stages, then the error propagates.
    RunManifest run(Stage stage) {
        std::filesystem::create_directories(cfg_.output_dir);
        try {
            if (stage == Stage::Simulate || stage == Stage::All) {
                timed("simulate", [&] { calibration_ = simulate_stage(); });
                write_artifact("calibration_outputs.bin", calibration_->serialize());
                manifest_.completed_stages.push_back("simulate");
            } else {
                calibration_ = load_cache();
            }
            if (stage != Stage::Simulate) {
                timed("falsify", [&] { falsify_stage(); });
                manifest_.completed_stages.push_back("falsify");
            }
            if (stage == Stage::Predict || stage == Stage::All) {
                timed("predict", [&] { predict_stage(); });
                manifest_.completed_stages.push_back("predict");
            }
            manifest_.status = "complete";
        } catch (const std::exception& e) {
            manifest_.status = "failed";
            manifest_.error = e.what();
            write_manifest();
            throw;
        }
        write_manifest();
        emit_report(manifest_, cfg_.output_dir);
        return manifest_;
    }

    /// Calibration input, sampled measurement vector and simulation options.
    struct Calibration {
        ExcitationRecord input;
        MeasurementSet measured;
        SimulationOptions options;
    };

    Calibration prepare_calibration() const {
        Calibration c;
        c.input = load_input(cfg_.calibration_input);
        const double dt_out = cfg_.measurement.synthetic() ? c.input.dt : ingest_measurement(cfg_.measurement.file, cfg_.channels).dt;
        c.options = options_for(c.input, dt_out);
        c.measured = measure(cfg_.measurement, c.input, c.options);
        return c;
    }

    SimulationOptions options_for(const ExcitationRecord& input, double dt_out) const {
        SimulationOptions o;
        o.output_dt = dt_out;
        o.dt_int = cfg_.dt_int > 0.0 ? cfg_.dt_int : dt_out / 10.0;
        const double full = std::floor(input.duration() / dt_out + 1e-9) * dt_out;
        o.duration = cfg_.duration > 0.0 ? std::min(cfg_.duration, full) : full;
        o.channels = cfg_.channels;
        return o;
    }

private:
    template <class F>
    void timed(const std::string& name, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        manifest_.timings_s[name] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    void write_artifact(const std::string& name, const std::string& content) {
        atomic_write(cfg_.output_dir / name, content);
        if (std::find(manifest_.artifacts.begin(), manifest_.artifacts.end(), name) == manifest_.artifacts.end())
            manifest_.artifacts.push_back(name);
    }

    void write_manifest() {
        nlohmann::json j = manifest_.to_json();
        atomic_write(cfg_.output_dir / "manifest.json", j.dump(2) + "\n");
    }

    // d: measured file, or truth simulation plus seeded Gaussian noise.
    MeasurementSet measure(const TruthSpec& t, const ExcitationRecord& input, const SimulationOptions& o) const {
        if (!t.synthetic()) {
            MeasurementSet m = ingest_measurement(t.file, cfg_.channels);
            const std::size_t n = detail::checked_ratio(o.duration, o.output_dt, "duration / output dt");
            if (m.steps() < n)
                throw ConfigError(t.file.string() + ": " + std::to_string(m.steps()) + " samples, need " +
                                  std::to_string(n));
            m.values.resize(n * m.channel_count());
            return m;
        }
        const auto sys = find_binding(t.binding).make_system(cfg_.structure, t.params);
        SimulationOutput clean = simulate(*sys, input, o);
        if (t.noise_fraction == 0.0) return clean;
        Rng rng(derive_seed(t.noise_seed, "measurement_noise", 0));
        return add_measurement_noise(clean, t.noise_fraction, rng);
    }

    ResidualNoiseModel noise_for(const MeasurementSet& d) const {
        if (!cfg_.noise.sigma.empty()) {
            if (cfg_.noise.sigma.size() == 1) return ResidualNoiseModel::iid(cfg_.noise.sigma[0]);
            return ResidualNoiseModel::per_channel(cfg_.noise.sigma);
        }
        const double f = *cfg_.noise.fraction_of_measured_std;
        if (d.channel_count() == 1) return ResidualNoiseModel::iid(f * channel_std(d, 0));
        std::vector<double> s;
        for (std::size_t c = 0; c < d.channel_count(); ++c) s.push_back(f * channel_std(d, c));
        return ResidualNoiseModel::per_channel(std::move(s));
    }

    ModalResult modal_reference() const {
        const auto& t = cfg_.measurement;
        if (!t.synthetic()) return read_modal_reference(t.file);
        return find_binding(t.binding).make_modal(cfg_.structure, t.params);
    }

    CalibrationData simulate_stage() {
        CalibrationData data;
        data.config_hash = manifest_.config_hash;
        const auto samples = generate_ensemble(cfg_.ensemble, cfg_.threads);
        std::vector<std::vector<std::vector<double>>> eps(samples.size());

        if (modal_) {
            const ModalResult ref = modal_reference();
            std::vector<double> s(ref.mode_count(), cfg_.noise.sigma_freq);
            s.resize(2 * ref.mode_count(), cfg_.noise.sigma_mac);
            data.noise = ResidualNoiseModel::per_entry(std::move(s));
            for (std::size_t c = 0; c < samples.size(); ++c) {
                const auto& spec = cfg_.ensemble.class_specs[c];
                const auto& binding = find_binding(spec.physics_binding);
                eps[c].resize(samples[c].size());
                parallel_for(samples[c].size(), cfg_.threads, [&](std::size_t i) {
                    const auto p = make_param_map(spec.parameter_names, samples[c][i].theta, spec.fixed_constants);
                    eps[c][i] = modal_residual(binding.make_modal(cfg_.structure, p), ref);
                });
            }
        } else {
            const Calibration cal = prepare_calibration();
            data.noise = noise_for(cal.measured);
            manifest_.dt_int = cal.options.dt_int;
            for (std::size_t c = 0; c < samples.size(); ++c) {
                const auto& spec = cfg_.ensemble.class_specs[c];
                eps[c].resize(samples[c].size());
                std::vector<std::string> failures(samples[c].size());
                parallel_for(samples[c].size(), cfg_.threads, [&](std::size_t i) {
                    try {
                        const auto sys = make_system(cfg_.structure, spec, samples[c][i].theta);
                        eps[c][i] = residuals(simulate(*sys, cal.input, cal.options), cal.measured);
                    } catch (const SimulationError& e) {
                        failures[i] = e.what();
                    }
                });
                // a diverged model cannot reproduce the data: infinite residual
                for (std::size_t i = 0; i < failures.size(); ++i)
                    if (!failures[i].empty())
                        eps[c][i].assign(cal.measured.values.size(), std::numeric_limits<double>::infinity());
            }
        }
        for (std::size_t c = 0; c < samples.size(); ++c)
            for (std::size_t i = 0; i < samples[c].size(); ++i)
                data.cases.push_back({samples[c][i].class_id, i, samples[c][i].theta, std::move(eps[c][i])});
        manifest_.calibration_simulations = data.cases.size();
        return data;
    }

    CalibrationData load_cache() {
        if (!std::filesystem::exists(cache_path()))
            throw ConfigError("no calibration cache at '" + cache_path().string() + "'; run --stage simulate first");
        CalibrationData d = CalibrationData::deserialize(read_file(cache_path()), cache_path().string());
        if (d.config_hash != manifest_.config_hash)
            throw ConfigError("calibration cache '" + cache_path().string() +
                              "' was produced by a different configuration; rerun --stage simulate");
        manifest_.completed_stages.push_back("simulate (cached)");
        return d;
    }

    void falsify_stage() {
        const auto& data = *calibration_;
        if (data.cases.empty()) throw DomainError("no models to falsify");
        const std::size_t n_o = data.cases.front().eps.size();
        LikelihoodBoundCache cache;
        std::vector<FalsificationVerdict> verdicts(data.cases.size());
        parallel_for(data.cases.size(), cfg_.threads, [&](std::size_t i) {
            const auto& c = data.cases[i];
            if (c.eps.size() != n_o) throw DomainError("residual vectors differ in length");
            bool finite = true;
            for (double v : c.eps) finite = finite && std::isfinite(v);
            if (!finite) {
                // diverged simulation
                FalsificationVerdict v;
                v.class_id = c.class_id;
                v.sample_index = c.sample_index;
                v.theta = c.theta;
                v.log_likelihood = -std::numeric_limits<double>::infinity();
                v.log_bound = cache.get(data.noise, cfg_.fdr, n_o);
                v.rejected_count = n_o;
                verdicts[i] = std::move(v);
                return;
            }
            verdicts[i] = evaluate_model(c.class_id, c.sample_index, c.theta, c.eps, data.noise, cfg_.fdr, cache);
        });
        report_ = make_report(std::move(verdicts), data.noise, cfg_.fdr, n_o);
        manifest_.n_o = n_o;
        manifest_.log_bound = cache.get(data.noise, cfg_.fdr, n_o);

        manifest_.counts.clear();
        manifest_.estimates.clear();
        ensembles_.clear();
        for (const auto& cls : report_->classes) {
            manifest_.counts.push_back({cls.class_id, cls.verdicts.size(), cls.unfalsified, cls.falsified()});
            const ModelClassSpec& spec = class_spec(cls.class_id);
            write_artifact("verdicts_" + detail::file_safe(cls.class_id) + ".csv", verdict_ledger(cls, spec));
            if (cls.unfalsified == 0) continue;
            WeightedEnsemble ens = post_falsification_weights(cls, &spec, cfg_.weight_prior);
            write_artifact("weights_" + detail::file_safe(cls.class_id) + ".csv", weight_ledger(ens, spec));
            const auto& ml = max_likelihood_model(cls.verdicts);
            manifest_.estimates.push_back(
                {cls.class_id, spec.parameter_names, estimate_parameters(ens), ml.sample_index, ml.log_likelihood});
            ensembles_.push_back(std::move(ens));
        }
    }

    void predict_stage() {
        manifest_.predictions.clear();
        manifest_.prediction_simulations = 0;
        predictions_.clear();
        if (cfg_.predictions.empty()) return;
        if (ensembles_.empty())
            throw AllFalsifiedError("every model of every class was falsified; enlarge samples_per_class, lower the "
                                    "target identification probability (raise alpha), or add model classes");
        for (const auto& pc : cfg_.predictions) {
            const ExcitationRecord input = load_input(pc.input);
            double dt_out = input.dt;
            if (pc.truth && !pc.truth->synthetic()) dt_out = ingest_measurement(pc.truth->file, cfg_.channels).dt;
            else if (!cfg_.measurement.synthetic()) dt_out = ingest_measurement(cfg_.measurement.file, cfg_.channels).dt;
            const SimulationOptions o = options_for(input, dt_out);
            std::optional<SimulationOutput> truth;
            if (pc.truth) {
                TruthSpec t = *pc.truth;
                truth = measure(t, input, o);
            }
            for (const auto& ens : ensembles_) {
                const ModelClassSpec& spec = class_spec(ens.class_id);
                ModelSimulator sim = [&](const ModelSample& s, const ExcitationRecord& in) {
                    return simulate(*make_system(cfg_.structure, spec, s.theta), in, o);
                };
                PredictionResult r = predict_response(ens, sim, input, cfg_.threads);
                PredictionSummary ps;
                ps.input_label = input.label;
                ps.class_id = ens.class_id;
                ps.simulations = r.simulations;
                ps.channels = r.mean.channels;
                ps.file = "prediction_" + detail::file_safe(input.label) + "_" + detail::file_safe(ens.class_id) + ".csv";
                write_artifact(ps.file, series_to_text(r.mean, &r.std_dev));
                if (truth) {
                    for (std::size_t c = 0; c < r.mean.channel_count(); ++c)
                        ps.relative_rms_error.push_back(relative_rms_error(truth->channel(c), r.mean.channel(c)));
                    write_artifact("plot_" + detail::file_safe(input.label) + "_" + detail::file_safe(ens.class_id) + ".csv",
                                   plot_data(*truth, r.mean));
                }
                manifest_.prediction_simulations += r.simulations;
                manifest_.predictions.push_back(std::move(ps));
                predictions_.push_back(std::move(r));
            }
        }
    }

    const ModelClassSpec& class_spec(const std::string& id) const {
        for (const auto& s : cfg_.ensemble.class_specs)
            if (s.class_id == id) return s;
        throw ConfigError("no model class '" + id + "'");
    }

    static std::string verdict_ledger(const ClassFalsification& cls, const ModelClassSpec& spec) {
        std::string s = "class_id,sample_index";
        for (const auto& n : spec.parameter_names) s += "," + detail::csv_escape(n);
        s += ",log_likelihood,log_bound,rejected_count,unfalsified\n";
        for (const auto& v : cls.verdicts) {
            s += detail::csv_escape(v.class_id) + "," + std::to_string(v.sample_index);
            for (double t : v.theta) s += "," + format_double(t);
            s += "," + format_double(v.log_likelihood) + "," + format_double(v.log_bound) + "," +
                 std::to_string(v.rejected_count) + "," + (v.unfalsified ? "1" : "0") + "\n";
        }
        return s;
    }

    static std::string weight_ledger(const WeightedEnsemble& ens, const ModelClassSpec& spec) {
        std::string s = "sample_index";
        for (const auto& n : spec.parameter_names) s += "," + detail::csv_escape(n);
        s += ",log_likelihood,weight\n";
        for (const auto& e : ens.entries) {
            s += std::to_string(e.sample.sample_index);
            for (double t : e.sample.theta) s += "," + format_double(t);
            s += "," + format_double(e.log_likelihood) + "," + format_double(e.weight) + "\n";
        }
        return s;
    }

    static std::string plot_data(const StackedSeries& truth, const StackedSeries& pred) {
        std::string s = "time";
        for (const auto& c : pred.channels) s += "," + c + "_true," + c + "_predicted";
        s += "\n";
        for (std::size_t k = 0; k < pred.steps(); ++k) {
            s += format_double(static_cast<double>(k) * pred.dt);
            for (std::size_t c = 0; c < pred.channel_count(); ++c)
                s += "," + format_double(truth.at(k, c)) + "," + format_double(pred.at(k, c));
            s += "\n";
        }
        return s;
    }

public:
    /// Human-readable summary of a manifest (falsification table, estimates,
    /// savings and prediction errors).
    static std::string report_text(const RunManifest& m) {
        auto pct = [](double v) {
            char b[32];
            std::snprintf(b, sizeof b, "%.1f%%", 100.0 * v);
            return std::string(b);
        };
        auto num = [](double v) {
            char b[32];
            std::snprintf(b, sizeof b, "%.6g", v);
            return std::string(b);
        };
        std::string s = "# falsikit report\n\n";
        s += "config hash: " + m.config_hash + "  status: " + m.status + "\n";
        if (!m.error.empty()) s += "error: " + m.error + "\n";
        s += "stages: ";
        for (std::size_t i = 0; i < m.completed_stages.size(); ++i) s += (i ? ", " : "") + m.completed_stages[i];
        s += "\n\n";
        if (!m.counts.empty()) {
            s += "## Falsification (N_o = " + std::to_string(m.n_o) + ", alpha = " + num(m.alpha) + ")\n\n";
            s += "| Model class | N_s | N_u | % unfalsified |\n|---|---|---|---|\n";
            for (const auto& c : m.counts)
                s += "| " + c.class_id + " | " + std::to_string(c.samples) + " | " + std::to_string(c.unfalsified) +
                     " | " + pct(c.samples ? static_cast<double>(c.unfalsified) / static_cast<double>(c.samples) : 0.0) +
                     " |\n";
            s += "\nsavings: " + std::to_string(m.total_falsified()) + " of " + std::to_string(m.total_samples()) +
                 " models falsified, prediction needs " + pct(1.0 - m.savings_ratio()) + " of the simulations (" +
                 pct(m.savings_ratio()) + " saved)\n\n";
        }
        if (!m.estimates.empty()) {
            s += "## Parameter estimates\n\n";
            for (const auto& e : m.estimates) {
                s += "### " + e.class_id + "\n\n| Parameter | estimate |\n|---|---|\n";
                for (std::size_t i = 0; i < e.parameter_names.size(); ++i)
                    s += "| " + e.parameter_names[i] + " | " + num(e.theta_hat[i]) + " |\n";
                s += "\nmaximum-likelihood sample: " + std::to_string(e.max_likelihood_index) + " (log L = " +
                     num(e.max_log_likelihood) + ")\n\n";
            }
        }
        if (!m.predictions.empty()) {
            s += "## Predictions\n\n| Input | Model class | simulations | file | relative RMS error |\n|---|---|---|---|---|\n";
            for (const auto& p : m.predictions) {
                std::string err = "n/a";
                if (!p.relative_rms_error.empty()) {
                    err.clear();
                    for (std::size_t c = 0; c < p.channels.size(); ++c)
                        err += (c ? ", " : "") + p.channels[c] + " " + pct(p.relative_rms_error[c]);
                }
                s += "| " + p.input_label + " | " + p.class_id + " | " + std::to_string(p.simulations) + " | " + p.file +
                     " | " + err + " |\n";
            }
            s += "\n";
        }
        return s;
    }

    static void emit_report(const RunManifest& m, const std::filesystem::path& dir) {
        atomic_write(dir / "report.md", report_text(m));
    }

private:
    RunConfig cfg_;
    bool modal_ = false;
    RunManifest manifest_;
    std::optional<CalibrationData> calibration_;
    std::optional<FalsificationReport> report_;
    std::vector<WeightedEnsemble> ensembles_;
    std::vector<PredictionResult> predictions_;
};

/// parse_config + Pipeline::run in one call.
inline RunManifest run_pipeline(RunConfig cfg, Stage stage = Stage::All) {
    Pipeline p(std::move(cfg));
    return p.run(stage);
}

} // namespace falsikit
