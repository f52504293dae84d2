#pragma once
// JSON run configuration. Every error names the offending key path, e.g.
// "fdr.alpha: must lie in (0, 1)". See README.md for the key reference.

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "falsikit/bindings.hpp"
#include "falsikit/ensemble.hpp"
#include "falsikit/errors.hpp"
#include "falsikit/excitation.hpp"
#include "falsikit/falsification.hpp"
#include "falsikit/prediction.hpp"
#include "falsikit/timeseries_io.hpp"

namespace falsikit {

using json = nlohmann::json;

/// An excitation taken from a delimited file or generated in place.
struct InputSpec {
    std::string label;
    std::filesystem::path file;
    std::size_t channels = 1;
    std::string synthetic_kind; // "", "ground_motion", "biaxial_ground_motion", "wind_force"
    GroundMotionSpec ground;
    WindForceSpec wind;
    double y_scale = 0.8;
    std::uint64_t y_seed = 2;

    bool synthetic() const { return !synthetic_kind.empty(); }
};

/// Reference behaviour: a measured file, or a binding simulated with known
/// parameters (optionally with added measurement noise).
struct TruthSpec {
    std::filesystem::path file;
    std::string binding;
    ParamMap params;
    double noise_fraction = 0.0;
    std::uint64_t noise_seed = 0;

    bool synthetic() const { return !binding.empty(); }
};

struct PredictionCase {
    InputSpec input;
    std::optional<TruthSpec> truth;
};

struct NoiseSpec {
    std::vector<double> sigma;            // absolute, one value or one per channel
    std::optional<double> fraction_of_measured_std;
    double sigma_freq = 0.0;              // modal runs [Hz]
    double sigma_mac = 0.0;
};

struct RunConfig {
    std::filesystem::path source;
    StructureSpec structure;
    EnsembleSpec ensemble;
    InputSpec calibration_input;
    TruthSpec measurement;
    std::vector<PredictionCase> predictions;
    NoiseSpec noise;
    FdrConfig fdr;
    double dt_int = 0.0;      // 0 until resolved
    double duration = 0.0;    // 0 -> full calibration record
    std::vector<std::string> channels;
    WeightPrior weight_prior = WeightPrior::Cancel;
    std::filesystem::path output_dir = "falsikit_out";
    unsigned threads = 1;
    json resolved; // echo of the configuration with defaults filled
};

namespace detail {

// Typed access to a JSON object that remembers its key path.
class Node {
public:
    Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
    bool has(const std::string& k) const { return j_->is_object() && j_->contains(k) && !(*j_)[k].is_null(); }

    Node at(const std::string& k) const {
        if (!has(k)) throw ConfigError(key(k) + ": required key missing");
        return {(*j_)[k], key(k)};
    }
    Node at(std::size_t i) const { return {(*j_)[i], path_ + "[" + std::to_string(i) + "]"}; }
    std::size_t size() const { return j_->size(); }
    const json& raw() const { return *j_; }

    bool is_array() const { return j_->is_array(); }
    bool is_object() const { return j_->is_object(); }

    double number() const {
        if (!j_->is_number()) throw ConfigError(path_ + ": expected a number");
        return j_->get<double>();
    }
    std::string string() const {
        if (!j_->is_string()) throw ConfigError(path_ + ": expected a string");
        return j_->get<std::string>();
    }
    std::uint64_t uint() const {
        if (!j_->is_number_integer() || j_->get<long long>() < 0)
            throw ConfigError(path_ + ": expected a non-negative integer");
        return j_->get<std::uint64_t>();
    }
    bool boolean() const {
        if (!j_->is_boolean()) throw ConfigError(path_ + ": expected true or false");
        return j_->get<bool>();
    }
    std::vector<double> numbers() const {
        if (j_->is_number()) return {number()};
        if (!j_->is_array()) throw ConfigError(path_ + ": expected a number or an array of numbers");
        std::vector<double> v;
        for (std::size_t i = 0; i < size(); ++i) v.push_back(at(i).number());
        return v;
    }
    std::vector<std::string> strings() const {
        if (!j_->is_array()) throw ConfigError(path_ + ": expected an array of strings");
        std::vector<std::string> v;
        for (std::size_t i = 0; i < size(); ++i) v.push_back(at(i).string());
        return v;
    }

    double number_or(const std::string& k, double fallback) const { return has(k) ? at(k).number() : fallback; }
    std::uint64_t uint_or(const std::string& k, std::uint64_t fallback) const { return has(k) ? at(k).uint() : fallback; }
    std::string string_or(const std::string& k, std::string fallback) const {
        return has(k) ? at(k).string() : fallback;
    }

    [[noreturn]] void fail(const std::string& what) const { throw ConfigError(path_ + ": " + what); }

private:
    const json* j_;
    std::string path_;
};

inline double positive(const Node& n) {
    const double v = n.number();
    if (!(v > 0.0)) n.fail("must be > 0");
    return v;
}

inline std::filesystem::path resolve_path(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path q(p);
    return q.is_absolute() ? q : base / q;
}

inline PriorKind parse_prior_kind(const Node& n) {
    const std::string s = n.string();
    if (s == "normal") return PriorKind::Normal;
    if (s == "lognormal") return PriorKind::Lognormal;
    if (s == "uniform") return PriorKind::Uniform;
    n.fail("unknown prior '" + s + "' (normal, lognormal, uniform)");
}

inline ModelClassSpec parse_model_class(const Node& n, const StructureSpec& structure) {
    ModelClassSpec c;
    c.class_id = n.at("class_id").string();
    c.physics_binding = n.string_or("physics_binding", c.class_id);
    const Node bnode = n.has("physics_binding") ? n.at("physics_binding") : n.at("class_id");
    const PhysicsBinding* binding = nullptr;
    try {
        binding = &find_binding(c.physics_binding);
    } catch (const ConfigError& e) {
        bnode.fail(e.what());
    }
    if (binding->structure != structure.kind)
        bnode.fail("binding '" + c.physics_binding + "' belongs to structure kind '" + to_string(binding->structure) +
                   "', run uses '" + to_string(structure.kind) + "'");
    const Node params = n.at("parameters");
    if (!params.is_array()) params.fail("expected an array");
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Node p = params.at(i);
        c.parameter_names.push_back(p.at("name").string());
        PriorSpec prior;
        prior.kind = parse_prior_kind(p.at("prior"));
        prior.mean = p.at("mean").number();
        prior.std_dev = p.at("std").number();
        prior.positive = p.has("positive") ? p.at("positive").boolean() : true;
        try {
            prior.validate(c.parameter_names.back());
        } catch (const ConfigError& e) {
            p.fail(e.what());
        }
        c.priors.push_back(prior);
    }
    if (n.has("constants")) {
        const Node k = n.at("constants");
        if (!k.is_object()) k.fail("expected an object");
        for (const auto& [name, v] : k.raw().items()) c.fixed_constants[name] = k.at(name).number();
    }
    try {
        c.validate();
        check_binding_coverage(*binding, structure, c.parameter_names, c.fixed_constants, n.path());
    } catch (const ConfigError& e) {
        n.fail(e.what());
    }
    return c;
}

inline void parse_ground(const Node& n, GroundMotionSpec& g) {
    g.noise.duration = n.number_or("duration", 30.0);
    g.noise.dt = n.number_or("dt", 0.05);
    g.noise.f_low = n.number_or("f_low", 0.2);
    g.noise.f_high = n.number_or("f_high", 5.0);
    g.noise.sections = static_cast<int>(n.uint_or("sections", 2));
    g.noise.seed = n.uint_or("seed", 1);
    g.pga = n.number_or("pga", 3.42);
    g.rise_time = n.number_or("rise_time", 2.0);
    g.strong_end = n.number_or("strong_end", 12.0);
    g.decay = n.number_or("decay", 0.25);
}

inline InputSpec parse_input(const Node& n, const std::filesystem::path& base, std::size_t channels,
                             const std::string& default_label) {
    InputSpec in;
    in.channels = channels;
    in.label = n.string_or("label", default_label);
    if (n.has("file")) {
        in.file = resolve_path(base, n.at("file").string());
        if (!std::filesystem::exists(in.file)) n.at("file").fail("file '" + in.file.string() + "' does not exist");
    } else if (n.has("synthetic")) {
        const Node s = n.at("synthetic");
        in.synthetic_kind = s.at("kind").string();
        if (in.synthetic_kind == "ground_motion" || in.synthetic_kind == "biaxial_ground_motion") {
            parse_ground(s, in.ground);
            in.ground.label = in.label;
            in.y_scale = s.number_or("y_scale", 0.8);
            in.y_seed = s.uint_or("y_seed", in.ground.noise.seed + 1000);
            const std::size_t want = in.synthetic_kind == "ground_motion" ? 1 : 2;
            if (want != channels)
                s.at("kind").fail("'" + in.synthetic_kind + "' yields " + std::to_string(want) +
                                  " channel(s), structure expects " + std::to_string(channels));
        } else if (in.synthetic_kind == "wind_force") {
            in.wind.noise.duration = s.number_or("duration", 30.0);
            in.wind.noise.dt = s.number_or("dt", 0.05);
            in.wind.noise.f_low = s.number_or("f_low", 0.35);
            in.wind.noise.f_high = s.number_or("f_high", 1.5);
            in.wind.noise.sections = static_cast<int>(s.uint_or("sections", 1));
            in.wind.noise.seed = s.uint_or("seed", 1);
            in.wind.std_dev = s.number_or("std", 1.0e5);
            in.wind.ramp = s.number_or("ramp", 5.0);
            in.wind.label = in.label;
        } else {
            s.at("kind").fail("unknown synthetic input '" + in.synthetic_kind +
                              "' (ground_motion, biaxial_ground_motion, wind_force)");
        }
    } else {
        n.fail("needs either 'file' or 'synthetic'");
    }
    return in;
}

inline TruthSpec parse_truth(const Node& n, const std::filesystem::path& base, const StructureSpec& structure) {
    TruthSpec t;
    if (n.has("file")) {
        t.file = resolve_path(base, n.at("file").string());
        if (!std::filesystem::exists(t.file)) n.at("file").fail("file '" + t.file.string() + "' does not exist");
        return t;
    }
    const Node s = n.at("synthetic_truth");
    t.binding = s.at("binding").string();
    const PhysicsBinding* b = nullptr;
    try {
        b = &find_binding(t.binding);
    } catch (const ConfigError& e) {
        s.at("binding").fail(e.what());
    }
    if (b->structure != structure.kind) s.at("binding").fail("binding belongs to another structure kind");
    if (s.has("theta")) {
        const Node th = s.at("theta");
        if (!th.is_object()) th.fail("expected an object of name: value");
        for (const auto& [name, v] : th.raw().items()) t.params[name] = th.at(name).number();
    }
    try {
        check_binding_coverage(*b, structure, {}, t.params, s.path());
    } catch (const ConfigError& e) {
        s.fail(e.what());
    }
    t.noise_fraction = s.number_or("noise_fraction", 0.0);
    if (t.noise_fraction < 0.0) s.at("noise_fraction").fail("must be >= 0");
    t.noise_seed = s.uint_or("seed", 0);
    return t;
}

inline StructureSpec parse_structure(const Node& n) {
    StructureSpec s;
    const std::string kind = n.at("kind").string();
    if (kind == "isolated_building") {
        s.kind = StructureKind::IsolatedBuilding;
        auto& b = s.building;
        if (n.has("story_masses")) {
            b.story_masses = n.at("story_masses").numbers();
            for (double& m : b.story_masses) m *= 1e3; // Mg -> kg
        }
        if (n.has("story_stiffnesses")) {
            b.story_stiffnesses = n.at("story_stiffnesses").numbers();
            for (double& k : b.story_stiffnesses) k *= 1e6; // MN/m -> N/m
        }
        if (n.has("base_mass")) b.base_mass = 1e3 * positive(n.at("base_mass"));
        b.damping_ratio = n.number_or("damping_ratio", b.damping_ratio);
        if (n.has("damping_modes")) {
            const auto m = n.at("damping_modes").numbers();
            if (m.size() != 2) n.at("damping_modes").fail("expected two mode numbers");
            b.damping_mode_i = static_cast<std::size_t>(m[0]);
            b.damping_mode_j = static_cast<std::size_t>(m[1]);
        }
        try {
            b.validate();
        } catch (const ConfigError& e) {
            n.fail(e.what());
        }
    } else if (kind == "tmd_frame") {
        s.kind = StructureKind::TmdFrame;
        const auto stories = static_cast<std::size_t>(n.uint_or("stories", 20));
        const double floor_mass = 1e3 * n.number_or("floor_mass", 1000.0);
        s.tmd_frame = TmdFrameModel::reference(stories, floor_mass);
        s.tmd_frame.damping_ratio = n.number_or("damping_ratio", s.tmd_frame.damping_ratio);
        s.tmd_frame.wind_angle_deg = n.number_or("wind_angle_deg", s.tmd_frame.wind_angle_deg);
    } else if (kind == "biaxial_isolation") {
        s.kind = StructureKind::BiaxialIsolation;
        auto& m = s.biaxial;
        m.base_mass = 1e3 * n.number_or("base_mass", m.base_mass / 1e3);
        m.superstructure_mass = 1e3 * n.number_or("superstructure_mass", m.superstructure_mass / 1e3);
        m.superstructure_stiffness = 1e6 * n.number_or("superstructure_stiffness", m.superstructure_stiffness / 1e6);
        m.esb.friction_force = n.number_or("esb_friction_force", m.esb.friction_force);
    } else if (kind == "shear_chain_modal") {
        s.kind = StructureKind::ShearChainModal;
        s.chain_masses = n.at("masses").numbers();
        for (double m : s.chain_masses)
            if (!(m > 0.0)) n.at("masses").fail("masses must be > 0");
        s.modes = static_cast<std::size_t>(n.uint_or("modes", s.chain_masses.size()));
        if (s.modes < 1 || s.modes > s.chain_masses.size()) n.at("modes").fail("must lie in [1, DOF]");
    } else {
        n.at("kind").fail("unknown structure kind '" + kind +
                          "' (isolated_building, tmd_frame, biaxial_isolation, shear_chain_modal)");
    }
    return s;
}

inline std::size_t input_channels_for(StructureKind k) { return k == StructureKind::BiaxialIsolation ? 2 : 1; }

} // namespace detail

/// Parses and validates a configuration document. `base` resolves relative
/// file paths.
inline RunConfig parse_config_json(const json& doc, const std::filesystem::path& base) {
    using detail::Node;
    const Node root(doc, "");
    if (!root.is_object()) throw ConfigError("configuration must be a JSON object");
    RunConfig c;
    c.structure = detail::parse_structure(root.at("structure"));
    const bool modal = c.structure.kind == StructureKind::ShearChainModal;

    const Node classes = root.at("model_classes");
    if (!classes.is_array() || classes.size() == 0) classes.fail("expected a non-empty array");
    for (std::size_t i = 0; i < classes.size(); ++i)
        c.ensemble.class_specs.push_back(detail::parse_model_class(classes.at(i), c.structure));

    const Node ens = root.at("ensemble");
    c.ensemble.samples_per_class = ens.at("samples_per_class").uint();
    if (c.ensemble.samples_per_class < 1) ens.at("samples_per_class").fail("must be >= 1");
    c.ensemble.master_seed = ens.uint_or("master_seed", 0);
    try {
        c.ensemble.validate();
    } catch (const ConfigError& e) {
        classes.fail(e.what());
    }

    const Node cal = root.at("calibration");
    const std::size_t nin = detail::input_channels_for(c.structure.kind);
    if (!modal) c.calibration_input = detail::parse_input(cal.at("input"), base, nin, "calibration");
    if (cal.has("measurement")) {
        c.measurement = detail::parse_truth(cal.at("measurement"), base, c.structure);
    } else {
        cal.fail("needs 'measurement' ({file} or {synthetic_truth})");
    }

    if (root.has("prediction")) {
        if (modal) root.at("prediction").fail("modal runs have no time-domain prediction stage");
        const Node pred = root.at("prediction");
        const Node inputs = pred.at("inputs");
        if (!inputs.is_array()) inputs.fail("expected an array");
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            const Node in = inputs.at(i);
            PredictionCase pc;
            pc.input = detail::parse_input(in, base, nin, "prediction" + std::to_string(i + 1));
            if (in.has("truth")) pc.truth = detail::parse_truth(in.at("truth"), base, c.structure);
            c.predictions.push_back(std::move(pc));
        }
    }

    const Node noise = root.at("noise");
    if (modal) {
        c.noise.sigma_freq = detail::positive(noise.at("sigma_freq"));
        c.noise.sigma_mac = detail::positive(noise.at("sigma_mac"));
    } else if (noise.has("sigma")) {
        c.noise.sigma = noise.at("sigma").numbers();
        for (double s : c.noise.sigma)
            if (!(s > 0.0)) noise.at("sigma").fail("must be > 0");
    } else if (noise.has("sigma_fraction_of_measured_std")) {
        c.noise.fraction_of_measured_std = detail::positive(noise.at("sigma_fraction_of_measured_std"));
    } else {
        noise.fail("needs 'sigma' or 'sigma_fraction_of_measured_std'");
    }

    if (root.has("fdr")) {
        const Node f = root.at("fdr");
        if (f.has("alpha") && f.has("phi")) f.fail("give either 'alpha' or 'phi', not both");
        if (f.has("alpha")) c.fdr.alpha = f.at("alpha").number();
        else if (f.has("phi")) c.fdr = FdrConfig::from_phi(f.at("phi").number());
        if (!(c.fdr.alpha > 0.0 && c.fdr.alpha < 1.0))
            (f.has("alpha") ? f.at("alpha") : f.at("phi")).fail("alpha = 1 - phi must lie in (0, 1)");
    } else {
        c.fdr = FdrConfig::from_phi(0.95);
    }

    if (!modal) {
        const Node out = root.at("outputs");
        c.channels = out.at("channels").strings();
        if (c.channels.empty()) out.at("channels").fail("needs at least one channel");
        c.duration = out.number_or("duration", 0.0);
        if (c.duration < 0.0) out.at("duration").fail("must be >= 0");
        if (c.noise.sigma.size() > 1 && c.noise.sigma.size() != c.channels.size())
            noise.at("sigma").fail("one value, or one per output channel");
    }

    if (root.has("integrator")) {
        const Node integ = root.at("integrator");
        if (integ.has("dt")) c.dt_int = detail::positive(integ.at("dt"));
    }

    const std::string wp = root.string_or("weight_prior", "cancel");
    if (wp == "cancel") c.weight_prior = WeightPrior::Cancel;
    else if (wp == "include") c.weight_prior = WeightPrior::Include;
    else root.at("weight_prior").fail("expected 'cancel' or 'include'");

    if (root.has("output_dir")) c.output_dir = detail::resolve_path(base, root.at("output_dir").string());
    else c.output_dir = base / "falsikit_out";
    if (root.has("threads")) c.threads = static_cast<unsigned>(std::max<std::uint64_t>(1, root.at("threads").uint()));

    c.resolved = doc;
    c.resolved["fdr"] = json{{"alpha", c.fdr.alpha}, {"phi", c.fdr.phi()}};
    c.resolved["weight_prior"] = wp;
    c.resolved["ensemble"]["master_seed"] = c.ensemble.master_seed;
    c.resolved["output_dir"] = c.output_dir.string();
    return c;
}

inline RunConfig parse_config(const std::filesystem::path& path) {
    json doc;
    try {
        doc = json::parse(read_file(path), nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": invalid JSON: " + e.what());
    }
    RunConfig c = parse_config_json(doc, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
    c.source = path;
    return c;
}

/// Replaces the master seed (and its echo in the resolved configuration).
inline void apply_seed_override(RunConfig& c, std::uint64_t seed) {
    c.ensemble.master_seed = seed;
    c.resolved["ensemble"]["master_seed"] = seed;
}

} // namespace falsikit
