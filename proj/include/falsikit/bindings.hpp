#pragma once
// Registry mapping physics_binding names to model constructors. A binding
// turns named parameter values (sampled theta merged with fixed constants)
// into either a time-domain system or a modal model.

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "falsikit/biaxial_isolation.hpp"
#include "falsikit/errors.hpp"
#include "falsikit/modal.hpp"
#include "falsikit/shear_building.hpp"
#include "falsikit/simulate.hpp"
#include "falsikit/tmd_frame.hpp"

namespace falsikit {

enum class StructureKind { IsolatedBuilding, TmdFrame, BiaxialIsolation, ShearChainModal };

inline const char* to_string(StructureKind k) {
    switch (k) {
    case StructureKind::IsolatedBuilding: return "isolated_building";
    case StructureKind::TmdFrame: return "tmd_frame";
    case StructureKind::BiaxialIsolation: return "biaxial_isolation";
    case StructureKind::ShearChainModal: return "shear_chain_modal";
    }
    return "?";
}

/// Structural context shared by every model of a run.
struct StructureSpec {
    StructureKind kind = StructureKind::IsolatedBuilding;
    ShearBuildingModel building = ShearBuildingModel::example_four_dof();
    TmdFrameModel tmd_frame;                       // filled lazily for TmdFrame runs
    BiaxialIsolationModel biaxial;
    std::vector<double> chain_masses{1.0, 1.0, 1.0}; // Mg, shear-chain modal model
    std::size_t modes = 3;
};

using ParamMap = std::map<std::string, double>;

inline double param(const ParamMap& p, const std::string& name) {
    const auto it = p.find(name);
    if (it == p.end()) throw ConfigError("missing parameter '" + name + "'");
    return it->second;
}

inline double param_or(const ParamMap& p, const std::string& name, double fallback) {
    const auto it = p.find(name);
    return it == p.end() ? fallback : it->second;
}

struct PhysicsBinding {
    std::string name;
    StructureKind structure;
    std::vector<std::string> parameters; // must be covered by theta or constants
    std::function<std::unique_ptr<DynamicSystem>(const StructureSpec&, const ParamMap&)> make_system;
    std::function<ModalResult(const StructureSpec&, const ParamMap&)> make_modal;

    bool is_modal() const { return static_cast<bool>(make_modal); }
};

namespace detail {

// k_post [MN/m], c_b [kN s/m], r_k, Q_y [%W] or r_d.
inline IsolatorParams isolator_from(IsolatorVariant v, const StructureSpec& s, const ParamMap& p) {
    IsolatorParams iso;
    iso.variant = v;
    iso.k_post = 1e6 * param(p, "k_post");
    iso.c_b = 1e3 * param(p, "c_b");
    iso.r_k = param(p, "r_k");
    if (iso.hysteretic())
        iso.Q_y = param(p, "Q_y") / 100.0 * standard_gravity * s.building.total_mass();
    else
        iso.r_d = param(p, "r_d");
    return iso;
}

inline TmdParams tmd_law_from(const std::string& law, const std::string& axis, double tmd_mass, double spring,
                              const ParamMap& p) {
    TmdParams t;
    if (law == "linear") {
        t.law = TmdLaw::Linear;
        t.c1 = param(p, "c1_" + axis);
    } else if (law == "cubic") {
        t.law = TmdLaw::CubicPolynomial;
        t.c1 = param(p, "c1_" + axis);
        t.c3 = param(p, "c3_" + axis);
    } else if (law == "boucwen") {
        t.law = TmdLaw::BoucWen;
        t.r_k = param(p, "rk_" + axis);
        t.Q_y = param(p, "Qy_" + axis) / 100.0 * standard_gravity * tmd_mass / 1e3; // %W_tmd -> kN
        t.k_pre = param_or(p, "kpre_" + axis, spring / 1e3);                       // kN/m
    } else if (law == "powerlaw") {
        t = axis == "x" ? TmdParams::power_law_x() : TmdParams::power_law_y();
    } else {
        throw ConfigError("unknown TMD damping law '" + law + "'");
    }
    return t;
}

inline std::vector<std::string> tmd_law_parameters(const std::string& law, const std::string& axis) {
    if (law == "linear") return {"c1_" + axis};
    if (law == "cubic") return {"c1_" + axis, "c3_" + axis};
    if (law == "boucwen") return {"rk_" + axis, "Qy_" + axis};
    return {};
}

inline std::vector<PhysicsBinding> build_registry() {
    std::vector<PhysicsBinding> r;

    const std::pair<const char*, IsolatorVariant> isolators[] = {
        {"boucwen", IsolatorVariant::BoucWen},   {"bilinear", IsolatorVariant::Bilinear},
        {"aashto", IsolatorVariant::AASHTO},     {"jpwri", IsolatorVariant::JPWRI},
        {"modified_aashto", IsolatorVariant::ModifiedAASHTO}, {"caltrans", IsolatorVariant::Caltrans}};
    for (const auto& [name, v] : isolators) {
        const bool hyst = v == IsolatorVariant::BoucWen || v == IsolatorVariant::Bilinear;
        r.push_back({name, StructureKind::IsolatedBuilding, {"k_post", "c_b", "r_k", hyst ? "Q_y" : "r_d"},
                     [v](const StructureSpec& s, const ParamMap& p) -> std::unique_ptr<DynamicSystem> {
                         return std::make_unique<IsolatedBuilding>(s.building, isolator_from(v, s, p));
                     },
                     {}});
    }

    for (const char* xl : {"linear", "cubic", "boucwen"}) {
        for (const char* yl : {"linear", "cubic", "boucwen"}) {
            std::vector<std::string> params = tmd_law_parameters(xl, "x");
            for (auto& n : tmd_law_parameters(yl, "y")) params.push_back(n);
            const std::string xs = xl, ys = yl;
            r.push_back({"tmd_" + xs + "_" + ys, StructureKind::TmdFrame, params,
                         [xs, ys](const StructureSpec& s, const ParamMap& p) -> std::unique_ptr<DynamicSystem> {
                             TmdFrameModel m = s.tmd_frame;
                             for (auto& t : m.tmds) {
                                 const bool x = t.axis == Axis::X;
                                 t.damping = tmd_law_from(x ? xs : ys, x ? "x" : "y", t.mass, t.stiffness, p);
                             }
                             return std::make_unique<TmdFrame>(std::move(m));
                         },
                         {}});
        }
    }
    r.push_back({"tmd_powerlaw", StructureKind::TmdFrame, {},
                 [](const StructureSpec& s, const ParamMap& p) -> std::unique_ptr<DynamicSystem> {
                     TmdFrameModel m = s.tmd_frame;
                     for (auto& t : m.tmds)
                         t.damping = tmd_law_from("powerlaw", t.axis == Axis::X ? "x" : "y", t.mass, t.stiffness, p);
                     return std::make_unique<TmdFrame>(std::move(m));
                 },
                 {}});

    // ESB: k_ESB [kN/m] or (beta_esb, gamma_esb); SD: k_SD [kN/m] or
    // (k_sd [kN/cm], k_xy [kN/cm], alpha_sd, beta_sd, gamma_sd).
    for (const bool esb_h : {false, true}) {
        for (const bool sd_h : {false, true}) {
            std::vector<std::string> params{"k_RB"};
            if (esb_h) {
                params.insert(params.end(), {"beta_esb", "gamma_esb"});
            } else {
                params.push_back("k_ESB");
            }
            if (sd_h) {
                params.insert(params.end(), {"k_sd", "k_xy", "alpha_sd", "beta_sd", "gamma_sd"});
            } else {
                params.push_back("k_SD");
            }
            const std::string name = std::string("biaxial_esb_") + (esb_h ? "hysteretic" : "linear") + "_sd_" +
                                     (sd_h ? "hysteretic" : "linear");
            r.push_back({name, StructureKind::BiaxialIsolation, params,
                         [esb_h, sd_h](const StructureSpec& s, const ParamMap& p) -> std::unique_ptr<DynamicSystem> {
                             BiaxialIsolationModel m = s.biaxial;
                             m.k_rb = param(p, "k_RB");
                             if (esb_h) {
                                 m.esb.relationship = DeviceRelationship::Hysteretic;
                                 m.esb.beta = param(p, "beta_esb");
                                 m.esb.gamma = param(p, "gamma_esb");
                                 m.esb.friction_force = param_or(p, "friction_esb", m.esb.friction_force);
                             } else {
                                 m.esb.relationship = DeviceRelationship::Linear;
                                 m.esb.k_linear = param(p, "k_ESB");
                             }
                             if (sd_h) {
                                 m.sd.relationship = DeviceRelationship::Hysteretic;
                                 m.sd.k_sd = param(p, "k_sd");
                                 m.sd.k_xy = param(p, "k_xy");
                                 m.sd.alpha = param(p, "alpha_sd");
                                 m.sd.beta = param(p, "beta_sd");
                                 m.sd.gamma = param(p, "gamma_sd");
                             } else {
                                 m.sd.relationship = DeviceRelationship::Linear;
                                 m.sd.k_linear = param(p, "k_SD");
                             }
                             return std::make_unique<BiaxialIsolatedStructure>(std::move(m));
                         },
                         {}});
        }
    }

    // Shear chain: k_1..k_n story stiffnesses [MN/m] over chain_masses [Mg];
    // a single "k" stands in for any k_i not given.
    r.push_back({"shear_chain", StructureKind::ShearChainModal, {}, {},
                 [](const StructureSpec& s, const ParamMap& p) {
                     const std::size_t n = s.chain_masses.size();
                     std::vector<double> k(n);
                     for (std::size_t i = 0; i < n; ++i) {
                         const std::string name = "k_" + std::to_string(i + 1);
                         k[i] = 1e6 * (p.count(name) ? p.at(name) : param(p, "k"));
                     }
                     Eigen::MatrixXd M = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
                     for (std::size_t i = 0; i < n; ++i)
                         M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = 1e3 * s.chain_masses[i];
                     return solve_modes(M, shear_chain_stiffness(k), s.modes);
                 }});
    return r;
}

} // namespace detail

inline const std::vector<PhysicsBinding>& binding_registry() {
    static const std::vector<PhysicsBinding> registry = detail::build_registry();
    return registry;
}

inline std::string registered_binding_names() {
    std::string all;
    for (const auto& b : binding_registry()) all += (all.empty() ? "" : ", ") + b.name;
    return all;
}

inline const PhysicsBinding& find_binding(const std::string& name) {
    for (const auto& b : binding_registry())
        if (b.name == name) return b;
    throw ConfigError("unknown physics_binding '" + name + "' (registered: " + registered_binding_names() + ")");
}

/// Named parameter view of a sample: constants first, theta overrides.
inline ParamMap make_param_map(const std::vector<std::string>& names, const std::vector<double>& theta,
                               const std::map<std::string, double>& constants) {
    ParamMap p(constants.begin(), constants.end());
    for (std::size_t i = 0; i < names.size() && i < theta.size(); ++i) p[names[i]] = theta[i];
    return p;
}

/// Every parameter a binding needs must come from theta or constants.
inline void check_binding_coverage(const PhysicsBinding& b, const StructureSpec& s,
                                   const std::vector<std::string>& names,
                                   const std::map<std::string, double>& constants, const std::string& where) {
    std::vector<std::string> need = b.parameters;
    auto given = [&](const std::string& n) {
        return std::find(names.begin(), names.end(), n) != names.end() || constants.count(n) > 0;
    };
    if (b.structure == StructureKind::ShearChainModal && !given("k"))
        for (std::size_t i = 0; i < s.chain_masses.size(); ++i) need.push_back("k_" + std::to_string(i + 1));
    for (const auto& n : need)
        if (!given(n))
            throw ConfigError(where + ": binding '" + b.name + "' needs parameter '" + n +
                              "' (declare it in parameters or constants)");
}

} // namespace falsikit
