#pragma once
// Base-isolated structure under bidirectional ground motion whose isolation
// layer mixes rubber bearings, elastic sliding bearings and U-shaped steel
// damper pairs. The superstructure is condensed to one lumped mass per
// direction on top of a rigid base slab (no torsion).
//
// Device units follow the usual test-report convention: kN, kN/m for the
// linear devices, kN/cm with displacements in cm for hysteretic steel
// dampers, and yield displacements in cm for sliding-bearing hysteresis.

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "falsikit/errors.hpp"
#include "falsikit/hysteresis.hpp"
#include "falsikit/simulate.hpp"

namespace falsikit {

enum class DeviceRelationship { Linear, Hysteretic };

struct SlidingBearingParams {
    DeviceRelationship relationship = DeviceRelationship::Linear;
    double k_linear = 1550.0; // kN/m
    double friction_force = 60.0; // mu_ESB * W_ESB [kN]
    double A = 1.0;
    double beta = 0.25;
    double gamma = 0.35;
    double D_x = 1.0; // cm
    double D_y = 1.0; // cm
};

struct SteelDamperParams {
    DeviceRelationship relationship = DeviceRelationship::Linear;
    double k_linear = 4100.0; // kN/m
    double k_sd = 25.0;       // kN/cm, diagonal of K_SD
    double k_xy = 0.5;        // kN/cm, off-diagonal of K_SD
    double alpha = 0.65;      // post/pre-yield ratio
    double A = 1.0;
    double beta = 0.65;
    double gamma = -0.15;
};

struct BiaxialIsolationModel {
    double base_mass = 3.0e5;           // kg, rigid slab
    double superstructure_mass = 6.86e5; // kg
    double superstructure_stiffness = 2.0e8; // N/m per direction
    double superstructure_damping = 0.02;
    double k_rb = 1100.0;               // kN/m per rubber bearing
    std::size_t rubber_bearings = 2;
    std::size_t sliding_bearings = 2;
    std::size_t damper_pairs = 2;
    SlidingBearingParams esb;
    SteelDamperParams sd;

    void validate() const {
        if (!(base_mass > 0.0) || !(superstructure_mass > 0.0) || !(superstructure_stiffness > 0.0))
            throw ConfigError("biaxial isolation: masses and stiffness must be > 0");
        if (!(k_rb > 0.0)) throw ConfigError("biaxial isolation: k_RB must be > 0");
        if (esb.relationship == DeviceRelationship::Hysteretic && (!(esb.D_x > 0.0) || !(esb.D_y > 0.0)))
            throw ConfigError("biaxial isolation: sliding-bearing yield displacements must be > 0");
        if (esb.relationship == DeviceRelationship::Linear && !(esb.k_linear > 0.0))
            throw ConfigError("biaxial isolation: k_ESB must be > 0");
        if (sd.relationship == DeviceRelationship::Hysteretic && !(sd.alpha > 0.0 && sd.alpha < 1.0))
            throw ConfigError("biaxial isolation: steel damper alpha must lie in (0, 1)");
        if (sd.relationship == DeviceRelationship::Linear && !(sd.k_linear > 0.0))
            throw ConfigError("biaxial isolation: k_SD must be > 0");
    }
};

/// State [xs, ys, vxs, vys, xb, yb, vxb, vyb, (Zesb_x, Zesb_y)?, (Zsd_x, Zsd_y)?],
/// displacements relative to the ground in m. Input: (ag_x, ag_y).
class BiaxialIsolatedStructure final : public DynamicSystem {
public:
    explicit BiaxialIsolatedStructure(BiaxialIsolationModel model) : m_(std::move(model)) {
        m_.validate();
        std::size_t off = 8;
        if (m_.esb.relationship == DeviceRelationship::Hysteretic) {
            esb_off_ = off;
            off += 2;
        }
        if (m_.sd.relationship == DeviceRelationship::Hysteretic) {
            sd_off_ = off;
            off += 2;
        }
        size_ = off;
        c_s_ = 2.0 * m_.superstructure_damping * std::sqrt(m_.superstructure_stiffness * m_.superstructure_mass);
    }

    std::size_t state_size() const override { return size_; }
    std::size_t input_channels() const override { return 2; }

    /// Total device force on the base slab [N], (x, y).
    std::pair<double, double> device_forces(std::span<const double> s) const {
        const double ux = s[4], uy = s[5];
        double fx = static_cast<double>(m_.rubber_bearings) * m_.k_rb * ux; // kN
        double fy = static_cast<double>(m_.rubber_bearings) * m_.k_rb * uy;
        const double nesb = static_cast<double>(m_.sliding_bearings);
        if (esb_off_) {
            fx += nesb * m_.esb.friction_force * s[esb_off_];
            fy += nesb * m_.esb.friction_force * s[esb_off_ + 1];
        } else {
            fx += nesb * m_.esb.k_linear * ux;
            fy += nesb * m_.esb.k_linear * uy;
        }
        const double nsd = static_cast<double>(m_.damper_pairs);
        if (sd_off_) {
            const double cx = 100.0 * ux, cy = 100.0 * uy; // cm
            const double zx = s[sd_off_], zy = s[sd_off_ + 1];
            const double a = m_.sd.alpha;
            fx += nsd * (a * (m_.sd.k_sd * cx + m_.sd.k_xy * cy) + (1.0 - a) * (m_.sd.k_sd * zx + m_.sd.k_xy * zy));
            fy += nsd * (a * (m_.sd.k_xy * cx + m_.sd.k_sd * cy) + (1.0 - a) * (m_.sd.k_xy * zx + m_.sd.k_sd * zy));
        } else {
            fx += nsd * m_.sd.k_linear * ux;
            fy += nsd * m_.sd.k_linear * uy;
        }
        return {1e3 * fx, 1e3 * fy};
    }

    void derivative(std::span<const double> s, std::span<const double> in,
                    std::span<double> ds) const override {
        const double agx = in[0], agy = in[1];
        const double rx = s[0] - s[4], ry = s[1] - s[5];
        const double rvx = s[2] - s[6], rvy = s[3] - s[7];
        const double fsx = m_.superstructure_stiffness * rx + c_s_ * rvx;
        const double fsy = m_.superstructure_stiffness * ry + c_s_ * rvy;
        const auto [fbx, fby] = device_forces(s);
        ds[0] = s[2];
        ds[1] = s[3];
        ds[2] = -agx - fsx / m_.superstructure_mass;
        ds[3] = -agy - fsy / m_.superstructure_mass;
        ds[4] = s[6];
        ds[5] = s[7];
        ds[6] = -agx + (fsx - fbx) / m_.base_mass;
        ds[7] = -agy + (fsy - fby) / m_.base_mass;
        if (esb_off_) {
            const BiaxialShape sh{m_.esb.A, m_.esb.beta, m_.esb.gamma, m_.esb.D_x, m_.esb.D_y};
            // velocities in cm/s against yield displacements in cm
            const auto r = biaxial_hysteresis_rates(s[esb_off_], s[esb_off_ + 1], 100.0 * s[6], 100.0 * s[7], sh);
            ds[esb_off_] = r.zx_dot;
            ds[esb_off_ + 1] = r.zy_dot;
        }
        if (sd_off_) {
            const BiaxialShape sh{m_.sd.A, m_.sd.beta, m_.sd.gamma, 1.0, 1.0};
            const auto r = biaxial_hysteresis_rates(s[sd_off_], s[sd_off_ + 1], 100.0 * s[6], 100.0 * s[7], sh);
            ds[sd_off_] = r.zx_dot;
            ds[sd_off_ + 1] = r.zy_dot;
        }
    }

    std::vector<std::string> output_names() const override {
        return {"base_x_abs_acc", "base_y_abs_acc", "roof_x_abs_acc", "roof_y_abs_acc",
                "base_x_disp",    "base_y_disp",    "base_x_force",   "base_y_force"};
    }

    double output(std::size_t c, std::span<const double> s, std::span<const double> ds,
                  std::span<const double> in) const override {
        switch (c) {
        case 0: return ds[6] + in[0];
        case 1: return ds[7] + in[1];
        case 2: return ds[2] + in[0];
        case 3: return ds[3] + in[1];
        case 4: return s[4];
        case 5: return s[5];
        case 6: return device_forces(s).first;
        default: return device_forces(s).second;
        }
    }

private:
    BiaxialIsolationModel m_;
    std::size_t esb_off_ = 0, sd_off_ = 0, size_ = 8;
    double c_s_ = 0.0;
};

} // namespace falsikit
