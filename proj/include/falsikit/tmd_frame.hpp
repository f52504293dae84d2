#pragma once
// Wind-excited tall building reduced to a pair of planar shear chains (x and
// y sway) carrying roof-mounted tuned mass dampers with selectable damping
// laws.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "falsikit/errors.hpp"
#include "falsikit/hysteresis.hpp"
#include "falsikit/modal.hpp"
#include "falsikit/simulate.hpp"

namespace falsikit {

enum class Axis { X, Y };

struct TmdSpec {
    Axis axis = Axis::X;
    double mass = 0.0;      // kg
    double stiffness = 0.0; // N/m
    TmdParams damping;      // force law, kN units
};

struct TmdFrameModel {
    std::size_t stories = 20;
    double floor_mass = 1.0e6;      // kg
    double story_height = 4.0;      // m
    double stiffness_x = 0.0;       // N/m, uniform per story
    double stiffness_y = 0.0;
    double damping_ratio = 0.02;    // Rayleigh, modes 1 and 2 of each chain
    double wind_angle_deg = 30.0;   // from the x axis
    double height_exponent = 0.3;   // load shape (z/H)^p
    std::vector<TmdSpec> tmds;

    double building_mass() const { return floor_mass * static_cast<double>(stories); }

    void validate() const {
        if (stories < 2) throw ConfigError("tmd frame: need at least two stories");
        if (!(floor_mass > 0.0) || !(stiffness_x > 0.0) || !(stiffness_y > 0.0) || !(story_height > 0.0))
            throw ConfigError("tmd frame: masses, heights and stiffnesses must be > 0");
        for (const auto& t : tmds) {
            if (!(t.mass > 0.0) || !(t.stiffness > 0.0))
                throw ConfigError("tmd frame: TMD mass and stiffness must be > 0");
            t.damping.validate();
        }
    }

    /// Story stiffness giving a uniform chain of `stories` floors the
    /// fundamental frequency `f1` [Hz].
    static double stiffness_for_frequency(std::size_t stories, double floor_mass, double f1) {
        std::vector<double> unit(stories, 1.0);
        const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(stories),
                                                            static_cast<Eigen::Index>(stories)) * floor_mass;
        const double f_unit = solve_modes(M, shear_chain_stiffness(unit), 1).frequencies[0];
        return (f1 / f_unit) * (f1 / f_unit);
    }

    /// 20 stories tuned to 0.5893 Hz (x) and 0.5718 Hz (y); one x TMD with
    /// 1.1% and two y TMDs with 0.55% of the building mass each, tuned by the
    /// Den Hartog frequency ratio. Damping laws are left linear.
    static TmdFrameModel reference(std::size_t stories = 20, double floor_mass = 1.0e6) {
        TmdFrameModel m;
        m.stories = stories;
        m.floor_mass = floor_mass;
        m.stiffness_x = stiffness_for_frequency(stories, floor_mass, 0.5893);
        m.stiffness_y = stiffness_for_frequency(stories, floor_mass, 0.5718);
        const double mb = m.building_mass();
        auto tuned = [&](Axis axis, double ratio, double f1) {
            // mass ratio relative to the first-mode modal mass (~ half the building for a uniform chain)
            const double mt = ratio * mb;
            const double mu = mt / (0.5 * mb);
            const double w = 2.0 * std::numbers::pi * f1 / (1.0 + mu);
            return TmdSpec{axis, mt, mt * w * w, TmdParams{}};
        };
        m.tmds = {tuned(Axis::X, 0.011, 0.5893), tuned(Axis::Y, 0.0055, 0.5718),
                  tuned(Axis::Y, 0.0055, 0.5718)};
        return m;
    }
};

/// State: [X (n), Vx (n), Y (n), Vy (n), then per TMD (u_abs, v_abs, z?)].
/// Input: reference wind force [N]; floor j receives F (z_j/H)^p split by
/// the wind angle.
class TmdFrame final : public DynamicSystem {
public:
    explicit TmdFrame(TmdFrameModel model) : model_(std::move(model)) {
        model_.validate();
        n_ = model_.stories;
        const Eigen::MatrixXd M = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(n_),
                                                            static_cast<Eigen::Index>(n_)) * model_.floor_mass;
        const Eigen::MatrixXd Kx = shear_chain_stiffness(std::vector<double>(n_, model_.stiffness_x));
        const Eigen::MatrixXd Ky = shear_chain_stiffness(std::vector<double>(n_, model_.stiffness_y));
        Kx_ = band(Kx);
        Ky_ = band(Ky);
        Cx_ = band(rayleigh_damping(M, Kx, model_.damping_ratio));
        Cy_ = band(rayleigh_damping(M, Ky, model_.damping_ratio));
        const double H = model_.story_height * static_cast<double>(n_);
        const double ang = model_.wind_angle_deg * std::numbers::pi / 180.0;
        for (std::size_t j = 0; j < n_; ++j) {
            const double s = std::pow(model_.story_height * static_cast<double>(j + 1) / H, model_.height_exponent);
            shape_x_.push_back(s * std::cos(ang));
            shape_y_.push_back(s * std::sin(ang));
        }
        std::size_t off = 4 * n_;
        for (const auto& t : model_.tmds) {
            offsets_.push_back(off);
            off += t.damping.hysteretic() ? 3 : 2;
        }
        size_ = off;
    }

    const TmdFrameModel& model() const { return model_; }
    std::size_t state_size() const override { return size_; }

    void derivative(std::span<const double> x, std::span<const double> in,
                    std::span<double> dx) const override {
        const double F = in[0];
        chain_rhs(x.subspan(0, 2 * n_), dx.subspan(0, 2 * n_), Kx_, Cx_, shape_x_, F);
        chain_rhs(x.subspan(2 * n_, 2 * n_), dx.subspan(2 * n_, 2 * n_), Ky_, Cy_, shape_y_, F);
        for (std::size_t t = 0; t < model_.tmds.size(); ++t) {
            const auto& spec = model_.tmds[t];
            const std::size_t o = offsets_[t];
            const std::size_t roof = spec.axis == Axis::X ? n_ - 1 : 3 * n_ - 1;
            const double u = x[o] - x[roof];
            const double ud = x[o + 1] - x[roof + n_];
            const double z = spec.damping.hysteretic() ? x[o + 2] : 0.0;
            const double f = spec.stiffness * u + 1e3 * tmd_force(spec.damping, ud, u, z);
            dx[o] = x[o + 1];
            dx[o + 1] = -f / spec.mass;
            dx[roof + n_] += f / model_.floor_mass;
            if (spec.damping.hysteretic()) dx[o + 2] = boucwen_rate(z, ud, spec.damping.shape());
        }
    }

    std::vector<std::string> output_names() const override {
        std::vector<std::string> names{"roof_x_abs_acc", "roof_y_abs_acc", "roof_x_disp", "roof_y_disp"};
        for (std::size_t t = 0; t < model_.tmds.size(); ++t) names.push_back("tmd" + std::to_string(t + 1) + "_stroke");
        return names;
    }

    double output(std::size_t c, std::span<const double> x, std::span<const double> dx,
                  std::span<const double>) const override {
        switch (c) {
        case 0: return dx[2 * n_ - 1];
        case 1: return dx[4 * n_ - 1];
        case 2: return x[n_ - 1];
        case 3: return x[3 * n_ - 1];
        default: {
            const std::size_t t = c - 4;
            const std::size_t roof = model_.tmds[t].axis == Axis::X ? n_ - 1 : 3 * n_ - 1;
            return x[offsets_[t]] - x[roof];
        }
        }
    }

private:
    // Tridiagonal bands (sub, diag, super) of a chain matrix.
    struct Band {
        std::vector<double> lo, di, up;
    };
    static Band band(const Eigen::MatrixXd& A) {
        const auto n = A.rows();
        Band b{std::vector<double>(static_cast<std::size_t>(n), 0.0), std::vector<double>(static_cast<std::size_t>(n)),
               std::vector<double>(static_cast<std::size_t>(n), 0.0)};
        for (Eigen::Index i = 0; i < n; ++i) {
            b.di[static_cast<std::size_t>(i)] = A(i, i);
            if (i > 0) b.lo[static_cast<std::size_t>(i)] = A(i, i - 1);
            if (i + 1 < n) b.up[static_cast<std::size_t>(i)] = A(i, i + 1);
        }
        return b;
    }

    void chain_rhs(std::span<const double> x, std::span<double> dx, const Band& K, const Band& C,
                   const std::vector<double>& shape, double F) const {
        for (std::size_t i = 0; i < n_; ++i) {
            double f = K.di[i] * x[i] + C.di[i] * x[n_ + i];
            if (i > 0) f += K.lo[i] * x[i - 1] + C.lo[i] * x[n_ + i - 1];
            if (i + 1 < n_) f += K.up[i] * x[i + 1] + C.up[i] * x[n_ + i + 1];
            dx[i] = x[n_ + i];
            dx[n_ + i] = (shape[i] * F - f) / model_.floor_mass;
        }
    }

    TmdFrameModel model_;
    std::size_t n_ = 0, size_ = 0;
    Band Kx_, Ky_, Cx_, Cy_;
    std::vector<double> shape_x_, shape_y_;
    std::vector<std::size_t> offsets_;
};

} // namespace falsikit
