#pragma once
// Lumped-mass shear buildings: fixed-base chains and base-isolated chains
// with hysteretic or equivalent-linear isolation layers. SI units
// throughout (kg, N/m, N s/m, N).

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "falsikit/errors.hpp"
#include "falsikit/hysteresis.hpp"
#include "falsikit/modal.hpp"
#include "falsikit/simulate.hpp"

namespace falsikit {

inline constexpr double standard_gravity = 9.80665;

struct ShearBuildingModel {
    std::vector<double> story_masses;      // kg, floor 1 first
    std::vector<double> story_stiffnesses; // N/m, story 1 ties floor 1 to the base
    std::size_t damping_mode_i = 1;        // fixed-base modes calibrated by Rayleigh damping
    std::size_t damping_mode_j = 2;
    double damping_ratio = 0.03;
    double base_mass = 0.0; // kg, isolated systems only

    std::size_t stories() const { return story_masses.size(); }

    void validate() const {
        if (story_masses.empty()) throw ConfigError("building: no stories");
        if (story_masses.size() != story_stiffnesses.size())
            throw ConfigError("building: story mass and stiffness counts differ");
        for (double m : story_masses)
            if (!(m > 0.0)) throw ConfigError("building: story masses must be > 0");
        for (double k : story_stiffnesses)
            if (!(k > 0.0)) throw ConfigError("building: story stiffnesses must be > 0");
        if (!(damping_ratio >= 0.0)) throw ConfigError("building: damping ratio must be >= 0");
        if (base_mass < 0.0) throw ConfigError("building: base mass must be >= 0");
    }

    double superstructure_mass() const {
        double m = 0.0;
        for (double v : story_masses) m += v;
        return m;
    }
    double total_mass() const { return superstructure_mass() + base_mass; }

    Eigen::MatrixXd mass_matrix() const {
        Eigen::VectorXd d(static_cast<Eigen::Index>(stories()));
        for (std::size_t i = 0; i < stories(); ++i) d(static_cast<Eigen::Index>(i)) = story_masses[i];
        return d.asDiagonal();
    }
    Eigen::MatrixXd stiffness_matrix() const { return shear_chain_stiffness(story_stiffnesses); }
    Eigen::MatrixXd damping_matrix() const {
        const std::size_t n = stories();
        const std::size_t mi = std::min(damping_mode_i, n), mj = std::min(damping_mode_j, n);
        if (n > 1 && mi == mj) throw ConfigError("building: Rayleigh modes must differ");
        return rayleigh_damping(mass_matrix(), stiffness_matrix(), damping_ratio, mi, mj);
    }

    /// Three 300 Mg floors on 40 MN/m stories over a 500 Mg base, 3% damping.
    static ShearBuildingModel example_four_dof() {
        return {{300e3, 300e3, 300e3}, {40e6, 40e6, 40e6}, 1, 2, 0.03, 500e3};
    }
};

namespace detail {

// Row-major copy of a small dense matrix.
inline std::vector<double> to_row_major(const Eigen::MatrixXd& A) {
    std::vector<double> out(static_cast<std::size_t>(A.size()));
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out[static_cast<std::size_t>(i * A.cols() + j)] = A(i, j);
    return out;
}

} // namespace detail

/// Fixed-base chain under ground acceleration. State [X (n), V (n)], X relative
/// to the ground.
class FixedBaseBuilding final : public DynamicSystem {
public:
    explicit FixedBaseBuilding(ShearBuildingModel model) : model_(std::move(model)) {
        model_.validate();
        n_ = model_.stories();
        K_ = detail::to_row_major(model_.stiffness_matrix());
        C_ = detail::to_row_major(model_.damping_matrix());
    }

    const ShearBuildingModel& model() const { return model_; }
    std::size_t state_size() const override { return 2 * n_; }

    void derivative(std::span<const double> x, std::span<const double> in,
                    std::span<double> dx) const override {
        const double ag = in[0];
        for (std::size_t i = 0; i < n_; ++i) {
            double f = 0.0;
            for (std::size_t j = 0; j < n_; ++j) f += K_[i * n_ + j] * x[j] + C_[i * n_ + j] * x[n_ + j];
            dx[i] = x[n_ + i];
            dx[n_ + i] = -ag - f / model_.story_masses[i];
        }
    }

    std::vector<std::string> output_names() const override {
        std::vector<std::string> names{"roof_abs_acc", "roof_disp"};
        for (std::size_t i = 0; i < n_; ++i) names.push_back("floor" + std::to_string(i + 1) + "_abs_acc");
        return names;
    }

    double output(std::size_t c, std::span<const double> x, std::span<const double> dx,
                  std::span<const double> in) const override {
        if (c == 0) return dx[2 * n_ - 1] + in[0];
        if (c == 1) return x[n_ - 1];
        return dx[n_ + (c - 2)] + in[0];
    }

    /// Total mechanical energy relative to the ground.
    double energy(std::span<const double> x) const {
        double e = 0.0;
        for (std::size_t i = 0; i < n_; ++i) {
            e += 0.5 * model_.story_masses[i] * x[n_ + i] * x[n_ + i];
            for (std::size_t j = 0; j < n_; ++j) e += 0.5 * x[i] * K_[i * n_ + j] * x[j];
        }
        return e;
    }

private:
    ShearBuildingModel model_;
    std::size_t n_ = 0;
    std::vector<double> K_, C_;
};

// ---------------------------------------------------------------------------

enum class IsolatorVariant { BoucWen, Bilinear, AASHTO, JPWRI, ModifiedAASHTO, Caltrans };

inline const char* to_string(IsolatorVariant v) {
    switch (v) {
    case IsolatorVariant::BoucWen: return "BoucWen";
    case IsolatorVariant::Bilinear: return "Bilinear";
    case IsolatorVariant::AASHTO: return "AASHTO";
    case IsolatorVariant::JPWRI: return "JPWRI";
    case IsolatorVariant::ModifiedAASHTO: return "ModifiedAASHTO";
    case IsolatorVariant::Caltrans: return "Caltrans";
    }
    return "?";
}

inline EquivalentLinearCode linear_code(IsolatorVariant v) {
    switch (v) {
    case IsolatorVariant::AASHTO: return EquivalentLinearCode::AASHTO;
    case IsolatorVariant::JPWRI: return EquivalentLinearCode::JPWRI;
    case IsolatorVariant::ModifiedAASHTO: return EquivalentLinearCode::ModifiedAASHTO;
    case IsolatorVariant::Caltrans: return EquivalentLinearCode::Caltrans;
    default: throw ConfigError(std::string("isolator variant ") + to_string(v) + " is not linear");
    }
}

/// Isolation layer parameters (SI). Hysteretic variants use Q_y, linear
/// variants r_d.
struct IsolatorParams {
    IsolatorVariant variant = IsolatorVariant::BoucWen;
    double k_post = 0.0; // N/m
    double c_b = 0.0;    // N s/m
    double r_k = 0.1667; // k_post / k_pre
    double Q_y = 0.0;    // N
    double r_d = 2.5;

    bool hysteretic() const {
        return variant == IsolatorVariant::BoucWen || variant == IsolatorVariant::Bilinear;
    }
    double n_pow() const { return variant == IsolatorVariant::Bilinear ? 100.0 : 1.0; }
    double k_pre() const { return k_post / r_k; }
    double yield_displacement() const { return Q_y / k_pre(); }
    double q_y() const { return Q_y * (1.0 - r_k); }
    BoucWenShape shape() const { return BoucWenShape::symmetric(k_pre(), Q_y, n_pow()); }

    void validate() const {
        const std::string v = to_string(variant);
        if (!(k_post > 0.0)) throw ConfigError(v + " isolator: k_post must be > 0");
        if (!(c_b >= 0.0)) throw ConfigError(v + " isolator: c_b must be >= 0");
        if (!(r_k > 0.0 && r_k < 1.0)) throw ConfigError(v + " isolator: r_k must lie in (0, 1)");
        if (hysteretic() && !(Q_y > 0.0)) throw ConfigError(v + " isolator: Q_y must be > 0");
        if (!hysteretic() && !(r_d > 1.0)) throw ConfigError(v + " isolator: r_d must be > 1");
    }

    /// Hysteretic restoring force q_y z + k_post x (excluding viscous c_b).
    double hysteretic_force(double x, double z) const { return q_y() * z + k_post * x; }
};

/// Base-isolated shear building. State [X_s (n), V_s (n), x_b, v_b, z?], all
/// displacements relative to the ground; z is present for hysteretic layers.
class IsolatedBuilding final : public DynamicSystem {
public:
    IsolatedBuilding(ShearBuildingModel building, IsolatorParams isolator)
        : model_(std::move(building)), iso_(isolator) {
        model_.validate();
        if (!(model_.base_mass > 0.0)) throw ConfigError("isolated building: base mass must be > 0");
        iso_.validate();
        n_ = model_.stories();
        K_ = detail::to_row_major(model_.stiffness_matrix());
        C_ = detail::to_row_major(model_.damping_matrix());
        if (iso_.hysteretic()) {
            shape_ = iso_.shape();
            c_total_ = iso_.c_b;
            k_lin_ = iso_.k_post;
        } else {
            const auto eq = equivalent_linear_params(linear_code(iso_.variant), iso_.r_k, iso_.r_d, iso_.k_pre());
            k_lin_ = eq.k_eq;
            c_total_ = iso_.c_b + 2.0 * eq.zeta_eq * std::sqrt(eq.k_eq * model_.total_mass());
        }
    }

    const IsolatorParams& isolator() const { return iso_; }
    double linear_stiffness() const { return k_lin_; }
    double viscous_coefficient() const { return c_total_; }

    std::size_t state_size() const override { return 2 * n_ + 2 + (iso_.hysteretic() ? 1 : 0); }

    /// The z equation linearized near saturation has rate ~ n A |v|; keep
    /// RK4 inside its stability interval for |v| up to 1 m/s.
    double max_stable_step() const override {
        if (!iso_.hysteretic() || iso_.n_pow() <= 2.0) return std::numeric_limits<double>::infinity();
        return 2.0 / (iso_.n_pow() * shape_.A);
    }

    double isolator_force(std::span<const double> x) const {
        const double xb = x[2 * n_], vb = x[2 * n_ + 1];
        double f = c_total_ * vb + k_lin_ * xb;
        if (iso_.hysteretic()) f += iso_.q_y() * x[2 * n_ + 2];
        return f;
    }

    void derivative(std::span<const double> x, std::span<const double> in,
                    std::span<double> dx) const override {
        const double ag = in[0];
        const double xb = x[2 * n_], vb = x[2 * n_ + 1];
        double base_pull = 0.0; // 1^T (C (V - vb) + K (X - xb))
        for (std::size_t i = 0; i < n_; ++i) {
            double f = 0.0;
            for (std::size_t j = 0; j < n_; ++j)
                f += K_[i * n_ + j] * (x[j] - xb) + C_[i * n_ + j] * (x[n_ + j] - vb);
            dx[i] = x[n_ + i];
            dx[n_ + i] = -ag - f / model_.story_masses[i];
            base_pull += f;
        }
        dx[2 * n_] = vb;
        dx[2 * n_ + 1] = -ag + (base_pull - isolator_force(x)) / model_.base_mass;
        if (iso_.hysteretic()) dx[2 * n_ + 2] = boucwen_rate(x[2 * n_ + 2], vb, shape_);
    }

    std::vector<std::string> output_names() const override {
        std::vector<std::string> names{"base_abs_acc", "base_disp", "isolator_force", "roof_abs_acc",
                                       "hysteretic_z"};
        for (std::size_t i = 0; i < n_; ++i) names.push_back("floor" + std::to_string(i + 1) + "_abs_acc");
        return names;
    }

    double output(std::size_t c, std::span<const double> x, std::span<const double> dx,
                  std::span<const double> in) const override {
        switch (c) {
        case 0: return dx[2 * n_ + 1] + in[0];
        case 1: return x[2 * n_];
        case 2: return isolator_force(x);
        case 3: return dx[2 * n_ - 1] + in[0];
        case 4: return iso_.hysteretic() ? x[2 * n_ + 2] : 0.0;
        default: return dx[n_ + (c - 5)] + in[0];
        }
    }

private:
    ShearBuildingModel model_;
    IsolatorParams iso_;
    std::size_t n_ = 0;
    std::vector<double> K_, C_;
    BoucWenShape shape_{};
    double c_total_ = 0.0;
    double k_lin_ = 0.0;
};

} // namespace falsikit
