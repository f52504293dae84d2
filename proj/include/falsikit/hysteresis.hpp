#pragma once
// Restoring-force laws: uniaxial and biaxial Bouc-Wen, code-specified
// equivalent-linear isolator parameters, and TMD damping laws.

#include <cmath>
#include <string>
#include <utility>

#include "falsikit/errors.hpp"

namespace falsikit {

/// Shape parameters of the evolution law
///   dz/dt = A v - beta v |z|^n - gamma z |v| |z|^(n-1).
struct BoucWenShape {
    double A = 1.0;
    double beta = 0.5;
    double gamma = 0.5;
    double n_pow = 1.0;

    /// A = 2 beta = 2 gamma = k_pre / Q_y: equal loading and unloading
    /// stiffness, |z| saturates at 1.
    static BoucWenShape symmetric(double k_pre, double yield_force, double n_pow) {
        const double a = k_pre / yield_force;
        return {a, 0.5 * a, 0.5 * a, n_pow};
    }
};

namespace detail {

// |z|^n; large exponents go through exp(n log|z|) with |z| capped at 1 so
// a transient overshoot cannot overflow. 0^0 is 1.
inline double abs_pow(double z, double n) {
    const double a = std::fabs(z);
    if (n == 0.0) return 1.0;
    if (n == 1.0) return a;
    if (a == 0.0) return 0.0;
    if (n > 2.0) return std::exp(n * std::log(std::fmin(a, 1.0)));
    return std::pow(a, n);
}

} // namespace detail

inline double boucwen_rate(double z, double v, const BoucWenShape& s) {
    if (!std::isfinite(z) || !std::isfinite(v))
        throw DomainError("boucwen_rate: non-finite state");
    if (s.n_pow < 1.0) throw DomainError("boucwen_rate: n_pow must be >= 1");
    const double zn = detail::abs_pow(z, s.n_pow);
    const double zn1 = detail::abs_pow(z, s.n_pow - 1.0);
    return s.A * v - s.beta * v * zn - s.gamma * z * std::fabs(v) * zn1;
}

// ---------------------------------------------------------------------------
// Biaxial (Park-Wen type) coupling used for sliding bearings and steel
// dampers. Each equation is divided by the yield displacement of the
// *other* axis, as written in the source model; the two coincide whenever
// D_x == D_y. Steel dampers use D_x = D_y = 1.

struct BiaxialShape {
    double A = 1.0;
    double beta = 0.5;
    double gamma = 0.5;
    double D_x = 1.0;
    double D_y = 1.0;
};

struct BiaxialRates {
    double zx_dot = 0.0;
    double zy_dot = 0.0;
};

inline BiaxialRates biaxial_hysteresis_rates(double zx, double zy, double vx, double vy,
                                             const BiaxialShape& s) {
    if (!std::isfinite(zx) || !std::isfinite(zy) || !std::isfinite(vx) || !std::isfinite(vy))
        throw DomainError("biaxial_hysteresis_rates: non-finite state");
    if (!(s.D_x > 0.0) || !(s.D_y > 0.0))
        throw DomainError("biaxial_hysteresis_rates: yield displacements must be > 0");
    const double ax = std::fabs(vx * zx);
    const double ay = std::fabs(vy * zy);
    const double rx = s.A * vx - s.beta * ax * zx - s.gamma * vx * zx * zx - s.beta * ay * zx -
                      s.gamma * vy * zx * zy;
    const double ry = s.A * vy - s.beta * ay * zy - s.gamma * vy * zy * zy - s.beta * ax * zy -
                      s.gamma * vx * zy * zx;
    return {rx / s.D_y, ry / s.D_x};
}

// ---------------------------------------------------------------------------
// Equivalent-linear isolator models.

enum class EquivalentLinearCode { AASHTO, JPWRI, ModifiedAASHTO, Caltrans };

inline const char* to_string(EquivalentLinearCode c) {
    switch (c) {
    case EquivalentLinearCode::AASHTO: return "AASHTO";
    case EquivalentLinearCode::JPWRI: return "JPWRI";
    case EquivalentLinearCode::ModifiedAASHTO: return "ModifiedAASHTO";
    case EquivalentLinearCode::Caltrans: return "Caltrans";
    }
    return "?";
}

struct EquivalentLinear {
    double zeta_eq = 0.0;
    double k_eq = 0.0; // same units as k_pre
};

/// (zeta_eq, k_eq) from hardness ratio r_k = k_post/k_pre and shear
/// ductility ratio r_d = x_d/x_y.
inline EquivalentLinear equivalent_linear_params(EquivalentLinearCode code, double r_k, double r_d,
                                                 double k_pre) {
    if (!(r_k > 0.0 && r_k < 1.0))
        throw DomainError(std::string(to_string(code)) + ": r_k must lie in (0, 1)");
    if (!(k_pre > 0.0)) throw DomainError(std::string(to_string(code)) + ": k_pre must be > 0");

    if (code == EquivalentLinearCode::Caltrans) {
        if (!(r_d > 1.0)) throw DomainError("Caltrans: r_d must be > 1");
        const double zeta = 0.0587 * std::pow(r_d - 1.0, 0.371);
        const double g = 1.0 + std::log(1.0 + 0.13 * std::pow(r_d - 1.0, 1.137));
        return {zeta, k_pre / (g * g)};
    }

    const double rho = code == EquivalentLinearCode::JPWRI ? 0.7 * r_d : r_d;
    if (!(rho > 1.0))
        throw DomainError(std::string(to_string(code)) + ": effective ductility " +
                          std::to_string(rho) + " must be > 1");
    const double hard = 1.0 + r_k * (rho - 1.0);
    double zeta = 2.0 * (1.0 - r_k) * (1.0 - 1.0 / rho) / (M_PI * hard);
    double k_eq = k_pre / rho * hard;

    if (code == EquivalentLinearCode::ModifiedAASHTO) {
        const double denom = 6.0 - 10.0 * r_k;
        if (!(denom > 0.0)) throw DomainError("ModifiedAASHTO: r_k must be < 0.6");
        zeta *= std::pow(r_d, 0.58) / denom;
        const double f = 1.0 - 0.737 * (r_d - 1.0) / (r_d * r_d);
        k_eq /= f * f;
    }
    return {zeta, k_eq};
}

// ---------------------------------------------------------------------------
// TMD damping-force laws. Forces in kN, velocities in m/s, displacements in m.

enum class TmdLaw { Linear, CubicPolynomial, BoucWen, PowerLawTruth };

inline const char* to_string(TmdLaw l) {
    switch (l) {
    case TmdLaw::Linear: return "linear";
    case TmdLaw::CubicPolynomial: return "cubic";
    case TmdLaw::BoucWen: return "boucwen";
    case TmdLaw::PowerLawTruth: return "powerlaw";
    }
    return "?";
}

struct TmdParams {
    TmdLaw law = TmdLaw::Linear;
    double c1 = 0.0;          // kN s/m
    double c3 = 0.0;          // kN (s/m)^3
    double r_k = 0.1667;      // BoucWen: k_post / k_pre
    double Q_y = 0.0;         // BoucWen: yield force [kN]
    double k_pre = 0.0;       // BoucWen: pre-yield stiffness [kN/m]
    double power_coef = 0.0;  // PowerLawTruth: kN (s/m)^exponent
    double power_exp = 0.8;
    double c_lin = 0.0;       // PowerLawTruth: kN s/m

    bool hysteretic() const { return law == TmdLaw::BoucWen; }
    double k_post() const { return r_k * k_pre; }
    double q_y() const { return Q_y * (1.0 - r_k); }
    BoucWenShape shape() const { return BoucWenShape::symmetric(k_pre, Q_y, 1.0); }

    void validate() const {
        if (law == TmdLaw::BoucWen) {
            if (!(r_k > 0.0 && r_k < 1.0)) throw ConfigError("TMD Bouc-Wen: r_k must lie in (0, 1)");
            if (!(Q_y > 0.0) || !(k_pre > 0.0))
                throw ConfigError("TMD Bouc-Wen: Q_y and k_pre must be > 0");
        }
    }

    /// Truth-model laws for the x- and y-direction TMDs.
    static TmdParams power_law_x() { return {TmdLaw::PowerLawTruth, 0, 0, 0, 0, 0, 200.0, 0.8, 30.0}; }
    static TmdParams power_law_y() { return {TmdLaw::PowerLawTruth, 0, 0, 0, 0, 0, 100.0, 0.8, 15.0}; }
};

/// Device force [kN]; `z` is only read by the BoucWen law.
inline double tmd_force(const TmdParams& p, double u_dot, double u, double z = 0.0) {
    switch (p.law) {
    case TmdLaw::Linear: return p.c1 * u_dot;
    case TmdLaw::CubicPolynomial: return p.c3 * u_dot * u_dot * u_dot + p.c1 * u_dot;
    case TmdLaw::BoucWen: return p.q_y() * z + p.k_post() * u;
    case TmdLaw::PowerLawTruth: {
        const double mag = p.power_coef * std::pow(std::fabs(u_dot), p.power_exp);
        return (u_dot > 0.0 ? mag : (u_dot < 0.0 ? -mag : 0.0)) + p.c_lin * u_dot;
    }
    }
    return 0.0;
}

} // namespace falsikit
