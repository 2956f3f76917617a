#pragma once

// Thermally driven Mott-memristor compact model. A cylindrical conduction
// channel of radius r_ch and length l_ch contains a metallic core of
// normalized radius u; Joule heating grows the core, radial heat loss
// shrinks it.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "mottsim/error.hpp"

namespace mottsim {

inline constexpr double kStateFloor = 1e-4;
inline constexpr double kStateCeil = 0.9999;

struct MaterialParams {
    double cp = 0;       ///< volumetric heat capacity [J m^-3 K^-1]
    double dh_tr = 0;    ///< volumetric latent heat of the transition [J m^-3]
    double kappa = 0;    ///< insulating-phase thermal conductivity [W m^-1 K^-1]
    double rho_met = 0;  ///< metallic resistivity [Ohm m]
    double rho_ins = 0;  ///< insulating resistivity [Ohm m]
    double dT = 0;       ///< temperature rise needed to reach T_C [K]
    std::string name;

    void validate() const {
        if (!(cp > 0 && dh_tr > 0 && kappa > 0 && rho_met > 0 && rho_ins > 0 && dT > 0))
            throw ConfigError("material '" + name + "': all parameters must be positive");
        if (!(rho_ins > rho_met))
            throw ConfigError("material '" + name + "': rho_ins must exceed rho_met");
    }
};

struct DeviceGeometry {
    double r_ch = 0;                 ///< channel radius [m]
    double l_ch = 0;                 ///< channel length [m]
    double r_e = 0;                  ///< series electrode resistance [Ohm]
    std::optional<double> r_shunt;   ///< parallel leakage [Ohm]; empty = open

    void validate() const {
        if (!(r_ch > 0 && l_ch > 0)) throw ConfigError("device geometry: r_ch and l_ch must be positive");
        if (!(r_e >= 0)) throw ConfigError("device geometry: r_e must be non-negative");
        if (r_shunt && !(*r_shunt > 0)) throw ConfigError("device geometry: r_shunt must be positive");
    }

    [[nodiscard]] double volume() const { return std::numbers::pi * r_ch * r_ch * l_ch; }
};

struct Device {
    MaterialParams mat;
    DeviceGeometry geo;

    void validate() const {
        mat.validate();
        geo.validate();
    }
};

namespace presets {

/// VO2 parameters used for all circuit simulations.
inline MaterialParams vo2() { return {3.3e6, 2.35e8, 3.5, 3e-6, 1e-2, 43.0, "vo2"}; }

/// VO2 energetics row of the NbO2/VO2 free-energy comparison (40 K rise).
inline MaterialParams vo2_energetics() { return {3.3e6, 2.35e8, 3.5, 3e-6, 1e-2, 40.0, "vo2-table1"}; }

/// NbO2 energetics. Transport and thermal constants are not available for
/// NbO2 here and are borrowed from VO2; only energy and relative switching
/// speed are meaningful for this preset.
inline MaterialParams nbo2() { return {2.6e6, 1.6e8, 3.5, 3e-6, 1e-2, 800.0, "nbo2"}; }

/// 56 nm x 100 nm channel of the 100 x 100 nm^2 crossbar, with electrode and
/// leakage parasitics at the midpoints of their measured ranges.
inline DeviceGeometry crossbar_100nm() { return {56e-9, 100e-9, 325.0, 15e3}; }

inline DeviceGeometry bare(double r_ch, double l_ch) { return {r_ch, l_ch, 0.0, std::nullopt}; }

}  // namespace presets

/// Precomputed channel coefficients. The `*_at` members take u without range
/// checks (clamped to [kStateFloor, kStateCeil]) and are what the ODE
/// right-hand side uses; the free functions below add domain checking.
class MottChannel {
public:
    MottChannel() = default;

    MottChannel(const MaterialParams& mat, const DeviceGeometry& geo)
        : r_ins_(mat.rho_ins * geo.l_ch / (std::numbers::pi * geo.r_ch * geo.r_ch)),
          ratio_m1_(mat.rho_ins / mat.rho_met - 1.0),
          gamma_coef_(2.0 * std::numbers::pi * geo.l_ch * mat.kappa),
          volume_(geo.volume()),
          cp_dT_(mat.cp * mat.dT),
          dh_tr_(mat.dh_tr),
          dT_(mat.dT) {}

    explicit MottChannel(const Device& d) : MottChannel(d.mat, d.geo) {}

    static double clamp(double u) { return std::clamp(u, kStateFloor, kStateCeil); }

    [[nodiscard]] double resistance_at(double u) const {
        u = clamp(u);
        return r_ins_ / (1.0 + ratio_m1_ * u * u);
    }

    [[nodiscard]] double conductance_at(double u) const {
        u = clamp(u);
        return gamma_coef_ / std::log(1.0 / u);
    }

    [[nodiscard]] double heat_flux_at(double u) const { return conductance_at(u) * dT_; }

    [[nodiscard]] double enthalpy_derivative_at(double u) const {
        u = clamp(u);
        const double lu = std::log(u);
        const double sensible = cp_dT_ * (1.0 - u * u + 2.0 * u * u * lu) / (2.0 * u * lu * lu);
        return volume_ * (sensible + 2.0 * dh_tr_ * u);
    }

    /// du/dt for channel current i.
    [[nodiscard]] double rate_at(double u, double i) const {
        return (i * i * resistance_at(u) - heat_flux_at(u)) / enthalpy_derivative_at(u);
    }

    [[nodiscard]] double insulating_resistance() const { return r_ins_; }
    [[nodiscard]] double metallic_resistance() const { return r_ins_ / (1.0 + ratio_m1_); }

private:
    double r_ins_ = 0;
    double ratio_m1_ = 0;
    double gamma_coef_ = 0;
    double volume_ = 0;
    double cp_dT_ = 0;
    double dh_tr_ = 0;
    double dT_ = 0;
};

namespace detail {
inline void check_state(double u) {
    if (!(u >= kStateFloor && u <= kStateCeil))
        throw std::domain_error("device state u=" + std::to_string(u) + " outside [1e-4, 0.9999]");
}
}  // namespace detail

inline double channel_resistance(double u, const MaterialParams& mat, const DeviceGeometry& geo) {
    detail::check_state(u);
    return MottChannel(mat, geo).resistance_at(u);
}

inline double thermal_conductance(double u, const MaterialParams& mat, const DeviceGeometry& geo) {
    if (!(u < 1.0)) throw std::domain_error("thermal conductance diverges at u >= 1");
    detail::check_state(u);
    return MottChannel(mat, geo).conductance_at(u);
}

inline double enthalpy_derivative(double u, const MaterialParams& mat, const DeviceGeometry& geo) {
    detail::check_state(u);
    return MottChannel(mat, geo).enthalpy_derivative_at(u);
}

inline double state_derivative(double u, double i, const MaterialParams& mat, const DeviceGeometry& geo) {
    detail::check_state(u);
    if (!std::isfinite(i)) throw std::domain_error("channel current must be finite");
    return MottChannel(mat, geo).rate_at(u, i);
}

/// Sensible plus latent heat needed to take the whole channel through the transition.
inline double transition_energy(const MaterialParams& mat, const DeviceGeometry& geo) {
    return (mat.cp * mat.dT + mat.dh_tr) * geo.volume();
}

/// Two-terminal branch: r_e in series with (R_ch(u) || r_shunt).
class DeviceBranch {
public:
    DeviceBranch() = default;
    explicit DeviceBranch(const Device& d)
        : channel_(d), r_e_(d.geo.r_e), g_shunt_(d.geo.r_shunt ? 1.0 / *d.geo.r_shunt : 0.0) {}

    [[nodiscard]] const MottChannel& channel() const { return channel_; }

    /// Resistance seen between the two terminals.
    [[nodiscard]] double resistance(double u) const {
        const double g_inner = 1.0 / channel_.resistance_at(u) + g_shunt_;
        return r_e_ + 1.0 / g_inner;
    }

    /// Fraction of the terminal current that flows through the channel.
    [[nodiscard]] double channel_fraction(double u) const {
        const double g_ch = 1.0 / channel_.resistance_at(u);
        return g_ch / (g_ch + g_shunt_);
    }

    [[nodiscard]] double series_resistance() const { return r_e_; }
    [[nodiscard]] double shunt_conductance() const { return g_shunt_; }

private:
    MottChannel channel_;
    double r_e_ = 0;
    double g_shunt_ = 0;
};

}  // namespace mottsim
