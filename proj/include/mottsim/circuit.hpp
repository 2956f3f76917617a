#pragma once

// Neuron circuits built from two oppositely biased Mott-memristor branches.
//
//   input --[R_L1 | C_in | C_in||R_L1]-- A --R_L2-- B
//                                        |          |
//                                   C1 --+-- X1     +-- X2 -- C2
//                                        |    |     |    |
//                                       gnd  -E1   gnd  +E2
//
// A carries V_Na (Na+-like stage), B carries V_K (K+-like stage, the output).
// Topologies with C_in add the input node (v_aux), fed through the source
// resistance in voltage clamp. The Pearson-Anson oscillator is a single
// stage: V_dc --R_L-- O, with C and the device from O to ground.

#include <Eigen/Core>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "mottsim/device.hpp"
#include "mottsim/error.hpp"

namespace mottsim {

enum class Topology { Tonic, Phasic, Mixed, PearsonAnson };
enum class InputMode { Current, Voltage };

inline std::string_view to_string(Topology t) {
    switch (t) {
        case Topology::Tonic: return "tonic";
        case Topology::Phasic: return "phasic";
        case Topology::Mixed: return "mixed";
        case Topology::PearsonAnson: return "pearson_anson";
    }
    return "?";
}

inline Topology topology_from_string(std::string_view s) {
    if (s == "tonic") return Topology::Tonic;
    if (s == "phasic") return Topology::Phasic;
    if (s == "mixed") return Topology::Mixed;
    if (s == "pearson_anson" || s == "pearson-anson") return Topology::PearsonAnson;
    throw ConfigError("unknown topology '" + std::string(s) + "'");
}

inline std::string_view to_string(InputMode m) { return m == InputMode::Current ? "current" : "voltage"; }

struct NeuronCircuit {
    Topology topology = Topology::Tonic;
    std::optional<double> rl1;  ///< input load resistance; the load resistor R_L for pearson_anson
    double rl2 = 0;
    double c1 = 0;  ///< for pearson_anson: the oscillator capacitor
    double c2 = 0;
    std::optional<double> cin;
    double e1 = 0;  ///< magnitude of the negative rail on X1; V_dc for pearson_anson
    double e2 = 0;  ///< magnitude of the positive rail on X2
    Device dev1{presets::vo2(), presets::crossbar_100nm()};
    Device dev2{presets::vo2(), presets::crossbar_100nm()};
    double c_stray = 0;
    double r_source = 50.0;  ///< output resistance of a voltage stimulus driving C_in

    [[nodiscard]] double c1_eff() const { return c1 + c_stray; }
    [[nodiscard]] double c2_eff() const { return c2 + c_stray; }
    [[nodiscard]] bool has_aux_node() const {
        return topology == Topology::Phasic || topology == Topology::Mixed;
    }

    void validate() const {
        dev1.validate();
        if (!(e1 >= 0 && e2 >= 0)) throw ConfigError("bias magnitudes e1, e2 must be non-negative");
        if (!(c_stray >= 0)) throw ConfigError("c_stray must be non-negative");
        if (topology == Topology::PearsonAnson) {
            if (!rl1 || !(*rl1 > 0)) throw ConfigError("pearson_anson needs a positive load resistor rl1");
            if (!(c1_eff() > 0)) throw ConfigError("pearson_anson needs a positive capacitor c1");
            return;
        }
        dev2.validate();
        if (!(rl2 > 0)) throw ConfigError("rl2 must be positive");
        if (!(c1_eff() > 0 && c2_eff() > 0)) throw ConfigError("c1 + c_stray and c2 + c_stray must be positive");
        switch (topology) {
            case Topology::Tonic:
                if (cin) throw ConfigError("tonic topology takes no cin");
                if (rl1 && !(*rl1 >= 0)) throw ConfigError("rl1 must be non-negative");
                break;
            case Topology::Phasic:
                if (!cin || !(*cin > 0)) throw ConfigError("phasic topology needs a positive cin");
                if (rl1) throw ConfigError("phasic topology takes no rl1 (use mixed)");
                break;
            case Topology::Mixed:
                if (!cin || !(*cin > 0)) throw ConfigError("mixed topology needs a positive cin");
                if (!rl1 || !(*rl1 > 0)) throw ConfigError("mixed topology needs a positive rl1");
                break;
            default: break;
        }
        if (has_aux_node() && !(r_source > 0)) throw ConfigError("r_source must be positive");
    }
};

inline constexpr int kStateCapacity = 5;
using StateVector = Eigen::Matrix<double, kStateCapacity, 1>;
using JacobianMatrix = Eigen::Matrix<double, kStateCapacity, kStateCapacity>;

/// Fixed slots in StateVector. pearson_anson uses kVNa for the oscillator
/// node and kU1 for its device.
enum StateIndex : int { kVNa = 0, kVK = 1, kU1 = 2, kU2 = 3, kVAux = 4 };

inline bool is_device_state(int k) { return k == kU1 || k == kU2; }

struct CircuitState {
    double u1 = kStateFloor;
    double u2 = kStateFloor;
    double v_na = 0;
    double v_k = 0;
    std::optional<double> v_aux;

    [[nodiscard]] StateVector to_vector() const {
        StateVector x = StateVector::Zero();
        x[kVNa] = v_na;
        x[kVK] = v_k;
        x[kU1] = u1;
        x[kU2] = u2;
        x[kVAux] = v_aux.value_or(0.0);
        return x;
    }

    static CircuitState from_vector(const StateVector& x, bool has_aux) {
        CircuitState s;
        s.v_na = x[kVNa];
        s.v_k = x[kVK];
        s.u1 = x[kU1];
        s.u2 = x[kU2];
        if (has_aux) s.v_aux = x[kVAux];
        return s;
    }
};

/// Instantaneous electrical quantities at one state.
struct Observables {
    double i1 = 0;  ///< X1 channel current (filament only)
    double i2 = 0;  ///< X2 channel current; sign follows v2 = V_K - E2
    double branch1 = 0;  ///< terminal current A -> -E1 rail
    double branch2 = 0;  ///< terminal current +E2 rail -> B
    double supply_power = 0;
    double input_power = 0;
    double dissipation = 0;  ///< all resistive losses, channels included
    double stored_energy = 0;
    double input_current = 0;  ///< current delivered by the stimulus source
};

/// Assembled ODE system. Immutable; derivative evaluation is pure.
class NeuronSystem {
public:
    explicit NeuronSystem(NeuronCircuit circuit) : circuit_(std::move(circuit)) {
        circuit_.validate();
        b1_ = DeviceBranch(circuit_.dev1);
        if (circuit_.topology != Topology::PearsonAnson) b2_ = DeviceBranch(circuit_.dev2);
        inv_c1_ = 1.0 / circuit_.c1_eff();
        inv_c2_ = circuit_.topology == Topology::PearsonAnson ? 0.0 : 1.0 / circuit_.c2_eff();
        g_l2_ = circuit_.rl2 > 0 ? 1.0 / circuit_.rl2 : 0.0;
        g_l1_ = circuit_.rl1 && *circuit_.rl1 > 0 ? 1.0 / *circuit_.rl1 : 0.0;
        inv_cin_ = circuit_.cin ? 1.0 / *circuit_.cin : 0.0;
    }

    [[nodiscard]] const NeuronCircuit& circuit() const { return circuit_; }
    [[nodiscard]] Topology topology() const { return circuit_.topology; }
    [[nodiscard]] const DeviceBranch& branch1() const { return b1_; }
    [[nodiscard]] const DeviceBranch& branch2() const { return b2_; }

    [[nodiscard]] int dim() const {
        switch (circuit_.topology) {
            case Topology::PearsonAnson: return 2;
            case Topology::Tonic: return 4;
            default: return 5;
        }
    }

    /// Slots of StateVector that carry state for this topology.
    [[nodiscard]] bool active(int k) const {
        switch (circuit_.topology) {
            case Topology::PearsonAnson: return k == kVNa || k == kU1;
            case Topology::Tonic: return k != kVAux;
            default: return true;
        }
    }

    void check_mode(InputMode mode) const {
        if (mode != InputMode::Voltage) return;
        if (circuit_.topology == Topology::PearsonAnson)
            throw ConfigError("pearson_anson oscillator supports current-clamp input only");
        if (circuit_.topology == Topology::Tonic && !(g_l1_ > 0))
            throw ConfigError("voltage clamp on a tonic neuron needs rl1 > 0");
    }

    [[nodiscard]] StateVector derivative(const StateVector& x, double input, InputMode mode) const {
        StateVector dx = StateVector::Zero();
        if (circuit_.topology == Topology::PearsonAnson) {
            const double v = x[kVNa];
            const double ib = v / b1_.resistance(x[kU1]);
            const double ich = ib * b1_.channel_fraction(x[kU1]);
            dx[kVNa] = inv_c1_ * ((circuit_.e1 - v) * g_l1_ - ib + (mode == InputMode::Current ? input : 0.0));
            dx[kU1] = b1_.channel().rate_at(x[kU1], ich);
            return dx;
        }
        const double v_na = x[kVNa], v_k = x[kVK];
        const double ib1 = (v_na + circuit_.e1) / b1_.resistance(x[kU1]);
        const double ib2 = (v_k - circuit_.e2) / b2_.resistance(x[kU2]);
        const double ic = (v_na - v_k) * g_l2_;
        const double i_src = source_current(x, input, mode);
        dx[kVNa] = inv_c1_ * (i_src - ib1 - ic);
        dx[kVK] = inv_c2_ * (ic - ib2);
        dx[kU1] = b1_.channel().rate_at(x[kU1], ib1 * b1_.channel_fraction(x[kU1]));
        dx[kU2] = b2_.channel().rate_at(x[kU2], ib2 * b2_.channel_fraction(x[kU2]));
        if (circuit_.has_aux_node()) {
            const double i_l1 = (x[kVAux] - v_na) * g_l1_;
            dx[kVAux] = dx[kVNa] + inv_cin_ * (i_src - i_l1);
        }
        return dx;
    }

    [[nodiscard]] Observables observe(const StateVector& x, double input, InputMode mode) const {
        Observables o;
        const auto& c = circuit_;
        if (c.topology == Topology::PearsonAnson) {
            const double v = x[kVNa];
            const double ib = v / b1_.resistance(x[kU1]);
            const double i_l = (c.e1 - v) * g_l1_;
            o.branch1 = ib;
            o.i1 = ib * b1_.channel_fraction(x[kU1]);
            o.supply_power = c.e1 * i_l;
            o.input_current = mode == InputMode::Current ? input : 0.0;
            o.input_power = o.input_current * v;
            o.dissipation = i_l * i_l * c.rl1.value_or(0.0) + ib * v;
            o.stored_energy = 0.5 * c.c1_eff() * v * v;
            return o;
        }
        const double v_na = x[kVNa], v_k = x[kVK];
        const double ib1 = (v_na + c.e1) / b1_.resistance(x[kU1]);
        const double ib2 = (v_k - c.e2) / b2_.resistance(x[kU2]);
        const double ic = (v_na - v_k) * g_l2_;
        const double i_src = source_current(x, input, mode);
        o.branch1 = ib1;
        o.branch2 = -ib2;
        o.i1 = ib1 * b1_.channel_fraction(x[kU1]);
        o.i2 = ib2 * b2_.channel_fraction(x[kU2]);
        o.supply_power = c.e1 * ib1 + c.e2 * (-ib2);
        o.input_current = i_src;
        // device branches dissipate v_branch * i_branch (electrode, shunt and channel together)
        o.dissipation = ib1 * (v_na + c.e1) + ib2 * (v_k - c.e2) + ic * (v_na - v_k);
        o.stored_energy = 0.5 * c.c1_eff() * v_na * v_na + 0.5 * c.c2_eff() * v_k * v_k;
        if (c.has_aux_node()) {
            const double v_aux = x[kVAux];
            const double w = v_aux - v_na;
            o.stored_energy += 0.5 * *c.cin * w * w;
            o.dissipation += w * w * g_l1_;
            if (mode == InputMode::Voltage) {
                o.input_power = input * i_src;
                o.dissipation += i_src * i_src * c.r_source;
            } else {
                o.input_power = input * v_aux;
            }
        } else if (mode == InputMode::Voltage) {
            o.input_power = input * i_src;
            o.dissipation += i_src * i_src * *c.rl1;
        } else {
            o.input_power = input * v_na;
        }
        return o;
    }

    /// d(derivative)/d(input), the input is affine in every topology.
    [[nodiscard]] StateVector input_sensitivity(const StateVector& x, InputMode mode) const {
        return derivative(x, 1.0, mode) - derivative(x, 0.0, mode);
    }

private:
    [[nodiscard]] double source_current(const StateVector& x, double input, InputMode mode) const {
        if (mode == InputMode::Current) return input;
        if (circuit_.has_aux_node()) return (input - x[kVAux]) / circuit_.r_source;
        return (input - x[kVNa]) * g_l1_;
    }

    NeuronCircuit circuit_;
    DeviceBranch b1_, b2_;
    double inv_c1_ = 0, inv_c2_ = 0, g_l2_ = 0, g_l1_ = 0, inv_cin_ = 0;
};

inline NeuronSystem assemble(const NeuronCircuit& circuit) { return NeuronSystem(circuit); }

inline StateVector rhs(const NeuronSystem& sys, const CircuitState& state, double input, InputMode mode) {
    const StateVector x = state.to_vector();
    const StateVector dx = sys.derivative(x, input, mode);
    for (int k = 0; k < kStateCapacity; ++k)
        if (!std::isfinite(dx[k]))
            throw NumericalError("non-finite derivative at state (v_na=" + std::to_string(state.v_na) +
                                     ", v_k=" + std::to_string(state.v_k) + ", u1=" + std::to_string(state.u1) +
                                     ", u2=" + std::to_string(state.u2) + ")",
                                 0.0);
    return dx;
}

inline double supply_power(const NeuronSystem& sys, const CircuitState& state, double input, InputMode mode) {
    return sys.observe(state.to_vector(), input, mode).supply_power;
}

}  // namespace mottsim
