#pragma once

// One simulation run: circuit + protocol text + span, started from rest.

#include <chrono>
#include <cstdint>
#include <string>

#include "mottsim/analysis.hpp"
#include "mottsim/circuit.hpp"
#include "mottsim/solver.hpp"
#include "mottsim/stimulus.hpp"

namespace mottsim {

struct RunSpec {
    std::string label;
    NeuronCircuit circuit;
    std::string protocol;
    double t_end = 0;
    double onset = 0;  ///< stimulus onset used for latency-type metrics
    SpikeDetection detection;
    std::uint64_t run_index = 0;
};

struct RunOutcome {
    std::string label;
    CircuitState initial;
    bool at_rest = true;  ///< false: the circuit self-oscillates at zero input and starts from its insulating point
    StimulusProgram program;
    SimulationTrace trace;
    SpikeTrain train;
    double onset = 0;
    double wall_seconds = 0;
};

/// Zero-input rest, or the insulating operating point when the circuit has no rest.
inline std::pair<CircuitState, bool> initial_state(const NeuronSystem& sys, InputMode mode,
                                                   const SolverConfig& cfg = {}) {
    try {
        return {resting_state(sys, mode, cfg), true};
    } catch (const NumericalError&) {
        return {insulating_operating_point(sys, mode), false};
    }
}

inline RunOutcome simulate(const RunSpec& spec, const SolverConfig& cfg = {}) {
    const auto start = std::chrono::steady_clock::now();
    RunOutcome out;
    out.label = spec.label;
    out.onset = spec.onset;
    out.program = parse_protocol(spec.protocol);
    const NeuronSystem sys(spec.circuit);
    std::tie(out.initial, out.at_rest) = initial_state(sys, out.program.mode, cfg);
    out.trace = integrate(sys, out.program, 0.0, spec.t_end, out.initial, cfg, spec.run_index);
    SpikeDetection det = spec.detection;
    if (!det.baseline && out.at_rest) det.baseline = out.initial.v_k;
    out.train = detect_spikes(out.trace, det);
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

}  // namespace mottsim
