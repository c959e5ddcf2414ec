#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "consensus/graph.hpp"
#include "consensus/stability.hpp"

namespace consensus {

/// State-space realization of one protocol over one topology:
/// xdot(t) = (I (x) F1) x(t) + (M (x) F2) x(t - tau), with the state
/// interleaved as [x1 v1 x2 v2 ...].
struct SystemRealization {
    ProtocolKind kind = ProtocolKind::NoSelfDelay;
    ProtocolParams params;
    Topology topology;
    Eigen::Matrix2d F1;
    Eigen::Matrix2d F2;
    Eigen::MatrixXd M;
};

SystemRealization build_system(const Topology& topology, const ProtocolParams& params);

/// Periodic two-topology switching: the first topology is active during the
/// initial duty_percent of every period, the second for the remainder.
struct SwitchingSchedule {
    double period = 1.0;
    double duty_percent = 50.0;
};

/// Index (0 = first, 1 = second) of the topology active at time t >= 0.
std::size_t topology_at(const SwitchingSchedule& schedule, double t);

/// One simulation request. topologies holds one entry for a fixed run or two
/// for a switching run; initial_state has 2n interleaved entries and also
/// serves as the constant history on [-tau, 0].
struct SimConfig {
    ProtocolParams params;
    double tau = 0.0;
    std::vector<Topology> topologies;
    std::optional<SwitchingSchedule> schedule;
    Eigen::VectorXd initial_state;
    double t_end = 1.0;
    std::optional<double> step;
};

/// Uniformly sampled run. step is the resolved step (the requested step
/// rounded down so the delay is an exact number of steps); diverged marks a
/// run stopped by the overflow guard, in which case the trace is partial.
struct Trace {
    Eigen::VectorXd times;
    Eigen::MatrixXd states;  // one row per sample
    std::vector<double> switch_times;
    double step = 0.0;
    bool diverged = false;
};

/// Fixed-step classical 4th-order integration of a linear constant-delay
/// system xdot = drift x(t) + delayed[active] x(t - tau). Delayed full-step
/// lookups hit stored samples exactly; half-step stage lookups interpolate
/// linearly between neighbors. The active delayed matrix follows the
/// schedule, quantized to the step grid.
Trace integrate_delayed_linear(const Eigen::MatrixXd& drift,
                               const std::vector<Eigen::MatrixXd>& delayed,
                               const SwitchingSchedule* schedule,
                               const Eigen::VectorXd& initial_state, double tau,
                               double t_end, double step_request);

/// Simulates the delayed multi-agent system described by the config.
Trace simulate(const SimConfig& config);

/// Default requested step: min(1e-3, tau / 20), or 1e-3 when tau == 0.
double default_step(double tau);

/// Reproducible initial state: positions uniform in [0, 10], zero
/// velocities, interleaved.
Eigen::VectorXd default_initial_state(int n, std::uint64_t seed);

}  // namespace consensus
