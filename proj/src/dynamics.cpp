#include "consensus/dynamics.hpp"

#include <cmath>
#include <random>

#include "consensus/errors.hpp"

namespace consensus {

namespace {

constexpr double kOverflowGuard = 1e12;
constexpr long long kMaxSteps = 20'000'000;

void require_connected_for_build(const Topology& topology) {
    if (!is_connected(topology))
        throw ConnectivityError("topology is not connected");
}

Eigen::MatrixXd kron_with_2x2(const Eigen::MatrixXd& m, const Eigen::Matrix2d& f) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * m.rows(), 2 * m.cols());
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j)
            if (m(i, j) != 0.0) out.block<2, 2>(2 * i, 2 * j) = m(i, j) * f;
    return out;
}

// Snap near-integer ratios before rounding up so that requested steps which
// already divide the value exactly are kept.
long long grid_count(double value, double step, const char* what) {
    const double ratio = value / step;
    double r = std::round(ratio);
    if (std::abs(ratio - r) > 1e-9 * std::max(1.0, r)) r = std::ceil(ratio);
    if (r < 1.0) r = 1.0;
    if (!(r <= double(kMaxSteps)))
        throw ArgumentError(std::string(what) + " needs too many steps at this step size");
    return static_cast<long long>(r);
}

}  // namespace

SystemRealization build_system(const Topology& topology, const ProtocolParams& params) {
    if (!(params.k1 > 0.0) || !(params.k2 > 0.0))
        throw ArgumentError("control gains must be positive");
    require_connected_for_build(topology);

    SystemRealization system;
    system.kind = params.kind;
    system.params = params;
    system.topology = topology;
    system.F2 << 0.0, 0.0, params.k1, params.k2;
    if (params.kind == ProtocolKind::NoSelfDelay) {
        system.F1 << 0.0, 1.0, -params.k1, -params.k2;
        system.M = weighted_adjacency(topology);
    } else {
        system.F1 << 0.0, 1.0, 0.0, 0.0;
        system.M = -laplacian(topology);
    }
    return system;
}

std::size_t topology_at(const SwitchingSchedule& schedule, double t) {
    if (t < 0.0) throw ArgumentError("time must be nonnegative");
    const double phase = std::fmod(t, schedule.period) / schedule.period;
    return phase < schedule.duty_percent / 100.0 ? 0 : 1;
}

double default_step(double tau) {
    return tau > 0.0 ? std::min(1e-3, tau / 20.0) : 1e-3;
}

Eigen::VectorXd default_initial_state(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Eigen::VectorXd state = Eigen::VectorXd::Zero(2 * n);
    for (int i = 0; i < n; ++i) {
        const double unit = double(rng() >> 11) * 0x1.0p-53;
        state(2 * i) = 10.0 * unit;
    }
    return state;
}

Trace integrate_delayed_linear(const Eigen::MatrixXd& drift,
                               const std::vector<Eigen::MatrixXd>& delayed,
                               const SwitchingSchedule* schedule,
                               const Eigen::VectorXd& initial_state, double tau,
                               double t_end, double step_request) {
    if (delayed.empty()) throw ArgumentError("at least one delayed matrix is required");
    if (schedule && delayed.size() != 2)
        throw ArgumentError("a switching schedule needs exactly two delayed matrices");
    if (schedule && (!(schedule->period > 0.0) || !(schedule->duty_percent > 0.0) ||
                     !(schedule->duty_percent < 100.0)))
        throw ArgumentError("schedule needs period > 0 and duty in (0, 100)");
    if (!(tau >= 0.0)) throw ArgumentError("delay must be nonnegative");
    if (!(t_end > 0.0)) throw ArgumentError("t_end must be positive");
    if (!(step_request > 0.0)) throw ArgumentError("step must be positive");
    const Eigen::Index dim = drift.rows();
    if (drift.cols() != dim || initial_state.size() != dim)
        throw DimensionError("drift matrix and initial state sizes disagree");
    for (const auto& b : delayed)
        if (b.rows() != dim || b.cols() != dim)
            throw DimensionError("delayed matrix size disagrees with the drift matrix");

    // Make the delay an exact number of steps so full-step history lookups
    // land on stored samples.
    long long delay_steps = 0;
    double h = step_request;
    if (tau > 0.0) {
        delay_steps = grid_count(tau, step_request, "the delay");
        h = tau / double(delay_steps);
    }
    const long long steps = grid_count(t_end, h, "the horizon");

    Eigen::MatrixXd states(steps + 1, dim);
    states.row(0) = initial_state.transpose();

    // Constant history: x(t) = x(0) for t in [-tau, 0].
    const auto state_at = [&](long long index) {
        return states.row(index <= 0 ? 0 : index).transpose();
    };

    std::vector<double> switch_times;
    std::size_t active = schedule ? topology_at(*schedule, 0.0) : 0;
    bool diverged = false;
    long long produced = 0;

    Eigen::VectorXd x(dim), k1(dim), k2(dim), k3(dim), k4(dim), stage(dim), next(dim),
        tail(dim), head(dim), mid(dim);
    for (long long i = 0; i < steps; ++i) {
        const double t = double(i) * h;
        if (schedule) {
            const std::size_t now = topology_at(*schedule, t);
            if (now != active) {
                active = now;
                switch_times.push_back(t);
            }
        }
        const Eigen::MatrixXd& b = delayed[active];
        x = state_at(i);

        if (delay_steps == 0) {
            k1 = drift * x + b * x;
            stage = x + (0.5 * h) * k1;
            k2 = drift * stage + b * stage;
            stage = x + (0.5 * h) * k2;
            k3 = drift * stage + b * stage;
            stage = x + h * k3;
            k4 = drift * stage + b * stage;
        } else {
            tail = state_at(i - delay_steps);
            head = state_at(i - delay_steps + 1);
            mid = 0.5 * (tail + head);
            k1 = drift * x + b * tail;
            stage = x + (0.5 * h) * k1;
            k2 = drift * stage + b * mid;
            stage = x + (0.5 * h) * k2;
            k3 = drift * stage + b * mid;
            stage = x + h * k3;
            k4 = drift * stage + b * head;
        }
        next = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

        if (!next.allFinite()) {
            diverged = true;
            break;
        }
        states.row(i + 1) = next.transpose();
        ++produced;
        if (next.cwiseAbs().maxCoeff() > kOverflowGuard) {
            diverged = true;
            break;
        }
    }

    Trace trace;
    trace.step = h;
    trace.diverged = diverged;
    trace.switch_times = std::move(switch_times);
    trace.times.resize(produced + 1);
    for (long long i = 0; i <= produced; ++i) trace.times(i) = double(i) * h;
    trace.states = states.topRows(produced + 1);
    return trace;
}

Trace simulate(const SimConfig& config) {
    if (config.topologies.empty() || config.topologies.size() > 2)
        throw ArgumentError("one or two topologies are required");
    if (config.schedule && config.topologies.size() != 2)
        throw ArgumentError("a switching run needs two topologies");
    if (!config.schedule && config.topologies.size() == 2)
        throw ArgumentError("two topologies given but no schedule");

    const int n = config.topologies.front().n;
    for (const auto& topology : config.topologies)
        if (topology.n != n)
            throw DimensionError("switching topologies must share the agent count");
    if (config.initial_state.size() != 2 * n)
        throw DimensionError("initial state must have 2n entries");

    std::vector<Eigen::MatrixXd> delayed;
    Eigen::MatrixXd drift;
    for (const auto& topology : config.topologies) {
        const SystemRealization system = build_system(topology, config.params);
        delayed.push_back(kron_with_2x2(system.M, system.F2));
        if (drift.size() == 0)
            drift = kron_with_2x2(Eigen::MatrixXd::Identity(n, n), system.F1);
    }

    const double step = config.step ? *config.step : default_step(config.tau);
    return integrate_delayed_linear(drift, delayed,
                                    config.schedule ? &*config.schedule : nullptr,
                                    config.initial_state, config.tau, config.t_end, step);
}

}  // namespace consensus
