#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "consensus/analysis.hpp"
#include "consensus/dynamics.hpp"
#include "consensus/errors.hpp"
#include "consensus/graph.hpp"
#include "test_support.hpp"

using namespace consensus;

namespace {

Topology hub() { return parse_topology(test_support::kHubTopologyText); }
Topology ring() { return parse_topology(test_support::kRingTopologyText); }

// A one-sample trace around a given interleaved state.
Trace single_sample(const Eigen::VectorXd& state) {
    Trace trace;
    trace.times = Eigen::VectorXd::Zero(1);
    trace.states = state.transpose();
    trace.step = 1.0;
    return trace;
}

Eigen::VectorXd interleave(const Eigen::VectorXd& positions) {
    Eigen::VectorXd state = Eigen::VectorXd::Zero(2 * positions.size());
    for (Eigen::Index i = 0; i < positions.size(); ++i) state(2 * i) = positions(i);
    return state;
}

DisagreementTrace synthetic(const std::vector<double>& norms, bool aborted = false) {
    DisagreementTrace dtrace;
    dtrace.times.resize(Eigen::Index(norms.size()));
    dtrace.norm.resize(Eigen::Index(norms.size()));
    for (std::size_t i = 0; i < norms.size(); ++i) {
        dtrace.times(Eigen::Index(i)) = double(i);
        dtrace.norm(Eigen::Index(i)) = norms[i];
    }
    dtrace.full_norm = dtrace.norm;
    dtrace.aborted = aborted;
    return dtrace;
}

SimConfig switching_scenario(ProtocolKind kind, double k1, double k2, double tau,
                             double duty, std::uint64_t seed, double t_end) {
    SimConfig config;
    config.params = {kind, k1, k2};
    config.tau = tau;
    config.topologies = {hub(), ring()};
    config.schedule = SwitchingSchedule{1.4, duty};
    config.initial_state = default_initial_state(6, seed);
    config.t_end = t_end;
    return config;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("centroid of simple states") {
    // Equal positions collapse to that value for both protocols.
    const Trace equal = single_sample(interleave(Eigen::VectorXd::Constant(6, 4.5)));
    CHECK(centroid(equal, {hub()}, ProtocolKind::NoSelfDelay).position(0) ==
          doctest::Approx(4.5).epsilon(1e-15));
    CHECK(centroid(equal, {hub()}, ProtocolKind::SelfDelay).position(0) ==
          doctest::Approx(4.5).epsilon(1e-15));

    // Two agents at 0 and 2: plain average.
    const Trace pair = single_sample(interleave((Eigen::VectorXd(2) << 0, 2).finished()));
    CHECK(centroid(pair, {parse_topology("2\n1 2")}, ProtocolKind::SelfDelay).position(0) ==
          doctest::Approx(1.0).epsilon(1e-15));

    // Degree-weighted average over the hub topology.
    const Trace skew =
        single_sample(interleave((Eigen::VectorXd(6) << 1, 1, 1, 1, 1, 8).finished()));
    CHECK(centroid(skew, {hub()}, ProtocolKind::NoSelfDelay).position(0) ==
          doctest::Approx(2.0).epsilon(1e-15));

    CHECK_THROWS_AS(centroid(pair, {hub()}, ProtocolKind::SelfDelay), DimensionError);
}

TEST_CASE("disagreement of a consensus state is zero") {
    const Trace equal = single_sample(interleave(Eigen::VectorXd::Constant(6, 4.5)));
    for (ProtocolKind kind : {ProtocolKind::NoSelfDelay, ProtocolKind::SelfDelay}) {
        const DisagreementTrace dtrace = disagreement(equal, {spectrum(hub(), kind)});
        CHECK(dtrace.norm(0) < 1e-10);
    }
}

TEST_CASE("self-delay transform preserves the state norm") {
    SimConfig config = switching_scenario(ProtocolKind::SelfDelay, 1, 0.5, 0.06, 60.0, 4, 8.0);
    const Trace trace = simulate(config);
    const std::vector<Spectrum> spectra = {spectrum(hub(), ProtocolKind::SelfDelay),
                                           spectrum(ring(), ProtocolKind::SelfDelay)};
    const DisagreementTrace dtrace = disagreement(trace, spectra);

    for (Eigen::Index i = 0; i < trace.times.size(); ++i) {
        const double state_norm = trace.states.row(i).norm();
        CHECK(std::abs(dtrace.full_norm(i) - state_norm) <= 1e-10 * (1.0 + state_norm));
        CHECK(dtrace.norm(i) * dtrace.norm(i) <=
              dtrace.full_norm(i) * dtrace.full_norm(i) * (1.0 + 1e-9) + 1e-9);
    }

    // Switch-induced jumps vanish for the self-delay protocol.
    REQUIRE_FALSE(dtrace.jumps.empty());
    for (const auto& [t, magnitude] : dtrace.jumps) {
        const Eigen::Index row = Eigen::Index(std::llround(t / trace.step));
        CHECK(magnitude < 1e-9 * (1.0 + dtrace.norm(row)));
    }
}

TEST_CASE("no-self-delay switches produce real jumps") {
    SimConfig config =
        switching_scenario(ProtocolKind::NoSelfDelay, 5, 0.2, 0.06, 10.0, 4, 6.0);
    const Trace trace = simulate(config);
    REQUIRE_FALSE(trace.switch_times.empty());

    const std::vector<Spectrum> spectra = {spectrum(hub(), ProtocolKind::NoSelfDelay),
                                           spectrum(ring(), ProtocolKind::NoSelfDelay)};
    const DisagreementTrace dtrace = disagreement(trace, spectra);
    double largest = 0.0;
    for (const auto& [t, magnitude] : dtrace.jumps) largest = std::max(largest, magnitude);
    CHECK(largest > 1e-6);

    // The group decision value itself jumps: the two degree weightings
    // disagree at switch samples.
    const DecisionTrace with_hub = centroid(trace, {hub()}, ProtocolKind::NoSelfDelay);
    const DecisionTrace with_ring = centroid(trace, {ring()}, ProtocolKind::NoSelfDelay);
    double centroid_jump = 0.0;
    for (double t : trace.switch_times) {
        const Eigen::Index row = Eigen::Index(std::llround(t / trace.step));
        centroid_jump = std::max(
            centroid_jump, std::abs(with_hub.position(row) - with_ring.position(row)));
    }
    CHECK(centroid_jump > 1e-6);
}

TEST_CASE("centroid follows its own delayed dynamics for the no-self-delay protocol") {
    SimConfig config;
    config.params = {ProtocolKind::NoSelfDelay, 1, 1};
    config.tau = 0.2;
    config.topologies = {hub()};
    config.initial_state = default_initial_state(6, 31);
    config.t_end = 10.0;
    config.step = 1e-3;

    const Trace trace = simulate(config);
    const DecisionTrace decision = centroid(trace, config.topologies, config.params.kind);

    const Eigen::Index delay_rows = Eigen::Index(std::llround(config.tau / trace.step));
    const double h = trace.step;
    double worst = 0.0;
    for (Eigen::Index i = std::max<Eigen::Index>(2, delay_rows);
         i + 2 < decision.times.size(); ++i) {
        // Fourth-order central difference of the centroid velocity.
        const double accel =
            (-decision.velocity(i + 2) + 8.0 * decision.velocity(i + 1) -
             8.0 * decision.velocity(i - 1) + decision.velocity(i - 2)) /
            (12.0 * h);
        const double delayed_pos =
            i >= delay_rows ? decision.position(i - delay_rows) : decision.position(0);
        const double delayed_vel =
            i >= delay_rows ? decision.velocity(i - delay_rows) : decision.velocity(0);
        const double residual = accel -
                                config.params.k1 * (delayed_pos - decision.position(i)) -
                                config.params.k2 * (delayed_vel - decision.velocity(i));
        worst = std::max(worst, std::abs(residual));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("disagreement envelope decays on a stable fixed run") {
    // Near-margin pair run: the 2*tau window spans the slow oscillation, so
    // window maxima track the envelope.
    SimConfig config;
    config.params = {ProtocolKind::NoSelfDelay, 1, 1};
    config.tau = 1.28;
    config.topologies = {parse_topology("2\n1 2")};
    config.initial_state = default_initial_state(2, 8);
    config.t_end = 60.0;

    const Trace trace = simulate(config);
    const DisagreementTrace dtrace = disagreement(
        trace, {spectrum(config.topologies.front(), ProtocolKind::NoSelfDelay)});

    const double window = 2.0 * config.tau;
    std::vector<double> peaks;
    for (double lo = 10.0 * config.tau; lo + window <= config.t_end; lo += window) {
        double peak = 0.0;
        for (Eigen::Index i = 0; i < dtrace.times.size(); ++i)
            if (dtrace.times(i) >= lo && dtrace.times(i) < lo + window)
                peak = std::max(peak, dtrace.norm(i));
        peaks.push_back(peak);
    }
    REQUIRE(peaks.size() > 10);
    for (std::size_t w = 1; w < peaks.size(); ++w) CHECK(peaks[w] < peaks[w - 1]);
}

TEST_CASE("detect_outcome classification") {
    // Zero initial disagreement is consensus at time zero.
    const Outcome trivial = detect_outcome(synthetic({0.0, 0.0, 0.0}));
    CHECK(trivial.verdict == Verdict::Consensus);
    CHECK(trivial.consensus_time == 0.0);

    // Aborted runs are divergent regardless of the norm values.
    CHECK(detect_outcome(synthetic({1.0, 0.5, 0.2}, true)).verdict == Verdict::Divergent);

    // Sustained decay: consensus at the first sample of the final
    // below-threshold stretch.
    std::vector<double> decay(200);
    for (std::size_t i = 0; i < decay.size(); ++i) decay[i] = std::exp(-0.1 * double(i));
    const Outcome converged = detect_outcome(synthetic(decay));
    CHECK(converged.verdict == Verdict::Consensus);
    CHECK(converged.consensus_time == doctest::Approx(70.0));

    // Growth beyond the factor is divergent.
    std::vector<double> growth(100);
    for (std::size_t i = 0; i < growth.size(); ++i) growth[i] = 1.0 + double(i);
    CHECK(detect_outcome(synthetic(growth)).verdict == Verdict::Divergent);

    // Neither criterion met.
    CHECK(detect_outcome(synthetic(std::vector<double>(100, 1.0))).verdict ==
          Verdict::Undecided);

    // A dip that does not hold through the final 5% is not consensus.
    std::vector<double> dip(100, 1.0);
    for (std::size_t i = 40; i < 60; ++i) dip[i] = 1e-6;
    CHECK(detect_outcome(synthetic(dip)).verdict == Verdict::Undecided);

    CHECK_THROWS_AS(detect_outcome(synthetic({})), ArgumentError);
}

TEST_CASE("verdict names") {
    CHECK(std::string(verdict_name(Verdict::Consensus)) == "consensus");
    CHECK(std::string(verdict_name(Verdict::Divergent)) == "divergent");
    CHECK(std::string(verdict_name(Verdict::Undecided)) == "undecided");
}

}  // TEST_SUITE
