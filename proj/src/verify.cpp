#include "consensus/verify.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "consensus/analysis.hpp"
#include "consensus/dynamics.hpp"
#include "consensus/graph.hpp"
#include "consensus/stability.hpp"

namespace consensus {

namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    const double unit = double(rng() >> 11) * 0x1.0p-53;
    return lo + unit * (hi - lo);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return lo + int(rng() % std::uint64_t(hi - lo + 1));
}

// Random spanning tree plus random extra edges: connected by construction.
Topology random_connected_topology(std::mt19937_64& rng, int n_lo, int n_hi) {
    const int n = uniform_int(rng, n_lo, n_hi);
    std::vector<std::pair<int, int>> edges;
    for (int v = 1; v < n; ++v) edges.emplace_back(uniform_int(rng, 0, v - 1), v);
    const double extra = uniform(rng, 0.0, 0.5);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (uniform(rng, 0.0, 1.0) < extra) edges.emplace_back(i, j);
    return make_topology(n, std::move(edges));
}

bool relative_match(double a, double b, double tol) {
    if (std::isinf(a) || std::isinf(b)) return a == b;
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

VerificationCheck check_exigent_selection(ProtocolKind kind) {
    VerificationCheck check;
    check.name = kind == ProtocolKind::NoSelfDelay
                     ? "exigent eigenvalue (no self delay) = min weighted-adjacency eigenvalue"
                     : "exigent eigenvalue (self delay) = max Laplacian eigenvalue";
    std::mt19937_64 rng(kind == ProtocolKind::NoSelfDelay ? 101 : 202);
    int failures = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Topology topology = random_connected_topology(rng, 3, 10);
        const ProtocolParams params{kind, uniform(rng, 0.1, 10.0), uniform(rng, 0.1, 10.0)};
        const Spectrum spec = spectrum(topology, kind);
        const DelayMargin margin = topology_margin(spec, params);

        const double predicted = kind == ProtocolKind::NoSelfDelay
                                     ? spec.eigenvalues.minCoeff()
                                     : spec.eigenvalues.maxCoeff();
        if (!std::isfinite(margin.margin)) {
            // Every positive Laplacian eigenvalue crosses; only the
            // weighted-adjacency protocol may be crossing-free.
            if (kind == ProtocolKind::SelfDelay) ++failures;
            continue;
        }
        bool predicted_in_argmin = false;
        bool selection_in_argmin = false;
        for (const FactorCrossing& crossing : margin.per_factor) {
            if (!crossing.finite || crossing.tau > margin.margin + 1e-9) continue;
            if (std::abs(crossing.lambda - predicted) <= 1e-9) predicted_in_argmin = true;
            if (std::abs(crossing.lambda - margin.exigent_lambda) <= 1e-9)
                selection_in_argmin = true;
        }
        if (!predicted_in_argmin || !selection_in_argmin) ++failures;
    }
    check.passed = failures == 0;
    std::ostringstream detail;
    detail << failures << " of 200 random topologies off prediction";
    check.detail = detail.str();
    return check;
}

VerificationCheck check_crossing_monotonicity(bool frequency) {
    VerificationCheck check;
    check.name = frequency ? "self-delay crossing frequency increases with the eigenvalue"
                           : "self-delay crossing delay decreases with the eigenvalue";
    std::mt19937_64 rng(303);
    int violations = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const ProtocolParams params{ProtocolKind::SelfDelay, uniform(rng, 0.1, 10.0),
                                    uniform(rng, 0.1, 10.0)};
        double previous = frequency ? 0.0 : std::numeric_limits<double>::infinity();
        for (int i = 1; i <= 100; ++i) {
            const FactorCrossing crossing = factor_margin(0.1 * i, params);
            if (frequency ? crossing.omega <= previous : crossing.tau >= previous)
                ++violations;
            previous = frequency ? crossing.omega : crossing.tau;
        }
    }
    check.passed = violations == 0;
    check.detail = std::to_string(violations) + " grid violations";
    return check;
}

VerificationCheck check_phase_inequality() {
    VerificationCheck check;
    check.name = "sin(2 theta)/2 - theta < 0 on (0, pi/2)";
    const int points = 10'000;
    const double lo = 1e-6;
    const double hi = std::numbers::pi / 2.0 - 1e-6;
    int violations = 0;
    for (int i = 0; i < points; ++i) {
        const double theta = lo + (hi - lo) * i / double(points - 1);
        if (!(0.5 * std::sin(2.0 * theta) - theta < 0.0)) ++violations;
    }
    check.passed = violations == 0;
    check.detail = std::to_string(violations) + " of 10000 grid points nonnegative";
    return check;
}

VerificationCheck check_resultant_identity() {
    VerificationCheck check;
    check.name = "resultant determinant = k2^4 (l1^2 - l2^2)^2";
    std::mt19937_64 rng(404);
    int failures = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const ProtocolParams params{ProtocolKind::SelfDelay, uniform(rng, 0.1, 10.0),
                                    uniform(rng, 0.1, 10.0)};
        const double l1 = uniform(rng, 0.1, 10.0);
        const double l2 = uniform(rng, 0.1, 10.0);
        const double det = sylvester_resultant_det(l1, l2, params);
        const double k2 = params.k2;
        const double expected = k2 * k2 * k2 * k2 * (l1 * l1 - l2 * l2) * (l1 * l1 - l2 * l2);
        if (!relative_match(det, expected, 1e-10)) ++failures;
        const double scale = std::max(1.0, expected);
        if (std::abs(sylvester_resultant_det(l1, l1, params)) > 1e-10 * scale) ++failures;
        if (std::abs(sylvester_resultant_det(l1, -l1, params)) > 1e-10 * scale) ++failures;
    }
    check.passed = failures == 0;
    check.detail = std::to_string(failures) + " mismatches over 100 draws";
    return check;
}

VerificationCheck check_switching_continuity() {
    VerificationCheck check;
    check.name = "disagreement norm continuous across self-delay switches";

    const Topology hub = parse_topology("6\n1 2\n1 4\n2 4\n3 4\n4 5\n3 6\n5 6");
    const Topology ring = parse_topology("6\n1 2\n2 3\n3 4\n4 5\n5 6\n6 1");

    SimConfig config;
    config.params = {ProtocolKind::SelfDelay, 1.0, 0.5};
    config.tau = 0.06;
    config.topologies = {hub, ring};
    config.schedule = SwitchingSchedule{1.4, 60.0};
    config.initial_state = default_initial_state(6, 7);
    config.t_end = 10.0;

    const Trace trace = simulate(config);
    const std::vector<Spectrum> spectra = {spectrum(hub, ProtocolKind::SelfDelay),
                                           spectrum(ring, ProtocolKind::SelfDelay)};
    const DisagreementTrace dtrace = disagreement(trace, spectra);

    int failures = 0;
    if (dtrace.jumps.empty()) ++failures;
    for (const auto& [t, magnitude] : dtrace.jumps) {
        const Eigen::Index row = Eigen::Index(std::llround(t / trace.step));
        if (magnitude > 1e-9 * (1.0 + dtrace.norm(row))) ++failures;
    }
    for (Eigen::Index s = 0; s < trace.times.size(); ++s) {
        const double state_norm = trace.states.row(s).norm();
        if (std::abs(dtrace.full_norm(s) - state_norm) > 1e-10 * (1.0 + state_norm))
            ++failures;
    }
    check.passed = failures == 0;
    check.detail = std::to_string(failures) + " continuity violations";
    return check;
}

VerificationCheck check_oracle_agreement(ProtocolKind kind) {
    VerificationCheck check;
    check.name = kind == ProtocolKind::NoSelfDelay
                     ? "margin formulas agree with the scan oracle (no self delay)"
                     : "margin formulas agree with the scan oracle (self delay)";
    std::mt19937_64 rng(kind == ProtocolKind::NoSelfDelay ? 505 : 606);
    int failures = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const ProtocolParams params{kind, uniform(rng, 0.1, 10.0), uniform(rng, 0.1, 10.0)};
        const double lambda = kind == ProtocolKind::NoSelfDelay
                                  ? uniform(rng, -1.0, 0.95)
                                  : uniform(rng, 0.05, 20.0);
        if (!relative_match(factor_margin(lambda, params).tau, oracle_margin(lambda, params),
                            1e-6))
            ++failures;
    }
    check.passed = failures == 0;
    check.detail = std::to_string(failures) + " mismatches over 200 draws";
    return check;
}

}  // namespace

std::vector<VerificationCheck> run_verification() {
    std::vector<VerificationCheck> checks;
    checks.push_back(check_exigent_selection(ProtocolKind::NoSelfDelay));
    checks.push_back(check_exigent_selection(ProtocolKind::SelfDelay));
    checks.push_back(check_crossing_monotonicity(true));
    checks.push_back(check_crossing_monotonicity(false));
    checks.push_back(check_phase_inequality());
    checks.push_back(check_resultant_identity());
    checks.push_back(check_switching_continuity());
    checks.push_back(check_oracle_agreement(ProtocolKind::NoSelfDelay));
    checks.push_back(check_oracle_agreement(ProtocolKind::SelfDelay));
    return checks;
}

}  // namespace consensus
