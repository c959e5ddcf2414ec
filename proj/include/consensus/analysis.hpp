#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "consensus/dynamics.hpp"
#include "consensus/graph.hpp"

namespace consensus {

/// Group decision value over time: the degree-weighted average position and
/// velocity for NoSelfDelay (weights follow the active topology), the plain
/// average for SelfDelay.
struct DecisionTrace {
    Eigen::VectorXd times;
    Eigen::VectorXd position;
    Eigen::VectorXd velocity;
};

DecisionTrace centroid(const Trace& trace, const std::vector<Topology>& topologies,
                       ProtocolKind kind);

/// Disagreement channels derived through the spectral transform of the
/// active topology: norm covers the transformed subsystems 2..n, full_norm
/// the whole transformed state. jumps holds, per switch instant, the change
/// the transform swap alone induces in norm (both transforms applied to the
/// same state sample).
struct DisagreementTrace {
    Eigen::VectorXd times;
    Eigen::VectorXd norm;
    Eigen::VectorXd full_norm;
    std::vector<std::pair<double, double>> jumps;
    bool aborted = false;
};

DisagreementTrace disagreement(const Trace& trace, const std::vector<Spectrum>& spectra);

enum class Verdict { Consensus, Divergent, Undecided };

struct Outcome {
    Verdict verdict = Verdict::Undecided;
    double consensus_time = 0.0;  // meaningful for Verdict::Consensus
};

/// Classifies a run: consensus when the disagreement norm stays below
/// epsilon_rel * d(0) through the final 5% of samples (consensus_time is the
/// start of that sustained stretch), divergent when the run aborted on
/// overflow or ends above growth_factor * d(0), undecided otherwise.
/// A run starting at d(0) == 0 is consensus at time 0.
Outcome detect_outcome(const DisagreementTrace& dtrace, double epsilon_rel = 1e-3,
                       double growth_factor = 10.0);

const char* verdict_name(Verdict verdict) noexcept;

}  // namespace consensus
