#pragma once

#include <complex>
#include <optional>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "consensus/graph.hpp"

namespace consensus {

/// Protocol selection plus the two positive control gains.
struct ProtocolParams {
    ProtocolKind kind = ProtocolKind::NoSelfDelay;
    double k1 = 1.0;
    double k2 = 1.0;
};

/// Imaginary-axis crossing of one disagreement factor. finite == false
/// means the factor has no crossing and tolerates any delay; omega and tau
/// are +infinity in that case.
struct FactorCrossing {
    double lambda = 0.0;
    double omega = 0.0;
    double tau = 0.0;
    bool finite = false;
};

/// Delay margin of a whole topology: one crossing per disagreement
/// eigenvalue (spectrum order), the minimum delay and the eigenvalue that
/// attains it. margin is +infinity and exigent_lambda NaN when no factor
/// crosses.
struct DelayMargin {
    std::vector<FactorCrossing> per_factor;
    double margin = 0.0;
    double exigent_lambda = 0.0;
};

/// Value of one second-order characteristic factor at a complex point.
std::complex<double> factor_char_value(std::complex<double> s, double lambda,
                                       const ProtocolParams& params, double tau);

/// All positive frequencies at which the factor for this disagreement
/// eigenvalue can reach the imaginary axis (unit-magnitude condition),
/// sorted ascending. Empty means no crossing exists. Throws ArgumentError
/// when lambda is within 1e-8 of the consensus eigenvalue.
std::vector<double> crossing_frequencies(double lambda, const ProtocolParams& params);

/// Smallest positive delay at which the factor has a root at +i*omega,
/// from the phase condition e^(-i omega tau) = R(i omega). Throws
/// ConsistencyError when omega does not satisfy the magnitude condition.
double crossing_delay(double lambda, const ProtocolParams& params, double omega);

/// Delay margin of a single disagreement factor: the minimum crossing delay
/// over all crossing frequencies, or an infinite margin when none exist.
FactorCrossing factor_margin(double lambda, const ProtocolParams& params);

/// Margin over all disagreement eigenvalues of a spectrum. Equal eigenvalues
/// (within 1e-10) are computed once. Throws ArgumentError when the spectrum
/// and params disagree on the protocol kind.
DelayMargin topology_margin(const Spectrum& spec, const ProtocolParams& params);

/// Margin at the worst-case eigenvalue over all connected topologies; the
/// self-delay protocol needs the agent count.
FactorCrossing absolute_margin(const ProtocolParams& params,
                               std::optional<int> agent_count = std::nullopt);

/// Topology-independent stability boundary sampled on a gain grid.
/// tau(i, j) is the absolute margin at (k1_values(i), k2_values(j)).
struct BoundarySurface {
    Eigen::VectorXd k1_values;
    Eigen::VectorXd k2_values;
    Eigen::MatrixXd tau;
};

/// Evaluates the absolute margin over a Cartesian gain grid. Ranges must be
/// positive with hi >= lo; counts must be >= 1 (a single-point axis uses the
/// range's low end).
BoundarySurface boundary_surface(ProtocolKind kind, std::pair<double, double> k1_range,
                                 std::pair<double, double> k2_range,
                                 std::pair<int, int> grid_counts,
                                 std::optional<int> agent_count = std::nullopt);

/// Brute-force margin used as ground truth: scans the magnitude-condition
/// residual over a log-spaced frequency grid, refines every root by
/// bisection (plus a dip search for root pairs falling inside one cell) and
/// takes the smallest phase delay. Returns +infinity when no crossing is
/// found. Shares no code with the closed-form path above.
double oracle_margin(double lambda, const ProtocolParams& params);

/// Determinant of the 4x4 Sylvester resultant matrix pairing the
/// squared-frequency quadratics of two eigenvalues; it vanishes exactly when
/// lambda1 = +/- lambda2 and equals k2^4 (lambda1^2 - lambda2^2)^2.
double sylvester_resultant_det(double lambda1, double lambda2,
                               const ProtocolParams& params);

}  // namespace consensus
