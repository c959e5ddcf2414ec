#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "consensus/analysis.hpp"
#include "consensus/dynamics.hpp"
#include "consensus/stability.hpp"

namespace consensus {

/// Parsed simulation config file: flat "key value" lines, '#' comments.
/// Topology entries stay as the paths found in the file.
struct SimFileConfig {
    ProtocolKind kind = ProtocolKind::NoSelfDelay;
    double k1 = 0.0;
    double k2 = 0.0;
    double tau = 0.0;
    double t_end = 0.0;
    std::optional<double> step;
    std::string topology;
    std::optional<std::string> topology2;
    std::optional<double> period;
    std::optional<double> duty;
    std::optional<std::uint64_t> seed;
    std::optional<Eigen::VectorXd> x0;
};

/// Parses config text. Required keys: protocol, k1, k2, tau, t_end,
/// topology. Throws ParseError naming the offending line (or the missing
/// key).
SimFileConfig parse_sim_config(std::string_view text);

/// Formats with 9 significant digits; infinities become "inf".
std::string format_sig9(double value);

/// "k1,k2,tau" rows, row-major with k1 as the outer loop.
void write_surface_csv(std::ostream& out, const BoundarySurface& surface);

/// "lambda,omega,tau" rows, one per disagreement factor.
void write_margin_csv(std::ostream& out, const DelayMargin& margin);

/// "t,x1,v1,...,xn,vn" rows preceded by '#' metadata lines (resolved step,
/// seed when known, switch instants). An aborted run ends with "# aborted".
void write_trace_csv(std::ostream& out, const Trace& trace,
                     std::optional<std::uint64_t> seed = std::nullopt);

/// "t,centroid,centroid_vel,disagreement_norm,full_norm" rows with the
/// switch-jump report appended as "# jump <t> <magnitude>" lines.
void write_analysis_csv(std::ostream& out, const DecisionTrace& decision,
                        const DisagreementTrace& dtrace);

}  // namespace consensus
