#pragma once

#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace consensus {

/// Structure of the consensus protocol. NoSelfDelay compares delayed
/// neighbor information against the agent's own current state and couples
/// through the degree-weighted adjacency; SelfDelay delays the agent's own
/// state as well and couples through the Laplacian.
enum class ProtocolKind { NoSelfDelay, SelfDelay };

/// Short letter used on the command line and in config files: 'a' for
/// NoSelfDelay, 'b' for SelfDelay.
char protocol_letter(ProtocolKind kind) noexcept;
std::optional<ProtocolKind> protocol_from_letter(std::string_view text) noexcept;

/// Undirected communication topology on n >= 2 agents. Edges are unordered
/// pairs stored 0-based with first < second, sorted and deduplicated;
/// degrees[i] counts the informers of agent i.
struct Topology {
    int n = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<int> degrees;
};

/// Validates agent count and edge indices, normalizes and deduplicates the
/// edge list and computes degrees. Throws ArgumentError on bad input.
Topology make_topology(int n, std::vector<std::pair<int, int>> edges);

/// Parses the topology text format: first significant line is the agent
/// count, each following significant line is an edge "i j" with 1-based
/// indices. Lines starting with '#' and blank lines are ignored. Throws
/// ParseError naming the offending line.
Topology parse_topology(std::string_view text);

/// True iff every agent is reachable from agent 1.
bool is_connected(const Topology& topology);

/// Agents (0-based) not reachable from agent 0; empty iff connected.
std::vector<int> unreachable_agents(const Topology& topology);

/// 0/1 adjacency matrix with zero diagonal.
Eigen::MatrixXd adjacency(const Topology& topology);

/// Laplacian: degrees on the diagonal, -1 per edge, zero row sums.
Eigen::MatrixXd laplacian(const Topology& topology);

/// Degree-normalized adjacency: entry (i,j) = 1/degree(i) for an edge,
/// zero otherwise. Every row sums to one. Throws ArgumentError if any agent
/// has no informers.
Eigen::MatrixXd weighted_adjacency(const Topology& topology);

/// Eigenvalue of the coupling matrix generated by the all-equal eigenvector:
/// 1 for NoSelfDelay, 0 for SelfDelay.
double special_eigenvalue(ProtocolKind kind) noexcept;

/// Eigenstructure of the protocol coupling matrix: the weighted adjacency
/// for NoSelfDelay, the (positive) Laplacian for SelfDelay. The consensus
/// eigenvalue is first; the remaining eigenvalues are sorted ascending.
/// transform's columns are eigenvectors in the same order, and
/// inverse_transform * transform is the identity. For SelfDelay the
/// transform is orthogonal.
struct Spectrum {
    ProtocolKind kind = ProtocolKind::NoSelfDelay;
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd transform;
    Eigen::MatrixXd inverse_transform;
    int special_index = 0;
};

/// Computes the Spectrum of a connected topology. The weighted adjacency is
/// decomposed through its symmetric similar matrix D^(-1/2) A D^(-1/2), so
/// both protocol kinds reduce to a symmetric eigenproblem.
Spectrum spectrum(const Topology& topology, ProtocolKind kind);

/// Degree bound on the Laplacian spectrum: twice the largest degree.
double anderson_bound(const Topology& topology);

/// Worst-case coupling eigenvalue over all connected topologies: -1 for
/// NoSelfDelay (any size), n for SelfDelay (attained by regular bipartite
/// topologies, so the agent count is required).
double absolute_exigent_eigenvalue(ProtocolKind kind,
                                   std::optional<int> agent_count = std::nullopt);

}  // namespace consensus
