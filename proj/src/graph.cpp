#include "consensus/graph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>
#include <string>

#include "consensus/errors.hpp"

namespace consensus {

namespace {

constexpr double kSpecialDetectTol = 1e-8;
constexpr double kSimpleGapTol = 1e-10;

std::string trimmed(std::string line) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!line.empty() && is_space(line.back())) line.pop_back();
    std::size_t start = 0;
    while (start < line.size() && is_space(line[start])) ++start;
    return line.substr(start);
}

}  // namespace

char protocol_letter(ProtocolKind kind) noexcept {
    return kind == ProtocolKind::NoSelfDelay ? 'a' : 'b';
}

std::optional<ProtocolKind> protocol_from_letter(std::string_view text) noexcept {
    if (text == "a" || text == "A") return ProtocolKind::NoSelfDelay;
    if (text == "b" || text == "B") return ProtocolKind::SelfDelay;
    return std::nullopt;
}

Topology make_topology(int n, std::vector<std::pair<int, int>> edges) {
    if (n < 2) throw ArgumentError("agent count must be at least 2");
    std::set<std::pair<int, int>> unique;
    for (auto [i, j] : edges) {
        if (i < 0 || i >= n || j < 0 || j >= n)
            throw ArgumentError("edge index out of range");
        if (i == j) throw ArgumentError("self-loop");
        unique.emplace(std::min(i, j), std::max(i, j));
    }
    Topology t;
    t.n = n;
    t.edges.assign(unique.begin(), unique.end());
    t.degrees.assign(n, 0);
    for (auto [i, j] : t.edges) {
        ++t.degrees[i];
        ++t.degrees[j];
    }
    return t;
}

Topology parse_topology(std::string_view text) {
    std::istringstream stream{std::string(text)};
    std::string raw;
    int line_no = 0;
    int n = -1;
    std::set<std::pair<int, int>> unique;

    while (std::getline(stream, raw)) {
        ++line_no;
        const std::string line = trimmed(raw);
        if (line.empty() || line.front() == '#') continue;

        std::istringstream fields(line);
        if (n < 0) {
            std::string extra;
            if (!(fields >> n) || (fields >> extra))
                throw ParseError("expected the agent count", line_no);
            if (n < 2) throw ParseError("agent count must be at least 2", line_no);
            continue;
        }

        int i = 0, j = 0;
        std::string extra;
        if (!(fields >> i >> j) || (fields >> extra))
            throw ParseError("expected an edge \"i j\"", line_no);
        if (i < 1 || i > n || j < 1 || j > n)
            throw ParseError("agent index out of range [1, " + std::to_string(n) + "]",
                             line_no);
        if (i == j) throw ParseError("self-loop", line_no);
        unique.emplace(std::min(i, j) - 1, std::max(i, j) - 1);
    }
    if (n < 0) throw ParseError("expected the agent count", line_no + 1);

    return make_topology(n, {unique.begin(), unique.end()});
}

std::vector<int> unreachable_agents(const Topology& topology) {
    std::vector<std::vector<int>> adj(topology.n);
    for (auto [i, j] : topology.edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    std::vector<bool> seen(topology.n, false);
    std::deque<int> queue{0};
    seen[0] = true;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int w : adj[v]) {
            if (!seen[w]) {
                seen[w] = true;
                queue.push_back(w);
            }
        }
    }
    std::vector<int> missing;
    for (int v = 0; v < topology.n; ++v)
        if (!seen[v]) missing.push_back(v);
    return missing;
}

bool is_connected(const Topology& topology) {
    return unreachable_agents(topology).empty();
}

Eigen::MatrixXd adjacency(const Topology& topology) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(topology.n, topology.n);
    for (auto [i, j] : topology.edges) {
        a(i, j) = 1.0;
        a(j, i) = 1.0;
    }
    return a;
}

Eigen::MatrixXd laplacian(const Topology& topology) {
    Eigen::MatrixXd l = -adjacency(topology);
    for (int i = 0; i < topology.n; ++i) l(i, i) = topology.degrees[i];
    return l;
}

Eigen::MatrixXd weighted_adjacency(const Topology& topology) {
    for (int i = 0; i < topology.n; ++i)
        if (topology.degrees[i] == 0)
            throw ArgumentError("agent " + std::to_string(i + 1) + " has no informers");
    Eigen::MatrixXd c = adjacency(topology);
    for (int i = 0; i < topology.n; ++i) c.row(i) /= double(topology.degrees[i]);
    return c;
}

double special_eigenvalue(ProtocolKind kind) noexcept {
    return kind == ProtocolKind::NoSelfDelay ? 1.0 : 0.0;
}

namespace {

void require_connected(const Topology& topology) {
    const auto missing = unreachable_agents(topology);
    if (missing.empty()) return;
    std::string agents;
    for (int v : missing) {
        if (!agents.empty()) agents += ", ";
        agents += std::to_string(v + 1);
    }
    throw ConnectivityError("topology is not connected; agents unreachable from agent 1: " +
                            agents);
}

}  // namespace

Spectrum spectrum(const Topology& topology, ProtocolKind kind) {
    require_connected(topology);
    const int n = topology.n;

    Eigen::VectorXd values;
    Eigen::MatrixXd t, tinv;

    if (kind == ProtocolKind::SelfDelay) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian(topology));
        if (solver.info() != Eigen::Success)
            throw SpectralError("Laplacian eigendecomposition failed");
        values = solver.eigenvalues();
        t = solver.eigenvectors();
        tinv = t.transpose();
    } else {
        // Similarity through D^(1/2) keeps the problem symmetric: the
        // weighted adjacency C = D^-1 A and S = D^(-1/2) A D^(-1/2) share
        // eigenvalues, and C's eigenvectors are D^(-1/2) times S's.
        Eigen::VectorXd sqrt_deg(n);
        for (int i = 0; i < n; ++i) sqrt_deg(i) = std::sqrt(double(topology.degrees[i]));
        const Eigen::MatrixXd a = adjacency(topology);
        const Eigen::MatrixXd s =
            sqrt_deg.cwiseInverse().asDiagonal() * a * sqrt_deg.cwiseInverse().asDiagonal();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(s);
        if (solver.info() != Eigen::Success)
            throw SpectralError("weighted adjacency eigendecomposition failed");
        values = solver.eigenvalues();
        t = sqrt_deg.cwiseInverse().asDiagonal() * solver.eigenvectors();
        tinv = solver.eigenvectors().transpose() * sqrt_deg.asDiagonal();
    }

    const double target = special_eigenvalue(kind);
    int special = 0;
    for (int i = 1; i < n; ++i)
        if (std::abs(values(i) - target) < std::abs(values(special) - target)) special = i;
    if (std::abs(values(special) - target) >= kSpecialDetectTol)
        throw SpectralError("consensus eigenvalue not found within tolerance");

    // Solver order is ascending; moving the special eigenvalue to the front
    // keeps the remainder ascending with original order preserved on ties.
    std::vector<int> order;
    order.reserve(n);
    order.push_back(special);
    for (int i = 0; i < n; ++i)
        if (i != special) order.push_back(i);

    Spectrum result;
    result.kind = kind;
    result.eigenvalues.resize(n);
    result.transform.resize(n, n);
    result.inverse_transform.resize(n, n);
    for (int i = 0; i < n; ++i) {
        result.eigenvalues(i) = values(order[i]);
        result.transform.col(i) = t.col(order[i]);
        result.inverse_transform.row(i) = tinv.row(order[i]);
    }
    result.special_index = 0;

    // Connectivity makes the consensus eigenvalue simple.
    const double gap = kind == ProtocolKind::SelfDelay
                           ? result.eigenvalues(1)
                           : 1.0 - result.eigenvalues(1);
    if (n > 1 && gap <= kSimpleGapTol)
        throw SpectralError("consensus eigenvalue is not simple");

    return result;
}

double anderson_bound(const Topology& topology) {
    return 2.0 * double(*std::max_element(topology.degrees.begin(), topology.degrees.end()));
}

double absolute_exigent_eigenvalue(ProtocolKind kind, std::optional<int> agent_count) {
    if (kind == ProtocolKind::NoSelfDelay) return -1.0;
    if (!agent_count)
        throw ArgumentError("agent count is required for the self-delay protocol");
    if (*agent_count < 2) throw ArgumentError("agent count must be at least 2");
    return double(*agent_count);
}

}  // namespace consensus
