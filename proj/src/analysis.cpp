#include "consensus/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "consensus/errors.hpp"

namespace consensus {

namespace {

// Active entry of a switching run at sample time t: every recorded switch
// toggles, starting from entry 0. Works unchanged for fixed runs (no
// switches) and for single-entry spans.
std::size_t active_entry(const std::vector<double>& switch_times, double t,
                         std::size_t count) {
    const auto upper = std::upper_bound(switch_times.begin(), switch_times.end(), t);
    return std::size_t(upper - switch_times.begin()) % count;
}

}  // namespace

DecisionTrace centroid(const Trace& trace, const std::vector<Topology>& topologies,
                       ProtocolKind kind) {
    if (topologies.empty()) throw ArgumentError("at least one topology is required");
    const Eigen::Index samples = trace.times.size();
    const int n = topologies.front().n;
    for (const auto& topology : topologies)
        if (topology.n != n) throw DimensionError("topologies must share the agent count");
    if (trace.states.cols() != 2 * n)
        throw DimensionError("trace state width does not match the topology");

    std::vector<Eigen::VectorXd> weights;
    for (const auto& topology : topologies) {
        Eigen::VectorXd w(n);
        if (kind == ProtocolKind::SelfDelay) {
            w.setConstant(1.0 / double(n));
        } else {
            double total = 0.0;
            for (int i = 0; i < n; ++i) total += topology.degrees[i];
            if (total == 0.0) throw ArgumentError("topology has no edges");
            for (int i = 0; i < n; ++i) w(i) = topology.degrees[i] / total;
        }
        weights.push_back(std::move(w));
    }

    DecisionTrace decision;
    decision.times = trace.times;
    decision.position.resize(samples);
    decision.velocity.resize(samples);
    for (Eigen::Index s = 0; s < samples; ++s) {
        const Eigen::VectorXd& w =
            weights[active_entry(trace.switch_times, trace.times(s), weights.size())];
        double pos = 0.0, vel = 0.0;
        for (int i = 0; i < n; ++i) {
            pos += w(i) * trace.states(s, 2 * i);
            vel += w(i) * trace.states(s, 2 * i + 1);
        }
        decision.position(s) = pos;
        decision.velocity(s) = vel;
    }
    return decision;
}

namespace {

struct TransformedNorms {
    double disagreement;
    double full;
};

TransformedNorms transformed_norms(const Eigen::MatrixXd& states, Eigen::Index row,
                                   const Spectrum& spec) {
    const int n = int(spec.eigenvalues.size());
    Eigen::MatrixXd agents(n, 2);
    for (int i = 0; i < n; ++i) {
        agents(i, 0) = states(row, 2 * i);
        agents(i, 1) = states(row, 2 * i + 1);
    }
    const Eigen::MatrixXd transformed = spec.inverse_transform * agents;
    return {transformed.bottomRows(n - 1).norm(), transformed.norm()};
}

}  // namespace

DisagreementTrace disagreement(const Trace& trace, const std::vector<Spectrum>& spectra) {
    if (spectra.empty()) throw ArgumentError("at least one spectrum is required");
    const int n = int(spectra.front().eigenvalues.size());
    for (const auto& spec : spectra) {
        if (int(spec.eigenvalues.size()) != n)
            throw DimensionError("spectra must share the agent count");
        if (spec.kind != spectra.front().kind)
            throw ArgumentError("spectra must share the protocol kind");
    }
    if (trace.states.cols() != 2 * n)
        throw DimensionError("trace state width does not match the transforms");

    const Eigen::Index samples = trace.times.size();
    DisagreementTrace dtrace;
    dtrace.times = trace.times;
    dtrace.aborted = trace.diverged;
    dtrace.norm.resize(samples);
    dtrace.full_norm.resize(samples);
    for (Eigen::Index s = 0; s < samples; ++s) {
        const std::size_t entry =
            active_entry(trace.switch_times, trace.times(s), spectra.size());
        const TransformedNorms norms = transformed_norms(trace.states, s, spectra[entry]);
        dtrace.norm(s) = norms.disagreement;
        dtrace.full_norm(s) = norms.full;
    }

    // The jump a switch induces is measured on one state sample with both
    // transforms, separating the transform change from the motion between
    // samples.
    for (std::size_t j = 0; j < trace.switch_times.size(); ++j) {
        const double t = trace.switch_times[j];
        const Eigen::Index row = Eigen::Index(std::llround(t / trace.step));
        if (row < 0 || row >= samples) continue;  // switch after an aborted tail
        const Spectrum& outgoing = spectra[j % spectra.size()];
        const Spectrum& incoming = spectra[(j + 1) % spectra.size()];
        const double before = transformed_norms(trace.states, row, outgoing).disagreement;
        const double after = transformed_norms(trace.states, row, incoming).disagreement;
        dtrace.jumps.emplace_back(t, std::abs(after - before));
    }
    return dtrace;
}

Outcome detect_outcome(const DisagreementTrace& dtrace, double epsilon_rel,
                       double growth_factor) {
    const Eigen::Index samples = dtrace.norm.size();
    if (samples == 0) throw ArgumentError("empty disagreement trace");

    const double initial = dtrace.norm(0);
    if (initial == 0.0) return {Verdict::Consensus, 0.0};
    if (dtrace.aborted) return {Verdict::Divergent, 0.0};

    const double threshold = epsilon_rel * initial;
    Eigen::Index last_above = -1;
    for (Eigen::Index s = samples - 1; s >= 0; --s) {
        if (dtrace.norm(s) >= threshold) {
            last_above = s;
            break;
        }
    }
    const Eigen::Index window = std::max<Eigen::Index>(
        1, Eigen::Index(std::ceil(0.05 * double(samples))));
    if (last_above < samples - window)
        return {Verdict::Consensus, dtrace.times(last_above + 1)};

    if (dtrace.norm(samples - 1) > growth_factor * initial)
        return {Verdict::Divergent, 0.0};
    return {Verdict::Undecided, 0.0};
}

const char* verdict_name(Verdict verdict) noexcept {
    switch (verdict) {
        case Verdict::Consensus: return "consensus";
        case Verdict::Divergent: return "divergent";
        default: return "undecided";
    }
}

}  // namespace consensus
