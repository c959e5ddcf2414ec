#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "consensus/analysis.hpp"
#include "consensus/dynamics.hpp"
#include "consensus/errors.hpp"
#include "consensus/graph.hpp"
#include "consensus/io.hpp"
#include "consensus/stability.hpp"
#include "consensus/verify.hpp"

using namespace consensus;

namespace {

constexpr int kExitGeneric = 1;
constexpr int kExitParse = 2;
constexpr int kExitConnectivity = 3;
constexpr int kExitArgument = 4;
constexpr int kExitDimension = 5;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open " + path, 0);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << content;
}

ProtocolKind parse_protocol(const std::string& text) {
    const auto kind = protocol_from_letter(text);
    if (!kind) throw ArgumentError("protocol must be 'a' or 'b'");
    return *kind;
}

std::pair<double, double> parse_range(const std::string& text, const char* name) {
    const auto split = text.find(':');
    if (split == std::string::npos)
        throw ArgumentError(std::string(name) + " must look like lo:hi");
    try {
        return {std::stod(text.substr(0, split)), std::stod(text.substr(split + 1))};
    } catch (const std::exception&) {
        throw ArgumentError(std::string(name) + " must look like lo:hi");
    }
}

std::pair<int, int> parse_grid(const std::string& text) {
    const auto split = text.find_first_of("xX");
    if (split == std::string::npos) throw ArgumentError("--grid must look like KxM");
    try {
        return {std::stoi(text.substr(0, split)), std::stoi(text.substr(split + 1))};
    } catch (const std::exception&) {
        throw ArgumentError("--grid must look like KxM");
    }
}

int cmd_spectrum(const std::string& path, const std::string& protocol) {
    const ProtocolKind kind = parse_protocol(protocol);
    const Topology topology = parse_topology(read_file(path));
    std::cout << "agents: " << topology.n << '\n';
    std::cout << "edges: " << topology.edges.size() << '\n';
    std::cout << "connected: " << (is_connected(topology) ? "yes" : "no") << '\n';

    const Spectrum spec = spectrum(topology, kind);
    std::cout << "eigenvalues:";
    for (Eigen::Index i = 0; i < spec.eigenvalues.size(); ++i)
        std::cout << ' ' << format_sig9(spec.eigenvalues(i));
    std::cout << '\n';

    const double exigent = kind == ProtocolKind::NoSelfDelay
                               ? spec.eigenvalues.minCoeff()
                               : spec.eigenvalues.maxCoeff();
    std::cout << "most exigent eigenvalue: " << format_sig9(exigent)
              << (kind == ProtocolKind::NoSelfDelay
                      ? " (smallest weighted-adjacency eigenvalue)"
                      : " (largest Laplacian eigenvalue)")
              << '\n';
    if (kind == ProtocolKind::SelfDelay)
        std::cout << "anderson bound: " << format_sig9(anderson_bound(topology)) << '\n';
    return 0;
}

int cmd_margin(const std::string& path, const std::string& protocol, double k1, double k2,
               const std::string& csv_path) {
    const ProtocolParams params{parse_protocol(protocol), k1, k2};
    const Topology topology = parse_topology(read_file(path));
    const Spectrum spec = spectrum(topology, params.kind);
    const DelayMargin margin = topology_margin(spec, params);

    std::cout << "lambda,omega,tau\n";
    for (const FactorCrossing& crossing : margin.per_factor)
        std::cout << format_sig9(crossing.lambda) << ',' << format_sig9(crossing.omega)
                  << ',' << format_sig9(crossing.tau) << '\n';
    if (std::isfinite(margin.margin))
        std::cout << "margin: " << format_sig9(margin.margin)
                  << " at lambda = " << format_sig9(margin.exigent_lambda) << '\n';
    else
        std::cout << "margin: inf (no factor crosses)\n";

    if (!csv_path.empty()) {
        std::ostringstream csv;
        write_margin_csv(csv, margin);
        write_file(csv_path, csv.str());
    }
    return 0;
}

int cmd_bound(const std::string& protocol, const std::string& k1_range,
              const std::string& k2_range, const std::string& grid, std::optional<int> n,
              const std::string& csv_path) {
    const ProtocolKind kind = parse_protocol(protocol);
    const BoundarySurface surface =
        boundary_surface(kind, parse_range(k1_range, "--k1-range"),
                         parse_range(k2_range, "--k2-range"), parse_grid(grid), n);
    std::ostringstream csv;
    write_surface_csv(csv, surface);
    if (csv_path.empty())
        std::cout << csv.str();
    else
        write_file(csv_path, csv.str());
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& trace_path,
                 const std::string& analysis_path) {
    const SimFileConfig file = parse_sim_config(read_file(config_path));
    const auto base = std::filesystem::path(config_path).parent_path();
    const auto resolve = [&](const std::string& path) {
        const std::filesystem::path p(path);
        return p.is_absolute() ? p.string() : (base / p).string();
    };

    SimConfig config;
    config.params = {file.kind, file.k1, file.k2};
    config.tau = file.tau;
    config.t_end = file.t_end;
    config.step = file.step;
    config.topologies.push_back(parse_topology(read_file(resolve(file.topology))));
    if (file.topology2) {
        config.topologies.push_back(parse_topology(read_file(resolve(*file.topology2))));
        config.schedule = SwitchingSchedule{*file.period, *file.duty};
    }

    const int n = config.topologies.front().n;
    std::optional<std::uint64_t> seed;
    if (file.x0) {
        if (file.x0->size() != 2 * n)
            throw DimensionError("x0 must list 2n values");
        config.initial_state = *file.x0;
    } else {
        seed = file.seed.value_or(0);
        config.initial_state = default_initial_state(n, *seed);
    }

    const Trace trace = simulate(config);

    std::vector<Spectrum> spectra;
    for (const auto& topology : config.topologies)
        spectra.push_back(spectrum(topology, file.kind));
    const DecisionTrace decision = centroid(trace, config.topologies, file.kind);
    const DisagreementTrace dtrace = disagreement(trace, spectra);
    const Outcome outcome = detect_outcome(dtrace);

    std::cout << "step: " << format_sig9(trace.step) << '\n';
    if (seed) std::cout << "seed: " << *seed << '\n';
    std::cout << "switches: " << trace.switch_times.size() << '\n';
    std::cout << "verdict: " << verdict_name(outcome.verdict);
    if (outcome.verdict == Verdict::Consensus)
        std::cout << " (t* = " << format_sig9(outcome.consensus_time) << ')';
    std::cout << '\n';

    if (!trace_path.empty()) {
        std::ostringstream csv;
        write_trace_csv(csv, trace, seed);
        write_file(trace_path, csv.str());
    }
    if (!analysis_path.empty()) {
        std::ostringstream csv;
        write_analysis_csv(csv, decision, dtrace);
        write_file(analysis_path, csv.str());
    }
    return 0;
}

int cmd_verify() {
    const auto checks = run_verification();
    bool all = true;
    for (const auto& check : checks) {
        std::cout << (check.passed ? "PASS" : "FAIL") << "  " << check.name;
        if (!check.detail.empty()) std::cout << " (" << check.detail << ')';
        std::cout << '\n';
        all = all && check.passed;
    }
    std::cout << (all ? "all checks passed" : "some checks FAILED") << '\n';
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Delay margins and delayed simulation of second-order consensus protocols"};
    app.require_subcommand(1);

    std::string topology_path, protocol = "a", csv_path, analysis_path, config_path;
    std::string k1_range = "0.5:10", k2_range = "0.1:5", grid = "50x50";
    double k1 = 1.0, k2 = 1.0;
    int n_agents = 0;

    auto* spectrum_cmd = app.add_subcommand("spectrum", "Eigenstructure of a topology");
    spectrum_cmd->add_option("topology", topology_path, "topology file")->required();
    spectrum_cmd->add_option("--protocol", protocol, "protocol letter (a|b)")->required();

    auto* margin_cmd = app.add_subcommand("margin", "Delay margin of a topology");
    margin_cmd->add_option("topology", topology_path, "topology file")->required();
    margin_cmd->add_option("--protocol", protocol, "protocol letter (a|b)")->required();
    margin_cmd->add_option("--k1", k1, "position gain")->required();
    margin_cmd->add_option("--k2", k2, "velocity gain")->required();
    margin_cmd->add_option("--csv", csv_path, "write per-factor crossings as CSV");

    auto* bound_cmd =
        app.add_subcommand("bound", "Topology-independent stability boundary surface");
    bound_cmd->add_option("--protocol", protocol, "protocol letter (a|b)")->required();
    bound_cmd->add_option("--k1-range", k1_range, "k1 range lo:hi");
    bound_cmd->add_option("--k2-range", k2_range, "k2 range lo:hi");
    bound_cmd->add_option("--grid", grid, "grid size KxM");
    bound_cmd->add_option("--n", n_agents, "agent count (protocol b)");
    bound_cmd->add_option("--csv", csv_path, "output file (stdout when omitted)");

    auto* simulate_cmd = app.add_subcommand("simulate", "Integrate a delayed consensus run");
    simulate_cmd->add_option("config", config_path, "simulation config file")->required();
    simulate_cmd->add_option("--csv", csv_path, "write the trace CSV here");
    simulate_cmd->add_option("--analysis", analysis_path, "write the analysis CSV here");

    auto* verify_cmd = app.add_subcommand("verify", "Run the built-in property checks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (spectrum_cmd->parsed()) return cmd_spectrum(topology_path, protocol);
        if (margin_cmd->parsed()) return cmd_margin(topology_path, protocol, k1, k2, csv_path);
        if (bound_cmd->parsed())
            return cmd_bound(protocol, k1_range, k2_range, grid,
                             bound_cmd->count("--n") ? std::optional<int>(n_agents)
                                                     : std::nullopt,
                             csv_path);
        if (simulate_cmd->parsed()) return cmd_simulate(config_path, csv_path, analysis_path);
        if (verify_cmd->parsed()) return cmd_verify();
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const ConnectivityError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConnectivity;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitArgument;
    } catch (const DimensionError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitDimension;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitGeneric;
    }
    return kExitGeneric;
}
