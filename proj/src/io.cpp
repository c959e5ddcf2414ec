#include "consensus/io.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "consensus/errors.hpp"

namespace consensus {

namespace {

std::string trimmed(std::string line) {
    const auto is_space = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!line.empty() && is_space(line.back())) line.pop_back();
    std::size_t start = 0;
    while (start < line.size() && is_space(line[start])) ++start;
    return line.substr(start);
}

double parse_double(const std::string& value, int line_no, const std::string& key) {
    std::size_t used = 0;
    double parsed = 0.0;
    try {
        parsed = std::stod(value, &used);
    } catch (const std::exception&) {
        throw ParseError("bad numeric value for " + key, line_no);
    }
    if (used != value.size()) throw ParseError("bad numeric value for " + key, line_no);
    return parsed;
}

}  // namespace

SimFileConfig parse_sim_config(std::string_view text) {
    std::istringstream stream{std::string(text)};
    std::string raw;
    int line_no = 0;

    SimFileConfig config;
    bool have_protocol = false, have_k1 = false, have_k2 = false, have_tau = false,
         have_t_end = false;

    while (std::getline(stream, raw)) {
        ++line_no;
        const std::string line = trimmed(raw);
        if (line.empty() || line.front() == '#') continue;

        const std::size_t split = line.find_first_of(" \t");
        if (split == std::string::npos)
            throw ParseError("expected \"key value\"", line_no);
        const std::string key = line.substr(0, split);
        const std::string value = trimmed(line.substr(split + 1));
        if (value.empty()) throw ParseError("missing value for " + key, line_no);

        if (key == "protocol") {
            const auto kind = protocol_from_letter(value);
            if (!kind) throw ParseError("protocol must be 'a' or 'b'", line_no);
            config.kind = *kind;
            have_protocol = true;
        } else if (key == "k1") {
            config.k1 = parse_double(value, line_no, key);
            have_k1 = true;
        } else if (key == "k2") {
            config.k2 = parse_double(value, line_no, key);
            have_k2 = true;
        } else if (key == "tau") {
            config.tau = parse_double(value, line_no, key);
            have_tau = true;
        } else if (key == "t_end") {
            config.t_end = parse_double(value, line_no, key);
            have_t_end = true;
        } else if (key == "step") {
            config.step = parse_double(value, line_no, key);
        } else if (key == "topology") {
            config.topology = value;
        } else if (key == "topology2") {
            config.topology2 = value;
        } else if (key == "period") {
            config.period = parse_double(value, line_no, key);
        } else if (key == "duty") {
            config.duty = parse_double(value, line_no, key);
        } else if (key == "seed") {
            try {
                config.seed = std::stoull(value);
            } catch (const std::exception&) {
                throw ParseError("bad seed", line_no);
            }
        } else if (key == "x0") {
            std::vector<double> entries;
            std::string item;
            std::istringstream values(value);
            while (std::getline(values, item, ',')) {
                item = trimmed(item);
                if (item.empty()) throw ParseError("empty entry in x0", line_no);
                entries.push_back(parse_double(item, line_no, key));
            }
            if (entries.empty()) throw ParseError("empty x0", line_no);
            Eigen::VectorXd x0(Eigen::Index(entries.size()));
            for (std::size_t i = 0; i < entries.size(); ++i) x0(Eigen::Index(i)) = entries[i];
            config.x0 = std::move(x0);
        } else {
            throw ParseError("unknown key \"" + key + "\"", line_no);
        }
    }

    const auto missing = [&](const char* key) {
        throw ParseError(std::string("missing required key \"") + key + "\"", line_no + 1);
    };
    if (!have_protocol) missing("protocol");
    if (!have_k1) missing("k1");
    if (!have_k2) missing("k2");
    if (!have_tau) missing("tau");
    if (!have_t_end) missing("t_end");
    if (config.topology.empty()) missing("topology");

    const bool wants_switching =
        config.topology2 || config.period || config.duty;
    if (wants_switching && !(config.topology2 && config.period && config.duty))
        throw ParseError("switching runs need topology2, period and duty together",
                         line_no + 1);
    return config;
}

std::string format_sig9(double value) {
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.9g", value);
    return buffer;
}

void write_surface_csv(std::ostream& out, const BoundarySurface& surface) {
    out << "k1,k2,tau\n";
    for (Eigen::Index i = 0; i < surface.k1_values.size(); ++i)
        for (Eigen::Index j = 0; j < surface.k2_values.size(); ++j)
            out << format_sig9(surface.k1_values(i)) << ','
                << format_sig9(surface.k2_values(j)) << ','
                << format_sig9(surface.tau(i, j)) << '\n';
}

void write_margin_csv(std::ostream& out, const DelayMargin& margin) {
    out << "lambda,omega,tau\n";
    for (const FactorCrossing& crossing : margin.per_factor)
        out << format_sig9(crossing.lambda) << ',' << format_sig9(crossing.omega) << ','
            << format_sig9(crossing.tau) << '\n';
}

void write_trace_csv(std::ostream& out, const Trace& trace,
                     std::optional<std::uint64_t> seed) {
    out << "# step " << format_sig9(trace.step) << '\n';
    if (seed) out << "# seed " << *seed << '\n';
    for (double t : trace.switch_times) out << "# switch " << format_sig9(t) << '\n';

    const Eigen::Index n = trace.states.cols() / 2;
    out << 't';
    for (Eigen::Index i = 1; i <= n; ++i) out << ",x" << i << ",v" << i;
    out << '\n';
    for (Eigen::Index s = 0; s < trace.times.size(); ++s) {
        out << format_sig9(trace.times(s));
        for (Eigen::Index c = 0; c < trace.states.cols(); ++c)
            out << ',' << format_sig9(trace.states(s, c));
        out << '\n';
    }
    if (trace.diverged) out << "# aborted\n";
}

void write_analysis_csv(std::ostream& out, const DecisionTrace& decision,
                        const DisagreementTrace& dtrace) {
    if (decision.times.size() != dtrace.times.size())
        throw DimensionError("decision and disagreement traces differ in length");
    out << "t,centroid,centroid_vel,disagreement_norm,full_norm\n";
    for (Eigen::Index s = 0; s < decision.times.size(); ++s)
        out << format_sig9(decision.times(s)) << ',' << format_sig9(decision.position(s))
            << ',' << format_sig9(decision.velocity(s)) << ','
            << format_sig9(dtrace.norm(s)) << ',' << format_sig9(dtrace.full_norm(s))
            << '\n';
    for (const auto& [t, magnitude] : dtrace.jumps)
        out << "# jump " << format_sig9(t) << ' ' << format_sig9(magnitude) << '\n';
    if (dtrace.aborted) out << "# aborted\n";
}

}  // namespace consensus
