// Integration tests that drive the command-line binary end to end.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

namespace fs = std::filesystem;

int failures = 0;

void expect(bool ok, const std::string& what) {
    if (!ok) {
        ++failures;
        std::cerr << "FAILED: " << what << '\n';
    }
}

struct RunResult {
    int exit_code = -1;
    std::string output;
};

RunResult run(const std::string& args) {
    const std::string command = std::string(CONSENSUS_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    if (!pipe) return {};
    RunResult result;
    char buffer[4096];
    while (std::size_t n = std::fread(buffer, 1, sizeof buffer, pipe))
        result.output.append(buffer, n);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

bool contains(const std::string& text, const std::string& needle) {
    return text.find(needle) != std::string::npos;
}

}  // namespace

int main() {
    const fs::path dir = fs::temp_directory_path() / "consensus_cli_tests";
    fs::remove_all(dir);
    fs::create_directories(dir);

    const fs::path hub = dir / "hub.topo";
    write_file(hub, "6\n1 2\n1 4\n2 4\n3 4\n4 5\n3 6\n5 6\n");
    const fs::path ring = dir / "ring.topo";
    write_file(ring, "6\n1 2\n2 3\n3 4\n4 5\n5 6\n6 1\n");
    const fs::path pair = dir / "pair.topo";
    write_file(pair, "2\n1 2\n");
    const fs::path split = dir / "split.topo";
    write_file(split, "4\n1 2\n3 4\n");
    const fs::path broken = dir / "broken.topo";
    write_file(broken, "3\n1 1\n");

    // spectrum
    {
        const RunResult r = run("spectrum " + hub.string() + " --protocol b");
        expect(r.exit_code == 0, "spectrum hub exits 0");
        expect(contains(r.output, "agents: 6"), "spectrum prints the agent count");
        expect(contains(r.output, "connected: yes"), "spectrum prints connectivity");
        expect(contains(r.output, "anderson bound: 8"), "spectrum prints the degree bound");
        expect(contains(r.output, "largest Laplacian eigenvalue"),
               "spectrum flags the self-delay exigent eigenvalue");

        const RunResult a = run("spectrum " + ring.string() + " --protocol a");
        expect(a.exit_code == 0, "spectrum ring exits 0");
        expect(contains(a.output, "most exigent eigenvalue: -1"),
               "ring exigent eigenvalue is -1");
        expect(!contains(a.output, "anderson"), "no degree bound for protocol a");

        expect(run("spectrum " + split.string() + " --protocol a").exit_code == 3,
               "disconnected topology exits 3");
        expect(contains(run("spectrum " + split.string() + " --protocol a").output, "3, 4"),
               "disconnected message names unreachable agents");
        expect(run("spectrum " + broken.string() + " --protocol a").exit_code == 2,
               "self-loop file exits 2");
        expect(run("spectrum " + (dir / "missing.topo").string() + " --protocol a")
                       .exit_code == 2,
               "missing file exits 2");
    }

    // margin
    {
        const fs::path csv = dir / "margin.csv";
        const RunResult r = run("margin " + pair.string() +
                                " --protocol a --k1 1 --k2 1 --csv " + csv.string());
        expect(r.exit_code == 0, "margin exits 0");
        expect(contains(r.output, "margin: 1.35102172 at lambda = -1"),
               "margin reports the pair crossing");
        expect(read_file(csv) == "lambda,omega,tau\n-1,1.41421356,1.35102172\n",
               "margin CSV is exact");

        expect(run("margin " + pair.string() + " --protocol a --k1 0 --k2 1").exit_code == 4,
               "nonpositive gain exits 4");

        // Ring eigenvalues +-0.5 have no crossing at these gains.
        const RunResult inf_row =
            run("margin " + ring.string() + " --protocol a --k1 1 --k2 2");
        expect(inf_row.exit_code == 0, "crossing-free margin exits 0");
        expect(contains(inf_row.output, "0.5,inf,inf"), "crossing-free factor prints inf");
    }

    // bound
    {
        const RunResult r =
            run("bound --protocol a --k1-range 1:1 --k2-range 1:1 --grid 1x1");
        expect(r.exit_code == 0, "bound exits 0");
        expect(contains(r.output, "k1,k2,tau"), "bound prints the CSV header");
        expect(contains(r.output, "1,1,1.35102172"), "bound prints the point margin");

        const fs::path csv = dir / "surface.csv";
        expect(run("bound --protocol b --n 6 --k1-range 1:2 --k2-range 1:2 --grid 3x2 --csv " +
                   csv.string())
                       .exit_code == 0,
               "bound writes a surface file");
        std::istringstream lines(read_file(csv));
        std::string line;
        int rows = 0;
        while (std::getline(lines, line))
            if (!line.empty()) ++rows;
        expect(rows == 7, "3x2 surface has 6 rows plus header");

        expect(run("bound --protocol a --k1-range 2:1 --k2-range 1:2 --grid 2x2").exit_code ==
                   4,
               "inverted range exits 4");
        expect(run("bound --protocol b --k1-range 1:2 --k2-range 1:2 --grid 2x2").exit_code ==
                   4,
               "protocol b without --n exits 4");
    }

    // simulate
    {
        const fs::path config = dir / "fixed.cfg";
        write_file(config,
                   "protocol a\nk1 1\nk2 1\ntau 0.2\nt_end 60\ntopology hub.topo\nseed 4\n");
        const fs::path trace_csv = dir / "trace.csv";
        const fs::path analysis_csv = dir / "analysis.csv";
        const RunResult r = run("simulate " + config.string() + " --csv " +
                                trace_csv.string() + " --analysis " + analysis_csv.string());
        expect(r.exit_code == 0, "simulate exits 0");
        expect(contains(r.output, "verdict: consensus"), "fixed stable run reaches consensus");
        expect(contains(read_file(trace_csv), "t,x1,v1,"), "trace CSV has the state header");
        expect(contains(read_file(trace_csv), "# seed 4"), "trace CSV records the seed");
        expect(contains(read_file(analysis_csv),
                        "t,centroid,centroid_vel,disagreement_norm,full_norm"),
               "analysis CSV has the derived header");

        // Identical invocations give byte-identical files.
        const std::string first = read_file(trace_csv);
        run("simulate " + config.string() + " --csv " + trace_csv.string());
        expect(read_file(trace_csv) == first, "simulate output is deterministic");

        const fs::path divergent = dir / "divergent.cfg";
        write_file(divergent,
                   "protocol a\nk1 1\nk2 1\ntau 1.6\nt_end 300\ntopology pair.topo\nseed 4\n");
        const RunResult d = run("simulate " + divergent.string());
        expect(d.exit_code == 0, "divergence is a result, not an error");
        expect(contains(d.output, "verdict: divergent"), "above-margin run diverges");

        const fs::path switching = dir / "switching.cfg";
        write_file(switching,
                   "protocol b\nk1 1\nk2 0.5\ntau 0.06\nt_end 40\ntopology hub.topo\n"
                   "topology2 ring.topo\nperiod 1.4\nduty 60\nseed 1\n");
        const RunResult s = run("simulate " + switching.string());
        expect(s.exit_code == 0, "switching simulate exits 0");
        expect(contains(s.output, "verdict: consensus"),
               "self-delay switching run reaches consensus");

        const fs::path bad_x0 = dir / "bad_x0.cfg";
        write_file(bad_x0,
                   "protocol a\nk1 1\nk2 1\ntau 0.1\nt_end 1\ntopology pair.topo\nx0 1,2,3\n");
        expect(run("simulate " + bad_x0.string()).exit_code == 5,
               "wrong x0 length exits 5");

        const fs::path bad_cfg = dir / "bad.cfg";
        write_file(bad_cfg, "protocol q\n");
        expect(run("simulate " + bad_cfg.string()).exit_code == 2,
               "malformed config exits 2");
    }

    // verify
    {
        const RunResult r = run("verify");
        expect(r.exit_code == 0, "verify exits 0 on a healthy build");
        expect(contains(r.output, "all checks passed"), "verify summarizes success");
        expect(!contains(r.output, "FAIL"), "verify reports no failures");
    }

    if (failures == 0) std::cout << "cli tests passed\n";
    return failures == 0 ? 0 : 1;
}
