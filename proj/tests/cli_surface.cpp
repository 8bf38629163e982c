// End-to-end checks of the command-line surface: exit codes, payload shapes,
// sidecar files, and payload determinism. Takes the CLI binary path as its
// first argument.

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include "json.hpp"

using nlohmann::json;

namespace {

std::string g_cli;
int g_failures = 0;

struct RunResult {
    int exit_code = -1;
    std::string stdout_text;
};

RunResult run(const std::string& args) {
    const std::string command = g_cli + " " + args + " 2>/dev/null";
    FILE* pipe = popen(command.c_str(), "r");
    RunResult result;
    if (!pipe) return result;
    char buffer[4096];
    std::size_t got = 0;
    while ((got = fread(buffer, 1, sizeof(buffer), pipe)) > 0)
        result.stdout_text.append(buffer, got);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

void check(const std::string& name, bool ok, const std::string& detail = "") {
    std::printf("%s %s%s%s\n", ok ? "ok  " : "FAIL", name.c_str(), detail.empty() ? "" : ": ",
                detail.c_str());
    if (!ok) ++g_failures;
}

json parse_envelope(const RunResult& result) {
    return json::parse(result.stdout_text, nullptr, false);
}

void check_envelope_shape() {
    const RunResult r = run("compute --synthetic quadratic:n=500:sigma=0 --method kb --degrees 2,1");
    check("compute exits 0", r.exit_code == 0);
    const json env = parse_envelope(r);
    check("envelope has the contract fields",
          env.contains("command") && env.contains("version") && env.contains("input_sha256") &&
              env.contains("config") && env.contains("results") && env.contains("timings_ms"));
    check("exact quadratic reaches 1 at degrees (2,1)",
          std::abs(env["results"]["value"].get<double>() - 1.0) <= 1e-8);
}

void check_reduction_consistency() {
    const std::string source = "--synthetic cubic:n=300:sigma=0.3:seed=6";
    const json kb = parse_envelope(run("compute " + source + " --method kb --degrees 1,1"));
    const json direct = parse_envelope(run("compute " + source + " --method pearson"));
    const double kb_value = kb["results"]["value"].get<double>();
    const double pearson_value = std::abs(direct["results"]["value"].get<double>());
    check("kb at (1,1) equals |pearson| through the cli",
          std::abs(kb_value - pearson_value) <= 1e-8);
}

void check_seeded_payload_determinism() {
    const std::string args = "compute --synthetic linear:n=200:sigma=0.5:seed=3 --method rdc --seed 7";
    const json first = parse_envelope(run(args));
    const json second = parse_envelope(run(args));
    check("rdc payload bytes repeat with the seed",
          first["results"].dump() == second["results"].dump());
}

void check_exit_codes() {
    check("invalid spec exits 2", run("compute --synthetic bad:n=10 --method kb").exit_code == 2);
    check("missing input exits 2", run("compute --method kb").exit_code == 2);
    check("unknown flag exits 2", run("compute --nope").exit_code == 2);

    std::ofstream constant("cli_surface_constant.csv");
    constant << "a,b\n1,2\n1,3\n1,4\n";
    constant.close();
    check("zero variance input exits 2",
          run("compute --input cli_surface_constant.csv --method pearson").exit_code == 2);
    std::remove("cli_surface_constant.csv");
}

void check_generate_roundtrip() {
    const RunResult gen =
        run("generate --spec quadratic:n=64:sigma=0.2:seed=5 --output cli_surface_data.csv");
    check("generate exits 0", gen.exit_code == 0);

    const json computed = parse_envelope(
        run("compute --input cli_surface_data.csv --method kb --degrees 2,2"));
    const json synthetic = parse_envelope(
        run("compute --synthetic quadratic:n=64:sigma=0.2:seed=5 --method kb --degrees 2,2"));
    const double via_file = computed["results"]["value"].get<double>();
    const double via_spec = synthetic["results"]["value"].get<double>();
    check("csv round trip preserves the indicator value", std::abs(via_file - via_spec) <= 1e-12,
          "file=" + std::to_string(via_file) + " spec=" + std::to_string(via_spec));
    std::remove("cli_surface_data.csv");
}

void check_scan_output() {
    const RunResult r = run(
        "scan --synthetic quadratic:n=300:sigma=0.1:seed=9 --max-degrees 3,2 --csv "
        "cli_surface_grid.csv");
    check("scan exits 0", r.exit_code == 0);
    const json env = parse_envelope(r);
    check("scan grid has the requested shape", env["results"]["grid"].size() == 3 &&
                                                   env["results"]["grid"][0].size() == 2);
    check("scan reports no monotonicity warnings here",
          env["results"]["monotonicity_warnings"].empty());

    std::ifstream grid_file("cli_surface_grid.csv");
    std::string header;
    std::getline(grid_file, header);
    check("scan csv sidecar exists with a header", header.rfind("h\\k", 0) == 0);
    std::remove("cli_surface_grid.csv");
}

void check_train_csv_path() {
    std::ofstream csv("cli_surface_train.csv");
    csv << "z,x,group,y\n";
    std::srand(1234);
    for (int i = 0; i < 120; ++i) {
        const double z = -1.0 + 2.0 * (i % 40) / 39.0;
        const double x = -1.0 + 2.0 * ((i * 7) % 40) / 39.0;
        const char* group = i % 3 == 0 ? "low" : (i % 3 == 1 ? "mid" : "high");
        const double y = z * z + 0.5 * x + 0.01 * ((i * 13) % 11 - 5);
        csv << z << "," << x << "," << group << "," << y << "\n";
    }
    csv.close();

    const RunResult r = run(
        "train --data cli_surface_train.csv --schema "
        "target=y,protected=z,categorical=group --penalizer none --folds 3 --epochs 30 --seed 2");
    check("train on csv exits 0", r.exit_code == 0);
    const json env = parse_envelope(r);
    check("train reports per-fold and aggregate blocks",
          env["results"].contains("folds") && env["results"].contains("aggregate") &&
              env["results"]["folds"].size() == 3);
    check("train aggregate carries score and both constraints",
          env["results"]["aggregate"].contains("score") &&
              env["results"]["aggregate"].contains("constraint_kb") &&
              env["results"]["aggregate"].contains("constraint_sk"));

    const json again = parse_envelope(run(
        "train --data cli_surface_train.csv --schema "
        "target=y,protected=z,categorical=group --penalizer none --folds 3 --epochs 30 --seed 2"));
    check("train payload repeats with the seed",
          env["results"].dump() == again["results"].dump());
    std::remove("cli_surface_train.csv");
}

void check_inspect_split() {
    const RunResult r = run(
        "inspect --synthetic circular:n=200:sigma=0.5:seed=1 --degrees 2,2 --test-split 0.5 "
        "--csv cli_surface_proj.csv");
    check("inspect exits 0", r.exit_code == 0);
    const json env = parse_envelope(r);
    check("inspect reports train and test blocks",
          env["results"].contains("train") && env["results"].contains("test"));
    const double reported = env["results"]["train"]["value"].get<double>();
    const double projected = env["results"]["projected_correlation"].get<double>();
    check("projected pair correlation equals the reported value",
          std::abs(projected - reported) <= 1e-8);

    std::ifstream proj("cli_surface_proj.csv");
    std::string header;
    std::getline(proj, header);
    check("inspect csv sidecar has the plot columns", header == "a,b,fa,gb");
    std::remove("cli_surface_proj.csv");
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::printf("usage: cli_surface <path-to-cli>\n");
        return 1;
    }
    g_cli = argv[1];

    check_envelope_shape();
    check_reduction_consistency();
    check_seeded_payload_determinism();
    check_exit_codes();
    check_generate_roundtrip();
    check_scan_output();
    check_train_csv_path();
    check_inspect_split();

    if (g_failures == 0) {
        std::printf("cli surface checks passed\n");
        return 0;
    }
    std::printf("%d cli surface check(s) failed\n", g_failures);
    return 1;
}
