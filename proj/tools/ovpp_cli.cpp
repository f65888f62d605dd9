// Command-line front end for the verifiable pre-processing workflow: one-time
// setup, recurring runs, attack drills, benchmarks, and chain export.
//
// Exit codes: 0 success, 1 usage error, 2 verification failure, 3 I/O error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ovpp/adversary.hpp"
#include "ovpp/workflow.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitVerification = 2;
constexpr int kExitIo = 3;

void write_output(const std::string& content, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + out_path);
    out << content;
}

std::vector<uint64_t> parse_params(const std::string& csv) {
    std::vector<uint64_t> params;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) params.push_back(std::stoull(tok));
    return params;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Verifiable sensor-data pre-processing with on-chain verification"};
    app.require_subcommand(1);

    std::string manifest_path, artifacts_dir = "artifacts", out_path;
    std::string backend_str = "cs", strategy_str, mode_str = "size";
    std::string params_csv = "1,4,8,16,32";
    unsigned repetitions = 3;
    uint64_t seed = 1;
    std::vector<std::string> batch_files;

    auto* cmd_setup = app.add_subcommand("setup", "One-time setup: keys, artifacts, deployment");
    cmd_setup->add_option("--manifest", manifest_path, "Workflow manifest (JSON)")->required();
    cmd_setup->add_option("--artifacts", artifacts_dir, "Artifact output directory");

    auto* cmd_run = app.add_subcommand("run", "Process batch files and submit evidence");
    cmd_run->add_option("--artifacts", artifacts_dir, "Artifact directory from setup");
    cmd_run->add_option("batches", batch_files, "Batch files (*.batch)")->required();

    auto* cmd_attack = app.add_subcommand("attack", "Run a tamper strategy and report detection");
    cmd_attack->add_option("--strategy", strategy_str,
                           "program|input|auxiliary|evidence|replay")->required();
    cmd_attack->add_option("--backend", backend_str, "cs|tee");
    cmd_attack->add_option("--seed", seed, "Scenario seed");
    cmd_attack->add_option("--out", out_path, "Report file (default stdout)");

    auto* cmd_bench = app.add_subcommand("bench", "Benchmark evidence generation/verification");
    cmd_bench->add_option("--backend", backend_str, "cs|tee");
    cmd_bench->add_option("--mode", mode_str, "size|count");
    cmd_bench->add_option("--params", params_csv, "Comma-separated parameter list");
    cmd_bench->add_option("--repetitions", repetitions, "Repetitions per parameter");
    cmd_bench->add_option("--out", out_path, "CSV output file (default stdout)");

    auto* cmd_export = app.add_subcommand("export-chain", "Dump the simulated chain state");
    cmd_export->add_option("--artifacts", artifacts_dir, "Artifact directory from setup");
    cmd_export->add_option("--out", out_path, "Output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    using namespace ovpp;
    try {
        if (*cmd_setup) {
            auto manifest = workflow::load_manifest(manifest_path);
            workflow::setup_workflow(manifest, artifacts_dir);
            std::cout << "setup complete: " << artifacts_dir << "\n";
            return kExitOk;
        }
        if (*cmd_run) {
            std::vector<std::filesystem::path> files(batch_files.begin(), batch_files.end());
            auto receipts = workflow::run_batches(artifacts_dir, files);
            bool all_accepted = true;
            for (const auto& rc : receipts) {
                std::cout << rc.batch_file << ": "
                          << (rc.accepted ? "accepted" : "rejected (" + rc.reason + ")");
                if (rc.violation_count) std::cout << " violations=" << *rc.violation_count;
                std::cout << " cost=" << rc.cost_units << "\n";
                all_accepted = all_accepted && rc.accepted;
            }
            return all_accepted ? kExitOk : kExitVerification;
        }
        if (*cmd_attack) {
            auto kind = adversary::kind_from_name(strategy_str);
            auto backend = backend_from_name(backend_str);
            auto strategy = adversary::make_strategy(kind, seed);
            auto outcome = adversary::run_attack(strategy, backend, seed);
            write_output(adversary::outcome_to_json_line(strategy, backend, seed, outcome) + "\n",
                         out_path);
            return outcome.detected ? kExitOk : kExitVerification;
        }
        if (*cmd_bench) {
            auto backend = backend_from_name(backend_str);
            auto mode = mode_str == "size"    ? workflow::BenchMode::size
                        : mode_str == "count" ? workflow::BenchMode::count
                                              : throw CLI::ValidationError("mode", "size|count");
            auto rows = workflow::run_bench(backend, mode, parse_params(params_csv), repetitions);
            write_output(workflow::bench_to_csv(rows), out_path);
            return kExitOk;
        }
        if (*cmd_export) {
            write_output(workflow::export_chain(artifacts_dir), out_path);
            return kExitOk;
        }
    } catch (const CLI::Error& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const ovpp::workflow::WorkflowError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    }
    return kExitUsage;
}
