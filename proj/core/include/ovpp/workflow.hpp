#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ovpp/chain.hpp"
#include "ovpp/cs.hpp"
#include "ovpp/tee.hpp"

namespace ovpp {
namespace workflow {

/// Deployment manifest: everything needed to set up and run one workflow.
/// Round-trips losslessly through its JSON file encoding.
struct WorkflowManifest {
    std::string workflow_id;
    BackendId backend = BackendId::constraint_system;
    int64_t threshold = 0;
    uint64_t scale_divisor = 1;
    std::string rule_id;
    uint32_t batch_size = 1;
    std::string sensor_key_file;  // relative to the artifact directory
    // Filled in by setup.
    std::optional<std::string> reference_measurement_hex;    // enclave backend
    std::optional<std::string> verification_key_digest_hex;  // cs backend

    AuxiliaryData aux() const { return AuxiliaryData{threshold, scale_divisor, rule_id}; }
};

std::string manifest_to_json(const WorkflowManifest& m);
WorkflowManifest manifest_from_json(const std::string& text);
WorkflowManifest load_manifest(const std::filesystem::path& path);
void save_manifest(const WorkflowManifest& m, const std::filesystem::path& path);

class WorkflowError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// One-time setup: generates keys and backend artifacts, deploys the
/// verification contract to the simulated chain, and writes everything into
/// artifact_dir. Refuses to overwrite an existing setup.
void setup_workflow(const WorkflowManifest& manifest, const std::filesystem::path& artifact_dir);

struct RunReceipt {
    std::string batch_file;
    bool accepted = false;
    std::string reason;
    std::optional<uint64_t> violation_count;
    uint64_t cost_units = 0;
};

/// Recurring operations: sign, pre-process, generate evidence, submit — one
/// receipt per batch file. A failing batch is reported and skipped.
std::vector<RunReceipt> run_batches(const std::filesystem::path& artifact_dir,
                                    const std::vector<std::filesystem::path>& batch_files);

std::vector<uint64_t> chain_outputs(const std::filesystem::path& artifact_dir,
                                    const std::string& workflow_id);
std::string export_chain(const std::filesystem::path& artifact_dir);

enum class BenchMode { size, count };

struct BenchRow {
    std::string backend;
    std::string mode;
    uint64_t param = 0;
    double mean_seconds = 0.0;
    double stddev = 0.0;
    uint64_t cost_units = 0;
};

/// Timing covers evidence generation plus on-chain verification of the
/// recurring path; one-time setup is excluded. Size mode runs one batch of
/// the given size, count mode runs that many size-one batches.
std::vector<BenchRow> run_bench(BackendId backend, BenchMode mode,
                                const std::vector<uint64_t>& params, unsigned repetitions);

/// CSV with header `backend,mode,param,mean_seconds,stddev,cost_units`.
std::string bench_to_csv(const std::vector<BenchRow>& rows);

}  // namespace workflow
}  // namespace ovpp
