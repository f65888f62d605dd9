#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "ovpp/sensor.hpp"
#include "ovpp/workflow.hpp"

using namespace ovpp;
using namespace ovpp::workflow;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / "ovpp_workflow_test" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

WorkflowManifest base_manifest(const std::string& id, BackendId backend) {
    WorkflowManifest m;
    m.workflow_id = id;
    m.backend = backend;
    m.threshold = 50;
    m.scale_divisor = 10;
    m.rule_id = "rule-threshold";
    m.batch_size = 2;
    return m;
}

// Writes a batch file plus its meta sidecar and returns the batch path.
fs::path write_batch_files(const fs::path& dir, const std::string& stem, uint64_t seed,
                           uint64_t seq, uint32_t size = 2) {
    auto batch = generate_batch(size, 0, 100, seed, MetaData{"sensor-A", 1700000000 + seq, seq});
    auto path = dir / (stem + ".batch");
    write_batch(batch, path);
    auto meta_path = path;
    meta_path.replace_extension(".meta.json");
    write_meta(batch.meta, meta_path);
    return path;
}

uint64_t oracle_count(const fs::path& batch_file, int64_t threshold) {
    auto batch = load_batch(batch_file);
    uint64_t n = 0;
    for (const auto& m : batch.measurements)
        for (int64_t v : m.values)
            if (v > threshold) ++n;
    return n;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

TEST_CASE("manifest JSON round-trips byte-identically") {
    auto m = base_manifest("wf-1", BackendId::constraint_system);
    m.verification_key_digest_hex = std::string(64, 'a');
    auto text = manifest_to_json(m);
    CHECK(manifest_to_json(manifest_from_json(text)) == text);

    auto t = base_manifest("wf-2", BackendId::enclave);
    t.reference_measurement_hex = std::string(64, 'b');
    auto ttext = manifest_to_json(t);
    CHECK(manifest_to_json(manifest_from_json(ttext)) == ttext);
}

TEST_CASE("setup writes the expected artifacts and refuses to overwrite") {
    for (BackendId backend : {BackendId::constraint_system, BackendId::enclave}) {
        auto dir = fresh_dir(std::string("setup-") + backend_name(backend));
        auto manifest = base_manifest("wf", backend);
        setup_workflow(manifest, dir);

        CHECK(fs::exists(dir / "manifest.json"));
        CHECK(fs::exists(dir / "chain.json"));
        CHECK(fs::exists(dir / "keys/sensor.json"));
        CHECK(fs::exists(dir / "gateway_state.json"));
        if (backend == BackendId::constraint_system) {
            CHECK(fs::exists(dir / "cs.json"));
            CHECK(fs::exists(dir / "proving_key.json"));
            CHECK(load_manifest(dir / "manifest.json").verification_key_digest_hex.has_value());
        } else {
            CHECK(fs::exists(dir / "keys/pki_root.json"));
            CHECK(fs::exists(dir / "attestation_report.json"));
            CHECK(fs::exists(dir / "enclave_state.json"));
            CHECK(load_manifest(dir / "manifest.json").reference_measurement_hex.has_value());
        }
        CHECK_THROWS_AS(setup_workflow(manifest, dir), WorkflowError);
    }
}

TEST_CASE("setup validates the manifest") {
    auto dir = fresh_dir("setup-invalid");
    auto manifest = base_manifest("wf", BackendId::constraint_system);
    manifest.batch_size = 0;
    CHECK_THROWS_AS(setup_workflow(manifest, dir), WorkflowError);
    manifest.batch_size = 2;
    manifest.scale_divisor = 0;
    CHECK_THROWS_AS(setup_workflow(manifest, dir), WorkflowError);
}

TEST_CASE("run_batches processes files end to end with oracle-checked counts") {
    for (BackendId backend : {BackendId::constraint_system, BackendId::enclave}) {
        auto dir = fresh_dir(std::string("run-") + backend_name(backend));
        auto manifest = base_manifest("wf", backend);
        setup_workflow(manifest, dir);

        std::vector<fs::path> files;
        for (uint64_t i = 1; i <= 3; ++i)
            files.push_back(write_batch_files(dir, "b" + std::to_string(i), i, i));

        auto receipts = run_batches(dir, files);
        REQUIRE(receipts.size() == 3);
        std::vector<uint64_t> expected;
        for (size_t i = 0; i < 3; ++i) {
            INFO("file=" << receipts[i].batch_file << " reason=" << receipts[i].reason);
            CHECK(receipts[i].accepted);
            CHECK(receipts[i].violation_count == oracle_count(files[i], manifest.threshold));
            CHECK(receipts[i].cost_units > 0);
            expected.push_back(*receipts[i].violation_count);
        }
        CHECK(chain_outputs(dir, "wf") == expected);
    }
}

TEST_CASE("state persists across invocations and replays are rejected") {
    for (BackendId backend : {BackendId::constraint_system, BackendId::enclave}) {
        auto dir = fresh_dir(std::string("persist-") + backend_name(backend));
        setup_workflow(base_manifest("wf", backend), dir);

        auto first = write_batch_files(dir, "first", 11, 1);
        auto r1 = run_batches(dir, {first});
        REQUIRE(r1.size() == 1);
        CHECK(r1[0].accepted);

        // Second process invocation: resubmitting the same batch must fail,
        // a fresh batch must pass.
        auto r2 = run_batches(dir, {first});
        REQUIRE(r2.size() == 1);
        CHECK_FALSE(r2[0].accepted);

        auto second = write_batch_files(dir, "second", 12, 2);
        auto r3 = run_batches(dir, {second});
        REQUIRE(r3.size() == 1);
        INFO("reason=" << r3[0].reason);
        CHECK(r3[0].accepted);
        CHECK(chain_outputs(dir, "wf").size() == 2);
    }
}

TEST_CASE("a malformed batch file is reported and does not abort the run") {
    auto dir = fresh_dir("malformed");
    setup_workflow(base_manifest("wf", BackendId::constraint_system), dir);

    auto bad = dir / "bad.batch";
    std::ofstream(bad) << "1 2 3\n";  // wrong arity, no meta sidecar
    auto good = write_batch_files(dir, "good", 21, 1);

    auto receipts = run_batches(dir, {bad, good});
    REQUIRE(receipts.size() == 2);
    CHECK_FALSE(receipts[0].accepted);
    CHECK_FALSE(receipts[0].reason.empty());
    CHECK(receipts[1].accepted);
}

TEST_CASE("export_chain returns the persisted ledger") {
    auto dir = fresh_dir("export");
    setup_workflow(base_manifest("wf", BackendId::enclave), dir);
    auto file = write_batch_files(dir, "b", 31, 1);
    run_batches(dir, {file});
    auto text = export_chain(dir);
    CHECK(text == slurp(dir / "chain.json"));
    auto chain = chain::ChainState::import_json(text);
    CHECK(chain->read_outputs("wf").size() == 1);
}

TEST_CASE("run_bench produces one row per parameter and a stable CSV header") {
    auto rows = run_bench(BackendId::enclave, BenchMode::size, {1, 2}, 2);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].param == 1);
    CHECK(rows[1].param == 2);
    for (const auto& r : rows) {
        CHECK(r.mean_seconds > 0.0);
        CHECK(r.cost_units > 0);
        CHECK(r.mode == "size");
    }
    auto csv = bench_to_csv(rows);
    CHECK(csv.rfind("backend,mode,param,mean_seconds,stddev,cost_units\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);

    CHECK_THROWS_AS(run_bench(BackendId::enclave, BenchMode::count, {1}, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS(run_bench(BackendId::enclave, BenchMode::count, {0}, 1),
                    std::invalid_argument);
}

TEST_CASE("count-mode cost grows with the number of submissions") {
    auto rows = run_bench(BackendId::enclave, BenchMode::count, {1, 4}, 1);
    REQUIRE(rows.size() == 2);
    CHECK(rows[1].cost_units > rows[0].cost_units);
}
