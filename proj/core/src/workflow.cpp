#include "ovpp/workflow.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "ovpp/pipeline.hpp"
#include "ovpp/sensor.hpp"

namespace ovpp {
namespace workflow {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw WorkflowError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw WorkflowError("cannot write " + path.string());
    out << content;
}

EvidencePackage cs_package(const cs::ProvingKey& proving_key, const cs::ConstraintSystem& system,
                           const SignedBatch& signed_batch, const AuxiliaryData& aux,
                           const Bytes& sensor_public_key, const Digest& program_id) {
    auto witness = cs::compute_witness(system, signed_batch, aux, sensor_public_key);
    auto proof = cs::generate_proof(proving_key, witness, signed_batch, sensor_public_key);
    EvidencePackage pkg;
    pkg.backend_id = BackendId::constraint_system;
    pkg.public_args = cs::encode_public_args(proof.public_values);
    std::string body = cs::proof_to_json(proof);
    pkg.evidence_body = Bytes(body.begin(), body.end());
    pkg.program_id = program_id;
    return pkg;
}

EvidencePackage tee_package(const Output& output, const tee::TeeEvidence& ev) {
    EvidencePackage pkg;
    pkg.backend_id = BackendId::enclave;
    Digest scaled = hash(encode_scaled_values(output.scaled_values));
    pkg.public_args =
        tee::encode_tee_public_args(output.violation_count, scaled, ev.batch_digest, ev.counter);
    std::string body = tee::evidence_to_json(ev);
    pkg.evidence_body = Bytes(body.begin(), body.end());
    pkg.program_id = ev.program_id;
    return pkg;
}

}  // namespace

std::string manifest_to_json(const WorkflowManifest& m) {
    nlohmann::json j;
    j["workflow_id"] = m.workflow_id;
    j["backend"] = backend_name(m.backend);
    j["threshold"] = m.threshold;
    j["scale_divisor"] = m.scale_divisor;
    j["rule_id"] = m.rule_id;
    j["batch_size"] = m.batch_size;
    j["sensor_key_file"] = m.sensor_key_file;
    if (m.reference_measurement_hex) j["reference_measurement"] = *m.reference_measurement_hex;
    if (m.verification_key_digest_hex)
        j["verification_key_digest"] = *m.verification_key_digest_hex;
    return j.dump(2) + "\n";
}

WorkflowManifest manifest_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    WorkflowManifest m;
    m.workflow_id = j.at("workflow_id").get<std::string>();
    m.backend = backend_from_name(j.at("backend").get<std::string>());
    m.threshold = j.at("threshold").get<int64_t>();
    m.scale_divisor = j.at("scale_divisor").get<uint64_t>();
    m.rule_id = j.at("rule_id").get<std::string>();
    m.batch_size = j.at("batch_size").get<uint32_t>();
    m.sensor_key_file = j.at("sensor_key_file").get<std::string>();
    if (j.contains("reference_measurement"))
        m.reference_measurement_hex = j.at("reference_measurement").get<std::string>();
    if (j.contains("verification_key_digest"))
        m.verification_key_digest_hex = j.at("verification_key_digest").get<std::string>();
    return m;
}

WorkflowManifest load_manifest(const std::filesystem::path& path) {
    return manifest_from_json(read_file(path));
}

void save_manifest(const WorkflowManifest& m, const std::filesystem::path& path) {
    write_file(path, manifest_to_json(m));
}

void setup_workflow(const WorkflowManifest& manifest_in,
                    const std::filesystem::path& artifact_dir) {
    if (std::filesystem::exists(artifact_dir / "chain.json"))
        throw WorkflowError("artifacts already exist in " + artifact_dir.string() +
                            "; refusing to overwrite");
    if (manifest_in.batch_size == 0) throw WorkflowError("manifest batch_size must be >= 1");
    if (manifest_in.scale_divisor == 0) throw WorkflowError("manifest scale_divisor must be >= 1");
    std::filesystem::create_directories(artifact_dir / "keys");

    WorkflowManifest manifest = manifest_in;
    if (manifest.sensor_key_file.empty()) manifest.sensor_key_file = "keys/sensor.json";

    KeyPair sensor = generate_keypair(KeyRole::sensor);
    write_file(artifact_dir / manifest.sensor_key_file, keypair_to_json(sensor));

    auto program = PreprocessProgram::threshold_violation();
    chain::ChainState chain;

    if (manifest.backend == BackendId::constraint_system) {
        auto system = cs::compile(program, manifest.batch_size);
        Bytes crs_seed = generate_keypair(KeyRole::evidence).private_key;  // 32 bytes of entropy
        auto keys = cs::setup(system, crs_seed);
        write_file(artifact_dir / "cs.json", cs::cs_to_json(system));
        write_file(artifact_dir / "proving_key.json", cs::keypair_to_json(keys));
        chain.deploy_contract(manifest.workflow_id,
                              chain::CsContractMaterial{system, keys.verification_key,
                                                        manifest.threshold,
                                                        hash(sensor.public_key)});
        manifest.verification_key_digest_hex = to_hex(keys.verification_key.cs_digest);
    } else {
        KeyPair root = generate_keypair(KeyRole::pki_root);
        tee::Pki pki(root);
        pki.issue("device-0");
        auto enclave = tee::EnclaveInstance::instantiate(pki, "device-0", program,
                                                         manifest.aux(), sensor.public_key);
        auto reference = tee::measure(program.program_id, manifest.aux(), sensor.public_key);
        auto report = enclave->attest(pki);
        auto attested = tee::verify_attestation(report, pki.root_public_key(), reference);
        if (!attested.ok)
            throw WorkflowError("attestation failed at setup: " +
                                tee::attest_reason_name(attested.reason));
        write_file(artifact_dir / "keys/pki_root.json", keypair_to_json(root));
        write_file(artifact_dir / "attestation_report.json", tee::report_to_json(report));
        write_file(artifact_dir / "enclave_state.json", enclave->seal_to_json());
        chain.deploy_contract(manifest.workflow_id,
                              chain::TeeContractMaterial{report.evidence_public_key, reference,
                                                         program.program_id});
        manifest.reference_measurement_hex = to_hex(reference.digest);
    }

    write_file(artifact_dir / "chain.json", chain.export_json());
    save_manifest(manifest, artifact_dir / "manifest.json");
    // Per-sensor replay state for the gateway.
    write_file(artifact_dir / "gateway_state.json", "{}\n");
}

std::vector<RunReceipt> run_batches(const std::filesystem::path& artifact_dir,
                                    const std::vector<std::filesystem::path>& batch_files) {
    WorkflowManifest manifest = load_manifest(artifact_dir / "manifest.json");
    KeyPair sensor = keypair_from_json(read_file(artifact_dir / manifest.sensor_key_file));
    auto chain = chain::ChainState::import_json(read_file(artifact_dir / "chain.json"));
    auto program = PreprocessProgram::threshold_violation();

    ReplayGuard guard;
    guard.restore(nlohmann::json::parse(read_file(artifact_dir / "gateway_state.json"))
                      .get<std::map<std::string, uint64_t>>());

    std::optional<cs::CsKeyPair> cs_keys;
    std::unique_ptr<tee::EnclaveInstance> enclave;
    if (manifest.backend == BackendId::constraint_system)
        cs_keys = cs::keypair_from_json(read_file(artifact_dir / "proving_key.json"));
    else
        enclave = tee::EnclaveInstance::restore_from_json(
            read_file(artifact_dir / "enclave_state.json"));

    std::vector<RunReceipt> receipts;
    for (const auto& file : batch_files) {
        RunReceipt rc;
        rc.batch_file = file.string();
        try {
            MeasurementBatch batch = load_batch(file);
            std::filesystem::path meta_path = file;
            meta_path.replace_extension(".meta.json");
            batch.meta = load_meta(meta_path);
            SignedBatch signed_batch = sign_batch(batch, sensor);

            chain::VerificationReceipt receipt;
            uint64_t count = 0;
            if (manifest.backend == BackendId::constraint_system) {
                // Gateway-side verification plus pre-processing.
                Output output = run_program(program, signed_batch, manifest.aux(),
                                            sensor.public_key, guard);
                count = output.violation_count;
                auto pkg = cs_package(cs_keys->proving_key, cs_keys->proving_key.system,
                                      signed_batch, manifest.aux(), sensor.public_key,
                                      program.program_id);
                receipt = chain->submit(manifest.workflow_id, pkg);
            } else {
                auto [output, ev] = enclave->execute(signed_batch);
                count = output.violation_count;
                receipt = chain->submit(manifest.workflow_id, tee_package(output, ev));
            }
            rc.accepted = receipt.accepted;
            rc.reason = receipt.reason;
            rc.cost_units = receipt.cost_units;
            if (receipt.accepted) rc.violation_count = count;
        } catch (const std::exception& e) {
            rc.accepted = false;
            rc.reason = e.what();
        }
        receipts.push_back(std::move(rc));
    }

    write_file(artifact_dir / "chain.json", chain->export_json());
    write_file(artifact_dir / "gateway_state.json", nlohmann::json(guard.snapshot()).dump(2) + "\n");
    if (enclave) write_file(artifact_dir / "enclave_state.json", enclave->seal_to_json());
    return receipts;
}

std::vector<uint64_t> chain_outputs(const std::filesystem::path& artifact_dir,
                                    const std::string& workflow_id) {
    auto chain = chain::ChainState::import_json(read_file(artifact_dir / "chain.json"));
    return chain->read_outputs(workflow_id);
}

std::string export_chain(const std::filesystem::path& artifact_dir) {
    return read_file(artifact_dir / "chain.json");
}

namespace {

struct BenchFixture {
    KeyPair sensor;
    AuxiliaryData aux{50, 10, "bench"};
    PreprocessProgram program = PreprocessProgram::threshold_violation();
    std::optional<cs::CsKeyPair> cs_keys;
    tee::Pki pki{generate_keypair(KeyRole::pki_root)};
    std::unique_ptr<tee::EnclaveInstance> enclave;
    tee::EnclaveMeasurement reference{};
    Bytes evidence_pk;
    uint64_t next_seq = 1;

    BenchFixture(BackendId backend, uint32_t batch_size)
        : sensor(generate_keypair(KeyRole::sensor)) {
        if (backend == BackendId::constraint_system) {
            auto system = cs::compile(program, batch_size);
            cs_keys = cs::setup(system, Bytes(32, 0x42));
        } else {
            pki.issue("bench-device");
            enclave = tee::EnclaveInstance::instantiate(pki, "bench-device", program, aux,
                                                        sensor.public_key);
            reference = tee::measure(program.program_id, aux, sensor.public_key);
            auto report = enclave->attest(pki);
            evidence_pk = report.evidence_public_key;
        }
    }

    std::unique_ptr<chain::ChainState> fresh_chain(BackendId backend) {
        auto chain = std::make_unique<chain::ChainState>();
        if (backend == BackendId::constraint_system)
            chain->deploy_contract("bench", chain::CsContractMaterial{
                                                cs_keys->proving_key.system,
                                                cs_keys->verification_key, aux.threshold,
                                                hash(sensor.public_key)});
        else
            chain->deploy_contract("bench", chain::TeeContractMaterial{evidence_pk, reference,
                                                                       program.program_id});
        return chain;
    }

    SignedBatch next_batch(uint32_t size, uint64_t seed) {
        MetaData meta{"bench-sensor", 1700000000, next_seq++};
        return sign_batch(generate_batch(size, 0, 100, seed, meta), sensor);
    }
};

}  // namespace

std::vector<BenchRow> run_bench(BackendId backend, BenchMode mode,
                                const std::vector<uint64_t>& params, unsigned repetitions) {
    if (repetitions == 0) throw std::invalid_argument("repetitions must be >= 1");
    using clock = std::chrono::steady_clock;
    std::vector<BenchRow> rows;

    for (uint64_t param : params) {
        if (param == 0) throw std::invalid_argument("bench parameter must be >= 1");
        uint32_t batch_size = mode == BenchMode::size ? static_cast<uint32_t>(param) : 1;
        uint64_t executions = mode == BenchMode::size ? 1 : param;
        BenchFixture fx(backend, batch_size);

        std::vector<double> samples;
        uint64_t cost = 0;
        for (unsigned rep = 0; rep < repetitions; ++rep) {
            auto chain = fx.fresh_chain(backend);
            // Inputs prepared outside the timed region; timing covers
            // evidence generation and on-chain verification only.
            std::vector<SignedBatch> inputs;
            for (uint64_t k = 0; k < executions; ++k)
                inputs.push_back(fx.next_batch(batch_size, param * 1000 + rep * 100 + k));

            uint64_t rep_cost = 0;
            auto t0 = clock::now();
            for (const auto& signed_batch : inputs) {
                chain::VerificationReceipt receipt;
                if (backend == BackendId::constraint_system) {
                    auto pkg = cs_package(fx.cs_keys->proving_key, fx.cs_keys->proving_key.system,
                                          signed_batch, fx.aux, fx.sensor.public_key,
                                          fx.program.program_id);
                    receipt = chain->submit("bench", pkg);
                } else {
                    auto [output, ev] = fx.enclave->execute(signed_batch);
                    receipt = chain->submit("bench", tee_package(output, ev));
                }
                if (!receipt.accepted)
                    throw std::logic_error("bench submission rejected: " + receipt.reason);
                rep_cost += receipt.cost_units;
            }
            auto t1 = clock::now();
            samples.push_back(std::chrono::duration<double>(t1 - t0).count());
            cost = rep_cost;
        }

        double mean = 0.0;
        for (double s : samples) mean += s;
        mean /= samples.size();
        double stddev = 0.0;
        if (samples.size() > 1) {
            for (double s : samples) stddev += (s - mean) * (s - mean);
            stddev = std::sqrt(stddev / (samples.size() - 1));
        }
        rows.push_back(BenchRow{backend_name(backend),
                                mode == BenchMode::size ? "size" : "count", param, mean, stddev,
                                cost});
    }
    return rows;
}

std::string bench_to_csv(const std::vector<BenchRow>& rows) {
    std::ostringstream out;
    out << "backend,mode,param,mean_seconds,stddev,cost_units\n";
    for (const auto& r : rows) {
        out << r.backend << ',' << r.mode << ',' << r.param << ',' << std::scientific
            << r.mean_seconds << ',' << r.stddev << ',' << r.cost_units << '\n';
    }
    return out.str();
}

}  // namespace workflow
}  // namespace ovpp
