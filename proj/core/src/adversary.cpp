#include "ovpp/adversary.hpp"

#include <random>

#include "json.hpp"

namespace ovpp {

namespace tee {

void HostBreach::tamper_sealed_aux(EnclaveInstance& enclave, int64_t threshold_delta) {
    enclave.aux_.threshold += threshold_delta;
}

void HostBreach::tamper_sealed_program(EnclaveInstance& enclave, const Digest& program_id) {
    enclave.program_.program_id = program_id;
}

}  // namespace tee

namespace adversary {

namespace {

Bytes derived_seed(uint64_t seed, const std::string& tag) {
    Bytes material(tag.begin(), tag.end());
    append_u64_be(material, seed);
    Digest d = hash(material);
    return Bytes(d.begin(), d.end());
}

struct Scenario {
    KeyPair sensor;
    AuxiliaryData aux;
    PreprocessProgram program;
    SignedBatch signed_batch;
};

Scenario build_scenario(uint64_t seed, uint32_t batch_size) {
    Scenario s;
    s.sensor = generate_keypair(KeyRole::sensor, derived_seed(seed, "sensor"));
    s.aux = AuxiliaryData{50, 10, "rule-threshold"};
    s.program = PreprocessProgram::threshold_violation();
    MetaData meta{"sensor-A", 1700000000 + seed, 1};
    MeasurementBatch batch = generate_batch(batch_size, 0, 100, seed, meta);
    s.signed_batch = sign_batch(batch, s.sensor);
    return s;
}

std::string stage_from_reason(const std::string& reason) {
    if (reason == "sensor-signature-invalid") return "sensor-signature";
    if (reason == "public-input-mismatch") return "public-input-match";
    if (reason == "replay") return "replay-guard";
    if (reason == "evidence-invalid") return "evidence-signature";
    if (reason == "program-mismatch" || reason == "setup-mismatch" ||
        reason == "commitment-mismatch" || reason == "constraint-unsatisfied" ||
        reason == "digest-link-mismatch" || reason == "evidence-malformed")
        return "constraint-check";
    return reason;
}

EvidencePackage package_from_proof(const cs::CsProof& proof, const Digest& program_id) {
    EvidencePackage pkg;
    pkg.backend_id = BackendId::constraint_system;
    pkg.public_args = cs::encode_public_args(proof.public_values);
    std::string body = cs::proof_to_json(proof);
    pkg.evidence_body = Bytes(body.begin(), body.end());
    pkg.program_id = program_id;
    return pkg;
}

AttackOutcome attack_cs(const TamperStrategy& strategy, uint64_t seed) {
    std::mt19937_64 rng(seed);
    uint32_t batch_size = 1 + rng() % 4;
    Scenario s = build_scenario(seed, batch_size);

    auto system = cs::compile(s.program, batch_size);
    auto keys = cs::setup(system, derived_seed(seed, "crs"));
    chain::ChainState chain;
    chain.deploy_contract("wf-cs", chain::CsContractMaterial{system, keys.verification_key,
                                                            s.aux.threshold,
                                                            hash(s.sensor.public_key)});

    auto honest_package = [&]() {
        auto witness = cs::compute_witness(system, s.signed_batch, s.aux, s.sensor.public_key);
        auto proof =
            cs::generate_proof(keys.proving_key, witness, s.signed_batch, s.sensor.public_key);
        return package_from_proof(proof, s.program.program_id);
    };

    switch (strategy.kind) {
        case TamperKind::program: {
            // P' with altered stage logic, modeled as a distinct program
            // identity compiled into its own system and setup.
            PreprocessProgram tampered{hash(derived_seed(seed, "tampered-program"))};
            auto bad_system = cs::compile(tampered, batch_size);
            auto bad_keys = cs::setup(bad_system, derived_seed(seed, "crs"));
            auto witness =
                cs::compute_witness(bad_system, s.signed_batch, s.aux, s.sensor.public_key);
            auto proof = cs::generate_proof(bad_keys.proving_key, witness, s.signed_batch,
                                            s.sensor.public_key);
            // The adversary may claim the honest program id or announce its own.
            Digest claimed = strategy.variant % 2 == 0 ? s.program.program_id
                                                       : tampered.program_id;
            auto pkg = package_from_proof(proof, claimed);
            auto receipt = chain.submit("wf-cs", pkg);
            return AttackOutcome{!receipt.accepted, stage_from_reason(receipt.reason)};
        }
        case TamperKind::input: {
            MeasurementBatch tampered = s.signed_batch.batch;
            size_t vi = strategy.index % (tampered.measurements.size() * kValuesPerMeasurement);
            tampered.measurements[vi / 4].values[vi % 4] += strategy.delta;
            if (strategy.variant % 2 == 0) {
                // Tampered in transit: the gateway's input check catches it.
                SignedBatch forged{tampered, s.signed_batch.batch_digest,
                                   s.signed_batch.signature};
                ReplayGuard guard;
                try {
                    verify_input(forged, s.sensor.public_key, guard);
                    return AttackOutcome{false, "none"};
                } catch (const GatewayError&) {
                    return AttackOutcome{true, "sensor-signature"};
                }
            }
            // Malicious gateway: proves over D' with the old signature.
            SignedBatch forged{tampered, batch_digest(tampered), s.signed_batch.signature};
            auto witness = cs::compute_witness(system, forged, s.aux, s.sensor.public_key);
            auto proof =
                cs::generate_proof(keys.proving_key, witness, forged, s.sensor.public_key);
            auto receipt = chain.submit("wf-cs", package_from_proof(proof, s.program.program_id));
            return AttackOutcome{!receipt.accepted, stage_from_reason(receipt.reason)};
        }
        case TamperKind::auxiliary: {
            AuxiliaryData tampered = s.aux;
            tampered.threshold += strategy.delta;
            auto witness =
                cs::compute_witness(system, s.signed_batch, tampered, s.sensor.public_key);
            auto proof = cs::generate_proof(keys.proving_key, witness, s.signed_batch,
                                            s.sensor.public_key);
            auto receipt = chain.submit("wf-cs", package_from_proof(proof, s.program.program_id));
            return AttackOutcome{!receipt.accepted, stage_from_reason(receipt.reason)};
        }
        case TamperKind::evidence: {
            auto witness = cs::compute_witness(system, s.signed_batch, s.aux, s.sensor.public_key);
            auto proof =
                cs::generate_proof(keys.proving_key, witness, s.signed_batch, s.sensor.public_key);
            switch (strategy.variant % 3) {
                case 0: {  // witness mutation, stale commitment
                    size_t slot = 1 + strategy.index % (proof.opened_witness.size() - 1);
                    proof.opened_witness[slot] =
                        proof.opened_witness[slot] + Fe::from_i64(strategy.delta);
                    break;
                }
                case 1: {  // witness mutation with refreshed commitment
                    size_t slot = 1 + strategy.index % (proof.opened_witness.size() - 1);
                    proof.opened_witness[slot] =
                        proof.opened_witness[slot] + Fe::from_i64(strategy.delta);
                    proof.witness_commitment =
                        hash(cs::encode_witness(cs::Witness{proof.opened_witness}));
                    break;
                }
                case 2:  // inflate the announced count
                    proof.public_values[3] =
                        proof.public_values[3] + Fe::from_i64(strategy.delta);
                    break;
            }
            auto receipt = chain.submit("wf-cs", package_from_proof(proof, s.program.program_id));
            return AttackOutcome{!receipt.accepted, stage_from_reason(receipt.reason)};
        }
        case TamperKind::replay: {
            auto pkg = honest_package();
            auto first = chain.submit("wf-cs", pkg);
            if (!first.accepted) return AttackOutcome{false, "honest-run-rejected"};
            auto second = chain.submit("wf-cs", pkg);
            return AttackOutcome{!second.accepted, stage_from_reason(second.reason)};
        }
    }
    return AttackOutcome{false, "none"};
}

AttackOutcome attack_tee(const TamperStrategy& strategy, uint64_t seed) {
    std::mt19937_64 rng(seed);
    uint32_t batch_size = 1 + rng() % 4;
    Scenario s = build_scenario(seed, batch_size);

    tee::Pki pki(generate_keypair(KeyRole::pki_root, derived_seed(seed, "pki-root")));
    pki.issue("device-1");
    auto enclave =
        tee::EnclaveInstance::instantiate(pki, "device-1", s.program, s.aux, s.sensor.public_key);
    auto reference = tee::measure(s.program.program_id, s.aux, s.sensor.public_key);
    auto report = enclave->attest(pki);
    if (!tee::verify_attestation(report, pki.root_public_key(), reference).ok)
        return AttackOutcome{false, "honest-attestation-failed"};

    chain::ChainState chain;
    chain.deploy_contract("wf-tee", chain::TeeContractMaterial{report.evidence_public_key,
                                                               reference, s.program.program_id});

    auto package_from = [&](const Output& output, const tee::TeeEvidence& ev) {
        EvidencePackage pkg;
        pkg.backend_id = BackendId::enclave;
        Digest scaled = hash(encode_scaled_values(output.scaled_values));
        pkg.public_args =
            tee::encode_tee_public_args(output.violation_count, scaled, ev.batch_digest,
                                        ev.counter);
        std::string body = tee::evidence_to_json(ev);
        pkg.evidence_body = Bytes(body.begin(), body.end());
        pkg.program_id = ev.program_id;
        return pkg;
    };

    switch (strategy.kind) {
        case TamperKind::program: {
            if (strategy.variant % 2 == 0) {
                // Re-instantiated enclave with altered program code.
                pki.issue("device-2");
                PreprocessProgram tampered{hash(derived_seed(seed, "tampered-program"))};
                auto evil = tee::EnclaveInstance::instantiate(pki, "device-2", tampered, s.aux,
                                                              s.sensor.public_key);
                auto evil_report = evil->attest(pki);
                auto res =
                    tee::verify_attestation(evil_report, pki.root_public_key(), reference);
                return AttackOutcome{!res.ok, "attestation-reference"};
            }
            // Host breach of the sealed program; re-attestation exposes it.
            tee::HostBreach::tamper_sealed_program(
                *enclave, hash(derived_seed(seed, "tampered-program")));
            auto breached = enclave->attest(pki);
            auto res = tee::verify_attestation(breached, pki.root_public_key(), reference);
            return AttackOutcome{!res.ok, "attestation-reference"};
        }
        case TamperKind::auxiliary: {
            if (strategy.variant % 2 == 0) {
                pki.issue("device-2");
                AuxiliaryData tampered = s.aux;
                tampered.threshold += strategy.delta;
                auto evil = tee::EnclaveInstance::instantiate(pki, "device-2", s.program,
                                                              tampered, s.sensor.public_key);
                auto evil_report = evil->attest(pki);
                auto res =
                    tee::verify_attestation(evil_report, pki.root_public_key(), reference);
                return AttackOutcome{!res.ok, "attestation-reference"};
            }
            tee::HostBreach::tamper_sealed_aux(*enclave, strategy.delta);
            auto breached = enclave->attest(pki);
            auto res = tee::verify_attestation(breached, pki.root_public_key(), reference);
            return AttackOutcome{!res.ok, "attestation-reference"};
        }
        case TamperKind::input: {
            MeasurementBatch tampered = s.signed_batch.batch;
            size_t vi = strategy.index % (tampered.measurements.size() * kValuesPerMeasurement);
            tampered.measurements[vi / 4].values[vi % 4] += strategy.delta;
            SignedBatch forged{tampered, batch_digest(tampered), s.signed_batch.signature};
            try {
                enclave->execute(forged);
                return AttackOutcome{false, "none"};
            } catch (const tee::EnclaveError&) {
                return AttackOutcome{true, "sensor-signature"};
            }
        }
        case TamperKind::evidence: {
            auto [output, ev] = enclave->execute(s.signed_batch);
            auto pkg = package_from(output, ev);
            switch (strategy.variant % 3) {
                case 0: {  // bit flip in the evidence signature
                    tee::TeeEvidence bad = ev;
                    bad.signature[strategy.index % bad.signature.size()] ^= 0x01;
                    pkg = package_from(output, bad);
                    break;
                }
                case 1: {  // host inflates the reported count after the fact
                    Output bad = output;
                    bad.violation_count += static_cast<uint64_t>(strategy.delta);
                    pkg = package_from(bad, ev);
                    break;
                }
                case 2: {  // signature splice under a substituted key
                    tee::TeeEvidence bad = ev;
                    KeyPair rogue =
                        generate_keypair(KeyRole::evidence, derived_seed(seed, "rogue"));
                    bad.signature = sign(rogue.private_key, tee::evidence_payload(bad));
                    pkg = package_from(output, bad);
                    break;
                }
            }
            auto receipt = chain.submit("wf-tee", pkg);
            return AttackOutcome{!receipt.accepted, stage_from_reason(receipt.reason)};
        }
        case TamperKind::replay: {
            auto [output, ev] = enclave->execute(s.signed_batch);
            auto pkg = package_from(output, ev);
            auto first = chain.submit("wf-tee", pkg);
            if (!first.accepted) return AttackOutcome{false, "honest-run-rejected"};
            auto second = chain.submit("wf-tee", pkg);
            return AttackOutcome{!second.accepted, stage_from_reason(second.reason)};
        }
    }
    return AttackOutcome{false, "none"};
}

}  // namespace

std::string kind_name(TamperKind kind) {
    switch (kind) {
        case TamperKind::program: return "program";
        case TamperKind::input: return "input";
        case TamperKind::auxiliary: return "auxiliary";
        case TamperKind::evidence: return "evidence";
        case TamperKind::replay: return "replay";
    }
    return "unknown";
}

TamperKind kind_from_name(const std::string& name) {
    if (name == "program") return TamperKind::program;
    if (name == "input") return TamperKind::input;
    if (name == "auxiliary") return TamperKind::auxiliary;
    if (name == "evidence") return TamperKind::evidence;
    if (name == "replay") return TamperKind::replay;
    throw std::invalid_argument("unknown tamper strategy: " + name);
}

TamperStrategy make_strategy(TamperKind kind, uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5eed5eed5eed5eedULL);
    TamperStrategy st;
    st.kind = kind;
    st.delta = 1 + static_cast<int64_t>(rng() % 7);
    st.index = rng() % 97;
    st.variant = rng() % 6;
    return st;
}

AttackOutcome run_attack(const TamperStrategy& strategy, BackendId backend, uint64_t seed) {
    if (strategy.kind != TamperKind::replay && strategy.delta == 0)
        throw std::invalid_argument("no-op tamper strategy rejected");
    return backend == BackendId::constraint_system ? attack_cs(strategy, seed)
                                                   : attack_tee(strategy, seed);
}

std::string outcome_to_json_line(const TamperStrategy& strategy, BackendId backend, uint64_t seed,
                                 const AttackOutcome& outcome) {
    nlohmann::json j;
    j["strategy"] = kind_name(strategy.kind);
    j["backend"] = backend_name(backend);
    j["seed"] = seed;
    j["detected"] = outcome.detected;
    j["stage"] = outcome.stage;
    return j.dump();
}

}  // namespace adversary
}  // namespace ovpp
