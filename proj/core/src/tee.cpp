#include "ovpp/tee.hpp"

#include "json.hpp"

namespace ovpp {
namespace tee {

Bytes certificate_payload(const Certificate& cert) {
    Bytes out;
    append_string(out, cert.device_id);
    append_bytes(out, cert.device_public_key);
    return out;
}

bool verify_certificate(const Certificate& cert, const Bytes& root_public_key) {
    return verify(root_public_key, certificate_payload(cert), cert.root_signature);
}

Pki::Pki(KeyPair root_key) : root_key_(std::move(root_key)) {
    if (root_key_.role != KeyRole::pki_root)
        throw std::invalid_argument("PKI requires a pki_root-role key");
}

Certificate Pki::issue(const std::string& device_id) {
    if (issued_.contains(device_id))
        throw std::invalid_argument("device already issued: " + device_id);
    KeyPair device = generate_keypair(KeyRole::device_identity);
    Certificate cert{device_id, device.public_key, {}};
    cert.root_signature = sign(root_key_.private_key, certificate_payload(cert));
    device_keys_.emplace(device_id, std::move(device));
    issued_.emplace(device_id, cert);
    return cert;
}

const KeyPair& Pki::device_key(const std::string& device_id) const {
    auto it = device_keys_.find(device_id);
    if (it == device_keys_.end()) throw std::invalid_argument("unknown device: " + device_id);
    return it->second;
}

const Certificate& Pki::certificate(const std::string& device_id) const {
    auto it = issued_.find(device_id);
    if (it == issued_.end()) throw std::invalid_argument("no certificate for: " + device_id);
    return it->second;
}

EnclaveMeasurement measure(const Digest& program_id, const AuxiliaryData& aux,
                           const Bytes& sensor_public_key) {
    Bytes state;
    append_bytes(state, program_id);
    append_bytes(state, encode_aux(aux));
    append_bytes(state, sensor_public_key);
    return EnclaveMeasurement{hash(state)};
}

Bytes evidence_payload(const TeeEvidence& ev) {
    Bytes out;
    append_bytes(out, ev.output_digest);
    append_bytes(out, ev.batch_digest);
    append_u64_be(out, ev.counter);
    append_bytes(out, ev.program_id);
    return out;
}

std::unique_ptr<EnclaveInstance> EnclaveInstance::instantiate(Pki& pki,
                                                              const std::string& device_id,
                                                              const PreprocessProgram& program,
                                                              const AuxiliaryData& aux,
                                                              const Bytes& sensor_public_key) {
    // Throws for unknown devices; the certificate must have been issued.
    const KeyPair& device_key = pki.device_key(device_id);
    const Certificate& cert = pki.certificate(device_id);

    auto enclave = std::unique_ptr<EnclaveInstance>(new EnclaveInstance());
    enclave->device_id_ = device_id;
    enclave->program_ = program;
    enclave->aux_ = aux;
    enclave->sensor_public_key_ = sensor_public_key;
    enclave->evidence_keys_ = generate_keypair(KeyRole::evidence);
    enclave->device_private_key_ = device_key.private_key;
    enclave->device_cert_ = cert;
    return enclave;
}

EnclaveMeasurement EnclaveInstance::measurement() const {
    return measure(program_.program_id, aux_, sensor_public_key_);
}

AttestationReport EnclaveInstance::attest(const Pki&) const {
    AttestationReport report;
    report.measurement = measurement();
    report.evidence_public_key = evidence_keys_.public_key;
    Bytes payload;
    append_bytes(payload, report.measurement.digest);
    append_bytes(payload, report.evidence_public_key);
    report.device_signature = sign(device_private_key_, payload);
    report.device_cert = device_cert_;
    return report;
}

std::pair<Output, TeeEvidence> EnclaveInstance::execute(const SignedBatch& signed_batch) {
    std::lock_guard lock(exec_mutex_);
    if (batch_digest(signed_batch.batch) != signed_batch.batch_digest)
        throw EnclaveError("batch digest mismatch");
    if (!verify(sensor_public_key_, signed_batch.batch_digest, signed_batch.signature))
        throw EnclaveError("sensor signature invalid");
    try {
        replay_.check_and_record(signed_batch.batch.meta.sensor_id,
                                 signed_batch.batch.meta.sequence_no);
    } catch (const GatewayError& e) {
        throw EnclaveError(e.what());
    }

    Output output = run_stages(signed_batch.batch, aux_);
    ++counter_;

    TeeEvidence ev;
    ev.output_digest = output_digest(output);
    ev.batch_digest = signed_batch.batch_digest;
    ev.counter = counter_;
    ev.program_id = program_.program_id;
    ev.signature = sign(evidence_keys_.private_key, evidence_payload(ev));
    return {std::move(output), std::move(ev)};
}

std::string attest_reason_name(AttestReason r) {
    switch (r) {
        case AttestReason::ok: return "ok";
        case AttestReason::bad_certificate: return "bad-certificate";
        case AttestReason::bad_device_signature: return "bad-device-signature";
        case AttestReason::measurement_mismatch: return "measurement-mismatch";
    }
    return "unknown";
}

AttestResult verify_attestation(const AttestationReport& report, const Bytes& pki_root_public,
                                const EnclaveMeasurement& reference) {
    if (!verify_certificate(report.device_cert, pki_root_public))
        return {false, AttestReason::bad_certificate};
    Bytes payload;
    append_bytes(payload, report.measurement.digest);
    append_bytes(payload, report.evidence_public_key);
    if (!verify(report.device_cert.device_public_key, payload, report.device_signature))
        return {false, AttestReason::bad_device_signature};
    if (!(report.measurement == reference)) return {false, AttestReason::measurement_mismatch};
    return {true, AttestReason::ok};
}

Bytes encode_tee_public_args(uint64_t violation_count, const Digest& scaled_digest,
                             const Digest& batch_digest, uint64_t counter) {
    Bytes out;
    append_u64_be(out, violation_count);
    append_bytes(out, scaled_digest);
    append_bytes(out, batch_digest);
    append_u64_be(out, counter);
    return out;
}

TeePublicArgs decode_tee_public_args(const Bytes& args) {
    if (args.size() != 8 + 32 + 32 + 8)
        throw std::invalid_argument("malformed enclave public args");
    TeePublicArgs pa;
    size_t off = 0;
    for (int i = 0; i < 8; ++i) pa.violation_count = pa.violation_count << 8 | args[off++];
    std::copy(args.begin() + off, args.begin() + off + 32, pa.scaled_digest.begin());
    off += 32;
    std::copy(args.begin() + off, args.begin() + off + 32, pa.batch_digest.begin());
    off += 32;
    for (int i = 0; i < 8; ++i) pa.counter = pa.counter << 8 | args[off++];
    return pa;
}

std::string evidence_to_json(const TeeEvidence& ev) {
    nlohmann::json j;
    j["output_digest"] = to_hex(ev.output_digest);
    j["batch_digest"] = to_hex(ev.batch_digest);
    j["counter"] = ev.counter;
    j["program_id"] = to_hex(ev.program_id);
    j["signature"] = to_hex(ev.signature);
    return j.dump(2) + "\n";
}

TeeEvidence evidence_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    TeeEvidence ev;
    ev.output_digest = digest_from_hex(j.at("output_digest").get<std::string>());
    ev.batch_digest = digest_from_hex(j.at("batch_digest").get<std::string>());
    ev.counter = j.at("counter").get<uint64_t>();
    ev.program_id = digest_from_hex(j.at("program_id").get<std::string>());
    ev.signature = from_hex(j.at("signature").get<std::string>());
    return ev;
}

std::string report_to_json(const AttestationReport& report) {
    nlohmann::json j;
    j["measurement"] = to_hex(report.measurement.digest);
    j["evidence_public_key"] = to_hex(report.evidence_public_key);
    j["device_signature"] = to_hex(report.device_signature);
    j["device_cert"] = {{"device_id", report.device_cert.device_id},
                        {"device_public_key", to_hex(report.device_cert.device_public_key)},
                        {"root_signature", to_hex(report.device_cert.root_signature)}};
    return j.dump(2) + "\n";
}

AttestationReport report_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    AttestationReport report;
    report.measurement.digest = digest_from_hex(j.at("measurement").get<std::string>());
    report.evidence_public_key = from_hex(j.at("evidence_public_key").get<std::string>());
    report.device_signature = from_hex(j.at("device_signature").get<std::string>());
    const auto& c = j.at("device_cert");
    report.device_cert.device_id = c.at("device_id").get<std::string>();
    report.device_cert.device_public_key = from_hex(c.at("device_public_key").get<std::string>());
    report.device_cert.root_signature = from_hex(c.at("root_signature").get<std::string>());
    return report;
}

std::string EnclaveInstance::seal_to_json() const {
    nlohmann::json j;
    j["device_id"] = device_id_;
    j["program_id"] = to_hex(program_.program_id);
    j["aux"] = {{"threshold", aux_.threshold},
                {"scale_divisor", aux_.scale_divisor},
                {"rule_id", aux_.rule_id}};
    j["sensor_public_key"] = to_hex(sensor_public_key_);
    j["evidence_public_key"] = to_hex(evidence_keys_.public_key);
    j["evidence_private_key"] = to_hex(evidence_keys_.private_key);
    j["device_private_key"] = to_hex(device_private_key_);
    j["device_cert"] = {{"device_id", device_cert_.device_id},
                        {"device_public_key", to_hex(device_cert_.device_public_key)},
                        {"root_signature", to_hex(device_cert_.root_signature)}};
    j["counter"] = counter_;
    j["replay_seen"] = replay_.snapshot();
    return j.dump(2) + "\n";
}

std::unique_ptr<EnclaveInstance> EnclaveInstance::restore_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    auto enclave = std::unique_ptr<EnclaveInstance>(new EnclaveInstance());
    enclave->device_id_ = j.at("device_id").get<std::string>();
    enclave->program_ =
        PreprocessProgram{digest_from_hex(j.at("program_id").get<std::string>())};
    enclave->aux_.threshold = j.at("aux").at("threshold").get<int64_t>();
    enclave->aux_.scale_divisor = j.at("aux").at("scale_divisor").get<uint64_t>();
    enclave->aux_.rule_id = j.at("aux").at("rule_id").get<std::string>();
    enclave->sensor_public_key_ = from_hex(j.at("sensor_public_key").get<std::string>());
    enclave->evidence_keys_ =
        KeyPair{KeyRole::evidence, from_hex(j.at("evidence_public_key").get<std::string>()),
                from_hex(j.at("evidence_private_key").get<std::string>())};
    enclave->device_private_key_ = from_hex(j.at("device_private_key").get<std::string>());
    const auto& c = j.at("device_cert");
    enclave->device_cert_.device_id = c.at("device_id").get<std::string>();
    enclave->device_cert_.device_public_key =
        from_hex(c.at("device_public_key").get<std::string>());
    enclave->device_cert_.root_signature = from_hex(c.at("root_signature").get<std::string>());
    enclave->counter_ = j.at("counter").get<uint64_t>();
    if (j.contains("replay_seen"))
        enclave->replay_.restore(j.at("replay_seen").get<std::map<std::string, uint64_t>>());
    return enclave;
}

}  // namespace tee
}  // namespace ovpp
