#include "ovpp/chain.hpp"

#include "json.hpp"

namespace ovpp {
namespace chain {

namespace {

uint64_t words32(uint64_t bytes) { return (bytes + 31) / 32; }

std::pair<Fe, Fe> split_digest(const Digest& d) {
    return {Fe::from_bytes16(std::span<const uint8_t>(d.data(), 16)),
            Fe::from_bytes16(std::span<const uint8_t>(d.data() + 16, 16))};
}

}  // namespace

void CostMeter::charge(const std::string& primitive, uint64_t count, uint64_t unit_weight) {
    if (count == 0) return;
    trace.push_back(MeterEvent{primitive, count, unit_weight});
    total += count * unit_weight;
}

void ChainState::deploy_contract(const std::string& workflow_id,
                                 const CsContractMaterial& material) {
    std::lock_guard lock(mutex_);
    if (contracts_.contains(workflow_id))
        throw ChainError("workflow already deployed: " + workflow_id);
    Contract c;
    c.backend = BackendId::constraint_system;
    c.material = material;
    contracts_.emplace(workflow_id, std::move(c));
}

void ChainState::deploy_contract(const std::string& workflow_id,
                                 const TeeContractMaterial& material) {
    std::lock_guard lock(mutex_);
    if (contracts_.contains(workflow_id))
        throw ChainError("workflow already deployed: " + workflow_id);
    Contract c;
    c.backend = BackendId::enclave;
    c.material = material;
    contracts_.emplace(workflow_id, std::move(c));
}

bool ChainState::has_contract(const std::string& workflow_id) const {
    std::lock_guard lock(mutex_);
    return contracts_.contains(workflow_id);
}

BackendId ChainState::contract_backend(const std::string& workflow_id) const {
    std::lock_guard lock(mutex_);
    auto it = contracts_.find(workflow_id);
    if (it == contracts_.end()) throw ChainError("unknown workflow: " + workflow_id);
    return it->second.backend;
}

VerificationReceipt ChainState::submit(const std::string& workflow_id,
                                       const EvidencePackage& package) {
    std::lock_guard lock(mutex_);
    auto it = contracts_.find(workflow_id);
    if (it == contracts_.end()) throw ChainError("unknown workflow: " + workflow_id);
    Contract& c = it->second;

    CostMeter meter;
    uint64_t calldata = package.public_args.size() + package.evidence_body.size() + 32;
    meter.charge("calldata_byte", calldata, weights_.calldata_byte);

    VerificationReceipt receipt;
    if (package.backend_id != c.backend) {
        receipt = {false, "backend-mismatch", 0};
    } else if (c.backend == BackendId::constraint_system) {
        receipt = verify_cs_package(c, package, meter);
    } else {
        receipt = verify_tee_package(c, package, meter);
    }
    receipt.cost_units = meter.total;

    ++height_;
    TxRecord tx;
    tx.height = height_;
    tx.workflow_id = workflow_id;
    tx.backend = backend_name(c.backend);
    tx.accepted = receipt.accepted;
    tx.reason = receipt.reason;
    tx.cost_units = receipt.cost_units;
    if (receipt.accepted) tx.violation_count = c.accepted_outputs.back();
    tx_log_.push_back(std::move(tx));
    return receipt;
}

VerificationReceipt ChainState::verify_cs_package(Contract& c, const EvidencePackage& package,
                                                  CostMeter& meter) {
    const auto& material = std::get<CsContractMaterial>(c.material);

    cs::CsProof proof;
    try {
        proof = cs::proof_from_json(
            std::string(package.evidence_body.begin(), package.evidence_body.end()));
    } catch (const std::exception&) {
        return {false, "evidence-malformed", 0};
    }

    if (package.program_id != material.system.program_id) return {false, "program-mismatch", 0};

    cs::VerifyResult result =
        cs::verify_cs(material.system, material.verification_key, proof, package.public_args);
    meter.charge("constraint_check", result.constraints_checked, weights_.constraint_check);
    meter.charge("hash_call", result.hash_calls, weights_.hash_call);
    meter.charge("hash_word", words32(result.hashed_bytes), weights_.hash_word);
    meter.charge("signature_verify", result.signature_checks, weights_.signature_verify);
    if (!result.ok) return {false, cs::reason_name(result.reason), 0};

    // Deployed expectations on the public inputs.
    auto args = cs::decode_public_args(package.public_args);
    if (args.size() != 6) return {false, "public-input-mismatch", 0};
    auto [phi, plo] = split_digest(material.sensor_pk_digest);
    if (!(args[2] == Fe::from_i64(material.expected_threshold)))
        return {false, "public-input-mismatch", 0};
    if (!(args[4] == phi && args[5] == plo)) return {false, "public-input-mismatch", 0};

    // Replay guard: one accepted submission per batch digest.
    std::string digest_key = args[0].to_hex() + args[1].to_hex();
    if (c.seen_batch_digests.contains(digest_key)) return {false, "replay", 0};
    c.seen_batch_digests.insert(digest_key);

    uint64_t count = static_cast<uint64_t>(args[3].value());
    c.accepted_outputs.push_back(count);
    return {true, "ok", 0};
}

VerificationReceipt ChainState::verify_tee_package(Contract& c, const EvidencePackage& package,
                                                   CostMeter& meter) {
    const auto& material = std::get<TeeContractMaterial>(c.material);

    tee::TeeEvidence ev;
    tee::TeePublicArgs args;
    try {
        ev = tee::evidence_from_json(
            std::string(package.evidence_body.begin(), package.evidence_body.end()));
        args = tee::decode_tee_public_args(package.public_args);
    } catch (const std::exception&) {
        return {false, "evidence-malformed", 0};
    }

    if (package.program_id != material.program_id || ev.program_id != material.program_id)
        return {false, "program-mismatch", 0};

    // The output digest must re-derive from the claimed public arguments.
    Bytes output_enc;
    append_u64_be(output_enc, args.violation_count);
    append_bytes(output_enc, args.scaled_digest);
    meter.charge("hash_call", 1, weights_.hash_call);
    meter.charge("hash_word", words32(output_enc.size()), weights_.hash_word);
    if (hash(output_enc) != ev.output_digest) return {false, "evidence-invalid", 0};
    if (args.batch_digest != ev.batch_digest || args.counter != ev.counter)
        return {false, "evidence-invalid", 0};

    meter.charge("signature_verify", 1, weights_.signature_verify);
    if (!verify(material.evidence_public_key, tee::evidence_payload(ev), ev.signature))
        return {false, "evidence-invalid", 0};

    if (ev.counter <= c.last_counter) return {false, "replay", 0};
    c.last_counter = ev.counter;

    c.accepted_outputs.push_back(args.violation_count);
    return {true, "ok", 0};
}

std::vector<uint64_t> ChainState::read_outputs(const std::string& workflow_id) const {
    std::lock_guard lock(mutex_);
    auto it = contracts_.find(workflow_id);
    if (it == contracts_.end()) throw ChainError("unknown workflow: " + workflow_id);
    return it->second.accepted_outputs;
}

std::string ChainState::export_json() const {
    std::lock_guard lock(mutex_);
    nlohmann::json j;
    j["height"] = height_;
    j["weights"] = {{"signature_verify", weights_.signature_verify},
                    {"hash_call", weights_.hash_call},
                    {"hash_word", weights_.hash_word},
                    {"constraint_check", weights_.constraint_check},
                    {"calldata_byte", weights_.calldata_byte}};
    nlohmann::json contracts = nlohmann::json::object();
    for (const auto& [id, c] : contracts_) {
        nlohmann::json jc;
        jc["backend"] = backend_name(c.backend);
        if (c.backend == BackendId::constraint_system) {
            const auto& m = std::get<CsContractMaterial>(c.material);
            jc["system"] = nlohmann::json::parse(cs::cs_to_json(m.system));
            jc["verification_key"] = {
                {"cs_digest", to_hex(m.verification_key.cs_digest)},
                {"layout", m.verification_key.layout.roles},
                {"public_slots", m.verification_key.public_slots},
                {"setup_id", to_hex(m.verification_key.setup_id)},
            };
            jc["expected_threshold"] = m.expected_threshold;
            jc["sensor_pk_digest"] = to_hex(m.sensor_pk_digest);
        } else {
            const auto& m = std::get<TeeContractMaterial>(c.material);
            jc["evidence_public_key"] = to_hex(m.evidence_public_key);
            jc["reference_measurement"] = to_hex(m.reference_measurement.digest);
            jc["program_id"] = to_hex(m.program_id);
        }
        jc["accepted_outputs"] = c.accepted_outputs;
        jc["last_counter"] = c.last_counter;
        jc["seen_batch_digests"] = c.seen_batch_digests;
        contracts[id] = std::move(jc);
    }
    j["contracts"] = std::move(contracts);
    nlohmann::json log = nlohmann::json::array();
    for (const auto& tx : tx_log_) {
        nlohmann::json jt = {{"height", tx.height},     {"workflow_id", tx.workflow_id},
                             {"backend", tx.backend},   {"accepted", tx.accepted},
                             {"reason", tx.reason},     {"cost_units", tx.cost_units}};
        if (tx.violation_count) jt["violation_count"] = *tx.violation_count;
        log.push_back(std::move(jt));
    }
    j["tx_log"] = std::move(log);
    return j.dump(2) + "\n";
}

std::unique_ptr<ChainState> ChainState::import_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    CostWeights w;
    w.signature_verify = j.at("weights").at("signature_verify").get<uint64_t>();
    w.hash_call = j.at("weights").at("hash_call").get<uint64_t>();
    w.hash_word = j.at("weights").at("hash_word").get<uint64_t>();
    w.constraint_check = j.at("weights").at("constraint_check").get<uint64_t>();
    w.calldata_byte = j.at("weights").at("calldata_byte").get<uint64_t>();
    auto chain = std::make_unique<ChainState>(w);
    chain->height_ = j.at("height").get<uint64_t>();
    for (const auto& [id, jc] : j.at("contracts").items()) {
        Contract c;
        c.backend = backend_from_name(jc.at("backend").get<std::string>());
        if (c.backend == BackendId::constraint_system) {
            CsContractMaterial m;
            m.system = cs::cs_from_json(jc.at("system").dump());
            const auto& vk = jc.at("verification_key");
            m.verification_key.cs_digest = digest_from_hex(vk.at("cs_digest").get<std::string>());
            m.verification_key.layout.roles = vk.at("layout").get<std::vector<std::string>>();
            m.verification_key.public_slots = vk.at("public_slots").get<std::vector<uint32_t>>();
            m.verification_key.setup_id = digest_from_hex(vk.at("setup_id").get<std::string>());
            m.expected_threshold = jc.at("expected_threshold").get<int64_t>();
            m.sensor_pk_digest = digest_from_hex(jc.at("sensor_pk_digest").get<std::string>());
            c.material = std::move(m);
        } else {
            TeeContractMaterial m;
            m.evidence_public_key = from_hex(jc.at("evidence_public_key").get<std::string>());
            m.reference_measurement.digest =
                digest_from_hex(jc.at("reference_measurement").get<std::string>());
            m.program_id = digest_from_hex(jc.at("program_id").get<std::string>());
            c.material = std::move(m);
        }
        c.accepted_outputs = jc.at("accepted_outputs").get<std::vector<uint64_t>>();
        c.last_counter = jc.at("last_counter").get<uint64_t>();
        c.seen_batch_digests = jc.at("seen_batch_digests").get<std::set<std::string>>();
        chain->contracts_.emplace(id, std::move(c));
    }
    for (const auto& jt : j.at("tx_log")) {
        TxRecord tx;
        tx.height = jt.at("height").get<uint64_t>();
        tx.workflow_id = jt.at("workflow_id").get<std::string>();
        tx.backend = jt.at("backend").get<std::string>();
        tx.accepted = jt.at("accepted").get<bool>();
        tx.reason = jt.at("reason").get<std::string>();
        tx.cost_units = jt.at("cost_units").get<uint64_t>();
        if (jt.contains("violation_count"))
            tx.violation_count = jt.at("violation_count").get<uint64_t>();
        chain->tx_log_.push_back(std::move(tx));
    }
    return chain;
}

}  // namespace chain
}  // namespace ovpp
