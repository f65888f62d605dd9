#include "ovpp/cs.hpp"

#include <stdexcept>

#include "json.hpp"

namespace ovpp {
namespace cs {

namespace {

// Comparison gadget parameters: values and thresholds are bounded to signed
// 16 bits, so u = value - threshold + (2^16 - 1) fits in 17 bits and its top
// bit is exactly the indicator of value > threshold.
constexpr int kBitsPerValue = 17;
constexpr int64_t kComparisonShift = 65535;
constexpr int64_t kValueBound = 32767;  // |value|, |threshold| <= this + sign

Fe eval(const LinearCombination& lc, const std::vector<Fe>& w) {
    Fe acc;
    for (const auto& [slot, coeff] : lc) acc = acc + coeff * w[slot];
    return acc;
}

bool satisfied(const Constraint& c, const std::vector<Fe>& w) {
    return (eval(c.a, w) * eval(c.b, w)) == eval(c.c, w);
}

void append_lc(Bytes& out, const LinearCombination& lc) {
    append_u32_be(out, static_cast<uint32_t>(lc.size()));
    for (const auto& [slot, coeff] : lc) {
        append_u32_be(out, slot);
        append_bytes(out, coeff.to_bytes32());
    }
}

struct SlotMap {
    uint32_t value_base;
    uint32_t bit_base;
    uint32_t num_values;

    uint32_t value(uint32_t j) const { return value_base + j; }
    uint32_t bit(uint32_t j, int i) const {
        return bit_base + j * kBitsPerValue + static_cast<uint32_t>(i);
    }
    uint32_t indicator(uint32_t j) const { return bit(j, kBitsPerValue - 1); }
};

SlotMap slot_map(uint32_t batch_size) {
    SlotMap m{};
    m.num_values = batch_size * static_cast<uint32_t>(kValuesPerMeasurement);
    m.value_base = 7;
    m.bit_base = m.value_base + m.num_values;
    return m;
}

std::pair<Fe, Fe> split_digest(const Digest& d) {
    return {Fe::from_bytes16(std::span<const uint8_t>(d.data(), 16)),
            Fe::from_bytes16(std::span<const uint8_t>(d.data() + 16, 16))};
}

nlohmann::json lc_to_json(const LinearCombination& lc) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& [slot, coeff] : lc) arr.push_back({slot, coeff.to_hex()});
    return arr;
}

LinearCombination lc_from_json(const nlohmann::json& arr) {
    LinearCombination lc;
    for (const auto& t : arr)
        lc.emplace_back(t.at(0).get<uint32_t>(), Fe::from_hex(t.at(1).get<std::string>()));
    return lc;
}

}  // namespace

Bytes encode_cs(const ConstraintSystem& cs) {
    Bytes out;
    append_bytes(out, cs.program_id);
    append_u32_be(out, cs.batch_size);
    append_u32_be(out, static_cast<uint32_t>(cs.layout.roles.size()));
    for (const auto& r : cs.layout.roles) append_string(out, r);
    append_u32_be(out, cs.num_slots);
    append_u32_be(out, static_cast<uint32_t>(cs.constraints.size()));
    for (const auto& c : cs.constraints) {
        append_lc(out, c.a);
        append_lc(out, c.b);
        append_lc(out, c.c);
    }
    append_u32_be(out, static_cast<uint32_t>(cs.public_slots.size()));
    for (uint32_t s : cs.public_slots) append_u32_be(out, s);
    append_u32_be(out, static_cast<uint32_t>(cs.value_slots.size()));
    for (uint32_t s : cs.value_slots) append_u32_be(out, s);
    append_u32_be(out, cs.digest_hi_slot);
    append_u32_be(out, cs.digest_lo_slot);
    append_u32_be(out, cs.pk_digest_hi_slot);
    append_u32_be(out, cs.pk_digest_lo_slot);
    append_u32_be(out, cs.threshold_slot);
    append_u32_be(out, cs.count_slot);
    return out;
}

Digest cs_digest(const ConstraintSystem& cs) { return hash(encode_cs(cs)); }

Bytes encode_witness(const Witness& w) {
    Bytes out;
    append_u32_be(out, static_cast<uint32_t>(w.assignment.size()));
    for (const auto& fe : w.assignment) append_bytes(out, fe.to_bytes32());
    return out;
}

ConstraintSystem compile(const PreprocessProgram& program, uint32_t batch_size,
                         const PublicLayout& layout) {
    if (batch_size == 0) throw std::invalid_argument("batch_size must be >= 1");

    ConstraintSystem cs;
    cs.program_id = program.program_id;
    cs.batch_size = batch_size;
    cs.layout = layout;

    const SlotMap slots = slot_map(batch_size);
    cs.num_slots = slots.bit_base + slots.num_values * kBitsPerValue;
    cs.public_slots = {1, 2, 3, 4, 5, 6};
    cs.digest_hi_slot = 1;
    cs.digest_lo_slot = 2;
    cs.threshold_slot = 3;
    cs.count_slot = 4;
    cs.pk_digest_hi_slot = 5;
    cs.pk_digest_lo_slot = 6;
    for (uint32_t j = 0; j < slots.num_values; ++j) cs.value_slots.push_back(slots.value(j));

    const Fe one = Fe::from_u64(1);
    const Fe minus_one = Fe::from_i64(-1);

    for (uint32_t j = 0; j < slots.num_values; ++j) {
        // Booleanity: b * (b - 1) = 0 for each decomposition bit.
        for (int i = 0; i < kBitsPerValue; ++i) {
            Constraint c;
            c.a = {{slots.bit(j, i), one}};
            c.b = {{slots.bit(j, i), one}, {0, minus_one}};
            cs.constraints.push_back(std::move(c));
        }
        // Sum: sum(2^i b_i) - value + threshold - shift = 0.
        Constraint sum;
        for (int i = 0; i < kBitsPerValue; ++i)
            sum.a.emplace_back(slots.bit(j, i), Fe::from_u64(uint64_t{1} << i));
        sum.a.emplace_back(slots.value(j), minus_one);
        sum.a.emplace_back(cs.threshold_slot, one);
        sum.a.emplace_back(0, Fe::from_i64(-kComparisonShift));
        sum.b = {{0, one}};
        cs.constraints.push_back(std::move(sum));
    }

    // Count: sum of indicator bits equals the public count slot.
    Constraint count;
    for (uint32_t j = 0; j < slots.num_values; ++j) count.a.emplace_back(slots.indicator(j), one);
    count.a.emplace_back(cs.count_slot, minus_one);
    count.b = {{0, one}};
    cs.constraints.push_back(std::move(count));

    return cs;
}

CsKeyPair setup(const ConstraintSystem& system, const Bytes& crs_seed) {
    Digest d = cs_digest(system);
    Bytes material = crs_seed;
    append_bytes(material, d);
    Digest setup_id = hash(material);
    // The seed is not retained past this point; only setup_id survives.
    CsKeyPair kp;
    kp.proving_key = ProvingKey{system, setup_id};
    kp.verification_key = VerificationKey{d, system.layout, system.public_slots, setup_id};
    return kp;
}

Witness compute_witness(const ConstraintSystem& system, const SignedBatch& signed_batch,
                        const AuxiliaryData& aux, const Bytes& sensor_public_key) {
    const auto& batch = signed_batch.batch;
    if (batch.measurements.size() != system.batch_size)
        throw std::invalid_argument("batch size does not match the compiled system");
    if (aux.threshold < -kValueBound - 1 || aux.threshold > kValueBound)
        throw std::out_of_range("threshold outside 16-bit range");

    const SlotMap slots = slot_map(system.batch_size);
    Witness w;
    w.assignment.assign(system.num_slots, Fe());
    w.assignment[0] = Fe::from_u64(1);

    auto [dhi, dlo] = split_digest(signed_batch.batch_digest);
    w.assignment[system.digest_hi_slot] = dhi;
    w.assignment[system.digest_lo_slot] = dlo;
    w.assignment[system.threshold_slot] = Fe::from_i64(aux.threshold);
    auto [phi, plo] = split_digest(hash(sensor_public_key));
    w.assignment[system.pk_digest_hi_slot] = phi;
    w.assignment[system.pk_digest_lo_slot] = plo;

    uint64_t count = 0;
    uint32_t j = 0;
    for (const auto& m : batch.measurements) {
        for (int64_t v : m.values) {
            if (v < -kValueBound - 1 || v > kValueBound)
                throw std::out_of_range("measurement value outside 16-bit range");
            w.assignment[slots.value(j)] = Fe::from_i64(v);
            auto u = static_cast<uint64_t>(v - aux.threshold + kComparisonShift);
            for (int i = 0; i < kBitsPerValue; ++i)
                w.assignment[slots.bit(j, i)] = Fe::from_u64((u >> i) & 1);
            count += (u >> (kBitsPerValue - 1)) & 1;
            ++j;
        }
    }
    w.assignment[system.count_slot] = Fe::from_u64(count);

    for (size_t i = 0; i < system.constraints.size(); ++i)
        if (!satisfied(system.constraints[i], w.assignment))
            throw std::logic_error("witness does not satisfy constraint " + std::to_string(i));
    return w;
}

CsProof generate_proof(const ProvingKey& proving_key, const Witness& witness,
                       const SignedBatch& signed_batch, const Bytes& sensor_public_key) {
    if (witness.assignment.size() != proving_key.system.num_slots)
        throw std::invalid_argument("witness size does not match the proving key's system");
    for (const auto& c : proving_key.system.constraints)
        if (!satisfied(c, witness.assignment))
            throw std::invalid_argument("witness does not satisfy the proving key's system");

    CsProof proof;
    proof.cs_digest = cs_digest(proving_key.system);
    proof.setup_id = proving_key.setup_id;
    for (uint32_t s : proving_key.system.public_slots)
        proof.public_values.push_back(witness.assignment[s]);
    proof.witness_commitment = hash(encode_witness(witness));
    proof.opened_witness = witness.assignment;
    proof.opened_meta = signed_batch.batch.meta;
    proof.sensor_public_key = sensor_public_key;
    proof.sensor_signature = signed_batch.signature;
    return proof;
}

std::string reason_name(VerifyReason r) {
    switch (r) {
        case VerifyReason::ok: return "ok";
        case VerifyReason::program_mismatch: return "program-mismatch";
        case VerifyReason::setup_mismatch: return "setup-mismatch";
        case VerifyReason::commitment_mismatch: return "commitment-mismatch";
        case VerifyReason::constraint_unsatisfied: return "constraint-unsatisfied";
        case VerifyReason::digest_link_mismatch: return "digest-link-mismatch";
        case VerifyReason::sensor_signature_invalid: return "sensor-signature-invalid";
        case VerifyReason::public_input_mismatch: return "public-input-mismatch";
    }
    return "unknown";
}

VerifyResult verify_cs(const ConstraintSystem& system, const VerificationKey& key,
                       const CsProof& proof, const Bytes& claimed_public_args) {
    VerifyResult res;
    auto fail = [&](VerifyReason r) {
        res.ok = false;
        res.reason = r;
        return res;
    };

    res.hash_calls++;
    res.hashed_bytes += encode_cs(system).size();
    if (cs_digest(system) != key.cs_digest) return fail(VerifyReason::program_mismatch);
    if (proof.cs_digest != key.cs_digest) return fail(VerifyReason::program_mismatch);
    if (proof.opened_witness.size() != system.num_slots)
        return fail(VerifyReason::program_mismatch);
    if (proof.setup_id != key.setup_id) return fail(VerifyReason::setup_mismatch);

    res.hash_calls++;
    {
        Bytes enc = encode_witness(Witness{proof.opened_witness});
        res.hashed_bytes += enc.size();
        if (hash(enc) != proof.witness_commitment)
            return fail(VerifyReason::commitment_mismatch);
    }

    const auto& w = proof.opened_witness;
    if (!(w[0] == Fe::from_u64(1))) return fail(VerifyReason::constraint_unsatisfied);
    for (const auto& c : system.constraints) {
        res.constraints_checked++;
        if (!satisfied(c, w)) return fail(VerifyReason::constraint_unsatisfied);
    }

    // Digest-link gadget: the private value slots plus the opened meta-data
    // must hash to the public batch digest.
    MeasurementBatch reconstructed;
    reconstructed.meta = proof.opened_meta;
    try {
        Measurement m{};
        size_t k = 0;
        for (uint32_t slot : system.value_slots) {
            m.values[k % kValuesPerMeasurement] = w[slot].to_signed(kValueBound + 1);
            if (++k % kValuesPerMeasurement == 0) reconstructed.measurements.push_back(m);
        }
    } catch (const std::out_of_range&) {
        return fail(VerifyReason::digest_link_mismatch);
    }
    res.hash_calls++;
    res.hashed_bytes += encode_batch(reconstructed).size();
    Digest linked = batch_digest(reconstructed);
    auto [dhi, dlo] = split_digest(linked);
    if (!(w[system.digest_hi_slot] == dhi && w[system.digest_lo_slot] == dlo))
        return fail(VerifyReason::digest_link_mismatch);

    // Sensor-signature gadget: the opened key must match the public key
    // digest slots and its signature over the linked batch digest must hold.
    res.hash_calls++;
    res.hashed_bytes += proof.sensor_public_key.size();
    auto [phi, plo] = split_digest(hash(proof.sensor_public_key));
    if (!(w[system.pk_digest_hi_slot] == phi && w[system.pk_digest_lo_slot] == plo))
        return fail(VerifyReason::sensor_signature_invalid);
    res.signature_checks++;
    if (!verify(proof.sensor_public_key, linked, proof.sensor_signature))
        return fail(VerifyReason::sensor_signature_invalid);

    // Public arguments: witness values at the public slots must equal both
    // the proof's announced values and the caller's claim.
    std::vector<Fe> at_slots;
    for (uint32_t s : key.public_slots) at_slots.push_back(w[s]);
    if (at_slots != proof.public_values) return fail(VerifyReason::public_input_mismatch);
    std::vector<Fe> claimed;
    try {
        claimed = decode_public_args(claimed_public_args);
    } catch (const std::exception&) {
        return fail(VerifyReason::public_input_mismatch);
    }
    if (claimed != at_slots) return fail(VerifyReason::public_input_mismatch);

    res.ok = true;
    res.reason = VerifyReason::ok;
    return res;
}

Bytes encode_public_args(const std::vector<Fe>& public_values) {
    Bytes out;
    for (const auto& fe : public_values) append_bytes(out, fe.to_bytes32());
    return out;
}

std::vector<Fe> decode_public_args(const Bytes& args) {
    if (args.size() % 32 != 0) throw std::invalid_argument("public args must be 32-byte aligned");
    std::vector<Fe> out;
    for (size_t i = 0; i < args.size(); i += 32)
        out.push_back(Fe::from_bytes32(std::span<const uint8_t>(args.data() + i, 32)));
    return out;
}

std::vector<Fe> expected_public_values(const SignedBatch& signed_batch, const AuxiliaryData& aux,
                                       const Bytes& sensor_public_key, uint64_t violation_count) {
    auto [dhi, dlo] = split_digest(signed_batch.batch_digest);
    auto [phi, plo] = split_digest(hash(sensor_public_key));
    return {dhi, dlo, Fe::from_i64(aux.threshold), Fe::from_u64(violation_count), phi, plo};
}

std::string cs_to_json(const ConstraintSystem& cs) {
    nlohmann::json j;
    j["program_id"] = to_hex(cs.program_id);
    j["batch_size"] = cs.batch_size;
    j["layout"] = cs.layout.roles;
    j["num_slots"] = cs.num_slots;
    nlohmann::json cons = nlohmann::json::array();
    for (const auto& c : cs.constraints)
        cons.push_back({lc_to_json(c.a), lc_to_json(c.b), lc_to_json(c.c)});
    j["constraints"] = std::move(cons);
    j["public_slots"] = cs.public_slots;
    j["value_slots"] = cs.value_slots;
    j["digest_hi_slot"] = cs.digest_hi_slot;
    j["digest_lo_slot"] = cs.digest_lo_slot;
    j["pk_digest_hi_slot"] = cs.pk_digest_hi_slot;
    j["pk_digest_lo_slot"] = cs.pk_digest_lo_slot;
    j["threshold_slot"] = cs.threshold_slot;
    j["count_slot"] = cs.count_slot;
    return j.dump(2) + "\n";
}

ConstraintSystem cs_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    ConstraintSystem cs;
    cs.program_id = digest_from_hex(j.at("program_id").get<std::string>());
    cs.batch_size = j.at("batch_size").get<uint32_t>();
    cs.layout.roles = j.at("layout").get<std::vector<std::string>>();
    cs.num_slots = j.at("num_slots").get<uint32_t>();
    for (const auto& c : j.at("constraints"))
        cs.constraints.push_back(
            Constraint{lc_from_json(c.at(0)), lc_from_json(c.at(1)), lc_from_json(c.at(2))});
    cs.public_slots = j.at("public_slots").get<std::vector<uint32_t>>();
    cs.value_slots = j.at("value_slots").get<std::vector<uint32_t>>();
    cs.digest_hi_slot = j.at("digest_hi_slot").get<uint32_t>();
    cs.digest_lo_slot = j.at("digest_lo_slot").get<uint32_t>();
    cs.pk_digest_hi_slot = j.at("pk_digest_hi_slot").get<uint32_t>();
    cs.pk_digest_lo_slot = j.at("pk_digest_lo_slot").get<uint32_t>();
    cs.threshold_slot = j.at("threshold_slot").get<uint32_t>();
    cs.count_slot = j.at("count_slot").get<uint32_t>();
    return cs;
}

std::string keypair_to_json(const CsKeyPair& kp) {
    nlohmann::json j;
    j["system"] = nlohmann::json::parse(cs_to_json(kp.proving_key.system));
    j["setup_id"] = to_hex(kp.proving_key.setup_id);
    j["verification_key"] = {
        {"cs_digest", to_hex(kp.verification_key.cs_digest)},
        {"layout", kp.verification_key.layout.roles},
        {"public_slots", kp.verification_key.public_slots},
        {"setup_id", to_hex(kp.verification_key.setup_id)},
    };
    return j.dump(2) + "\n";
}

CsKeyPair keypair_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    CsKeyPair kp;
    kp.proving_key.system = cs_from_json(j.at("system").dump());
    kp.proving_key.setup_id = digest_from_hex(j.at("setup_id").get<std::string>());
    const auto& vk = j.at("verification_key");
    kp.verification_key.cs_digest = digest_from_hex(vk.at("cs_digest").get<std::string>());
    kp.verification_key.layout.roles = vk.at("layout").get<std::vector<std::string>>();
    kp.verification_key.public_slots = vk.at("public_slots").get<std::vector<uint32_t>>();
    kp.verification_key.setup_id = digest_from_hex(vk.at("setup_id").get<std::string>());
    return kp;
}

std::string proof_to_json(const CsProof& proof) {
    nlohmann::json j;
    j["cs_digest"] = to_hex(proof.cs_digest);
    j["setup_id"] = to_hex(proof.setup_id);
    nlohmann::json pub = nlohmann::json::array();
    for (const auto& fe : proof.public_values) pub.push_back(fe.to_hex());
    j["public_values"] = std::move(pub);
    j["witness_commitment"] = to_hex(proof.witness_commitment);
    nlohmann::json wit = nlohmann::json::array();
    for (const auto& fe : proof.opened_witness) wit.push_back(fe.to_hex());
    j["opened_witness"] = std::move(wit);
    j["meta"] = {{"sensor_id", proof.opened_meta.sensor_id},
                 {"timestamp", proof.opened_meta.timestamp},
                 {"sequence_no", proof.opened_meta.sequence_no}};
    j["sensor_public_key"] = to_hex(proof.sensor_public_key);
    j["sensor_signature"] = to_hex(proof.sensor_signature);
    return j.dump(2) + "\n";
}

CsProof proof_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    CsProof proof;
    proof.cs_digest = digest_from_hex(j.at("cs_digest").get<std::string>());
    proof.setup_id = digest_from_hex(j.at("setup_id").get<std::string>());
    for (const auto& s : j.at("public_values"))
        proof.public_values.push_back(Fe::from_hex(s.get<std::string>()));
    proof.witness_commitment = digest_from_hex(j.at("witness_commitment").get<std::string>());
    for (const auto& s : j.at("opened_witness"))
        proof.opened_witness.push_back(Fe::from_hex(s.get<std::string>()));
    proof.opened_meta.sensor_id = j.at("meta").at("sensor_id").get<std::string>();
    proof.opened_meta.timestamp = j.at("meta").at("timestamp").get<uint64_t>();
    proof.opened_meta.sequence_no = j.at("meta").at("sequence_no").get<uint64_t>();
    proof.sensor_public_key = from_hex(j.at("sensor_public_key").get<std::string>());
    proof.sensor_signature = from_hex(j.at("sensor_signature").get<std::string>());
    return proof;
}

}  // namespace cs
}  // namespace ovpp
