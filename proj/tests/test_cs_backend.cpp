#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "ovpp/cs.hpp"

using namespace ovpp;

namespace {

struct Fixture {
    KeyPair sensor = generate_keypair(KeyRole::sensor, Bytes(32, 1));
    AuxiliaryData aux{50, 10, "r"};
    PreprocessProgram program = PreprocessProgram::threshold_violation();

    SignedBatch make_batch(uint32_t size, uint64_t seed, uint64_t seq = 1) {
        return sign_batch(generate_batch(size, 0, 100, seed, MetaData{"s", 1, seq}), sensor);
    }
};

uint64_t oracle_count(const MeasurementBatch& batch, int64_t threshold) {
    uint64_t n = 0;
    for (const auto& m : batch.measurements)
        for (int64_t v : m.values)
            if (v > threshold) ++n;
    return n;
}

}  // namespace

TEST_CASE("compile is deterministic and size-specialized") {
    auto program = PreprocessProgram::threshold_violation();
    CHECK(cs::cs_digest(cs::compile(program, 4)) == cs::cs_digest(cs::compile(program, 4)));
    CHECK(cs::cs_digest(cs::compile(program, 4)) != cs::cs_digest(cs::compile(program, 8)));
    CHECK_THROWS_AS(cs::compile(program, 0), std::invalid_argument);
}

TEST_CASE("a different public layout changes the system identity") {
    auto program = PreprocessProgram::threshold_violation();
    cs::PublicLayout other{{"batch_digest", "threshold", "violation_count"}};
    CHECK(cs::cs_digest(cs::compile(program, 2)) !=
          cs::cs_digest(cs::compile(program, 2, other)));
}

TEST_CASE("setup binds the seed and the system") {
    auto system = cs::compile(PreprocessProgram::threshold_violation(), 2);
    auto a = cs::setup(system, Bytes(32, 7));
    auto b = cs::setup(system, Bytes(32, 7));
    auto c = cs::setup(system, Bytes(32, 8));
    CHECK(a.proving_key.setup_id == b.proving_key.setup_id);
    CHECK(a.proving_key.setup_id != c.proving_key.setup_id);
    CHECK(a.verification_key.cs_digest == cs::cs_digest(system));
}

TEST_CASE("honest witness satisfies the system and matches the pipeline count") {
    Fixture fx;
    std::mt19937_64 rng(31);
    for (int i = 0; i < 50; ++i) {
        uint32_t size = 1 + rng() % 8;
        auto system = cs::compile(fx.program, size);
        auto sb = fx.make_batch(size, rng());
        int64_t threshold = static_cast<int64_t>(rng() % 161) - 30;
        AuxiliaryData aux{threshold, 1, "r"};
        auto w = cs::compute_witness(system, sb, aux, fx.sensor.public_key);
        CHECK(w.assignment[0] == Fe::from_u64(1));
        CHECK(w.assignment[system.count_slot] ==
              Fe::from_u64(oracle_count(sb.batch, threshold)));
        CHECK(w.assignment[system.threshold_slot] == Fe::from_i64(threshold));
    }
}

TEST_CASE("witness computation rejects size mismatch and out-of-range values") {
    Fixture fx;
    auto system = cs::compile(fx.program, 2);
    CHECK_THROWS_AS(cs::compute_witness(system, fx.make_batch(3, 1), fx.aux,
                                        fx.sensor.public_key),
                    std::invalid_argument);
    auto big = sign_batch(
        MeasurementBatch{MetaData{"s", 1, 1},
                         {Measurement{{1, 2, 3, 1 << 20}}, Measurement{{0, 0, 0, 0}}}},
        fx.sensor);
    CHECK_THROWS_AS(cs::compute_witness(system, big, fx.aux, fx.sensor.public_key),
                    std::out_of_range);
}

TEST_CASE("honest proof verifies against the expected public arguments") {
    Fixture fx;
    for (uint32_t size : {1u, 4u, 8u, 16u, 32u}) {
        auto system = cs::compile(fx.program, size);
        auto keys = cs::setup(system, Bytes(32, 3));
        auto sb = fx.make_batch(size, size);
        auto w = cs::compute_witness(system, sb, fx.aux, fx.sensor.public_key);
        auto proof = cs::generate_proof(keys.proving_key, w, sb, fx.sensor.public_key);
        auto claimed = cs::encode_public_args(cs::expected_public_values(
            sb, fx.aux, fx.sensor.public_key, oracle_count(sb.batch, fx.aux.threshold)));
        auto res = cs::verify_cs(system, keys.verification_key, proof, claimed);
        CHECK(res.ok);
        CHECK(res.constraints_checked == system.constraints.size());
    }
}

TEST_CASE("wrong claimed threshold fails with public-input-mismatch") {
    Fixture fx;
    auto system = cs::compile(fx.program, 2);
    auto keys = cs::setup(system, Bytes(32, 3));
    auto sb = fx.make_batch(2, 5);
    auto w = cs::compute_witness(system, sb, fx.aux, fx.sensor.public_key);
    auto proof = cs::generate_proof(keys.proving_key, w, sb, fx.sensor.public_key);
    AuxiliaryData wrong = fx.aux;
    wrong.threshold += 10;
    auto claimed = cs::encode_public_args(cs::expected_public_values(
        sb, wrong, fx.sensor.public_key, oracle_count(sb.batch, fx.aux.threshold)));
    auto res = cs::verify_cs(system, keys.verification_key, proof, claimed);
    CHECK_FALSE(res.ok);
    CHECK(res.reason == cs::VerifyReason::public_input_mismatch);
}

TEST_CASE("proof from a different program fails with program-mismatch") {
    Fixture fx;
    auto system = cs::compile(fx.program, 2);
    auto keys = cs::setup(system, Bytes(32, 3));

    PreprocessProgram other{hash(Bytes{'P', '2'})};
    auto other_system = cs::compile(other, 2);
    auto other_keys = cs::setup(other_system, Bytes(32, 3));
    auto sb = fx.make_batch(2, 6);
    auto w = cs::compute_witness(other_system, sb, fx.aux, fx.sensor.public_key);
    auto proof = cs::generate_proof(other_keys.proving_key, w, sb, fx.sensor.public_key);
    auto claimed = cs::encode_public_args(proof.public_values);
    auto res = cs::verify_cs(system, keys.verification_key, proof, claimed);
    CHECK_FALSE(res.ok);
    CHECK(res.reason == cs::VerifyReason::program_mismatch);
}

TEST_CASE("size specialization: size-N proof never verifies under a size-M key") {
    Fixture fx;
    auto sys4 = cs::compile(fx.program, 4);
    auto sys8 = cs::compile(fx.program, 8);
    auto keys4 = cs::setup(sys4, Bytes(32, 3));
    auto keys8 = cs::setup(sys8, Bytes(32, 3));
    auto sb = fx.make_batch(4, 7);
    auto w = cs::compute_witness(sys4, sb, fx.aux, fx.sensor.public_key);
    auto proof = cs::generate_proof(keys4.proving_key, w, sb, fx.sensor.public_key);
    auto res = cs::verify_cs(sys8, keys8.verification_key, proof,
                             cs::encode_public_args(proof.public_values));
    CHECK_FALSE(res.ok);
    CHECK(res.reason == cs::VerifyReason::program_mismatch);
}

TEST_CASE("single-entry witness mutations always fail verification") {
    Fixture fx;
    auto system = cs::compile(fx.program, 2);
    auto keys = cs::setup(system, Bytes(32, 3));
    auto sb = fx.make_batch(2, 8);
    auto w = cs::compute_witness(system, sb, fx.aux, fx.sensor.public_key);
    auto honest = cs::generate_proof(keys.proving_key, w, sb, fx.sensor.public_key);
    auto claimed = cs::encode_public_args(honest.public_values);

    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        auto proof = honest;
        size_t slot = rng() % proof.opened_witness.size();
        proof.opened_witness[slot] =
            proof.opened_witness[slot] + Fe::from_u64(1 + rng() % 1000);
        if (trial % 2 == 0)
            proof.witness_commitment =
                hash(cs::encode_witness(cs::Witness{proof.opened_witness}));
        auto res = cs::verify_cs(system, keys.verification_key, proof, claimed);
        CHECK_FALSE(res.ok);
    }
}

TEST_CASE("mutated public value fails verification") {
    Fixture fx;
    auto system = cs::compile(fx.program, 1);
    auto keys = cs::setup(system, Bytes(32, 3));
    auto sb = fx.make_batch(1, 9);
    auto w = cs::compute_witness(system, sb, fx.aux, fx.sensor.public_key);
    auto honest = cs::generate_proof(keys.proving_key, w, sb, fx.sensor.public_key);
    for (size_t i = 0; i < honest.public_values.size(); ++i) {
        auto proof = honest;
        proof.public_values[i] = proof.public_values[i] + Fe::from_u64(1);
        auto res = cs::verify_cs(system, keys.verification_key, proof,
                                 cs::encode_public_args(honest.public_values));
        CHECK_FALSE(res.ok);
    }
}

TEST_CASE("a forged sensor signature is caught by the signature gadget") {
    Fixture fx;
    auto system = cs::compile(fx.program, 1);
    auto keys = cs::setup(system, Bytes(32, 3));
    auto sb = fx.make_batch(1, 10);

    MeasurementBatch tampered = sb.batch;
    tampered.measurements[0].values[0] += 1;
    SignedBatch forged{tampered, batch_digest(tampered), sb.signature};
    auto w = cs::compute_witness(system, forged, fx.aux, fx.sensor.public_key);
    auto proof = cs::generate_proof(keys.proving_key, w, forged, fx.sensor.public_key);
    auto res = cs::verify_cs(system, keys.verification_key, proof,
                             cs::encode_public_args(proof.public_values));
    CHECK_FALSE(res.ok);
    CHECK(res.reason == cs::VerifyReason::sensor_signature_invalid);
}

TEST_CASE("artifact JSON round-trips byte-identically") {
    Fixture fx;
    auto system = cs::compile(fx.program, 2);
    auto keys = cs::setup(system, Bytes(32, 5));
    auto sb = fx.make_batch(2, 11);
    auto w = cs::compute_witness(system, sb, fx.aux, fx.sensor.public_key);
    auto proof = cs::generate_proof(keys.proving_key, w, sb, fx.sensor.public_key);

    auto cs_text = cs::cs_to_json(system);
    CHECK(cs::cs_to_json(cs::cs_from_json(cs_text)) == cs_text);
    CHECK(cs::cs_digest(cs::cs_from_json(cs_text)) == cs::cs_digest(system));

    auto kp_text = cs::keypair_to_json(keys);
    CHECK(cs::keypair_to_json(cs::keypair_from_json(kp_text)) == kp_text);

    auto proof_text = cs::proof_to_json(proof);
    CHECK(cs::proof_to_json(cs::proof_from_json(proof_text)) == proof_text);

    // A deserialized proof still verifies.
    auto res = cs::verify_cs(system, keys.verification_key, cs::proof_from_json(proof_text),
                             cs::encode_public_args(proof.public_values));
    CHECK(res.ok);
}
