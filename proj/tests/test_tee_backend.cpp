#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <random>

#include "doctest.h"
#include "ovpp/tee.hpp"

using namespace ovpp;
using namespace ovpp::tee;

namespace {

struct Fixture {
    KeyPair root = generate_keypair(KeyRole::pki_root, Bytes(32, 0x10));
    KeyPair sensor = generate_keypair(KeyRole::sensor, Bytes(32, 0x11));
    Pki pki{root};
    PreprocessProgram program = PreprocessProgram::threshold_violation();
    AuxiliaryData aux{50, 10, "r"};

    std::unique_ptr<EnclaveInstance> make_enclave(const std::string& device_id = "dev-1") {
        pki.issue(device_id);
        return EnclaveInstance::instantiate(pki, device_id, program, aux, sensor.public_key);
    }

    SignedBatch make_batch(uint32_t size, uint64_t seed, uint64_t seq) {
        return sign_batch(generate_batch(size, 0, 100, seed, MetaData{"s", seq, seq}), sensor);
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

TEST_CASE("pki issues verifiable certificates and rejects duplicates") {
    Fixture fx;
    auto cert = fx.pki.issue("dev-a");
    CHECK(verify_certificate(cert, fx.pki.root_public_key()));
    CHECK_THROWS(fx.pki.issue("dev-a"));

    auto other_root = generate_keypair(KeyRole::pki_root, Bytes(32, 0x22));
    CHECK_FALSE(verify_certificate(cert, other_root.public_key));

    Certificate forged = cert;
    forged.device_id = "dev-b";
    CHECK_FALSE(verify_certificate(forged, fx.pki.root_public_key()));
}

TEST_CASE("measurement binds program, auxiliary data and sensor key") {
    Fixture fx;
    auto base = measure(fx.program.program_id, fx.aux, fx.sensor.public_key);
    CHECK(base == measure(fx.program.program_id, fx.aux, fx.sensor.public_key));

    AuxiliaryData other_aux = fx.aux;
    other_aux.threshold += 1;
    CHECK_FALSE(base == measure(fx.program.program_id, other_aux, fx.sensor.public_key));

    auto other_program = hash(Bytes{'o'});
    CHECK_FALSE(base == measure(other_program, fx.aux, fx.sensor.public_key));

    auto other_key = generate_keypair(KeyRole::sensor, Bytes(32, 0x33));
    CHECK_FALSE(base == measure(fx.program.program_id, fx.aux, other_key.public_key));
}

TEST_CASE("instantiated enclave attests against the reference measurement") {
    Fixture fx;
    auto enclave = fx.make_enclave();
    auto report = enclave->attest(fx.pki);
    auto reference = measure(fx.program.program_id, fx.aux, fx.sensor.public_key);
    auto res = verify_attestation(report, fx.pki.root_public_key(), reference);
    CHECK(res.ok);
    CHECK(report.evidence_public_key == enclave->evidence_public_key());
}

TEST_CASE("attestation failure reasons are discriminated") {
    Fixture fx;
    auto enclave = fx.make_enclave();
    auto report = enclave->attest(fx.pki);
    auto reference = measure(fx.program.program_id, fx.aux, fx.sensor.public_key);

    SUBCASE("wrong reference measurement") {
        EnclaveMeasurement wrong{hash(Bytes{'x'})};
        auto res = verify_attestation(report, fx.pki.root_public_key(), wrong);
        CHECK_FALSE(res.ok);
        CHECK(res.reason == AttestReason::measurement_mismatch);
    }
    SUBCASE("wrong pki root") {
        auto other_root = generate_keypair(KeyRole::pki_root, Bytes(32, 0x44));
        auto res = verify_attestation(report, other_root.public_key, reference);
        CHECK_FALSE(res.ok);
        CHECK(res.reason == AttestReason::bad_certificate);
    }
    SUBCASE("tampered device signature") {
        report.device_signature[0] ^= 1;
        auto res = verify_attestation(report, fx.pki.root_public_key(), reference);
        CHECK_FALSE(res.ok);
        CHECK(res.reason == AttestReason::bad_device_signature);
    }
    SUBCASE("swapped evidence key breaks the device signature") {
        report.evidence_public_key = generate_keypair(KeyRole::evidence, Bytes(32, 0x45)).public_key;
        auto res = verify_attestation(report, fx.pki.root_public_key(), reference);
        CHECK_FALSE(res.ok);
        CHECK(res.reason == AttestReason::bad_device_signature);
    }
}

TEST_CASE("any perturbation of the sealed identity changes the measurement") {
    Fixture fx;
    auto reference = measure(fx.program.program_id, fx.aux, fx.sensor.public_key);
    std::mt19937_64 rng(555);
    for (int i = 0; i < 120; ++i) {
        Digest program_id = fx.program.program_id;
        AuxiliaryData aux = fx.aux;
        Bytes sensor_pk = fx.sensor.public_key;
        switch (rng() % 3) {
            case 0: program_id[rng() % 32] ^= uint8_t(1 + rng() % 255); break;
            case 1: aux.threshold += int64_t(1 + rng() % 1000) * (rng() % 2 ? 1 : -1); break;
            case 2: sensor_pk[rng() % sensor_pk.size()] ^= uint8_t(1 + rng() % 255); break;
        }
        auto mutated = measure(program_id, aux, sensor_pk);
        CHECK_FALSE(mutated == reference);
    }
}

TEST_CASE("execute verifies input, computes the output, and signs evidence") {
    Fixture fx;
    auto enclave = fx.make_enclave();
    auto sb = fx.make_batch(4, 77, 1);
    auto [output, evidence] = enclave->execute(sb);

    CHECK(output.violation_count == oracle_count(sb.batch, fx.aux.threshold));
    CHECK(evidence.batch_digest == sb.batch_digest);
    CHECK(evidence.program_id == fx.program.program_id);
    CHECK(evidence.counter == 1);
    CHECK(evidence.output_digest == output_digest(output));
    CHECK(verify(enclave->evidence_public_key(), evidence_payload(evidence), evidence.signature));
}

TEST_CASE("counter increases monotonically across executions") {
    Fixture fx;
    auto enclave = fx.make_enclave();
    for (uint64_t i = 1; i <= 5; ++i) {
        auto [output, evidence] = enclave->execute(fx.make_batch(1, i, i));
        CHECK(evidence.counter == i);
    }
    CHECK(enclave->counter() == 5);
}

TEST_CASE("enclave rejects bad input and emits no evidence") {
    Fixture fx;
    auto enclave = fx.make_enclave();

    SUBCASE("tampered value") {
        auto sb = fx.make_batch(2, 1, 1);
        sb.batch.measurements[0].values[0] += 1;
        CHECK_THROWS_AS(enclave->execute(sb), EnclaveError);
        CHECK(enclave->counter() == 0);
    }
    SUBCASE("foreign sensor key") {
        auto stranger = generate_keypair(KeyRole::sensor, Bytes(32, 0x55));
        auto sb = sign_batch(generate_batch(2, 0, 100, 1, MetaData{"s", 1, 1}), stranger);
        CHECK_THROWS_AS(enclave->execute(sb), EnclaveError);
    }
    SUBCASE("replayed sequence number") {
        auto sb = fx.make_batch(2, 1, 1);
        enclave->execute(sb);
        CHECK_THROWS_AS(enclave->execute(sb), EnclaveError);
        CHECK(enclave->counter() == 1);
    }
}

TEST_CASE("evidence key is fresh per instance") {
    Fixture fx;
    auto a = fx.make_enclave("dev-a2");
    auto b = fx.make_enclave("dev-b2");
    CHECK(a->evidence_public_key() != b->evidence_public_key());
}

TEST_CASE("sealed state restores identically and keeps the replay guard") {
    Fixture fx;
    auto enclave = fx.make_enclave();
    enclave->execute(fx.make_batch(1, 1, 1));
    auto sealed = enclave->seal_to_json();

    auto restored = EnclaveInstance::restore_from_json(sealed);
    CHECK(restored->evidence_public_key() == enclave->evidence_public_key());
    CHECK(restored->counter() == 1);
    CHECK(restored->measurement() == enclave->measurement());
    // The replay guard survives sealing.
    CHECK_THROWS_AS(restored->execute(fx.make_batch(1, 1, 1)), EnclaveError);
    // And a fresh batch continues the counter.
    auto [output, evidence] = restored->execute(fx.make_batch(1, 2, 2));
    CHECK(evidence.counter == 2);
    CHECK(verify(enclave->evidence_public_key(), evidence_payload(evidence), evidence.signature));

    // Sealing is byte-stable for identical state.
    CHECK(EnclaveInstance::restore_from_json(sealed)->seal_to_json() == sealed);
}

TEST_CASE("public-argument encoding is constant-size and round-trips") {
    Digest d1 = hash(Bytes{'a'});
    Digest d2 = hash(Bytes{'b'});
    auto enc = encode_tee_public_args(17, d1, d2, 99);
    CHECK(enc.size() == 8 + 32 + 32 + 8);
    auto enc2 = encode_tee_public_args(1, d1, d2, 1);
    CHECK(enc.size() == enc2.size());

    auto back = decode_tee_public_args(enc);
    CHECK(back.violation_count == 17);
    CHECK(back.scaled_digest == d1);
    CHECK(back.batch_digest == d2);
    CHECK(back.counter == 99);
    CHECK_THROWS(decode_tee_public_args(Bytes(10, 0)));
}

TEST_CASE("evidence and report JSON round-trip byte-identically") {
    Fixture fx;
    auto enclave = fx.make_enclave();
    auto [output, evidence] = enclave->execute(fx.make_batch(2, 9, 1));
    auto ev_text = evidence_to_json(evidence);
    CHECK(evidence_to_json(evidence_from_json(ev_text)) == ev_text);

    auto report = enclave->attest(fx.pki);
    auto rep_text = report_to_json(report);
    CHECK(report_to_json(report_from_json(rep_text)) == rep_text);
    auto reference = measure(fx.program.program_id, fx.aux, fx.sensor.public_key);
    CHECK(verify_attestation(report_from_json(rep_text), fx.pki.root_public_key(), reference).ok);
}
