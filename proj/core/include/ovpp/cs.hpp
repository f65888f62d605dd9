#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ovpp/field.hpp"
#include "ovpp/pipeline.hpp"
#include "ovpp/sensor.hpp"

namespace ovpp {
namespace cs {

// This backend models the compile -> setup -> compute-witness ->
// generate-proof -> verify workflow over a plain R1CS. The proof opens the
// full witness and the verifier re-checks every constraint plus two native
// gadgets (digest link and sensor signature), so integrity semantics are
// preserved while succinctness and zero-knowledge are deliberately absent.

/// Sparse linear combination over witness slots.
using LinearTerm = std::pair<uint32_t, Fe>;
using LinearCombination = std::vector<LinearTerm>;

/// Rank-1 constraint (A.w) * (B.w) = (C.w).
struct Constraint {
    LinearCombination a, b, c;
};

/// Which public roles the compiled system exposes, in order.
struct PublicLayout {
    std::vector<std::string> roles;

    static PublicLayout standard() {
        return PublicLayout{{"batch_digest", "threshold", "violation_count", "sensor_pk_digest"}};
    }
    bool operator==(const PublicLayout&) const = default;
};

struct ConstraintSystem {
    Digest program_id{};
    uint32_t batch_size = 0;  // systems are size-specialized
    PublicLayout layout;
    uint32_t num_slots = 0;  // slot 0 is the constant 1
    std::vector<Constraint> constraints;
    std::vector<uint32_t> public_slots;
    // Native-gadget wiring: private value slots linked to the public batch
    // digest, and the public sensor key digest slots.
    std::vector<uint32_t> value_slots;
    uint32_t digest_hi_slot = 0, digest_lo_slot = 0;
    uint32_t pk_digest_hi_slot = 0, pk_digest_lo_slot = 0;
    uint32_t threshold_slot = 0, count_slot = 0;
};

Bytes encode_cs(const ConstraintSystem& cs);
Digest cs_digest(const ConstraintSystem& cs);

struct Witness {
    std::vector<Fe> assignment;  // assignment[0] == 1
};

Bytes encode_witness(const Witness& w);

struct ProvingKey {
    ConstraintSystem system;
    Digest setup_id{};
};

struct VerificationKey {
    Digest cs_digest{};
    PublicLayout layout;
    std::vector<uint32_t> public_slots;
    Digest setup_id{};
};

struct CsKeyPair {
    ProvingKey proving_key;
    VerificationKey verification_key;
};

struct CsProof {
    Digest cs_digest{};
    Digest setup_id{};
    std::vector<Fe> public_values;
    Digest witness_commitment{};
    std::vector<Fe> opened_witness;
    // Opened data for the native gadgets.
    MetaData opened_meta;
    Bytes sensor_public_key;
    Bytes sensor_signature;
};

/// Compiles the threshold program for a fixed batch size. Comparisons use
/// 17-bit binary decompositions of (value - threshold + 2^16 - 1); values
/// are range-checked to signed 16 bits at witness time.
ConstraintSystem compile(const PreprocessProgram& program, uint32_t batch_size,
                         const PublicLayout& layout = PublicLayout::standard());

/// One-time setup. Only setup_id = hash(crs_seed || cs_digest) survives; the
/// seed itself is not retained anywhere in the returned keys.
CsKeyPair setup(const ConstraintSystem& system, const Bytes& crs_seed);

/// Full satisfying assignment for one execution. Throws on size mismatch,
/// out-of-range values, or (bug) unsatisfied constraints.
Witness compute_witness(const ConstraintSystem& system, const SignedBatch& signed_batch,
                        const AuxiliaryData& aux, const Bytes& sensor_public_key);

CsProof generate_proof(const ProvingKey& proving_key, const Witness& witness,
                       const SignedBatch& signed_batch, const Bytes& sensor_public_key);

enum class VerifyReason {
    ok,
    program_mismatch,
    setup_mismatch,
    commitment_mismatch,
    constraint_unsatisfied,
    digest_link_mismatch,
    sensor_signature_invalid,
    public_input_mismatch,
};

std::string reason_name(VerifyReason r);

struct VerifyResult {
    bool ok = false;
    VerifyReason reason = VerifyReason::ok;
    // Metering trace for the chain's cost model.
    uint64_t constraints_checked = 0;
    uint64_t hash_calls = 0;
    uint64_t hashed_bytes = 0;
    uint64_t signature_checks = 0;
};

/// Full re-check: setup binding, witness commitment, every constraint,
/// digest link, sensor signature gadget, and claimed public arguments.
VerifyResult verify_cs(const ConstraintSystem& system, const VerificationKey& key,
                       const CsProof& proof, const Bytes& claimed_public_args);

/// Canonical public-argument bytes: the public field elements in slot order.
Bytes encode_public_args(const std::vector<Fe>& public_values);
std::vector<Fe> decode_public_args(const Bytes& args);

/// Public values an honest run would claim, computed outside the proof.
std::vector<Fe> expected_public_values(const SignedBatch& signed_batch, const AuxiliaryData& aux,
                                       const Bytes& sensor_public_key, uint64_t violation_count);

// JSON artifact files, mirroring the compile/setup/prove file workflow.
std::string cs_to_json(const ConstraintSystem& cs);
ConstraintSystem cs_from_json(const std::string& text);
std::string keypair_to_json(const CsKeyPair& kp);
CsKeyPair keypair_from_json(const std::string& text);
std::string proof_to_json(const CsProof& proof);
CsProof proof_from_json(const std::string& text);

}  // namespace cs
}  // namespace ovpp
