#pragma once

#include <string>

#include "ovpp/chain.hpp"
#include "ovpp/tee.hpp"

namespace ovpp {
namespace adversary {

enum class TamperKind { program, input, auxiliary, evidence, replay };

std::string kind_name(TamperKind kind);
TamperKind kind_from_name(const std::string& name);

/// Seeded description of what to change. The mutation must be non-identity;
/// the harness rejects no-op strategies so detection tests cannot pass
/// vacuously.
struct TamperStrategy {
    TamperKind kind;
    int64_t delta = 1;   // threshold / value perturbation
    uint64_t index = 0;  // which value / byte / witness slot to hit
    uint64_t variant = 0;  // selects among equivalent attack routes
};

TamperStrategy make_strategy(TamperKind kind, uint64_t seed);

struct AttackOutcome {
    bool detected = false;
    std::string stage;  // named check that caught the manipulation
};

/// Plays one honest workflow end to end with the given tamper applied and
/// reports where the manipulation was detected.
AttackOutcome run_attack(const TamperStrategy& strategy, BackendId backend, uint64_t seed);

/// One JSON line per trial: {strategy, backend, seed, detected, stage}.
std::string outcome_to_json_line(const TamperStrategy& strategy, BackendId backend, uint64_t seed,
                                 const AttackOutcome& outcome);

}  // namespace adversary

namespace tee {

/// Unsound host-adversary hooks. Bypasses enclave sealing; linked only from
/// the adversary library, never from the core target.
struct HostBreach {
    static void tamper_sealed_aux(EnclaveInstance& enclave, int64_t threshold_delta);
    static void tamper_sealed_program(EnclaveInstance& enclave, const Digest& program_id);
};

}  // namespace tee
}  // namespace ovpp
