#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "ovpp/cs.hpp"
#include "ovpp/tee.hpp"
#include "ovpp/types.hpp"

namespace ovpp {
namespace chain {

/// Gas-like unit weights. Loosely Ethereum-flavored defaults; fully
/// configurable and of no semantic weight.
struct CostWeights {
    uint64_t signature_verify = 5000;
    uint64_t hash_call = 60;      // base per call
    uint64_t hash_word = 12;      // per 32-byte word hashed
    uint64_t constraint_check = 2;
    uint64_t calldata_byte = 16;
};

struct MeterEvent {
    std::string primitive;
    uint64_t count = 0;
    uint64_t unit_weight = 0;
};

/// Accumulated cost with a trace the total is recomputable from.
struct CostMeter {
    std::vector<MeterEvent> trace;
    uint64_t total = 0;

    void charge(const std::string& primitive, uint64_t count, uint64_t unit_weight);
};

/// Verification material for a constraint-system workflow: the system, its
/// verification key, and the deployment-time expectations on public inputs.
struct CsContractMaterial {
    cs::ConstraintSystem system;
    cs::VerificationKey verification_key;
    int64_t expected_threshold = 0;
    Digest sensor_pk_digest{};
};

/// Verification material for an enclave workflow: attested evidence key,
/// reference measurement, and program identity.
struct TeeContractMaterial {
    Bytes evidence_public_key;
    tee::EnclaveMeasurement reference_measurement;
    Digest program_id{};
};

struct VerificationReceipt {
    bool accepted = false;
    std::string reason;  // "ok" or the named check that failed
    uint64_t cost_units = 0;
};

struct TxRecord {
    uint64_t height = 0;
    std::string workflow_id;
    std::string backend;
    bool accepted = false;
    std::string reason;
    uint64_t cost_units = 0;
    std::optional<uint64_t> violation_count;
};

class ChainError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Single-node ledger with instant finality: verification contract storage,
/// an append-only transaction log, and a cost meter per submission.
class ChainState {
  public:
    explicit ChainState(CostWeights weights = {}) : weights_(weights) {}

    void deploy_contract(const std::string& workflow_id, const CsContractMaterial& material);
    void deploy_contract(const std::string& workflow_id, const TeeContractMaterial& material);

    VerificationReceipt submit(const std::string& workflow_id, const EvidencePackage& package);

    /// Accepted violation counts, in submission order.
    std::vector<uint64_t> read_outputs(const std::string& workflow_id) const;

    bool has_contract(const std::string& workflow_id) const;
    BackendId contract_backend(const std::string& workflow_id) const;
    const std::vector<TxRecord>& tx_log() const { return tx_log_; }
    uint64_t height() const { return height_; }
    const CostWeights& weights() const { return weights_; }

    std::string export_json() const;
    static std::unique_ptr<ChainState> import_json(const std::string& text);

  private:
    struct Contract {
        BackendId backend;
        std::variant<CsContractMaterial, TeeContractMaterial> material;
        std::vector<uint64_t> accepted_outputs;
        uint64_t last_counter = 0;                // tee replay guard
        std::set<std::string> seen_batch_digests; // cs replay guard (hex)
    };

    VerificationReceipt verify_cs_package(Contract& c, const EvidencePackage& package,
                                          CostMeter& meter);
    VerificationReceipt verify_tee_package(Contract& c, const EvidencePackage& package,
                                           CostMeter& meter);

    CostWeights weights_;
    uint64_t height_ = 0;
    std::map<std::string, Contract> contracts_;
    std::vector<TxRecord> tx_log_;
    mutable std::mutex mutex_;
};

}  // namespace chain
}  // namespace ovpp
