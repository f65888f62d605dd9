#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "ovpp/pipeline.hpp"
#include "ovpp/sensor.hpp"
#include "ovpp/types.hpp"

namespace ovpp {
namespace tee {

struct Certificate {
    std::string device_id;
    Bytes device_public_key;
    Bytes root_signature;  // over (device_id || device_public_key)
};

Bytes certificate_payload(const Certificate& cert);
bool verify_certificate(const Certificate& cert, const Bytes& root_public_key);

/// Local stand-in for the manufacturer-managed attestation PKI.
class Pki {
  public:
    explicit Pki(KeyPair root_key);

    /// Issues a device identity certificate. Rejects duplicate device ids.
    Certificate issue(const std::string& device_id);

    const Bytes& root_public_key() const { return root_key_.public_key; }
    const KeyPair& device_key(const std::string& device_id) const;
    const Certificate& certificate(const std::string& device_id) const;

  private:
    KeyPair root_key_;
    std::map<std::string, KeyPair> device_keys_;
    std::map<std::string, Certificate> issued_;
};

struct EnclaveMeasurement {
    Digest digest{};
    bool operator==(const EnclaveMeasurement&) const = default;
};

/// hash(program_id || aux || sensor_public_key) — the reference value an
/// attestation is compared against.
EnclaveMeasurement measure(const Digest& program_id, const AuxiliaryData& aux,
                           const Bytes& sensor_public_key);

struct AttestationReport {
    EnclaveMeasurement measurement;
    Bytes evidence_public_key;
    Bytes device_signature;  // over (measurement || evidence_public_key)
    Certificate device_cert;
};

/// Evidence E emitted per execution, signed by the enclave-held key.
struct TeeEvidence {
    Digest output_digest{};
    Digest batch_digest{};
    uint64_t counter = 0;
    Digest program_id{};
    Bytes signature;  // over (output_digest || batch_digest || counter || program_id)
};

Bytes evidence_payload(const TeeEvidence& ev);

class EnclaveError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Sealed enclave simulation. Program, auxiliary data and sensor key are
/// fixed at instantiation; the evidence private key is generated inside and
/// has no accessor. Executions serialize on the monotonic counter.
class EnclaveInstance {
  public:
    /// Requires the device to hold a PKI certificate.
    static std::unique_ptr<EnclaveInstance> instantiate(Pki& pki, const std::string& device_id,
                                                        const PreprocessProgram& program,
                                                        const AuxiliaryData& aux,
                                                        const Bytes& sensor_public_key);

    EnclaveMeasurement measurement() const;
    AttestationReport attest(const Pki& pki) const;

    /// Verifies the sensor signature and replay guard inside, then runs the
    /// sealed program. No evidence is emitted for rejected input.
    std::pair<Output, TeeEvidence> execute(const SignedBatch& signed_batch);

    const std::string& device_id() const { return device_id_; }
    const Bytes& evidence_public_key() const { return evidence_keys_.public_key; }
    uint64_t counter() const { return counter_; }

    /// Sealed-state persistence for multi-invocation CLI workflows. The file
    /// stands in for hardware-sealed storage.
    std::string seal_to_json() const;
    static std::unique_ptr<EnclaveInstance> restore_from_json(const std::string& text);

  private:
    EnclaveInstance() = default;
    friend struct HostBreach;  // adversary-harness hooks, not linked by core

    std::string device_id_;
    PreprocessProgram program_{};
    AuxiliaryData aux_;
    Bytes sensor_public_key_;
    KeyPair evidence_keys_;
    Certificate device_cert_;
    Bytes device_private_key_;  // identity key, embedded at manufacturing
    uint64_t counter_ = 0;
    ReplayGuard replay_;
    std::mutex exec_mutex_;
};

enum class AttestReason { ok, bad_certificate, bad_device_signature, measurement_mismatch };

std::string attest_reason_name(AttestReason r);

struct AttestResult {
    bool ok = false;
    AttestReason reason = AttestReason::ok;
};

/// True iff the certificate chain is rooted in the given key, the device
/// signature holds, and the measurement equals the reference value.
AttestResult verify_attestation(const AttestationReport& report, const Bytes& pki_root_public,
                                const EnclaveMeasurement& reference);

/// Canonical public arguments submitted with enclave evidence: constant
/// size regardless of batch size.
Bytes encode_tee_public_args(uint64_t violation_count, const Digest& scaled_digest,
                             const Digest& batch_digest, uint64_t counter);

struct TeePublicArgs {
    uint64_t violation_count = 0;
    Digest scaled_digest{};
    Digest batch_digest{};
    uint64_t counter = 0;
};

TeePublicArgs decode_tee_public_args(const Bytes& args);

std::string evidence_to_json(const TeeEvidence& ev);
TeeEvidence evidence_from_json(const std::string& text);
std::string report_to_json(const AttestationReport& report);
AttestationReport report_from_json(const std::string& text);

}  // namespace tee
}  // namespace ovpp
