#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ovpp/bytes.hpp"
#include "ovpp/crypto.hpp"

namespace ovpp {

constexpr size_t kValuesPerMeasurement = 4;

/// One sensor reading: exactly four dimensionless integer values.
struct Measurement {
    std::array<int64_t, kValuesPerMeasurement> values;

    bool operator==(const Measurement&) const = default;
};

struct MetaData {
    std::string sensor_id;
    uint64_t timestamp = 0;    // seconds since epoch
    uint64_t sequence_no = 0;  // strictly increasing per sensor

    bool operator==(const MetaData&) const = default;
};

/// The input D of a pre-processing run.
struct MeasurementBatch {
    MetaData meta;
    std::vector<Measurement> measurements;

    bool operator==(const MeasurementBatch&) const = default;
};

/// The auxiliary data A attached at the gateway.
struct AuxiliaryData {
    int64_t threshold = 0;
    uint64_t scale_divisor = 1;  // >= 1
    std::string rule_id;

    bool operator==(const AuxiliaryData&) const = default;
};

/// The output O. Only violation_count is submitted on-chain; scaled_values
/// stay off-chain and are bound via their digest.
struct Output {
    uint64_t violation_count = 0;
    std::vector<int64_t> scaled_values;

    bool operator==(const Output&) const = default;
};

enum class BackendId { constraint_system, enclave };

std::string backend_name(BackendId id);
BackendId backend_from_name(const std::string& name);

/// Unit submitted on-chain: output public arguments plus the evidence E.
struct EvidencePackage {
    BackendId backend_id;
    Bytes public_args;    // canonical encoding of public inputs/outputs
    Bytes evidence_body;  // backend-specific serialized evidence
    Digest program_id;    // digest of the deployed program P
};

// Canonical byte encodings. Length-prefixed, big-endian, meta first, then
// measurements row-major. Hashing depends on these being byte-deterministic.
Bytes encode_batch(const MeasurementBatch& batch);
Bytes encode_aux(const AuxiliaryData& aux);
Bytes encode_scaled_values(const std::vector<int64_t>& scaled);

/// Constant-size output encoding: count plus digest of the scaled values.
Bytes encode_output(const Output& output);

Digest batch_digest(const MeasurementBatch& batch);
Digest output_digest(const Output& output);

}  // namespace ovpp
