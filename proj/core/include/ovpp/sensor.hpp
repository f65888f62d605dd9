#pragma once

#include <filesystem>
#include <string>

#include "ovpp/types.hpp"

namespace ovpp {

/// A batch together with the sensor's signature over its digest.
struct SignedBatch {
    MeasurementBatch batch;
    Digest batch_digest;
    Bytes signature;  // over batch_digest, by the sensor key
};

/// Parses a `*.batch` text file: one measurement per non-empty line, four
/// space-separated integers, '#' lines ignored. Meta-data comes from the
/// sidecar, not from here.
MeasurementBatch load_batch(const std::filesystem::path& path);

/// Writes the text form; load_batch(write_batch(b)) round-trips.
void write_batch(const MeasurementBatch& batch, const std::filesystem::path& path);

/// Sidecar `*.meta.json` {sensor_id, timestamp, sequence_no}.
MetaData load_meta(const std::filesystem::path& path);
void write_meta(const MetaData& meta, const std::filesystem::path& path);

MeasurementBatch generate_batch(size_t size, int64_t min_value, int64_t max_value,
                                uint64_t rng_seed, MetaData meta = {});

/// Signs the batch digest. Rejects empty batches and non-sensor keys.
SignedBatch sign_batch(const MeasurementBatch& batch, const KeyPair& sensor_key);

bool verify_batch_signature(const SignedBatch& signed_batch, const Bytes& sensor_public_key);

}  // namespace ovpp
