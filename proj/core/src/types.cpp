#include "ovpp/types.hpp"

#include <stdexcept>

namespace ovpp {

std::string backend_name(BackendId id) {
    switch (id) {
        case BackendId::constraint_system: return "constraint_system";
        case BackendId::enclave: return "enclave";
    }
    throw std::invalid_argument("unknown backend");
}

BackendId backend_from_name(const std::string& name) {
    if (name == "constraint_system" || name == "cs") return BackendId::constraint_system;
    if (name == "enclave" || name == "tee") return BackendId::enclave;
    throw std::invalid_argument("unknown backend: " + name);
}

Bytes encode_batch(const MeasurementBatch& batch) {
    Bytes out;
    append_string(out, batch.meta.sensor_id);
    append_u64_be(out, batch.meta.timestamp);
    append_u64_be(out, batch.meta.sequence_no);
    append_u32_be(out, static_cast<uint32_t>(batch.measurements.size()));
    for (const auto& m : batch.measurements)
        for (int64_t v : m.values) append_i64_be(out, v);
    return out;
}

Bytes encode_aux(const AuxiliaryData& aux) {
    Bytes out;
    append_i64_be(out, aux.threshold);
    append_u64_be(out, aux.scale_divisor);
    append_string(out, aux.rule_id);
    return out;
}

Bytes encode_scaled_values(const std::vector<int64_t>& scaled) {
    Bytes out;
    append_u32_be(out, static_cast<uint32_t>(scaled.size()));
    for (int64_t v : scaled) append_i64_be(out, v);
    return out;
}

Bytes encode_output(const Output& output) {
    Bytes out;
    append_u64_be(out, output.violation_count);
    Digest scaled = hash(encode_scaled_values(output.scaled_values));
    append_bytes(out, scaled);
    return out;
}

Digest batch_digest(const MeasurementBatch& batch) { return hash(encode_batch(batch)); }

Digest output_digest(const Output& output) { return hash(encode_output(output)); }

}  // namespace ovpp
