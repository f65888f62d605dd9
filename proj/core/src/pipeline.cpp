#include "ovpp/pipeline.hpp"

namespace ovpp {

PreprocessProgram PreprocessProgram::threshold_violation() {
    // Digest over the logical stage list and parameter schema. Any change to
    // the pipeline shape changes the program identity.
    static const std::string description =
        "v1|filter:value>threshold|reduce:count|map:floor_div(scale_divisor)";
    Bytes enc(description.begin(), description.end());
    return PreprocessProgram{hash(enc)};
}

void ReplayGuard::check_and_record(const std::string& sensor_id, uint64_t sequence_no) {
    std::lock_guard lock(mutex_);
    auto it = last_seen_.find(sensor_id);
    if (it != last_seen_.end() && sequence_no <= it->second)
        throw GatewayError("stale sequence_no for sensor " + sensor_id + ": " +
                           std::to_string(sequence_no) + " <= " + std::to_string(it->second));
    last_seen_[sensor_id] = sequence_no;
}

std::map<std::string, uint64_t> ReplayGuard::snapshot() const {
    std::lock_guard lock(mutex_);
    return last_seen_;
}

void ReplayGuard::restore(std::map<std::string, uint64_t> state) {
    std::lock_guard lock(mutex_);
    last_seen_ = std::move(state);
}

MeasurementBatch verify_input(const SignedBatch& signed_batch, const Bytes& sensor_public_key,
                              ReplayGuard& guard) {
    if (batch_digest(signed_batch.batch) != signed_batch.batch_digest)
        throw GatewayError("batch digest mismatch");
    if (!verify(sensor_public_key, signed_batch.batch_digest, signed_batch.signature))
        throw GatewayError("sensor signature invalid");
    guard.check_and_record(signed_batch.batch.meta.sensor_id, signed_batch.batch.meta.sequence_no);
    return signed_batch.batch;
}

std::vector<int64_t> filter_violations(const MeasurementBatch& batch, const AuxiliaryData& aux) {
    std::vector<int64_t> out;
    for (const auto& m : batch.measurements)
        for (int64_t v : m.values)
            if (v > aux.threshold) out.push_back(v);
    return out;
}

uint64_t reduce_count(const std::vector<int64_t>& violations) { return violations.size(); }

std::vector<int64_t> map_scale(const std::vector<int64_t>& violations, const AuxiliaryData& aux) {
    if (aux.scale_divisor < 1) throw std::invalid_argument("scale_divisor must be >= 1");
    std::vector<int64_t> out;
    out.reserve(violations.size());
    const auto d = static_cast<int64_t>(aux.scale_divisor);
    for (int64_t v : violations) {
        int64_t q = v / d;
        if (v % d != 0 && v < 0) --q;  // floor toward negative infinity
        out.push_back(q);
    }
    return out;
}

Output run_stages(const MeasurementBatch& batch, const AuxiliaryData& aux) {
    Output out;
    auto violations = filter_violations(batch, aux);
    out.violation_count = reduce_count(violations);
    out.scaled_values = map_scale(violations, aux);
    return out;
}

Output run_program(const PreprocessProgram&, const SignedBatch& signed_batch,
                   const AuxiliaryData& aux, const Bytes& sensor_public_key, ReplayGuard& guard) {
    MeasurementBatch batch = verify_input(signed_batch, sensor_public_key, guard);
    return run_stages(batch, aux);
}

}  // namespace ovpp
