#pragma once

#include <map>
#include <mutex>
#include <stdexcept>

#include "ovpp/sensor.hpp"
#include "ovpp/types.hpp"

namespace ovpp {

/// The fixed threshold-violation program: filter values above the threshold,
/// reduce to a count, map the filtered values down by a divisor. The digest
/// covers the stage list and parameter schema, not the parameter values
/// (those are auxiliary data).
struct PreprocessProgram {
    Digest program_id;

    static PreprocessProgram threshold_violation();
};

class GatewayError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Per-sensor replay tracking: sequence numbers must strictly increase.
class ReplayGuard {
  public:
    /// Throws GatewayError on a stale sequence number; records it otherwise.
    void check_and_record(const std::string& sensor_id, uint64_t sequence_no);

    std::map<std::string, uint64_t> snapshot() const;
    void restore(std::map<std::string, uint64_t> state);

  private:
    mutable
    std::mutex mutex_;
    std::map<std::string, uint64_t> last_seen_;
};

/// Verifies the sensor signature and the replay guard; returns the batch.
MeasurementBatch verify_input(const SignedBatch& signed_batch, const Bytes& sensor_public_key,
                              ReplayGuard& guard);

/// Values strictly above the threshold, order preserved.
std::vector<int64_t> filter_violations(const MeasurementBatch& batch, const AuxiliaryData& aux);

uint64_t reduce_count(const std::vector<int64_t>& violations);

/// Floor division toward negative infinity.
std::vector<int64_t> map_scale(const std::vector<int64_t>& violations, const AuxiliaryData& aux);

/// P(D, A) -> O over a verified input.
Output run_program(const PreprocessProgram& program, const SignedBatch& signed_batch,
                   const AuxiliaryData& aux, const Bytes& sensor_public_key, ReplayGuard& guard);

/// Stage semantics without input verification; the enclave calls this after
/// its own checks.
Output run_stages(const MeasurementBatch& batch, const AuxiliaryData& aux);

}  // namespace ovpp
