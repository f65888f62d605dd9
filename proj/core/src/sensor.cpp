#include "ovpp/sensor.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ovpp {

MeasurementBatch load_batch(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open batch file: " + path.string());
    MeasurementBatch batch;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream tokens(line);
        Measurement m{};
        for (size_t i = 0; i < kValuesPerMeasurement; ++i) {
            if (!(tokens >> m.values[i]))
                throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                         ": expected 4 integers per line");
        }
        std::string extra;
        if (tokens >> extra)
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": expected 4 integers per line, got more");
        batch.measurements.push_back(m);
    }
    if (batch.measurements.empty())
        throw std::runtime_error("batch file holds no measurements: " + path.string());
    return batch;
}

void write_batch(const MeasurementBatch& batch, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write batch file: " + path.string());
    for (const auto& m : batch.measurements) {
        out << m.values[0] << ' ' << m.values[1] << ' ' << m.values[2] << ' ' << m.values[3]
            << '\n';
    }
}

MetaData load_meta(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open meta file: " + path.string());
    auto j = nlohmann::json::parse(in);
    MetaData meta;
    meta.sensor_id = j.at("sensor_id").get<std::string>();
    meta.timestamp = j.at("timestamp").get<uint64_t>();
    meta.sequence_no = j.at("sequence_no").get<uint64_t>();
    return meta;
}

void write_meta(const MetaData& meta, const std::filesystem::path& path) {
    nlohmann::json j;
    j["sensor_id"] = meta.sensor_id;
    j["timestamp"] = meta.timestamp;
    j["sequence_no"] = meta.sequence_no;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write meta file: " + path.string());
    out << j.dump(2) << '\n';
}

MeasurementBatch generate_batch(size_t size, int64_t min_value, int64_t max_value,
                                uint64_t rng_seed, MetaData meta) {
    if (size == 0) throw std::invalid_argument("batch size must be >= 1");
    if (min_value > max_value) throw std::invalid_argument("empty value range");
    std::mt19937_64 rng(rng_seed);
    std::uniform_int_distribution<int64_t> dist(min_value, max_value);
    MeasurementBatch batch;
    batch.meta = std::move(meta);
    batch.measurements.reserve(size);
    for (size_t i = 0; i < size; ++i) {
        Measurement m{};
        for (auto& v : m.values) v = dist(rng);
        batch.measurements.push_back(m);
    }
    return batch;
}

SignedBatch sign_batch(const MeasurementBatch& batch, const KeyPair& sensor_key) {
    if (batch.measurements.empty()) throw std::invalid_argument("refusing to sign an empty batch");
    if (sensor_key.role != KeyRole::sensor)
        throw std::invalid_argument("batch signing requires a sensor-role key");
    SignedBatch sb;
    sb.batch = batch;
    sb.batch_digest = batch_digest(batch);
    sb.signature = sign(sensor_key.private_key, sb.batch_digest);
    return sb;
}

bool verify_batch_signature(const SignedBatch& signed_batch, const Bytes& sensor_public_key) {
    if (batch_digest(signed_batch.batch) != signed_batch.batch_digest) return false;
    return verify(sensor_public_key, signed_batch.batch_digest, signed_batch.signature);
}

}  // namespace ovpp
