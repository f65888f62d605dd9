// Microbenchmarks for the evidence hot paths: constraint-system proof
// generation/verification and enclave execution plus on-chain checking.
#include <benchmark/benchmark.h>

#include "ovpp/chain.hpp"
#include "ovpp/cs.hpp"
#include "ovpp/tee.hpp"

using namespace ovpp;

namespace {

struct CsBench {
    KeyPair sensor = generate_keypair(KeyRole::sensor, Bytes(32, 0x51));
    AuxiliaryData aux{50, 10, "bench"};
    PreprocessProgram program = PreprocessProgram::threshold_violation();
    cs::ConstraintSystem system;
    cs::CsKeyPair keys;

    explicit CsBench(uint32_t batch_size)
        : system(cs::compile(program, batch_size)), keys(cs::setup(system, Bytes(32, 0x52))) {}

    SignedBatch make_batch(uint32_t size, uint64_t seq) const {
        return sign_batch(generate_batch(size, 0, 100, seq, MetaData{"s", seq, seq}), sensor);
    }
};

void bm_cs_prove(benchmark::State& state) {
    uint32_t size = static_cast<uint32_t>(state.range(0));
    CsBench fx(size);
    auto sb = fx.make_batch(size, 1);
    for (auto _ : state) {
        auto w = cs::compute_witness(fx.system, sb, fx.aux, fx.sensor.public_key);
        auto proof = cs::generate_proof(fx.keys.proving_key, w, sb, fx.sensor.public_key);
        benchmark::DoNotOptimize(proof);
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * size * kValuesPerMeasurement);
}
BENCHMARK(bm_cs_prove)->Arg(1)->Arg(4)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void bm_cs_verify(benchmark::State& state) {
    uint32_t size = static_cast<uint32_t>(state.range(0));
    CsBench fx(size);
    auto sb = fx.make_batch(size, 1);
    auto w = cs::compute_witness(fx.system, sb, fx.aux, fx.sensor.public_key);
    auto proof = cs::generate_proof(fx.keys.proving_key, w, sb, fx.sensor.public_key);
    auto claimed = cs::encode_public_args(proof.public_values);
    for (auto _ : state) {
        auto res = cs::verify_cs(fx.system, fx.keys.verification_key, proof, claimed);
        benchmark::DoNotOptimize(res);
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * size * kValuesPerMeasurement);
}
BENCHMARK(bm_cs_verify)->Arg(1)->Arg(4)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

void bm_tee_execute(benchmark::State& state) {
    uint32_t size = static_cast<uint32_t>(state.range(0));
    KeyPair sensor = generate_keypair(KeyRole::sensor, Bytes(32, 0x53));
    AuxiliaryData aux{50, 10, "bench"};
    auto program = PreprocessProgram::threshold_violation();
    tee::Pki pki(generate_keypair(KeyRole::pki_root, Bytes(32, 0x54)));
    pki.issue("bench");
    auto enclave = tee::EnclaveInstance::instantiate(pki, "bench", program, aux,
                                                     sensor.public_key);
    uint64_t seq = 0;
    for (auto _ : state) {
        state.PauseTiming();
        ++seq;
        auto sb = sign_batch(generate_batch(size, 0, 100, seq, MetaData{"s", seq, seq}), sensor);
        state.ResumeTiming();
        auto out = enclave->execute(sb);
        benchmark::DoNotOptimize(out);
    }
    state.SetItemsProcessed(int64_t(state.iterations()) * size * kValuesPerMeasurement);
}
BENCHMARK(bm_tee_execute)->Arg(1)->Arg(4)->Arg(16)->Arg(32)->Unit(benchmark::kMicrosecond);

void bm_chain_submit_tee(benchmark::State& state) {
    KeyPair sensor = generate_keypair(KeyRole::sensor, Bytes(32, 0x55));
    AuxiliaryData aux{50, 10, "bench"};
    auto program = PreprocessProgram::threshold_violation();
    tee::Pki pki(generate_keypair(KeyRole::pki_root, Bytes(32, 0x56)));
    pki.issue("bench");
    auto enclave = tee::EnclaveInstance::instantiate(pki, "bench", program, aux,
                                                     sensor.public_key);
    uint64_t seq = 0;
    for (auto _ : state) {
        state.PauseTiming();
        ++seq;
        auto sb = sign_batch(generate_batch(1, 0, 100, seq, MetaData{"s", seq, seq}), sensor);
        auto [output, ev] = enclave->execute(sb);
        EvidencePackage pkg;
        pkg.backend_id = BackendId::enclave;
        Digest scaled = hash(encode_scaled_values(output.scaled_values));
        pkg.public_args = tee::encode_tee_public_args(output.violation_count, scaled,
                                                      ev.batch_digest, ev.counter);
        std::string body = tee::evidence_to_json(ev);
        pkg.evidence_body = Bytes(body.begin(), body.end());
        pkg.program_id = ev.program_id;
        chain::ChainState chain;
        chain.deploy_contract("wf", chain::TeeContractMaterial{enclave->evidence_public_key(),
                                                               enclave->measurement(),
                                                               program.program_id});
        state.ResumeTiming();
        auto receipt = chain.submit("wf", pkg);
        benchmark::DoNotOptimize(receipt);
    }
}
BENCHMARK(bm_chain_submit_tee)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
