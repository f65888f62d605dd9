#include "ovpp/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/rand.h>

#include <memory>
#include <stdexcept>

#include "json.hpp"

namespace ovpp {

namespace {

struct PkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;

struct CtxDeleter {
    void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
using CtxPtr = std::unique_ptr<EVP_MD_CTX, CtxDeleter>;

}  // namespace

Digest hash(std::span<const uint8_t> message) {
    Digest out{};
    unsigned int len = 0;
    if (EVP_Digest(message.data(), message.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != 32)
        throw std::runtime_error("SHA-256 failed");
    return out;
}

Digest hash(const Bytes& message) { return hash(std::span<const uint8_t>(message)); }

std::string role_name(KeyRole role) {
    switch (role) {
        case KeyRole::sensor: return "sensor";
        case KeyRole::evidence: return "evidence";
        case KeyRole::device_identity: return "device_identity";
        case KeyRole::pki_root: return "pki_root";
    }
    throw std::invalid_argument("unknown role");
}

KeyRole role_from_name(const std::string& name) {
    if (name == "sensor") return KeyRole::sensor;
    if (name == "evidence") return KeyRole::evidence;
    if (name == "device_identity") return KeyRole::device_identity;
    if (name == "pki_root") return KeyRole::pki_root;
    throw std::invalid_argument("unknown key role: " + name);
}

KeyPair generate_keypair(KeyRole role, std::optional<Bytes> seed) {
    Bytes sk(32);
    if (seed) {
        if (seed->size() != 32) throw std::invalid_argument("seed must be exactly 32 bytes");
        sk = *seed;
    } else {
        if (RAND_bytes(sk.data(), static_cast<int>(sk.size())) != 1)
            throw std::runtime_error("entropy source failed");
    }
    PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, sk.data(), sk.size()));
    if (!key) throw std::runtime_error("Ed25519 key construction failed");
    Bytes pk(32);
    size_t pk_len = pk.size();
    if (EVP_PKEY_get_raw_public_key(key.get(), pk.data(), &pk_len) != 1 || pk_len != 32)
        throw std::runtime_error("Ed25519 public key extraction failed");
    return KeyPair{role, std::move(pk), std::move(sk)};
}

Bytes sign(const Bytes& private_key, std::span<const uint8_t> message) {
    if (private_key.size() != 32) throw std::invalid_argument("Ed25519 private key must be 32 bytes");
    PkeyPtr key(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, private_key.data(),
                                             private_key.size()));
    if (!key) throw std::runtime_error("Ed25519 key construction failed");
    CtxPtr ctx(EVP_MD_CTX_new());
    if (EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1)
        throw std::runtime_error("sign init failed");
    Bytes sig(64);
    size_t sig_len = sig.size();
    if (EVP_DigestSign(ctx.get(), sig.data(), &sig_len, message.data(), message.size()) != 1)
        throw std::runtime_error("sign failed");
    sig.resize(sig_len);
    return sig;
}

bool verify(const Bytes& public_key, std::span<const uint8_t> message, const Bytes& signature) {
    if (public_key.size() != 32 || signature.size() != 64) return false;
    PkeyPtr key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, public_key.data(),
                                            public_key.size()));
    if (!key) return false;
    CtxPtr ctx(EVP_MD_CTX_new());
    if (EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) return false;
    return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(),
                            message.size()) == 1;
}

std::string keypair_to_json(const KeyPair& kp) {
    nlohmann::json j;
    j["role"] = role_name(kp.role);
    j["public_key_hex"] = to_hex(kp.public_key);
    j["private_key_hex"] = to_hex(kp.private_key);
    return j.dump(2) + "\n";
}

KeyPair keypair_from_json(const std::string& text) {
    auto j = nlohmann::json::parse(text);
    return KeyPair{role_from_name(j.at("role").get<std::string>()),
                   from_hex(j.at("public_key_hex").get<std::string>()),
                   from_hex(j.at("private_key_hex").get<std::string>())};
}

}  // namespace ovpp
