#pragma once

#include <optional>
#include <string>

#include "ovpp/bytes.hpp"

namespace ovpp {

/// SHA-256 of an arbitrary message.
Digest hash(std::span<const uint8_t> message);
Digest hash(const Bytes& message);

enum class KeyRole { sensor, evidence, device_identity, pki_root };

std::string role_name(KeyRole role);
KeyRole role_from_name(const std::string& name);

/// Ed25519 key pair tagged with its intended role. Keys of different roles
/// are rejected at use sites.
struct KeyPair {
    KeyRole role;
    Bytes public_key;   // 32 bytes
    Bytes private_key;  // 32-byte seed
};

/// Generates an Ed25519 pair. With a 32-byte seed the result is
/// reproducible; without one, OS entropy is used.
KeyPair generate_keypair(KeyRole role, std::optional<Bytes> seed = std::nullopt);

/// Deterministic Ed25519 signature (64 bytes).
Bytes sign(const Bytes& private_key, std::span<const uint8_t> message);

/// Malformed keys or signatures are verification failures, never exceptions.
bool verify(const Bytes& public_key, std::span<const uint8_t> message, const Bytes& signature);

/// Key file format: JSON {role, public_key_hex, private_key_hex}.
std::string keypair_to_json(const KeyPair& kp);
KeyPair keypair_from_json(const std::string& text);

}  // namespace ovpp
