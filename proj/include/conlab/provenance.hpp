#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <stdexcept>
#include <string_view>

#include "conlab/common.hpp"
#include "conlab/names.hpp"

namespace conlab {

// Malformed key material. Distinct from a signature that simply fails to verify.
class KeyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct KeyPair {
  Bytes public_key;
  Bytes secret_key;
  PublisherId id{};  // sha256(public_key)
};

// Deterministic signature scheme: keygen from a 32-byte seed, deterministic
// signing, verification that throws KeyError on malformed public keys.
class SignatureScheme {
 public:
  virtual ~SignatureScheme() = default;
  virtual std::string_view name() const = 0;
  virtual KeyPair keygen(std::span<const std::uint8_t, 32> seed) const = 0;
  virtual Bytes sign(const KeyPair& key, std::span<const std::uint8_t> message) const = 0;
  virtual bool verify(std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> message,
                      std::span<const std::uint8_t> signature) const = 0;
};

// Ed25519 (libsodium).
const SignatureScheme& default_scheme();

PublisherId publisher_id(std::span<const std::uint8_t> public_key);

// 4-byte BE component count, then per component a 4-byte BE length and bytes.
void append_name_encoding(Bytes& out, const Name& name);

// Name encoding, 8-byte BE payload length + payload, 32-byte signer id.
Bytes canonical_serialization(const Name& name, std::span<const std::uint8_t> payload,
                              const PublisherId& signer);

// sha256 over the canonical serialization of the object.
Digest content_digest(const ContentObject& object);

ContentObject sign_object(Name name, Bytes payload, const KeyPair& key,
                          const SignatureScheme& scheme = default_scheme());

bool verify_object(const ContentObject& object, std::span<const std::uint8_t> public_key,
                   const SignatureScheme& scheme = default_scheme());

// Same seed, same key pair.
KeyPair make_ephemeral_identity(std::uint64_t rng_seed,
                                const SignatureScheme& scheme = default_scheme());

struct SignedLink {
  Name link_name;
  Name target_name;
  Digest target_digest{};
  Bytes signature;
  PublisherId signer{};
};

// Encoding signed by a link: link name, target name, 32-byte target digest,
// 32-byte signer id.
Bytes link_serialization(const Name& link_name, const Name& target_name, const Digest& target_digest,
                         const PublisherId& signer);

SignedLink make_signed_link(Name link_name, const ContentObject& target, const KeyPair& signer,
                            const SignatureScheme& scheme = default_scheme());

// True iff the link verifies under trusted_key, the target digest matches and
// the target name matches. The target's own signer is never consulted.
bool verify_link_target(const SignedLink& link, const ContentObject& target,
                        std::span<const std::uint8_t> trusted_key,
                        const SignatureScheme& scheme = default_scheme());

}  // namespace conlab
