#include "conlab/provenance.hpp"

#include <sodium.h>

#include <algorithm>
#include <stdexcept>

namespace conlab {

namespace {

class Ed25519Scheme final : public SignatureScheme {
 public:
  Ed25519Scheme() {
    if (sodium_init() < 0) throw std::runtime_error("libsodium initialisation failed");
  }

  std::string_view name() const override { return "ed25519"; }

  KeyPair keygen(std::span<const std::uint8_t, 32> seed) const override {
    KeyPair kp;
    kp.public_key.resize(crypto_sign_PUBLICKEYBYTES);
    kp.secret_key.resize(crypto_sign_SECRETKEYBYTES);
    crypto_sign_seed_keypair(kp.public_key.data(), kp.secret_key.data(), seed.data());
    kp.id = publisher_id(kp.public_key);
    return kp;
  }

  Bytes sign(const KeyPair& key, std::span<const std::uint8_t> message) const override {
    if (key.secret_key.size() != crypto_sign_SECRETKEYBYTES)
      throw KeyError("ed25519 secret key must be 64 bytes");
    Bytes sig(crypto_sign_BYTES);
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), key.secret_key.data());
    return sig;
  }

  bool verify(std::span<const std::uint8_t> public_key, std::span<const std::uint8_t> message,
              std::span<const std::uint8_t> signature) const override {
    if (public_key.size() != crypto_sign_PUBLICKEYBYTES)
      throw KeyError("ed25519 public key must be 32 bytes");
    if (signature.size() != crypto_sign_BYTES) return false;
    return crypto_sign_verify_detached(signature.data(), message.data(), message.size(),
                                       public_key.data()) == 0;
  }
};

}  // namespace

const SignatureScheme& default_scheme() {
  static const Ed25519Scheme scheme;
  return scheme;
}

PublisherId publisher_id(std::span<const std::uint8_t> public_key) { return sha256(public_key); }

void append_name_encoding(Bytes& out, const Name& name) {
  put_be32(out, static_cast<std::uint32_t>(name.size()));
  for (const auto& c : name.components()) {
    put_be32(out, static_cast<std::uint32_t>(c.size()));
    out.insert(out.end(), c.begin(), c.end());
  }
}

Bytes canonical_serialization(const Name& name, std::span<const std::uint8_t> payload,
                              const PublisherId& signer) {
  Bytes out;
  append_name_encoding(out, name);
  put_be64(out, payload.size());
  out.insert(out.end(), payload.begin(), payload.end());
  out.insert(out.end(), signer.begin(), signer.end());
  return out;
}

Digest content_digest(const ContentObject& object) {
  return sha256(canonical_serialization(object.name, object.payload, object.signer));
}

ContentObject sign_object(Name name, Bytes payload, const KeyPair& key,
                          const SignatureScheme& scheme) {
  ContentObject o;
  o.name = std::move(name);
  o.payload = std::move(payload);
  o.signer = key.id;
  o.signature = scheme.sign(key, canonical_serialization(o.name, o.payload, o.signer));
  return o;
}

bool verify_object(const ContentObject& object, std::span<const std::uint8_t> public_key,
                   const SignatureScheme& scheme) {
  const bool ok = scheme.verify(public_key, canonical_serialization(object.name, object.payload, object.signer),
                                object.signature);
  return ok && publisher_id(public_key) == object.signer;
}

KeyPair make_ephemeral_identity(std::uint64_t rng_seed, const SignatureScheme& scheme) {
  Bytes material{'c', 'o', 'n', 'l', 'a', 'b', '-', 'e', 'p', 'h', 'e', 'm', 'e', 'r', 'a', 'l'};
  put_be64(material, rng_seed);
  const Digest seed = sha256(material);
  return scheme.keygen(std::span<const std::uint8_t, 32>(seed));
}

Bytes link_serialization(const Name& link_name, const Name& target_name, const Digest& target_digest,
                         const PublisherId& signer) {
  Bytes out;
  append_name_encoding(out, link_name);
  append_name_encoding(out, target_name);
  out.insert(out.end(), target_digest.begin(), target_digest.end());
  out.insert(out.end(), signer.begin(), signer.end());
  return out;
}

SignedLink make_signed_link(Name link_name, const ContentObject& target, const KeyPair& signer,
                            const SignatureScheme& scheme) {
  SignedLink link;
  link.link_name = std::move(link_name);
  link.target_name = target.name;
  link.target_digest = content_digest(target);
  link.signer = signer.id;
  link.signature =
      scheme.sign(signer, link_serialization(link.link_name, link.target_name, link.target_digest, link.signer));
  return link;
}

bool verify_link_target(const SignedLink& link, const ContentObject& target,
                        std::span<const std::uint8_t> trusted_key, const SignatureScheme& scheme) {
  const bool sig_ok = scheme.verify(
      trusted_key, link_serialization(link.link_name, link.target_name, link.target_digest, link.signer),
      link.signature);
  if (!sig_ok || publisher_id(trusted_key) != link.signer) return false;
  return target.name == link.target_name && content_digest(target) == link.target_digest;
}

}  // namespace conlab
