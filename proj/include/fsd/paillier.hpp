#pragma once

#include <string>

#include "fsd/bigint.hpp"

namespace fsd::paillier {

struct PublicKey {
    Int n;     // RSA modulus, 2*kappa bits
    Int g;     // generator of Z*_{n^2}, n+1 by default
    Int n_sq;  // cached n^2

    static PublicKey make(Int n, Int g);
    size_t modulus_bits() const { return bit_length(n); }

    std::string to_json() const;  // {"n": "...", "g": "..."}
    static PublicKey from_json(const std::string& json);
};

struct PrivateKey {
    Int lambda;  // lcm(p-1, q-1)
    Int mu;      // (L(g^lambda mod n^2))^-1 mod n
    Int p, q;    // retained for test fixtures

    std::string to_json() const;  // {"lambda": "...", "mu": "..."}
    static PrivateKey from_json(const std::string& json);
};

struct Keypair {
    PublicKey pub;
    PrivateKey priv;
};

struct Ciphertext {
    Int value;  // unit in [1, n^2 - 1]
    bool operator==(const Ciphertext&) const = default;
};

inline constexpr unsigned kMinKappaBits = 16;
inline constexpr unsigned kMinSecureKappaBits = 1024;

// kappa is the prime size; n comes out at exactly 2*kappa bits.
// Sizes below kMinSecureKappaBits exist for exhaustive test fixtures and
// require allow_small.
Keypair keygen(unsigned kappa_bits, Rng& rng, bool allow_small = false);

// Fixture constructor for injected primes (e.g. p=5, q=7).
Keypair keypair_from_primes(const Int& p, const Int& q);

// c = g^m * r^n mod n^2. The overload without r draws fresh randomness.
Ciphertext encrypt(const PublicKey& pk, const Int& m, Rng& rng);
Ciphertext encrypt_with(const PublicKey& pk, const Int& m, const Int& r);

Int decrypt(const PrivateKey& sk, const PublicKey& pk, const Ciphertext& c);

// Homomorphic layer: multiply adds plaintexts, power scales, divide subtracts.
Ciphertext ct_mul(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2);
Ciphertext ct_pow(const PublicKey& pk, const Ciphertext& c, const Int& k);
Ciphertext ct_div(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2);

}  // namespace fsd::paillier
