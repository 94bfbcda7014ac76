#pragma once

#include <span>
#include <utility>
#include <vector>

#include "fsd/pairing.hpp"

namespace fsd::blsig {

struct SigningKey {
    Int x;  // scalar in [1, q1)
};

struct VerifyKey {
    pairing::GElem y;  // x * P
    bool operator==(const VerifyKey&) const = default;
};

struct Signature {
    pairing::GElem sigma;
    bool operator==(const Signature&) const = default;
};

using Message = std::span<const uint8_t>;

std::pair<SigningKey, VerifyKey> sig_keygen(const pairing::BilinearGroup& g, Rng& rng);

// sigma = x * H(msg); deterministic. Counts one G multiplication.
Signature sign(const pairing::BilinearGroup& g, const SigningKey& sk, Message msg);

// e(P, sigma) == e(Y, H(msg)); two pairing evaluations. Malformed elements
// verify false rather than throwing.
bool verify(const pairing::BilinearGroup& g, const VerifyKey& vk, Message msg,
            const Signature& sig);

// Same predicate fused into a single pairing-primitive evaluation (shared
// final exponentiation); the cheapest possible check for a lone verifier.
bool verify_fused(const pairing::BilinearGroup& g, const VerifyKey& vk, Message msg,
                  const Signature& sig);

struct BatchItem {
    std::vector<uint8_t> msg;
    Signature sig;
};

// Batch check with N+1 pairing evaluations: e(P, Sum rho_i * sigma_i) against
// the product of e(Y, rho_i * H(msg_i)). The rho_i are 128-bit weights
// derived by hashing the whole batch; without them, exchanging two valid
// signatures between distinct messages would slip through, since only the
// signature sum enters the plain equation.
bool batch_verify(const pairing::BilinearGroup& g, const VerifyKey& vk,
                  std::span<const BatchItem> items);

}  // namespace fsd::blsig
