#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "fsd/errors.hpp"

namespace fsd {

using Int = mpz_class;

inline size_t bit_length(const Int& x) { return mpz_sizeinbase(x.get_mpz_t(), 2); }

inline Int powm(const Int& base, const Int& exp, const Int& mod) {
    Int r;
    mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
    return r;
}

// Throws Errc::ciphertext when no inverse exists; callers that expect
// honest inputs treat that as a malformed-value signal.
Int invmod(const Int& x, const Int& mod);

inline Int gcd(const Int& a, const Int& b) {
    Int r;
    mpz_gcd(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline Int lcm(const Int& a, const Int& b) {
    Int r;
    mpz_lcm(r.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return r;
}

inline Int pow2(size_t bits) {
    Int r = 1;
    mpz_mul_2exp(r.get_mpz_t(), r.get_mpz_t(), bits);
    return r;
}

Int int_from_dec(const std::string& s);           // throws Errc::parse
std::string int_to_dec(const Int& x);

// Fixed-width big-endian encoding; value must fit in `width` bytes.
std::vector<uint8_t> int_to_be(const Int& x, size_t width);
Int int_from_be(std::span<const uint8_t> bytes);

// Byte-oriented randomness source. Deterministic simulations seed one
// explicitly; key generation without a seed uses the system source.
class Rng {
public:
    virtual ~Rng() = default;
    virtual void fill(void* buf, size_t len) = 0;

    uint64_t u64();
    uint64_t u64_below(uint64_t bound);  // uniform in [0, bound)
    // Gaussian draw via std::normal_distribution over this source; virtual
    // so tests can pin the deviation.
    virtual double normal(double mean, double stddev);
    Int bits(size_t nbits);             // uniform in [0, 2^nbits)
    Int below(const Int& bound);        // uniform in [0, bound)
    Int unit_mod(const Int& n);         // uniform unit in [1, n), gcd == 1
};

class SeededRng final : public Rng {
public:
    explicit SeededRng(uint64_t seed) : eng_(seed) {}
    void fill(void* buf, size_t len) override;

private:
    std::mt19937_64 eng_;
};

class SystemRng final : public Rng {
public:
    void fill(void* buf, size_t len) override;
};

// Uniform random prime with exactly `bits` bits (top bit set), Miller-Rabin
// with 40 rounds. Throws Errc::keygen after bounded retries.
Int random_prime(unsigned bits, Rng& rng);

}  // namespace fsd
