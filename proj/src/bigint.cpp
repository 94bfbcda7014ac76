#include "fsd/bigint.hpp"

#include <cstring>

namespace fsd {

const char* errc_name(Errc e) {
    switch (e) {
        case Errc::ok: return "ok";
        case Errc::argument: return "argument";
        case Errc::range: return "range";
        case Errc::capacity: return "capacity";
        case Errc::randomness: return "randomness";
        case Errc::ciphertext: return "ciphertext";
        case Errc::keygen: return "keygen";
        case Errc::verify: return "verify";
        case Errc::replay: return "replay";
        case Errc::tamper: return "tamper";
        case Errc::parse: return "parse";
        case Errc::io: return "io";
        case Errc::training: return "training";
        case Errc::internal: return "internal";
    }
    return "unknown";
}

Int invmod(const Int& x, const Int& mod) {
    Int r;
    if (mpz_invert(r.get_mpz_t(), x.get_mpz_t(), mod.get_mpz_t()) == 0)
        throw Error(Errc::ciphertext, "value has no inverse modulo " + int_to_dec(mod));
    return r;
}

Int int_from_dec(const std::string& s) {
    if (s.empty()) throw Error(Errc::parse, "empty integer string");
    Int r;
    if (mpz_set_str(r.get_mpz_t(), s.c_str(), 10) != 0)
        throw Error(Errc::parse, "not a decimal integer: " + s);
    return r;
}

std::string int_to_dec(const Int& x) { return x.get_str(10); }

std::vector<uint8_t> int_to_be(const Int& x, size_t width) {
    if (sgn(x) < 0) throw Error(Errc::argument, "negative value in fixed-width encoding");
    std::vector<uint8_t> out(width, 0);
    size_t count = 0;
    if (sgn(x) != 0) {
        size_t need = (bit_length(x) + 7) / 8;
        if (need > width)
            throw Error(Errc::argument, "value does not fit fixed width");
        mpz_export(out.data() + (width - need), &count, 1, 1, 1, 0, x.get_mpz_t());
    }
    return out;
}

Int int_from_be(std::span<const uint8_t> bytes) {
    Int r = 0;
    if (!bytes.empty())
        mpz_import(r.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
    return r;
}

uint64_t Rng::u64() {
    uint64_t v;
    fill(&v, sizeof v);
    return v;
}

uint64_t Rng::u64_below(uint64_t bound) {
    if (bound == 0) throw Error(Errc::argument, "rng bound must be positive");
    // rejection sampling over the top multiple of bound
    uint64_t limit = ~0ULL - (~0ULL % bound);
    for (;;) {
        uint64_t v = u64();
        if (v < limit) return v % bound;
    }
}

namespace {

// UniformRandomBitGenerator adapter so <random> distributions can draw
// from an Rng.
struct BitGen {
    Rng* rng;
    using result_type = uint64_t;
    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return ~0ULL; }
    result_type operator()() { return rng->u64(); }
};

}  // namespace

double Rng::normal(double mean, double stddev) {
    BitGen g{this};
    std::normal_distribution<double> dist(mean, stddev);
    return dist(g);
}

Int Rng::bits(size_t nbits) {
    size_t nbytes = (nbits + 7) / 8;
    std::vector<uint8_t> buf(nbytes);
    fill(buf.data(), buf.size());
    if (nbits % 8 != 0) buf[0] &= static_cast<uint8_t>((1u << (nbits % 8)) - 1);
    return int_from_be(buf);
}

Int Rng::below(const Int& bound) {
    if (sgn(bound) <= 0) throw Error(Errc::argument, "rng bound must be positive");
    size_t k = bit_length(bound);
    for (;;) {
        Int x = bits(k);
        if (x < bound) return x;
    }
}

Int Rng::unit_mod(const Int& n) {
    for (;;) {
        Int r = below(n);
        if (sgn(r) != 0 && gcd(r, n) == 1) return r;
    }
}

void SeededRng::fill(void* buf, size_t len) {
    auto* p = static_cast<uint8_t*>(buf);
    while (len >= 8) {
        uint64_t v = eng_();
        std::memcpy(p, &v, 8);
        p += 8;
        len -= 8;
    }
    if (len > 0) {
        uint64_t v = eng_();
        std::memcpy(p, &v, len);
    }
}

void SystemRng::fill(void* buf, size_t len) {
    static thread_local std::random_device rd;
    auto* p = static_cast<uint8_t*>(buf);
    while (len >= 4) {
        uint32_t v = rd();
        std::memcpy(p, &v, 4);
        p += 4;
        len -= 4;
    }
    if (len > 0) {
        uint32_t v = rd();
        std::memcpy(p, &v, len);
    }
}

Int random_prime(unsigned bits, Rng& rng) {
    if (bits < 2) throw Error(Errc::argument, "prime size too small");
    constexpr int kMillerRabinRounds = 40;  // error < 4^-40
    constexpr int kMaxTries = 100000;
    for (int tries = 0; tries < kMaxTries; ++tries) {
        Int c = rng.bits(bits);
        mpz_setbit(c.get_mpz_t(), bits - 1);
        mpz_setbit(c.get_mpz_t(), 0);
        if (mpz_probab_prime_p(c.get_mpz_t(), kMillerRabinRounds) > 0) return c;
    }
    throw Error(Errc::keygen, "prime generation failed after bounded retries");
}

}  // namespace fsd
