#pragma once

#include <cstdint>

namespace fsd::ops {

// Abstract operation tally mirroring the scheme's cost model: modular
// exponentiations in Z_{n^2}, scalar multiplications in the pairing group
// performed for signing, pairing-primitive evaluations, and (untracked by
// the cost model but cheap to keep) multiplications in Z_{n^2}.
struct Counters {
    uint64_t exp_zn2 = 0;
    uint64_t mul_zn2 = 0;
    uint64_t mul_g = 0;
    uint64_t pairings = 0;

    Counters& operator+=(const Counters& o) {
        exp_zn2 += o.exp_zn2;
        mul_zn2 += o.mul_zn2;
        mul_g += o.mul_g;
        pairings += o.pairings;
        return *this;
    }
};

// Scoped redirection of counter bumps, one active target per thread.
class CountScope {
public:
    explicit CountScope(Counters* target);
    ~CountScope();
    CountScope(const CountScope&) = delete;
    CountScope& operator=(const CountScope&) = delete;

private:
    Counters* prev_;
};

void bump_exp_zn2(uint64_t k = 1);
void bump_mul_zn2(uint64_t k = 1);
void bump_mul_g(uint64_t k = 1);
void bump_pairing(uint64_t k = 1);

}  // namespace fsd::ops
