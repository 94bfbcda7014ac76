#include "fsd/ops.hpp"

namespace fsd::ops {

namespace {
thread_local Counters* g_active = nullptr;
}

CountScope::CountScope(Counters* target) : prev_(g_active) { g_active = target; }
CountScope::~CountScope() { g_active = prev_; }

void bump_exp_zn2(uint64_t k) {
    if (g_active) g_active->exp_zn2 += k;
}
void bump_mul_zn2(uint64_t k) {
    if (g_active) g_active->mul_zn2 += k;
}
void bump_mul_g(uint64_t k) {
    if (g_active) g_active->mul_g += k;
}
void bump_pairing(uint64_t k) {
    if (g_active) g_active->pairings += k;
}

}  // namespace fsd::ops
