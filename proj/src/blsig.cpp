#include "fsd/blsig.hpp"

#include "fsd/hash.hpp"

namespace fsd::blsig {

namespace {

using pairing::BilinearGroup;
using pairing::GElem;

// Per-item 128-bit batching weights bound to the full batch content.
std::vector<Int> batch_weights(const BilinearGroup& g, const VerifyKey& vk,
                               std::span<const BatchItem> items) {
    std::vector<uint8_t> transcript;
    auto append = [&transcript](std::span<const uint8_t> part) {
        uint32_t len = static_cast<uint32_t>(part.size());
        for (int s = 24; s >= 0; s -= 8)
            transcript.push_back(static_cast<uint8_t>(len >> s));
        transcript.insert(transcript.end(), part.begin(), part.end());
    };
    append(g.serialize(vk.y));
    for (const auto& it : items) {
        append(it.msg);
        append(g.serialize(it.sig.sigma));
    }
    auto bytes = hash_expand("fsd/batch-weights", transcript, items.size() * 16);
    std::vector<Int> rho(items.size());
    for (size_t i = 0; i < items.size(); ++i) {
        rho[i] = int_from_be(std::span(bytes).subspan(i * 16, 16));
        if (sgn(rho[i]) == 0) rho[i] = 1;
    }
    return rho;
}

}  // namespace

std::pair<SigningKey, VerifyKey> sig_keygen(const BilinearGroup& g, Rng& rng) {
    Int x = rng.below(g.order() - 1) + 1;
    VerifyKey vk{g.scalar_mul(x, g.generator())};
    return {SigningKey{std::move(x)}, std::move(vk)};
}

Signature sign(const BilinearGroup& g, const SigningKey& sk, Message msg) {
    ops::bump_mul_g();
    return {g.scalar_mul(sk.x, g.hash_to_group(msg))};
}

bool verify(const BilinearGroup& g, const VerifyKey& vk, Message msg,
            const Signature& sig) {
    if (!g.is_valid(sig.sigma) || !g.is_valid(vk.y) || vk.y.inf) return false;
    auto lhs = g.pair(g.generator(), sig.sigma);
    auto rhs = g.pair(vk.y, g.hash_to_group(msg));
    return lhs == rhs;
}

bool verify_fused(const BilinearGroup& g, const VerifyKey& vk, Message msg,
                  const Signature& sig) {
    if (!g.is_valid(sig.sigma) || !g.is_valid(vk.y) || vk.y.inf) return false;
    return g.pair_check(g.generator(), sig.sigma, vk.y, g.hash_to_group(msg));
}

bool batch_verify(const BilinearGroup& g, const VerifyKey& vk,
                  std::span<const BatchItem> items) {
    if (items.empty()) throw Error(Errc::argument, "empty signature batch");
    if (!g.is_valid(vk.y) || vk.y.inf) return false;
    for (const auto& it : items)
        if (!g.is_valid(it.sig.sigma)) return false;

    auto rho = batch_weights(g, vk, items);
    GElem sigma_sum{};
    for (size_t i = 0; i < items.size(); ++i)
        sigma_sum = g.add(sigma_sum, g.scalar_mul(rho[i], items[i].sig.sigma));

    auto lhs = g.pair(g.generator(), sigma_sum);
    auto rhs = g.gt_one();
    for (size_t i = 0; i < items.size(); ++i) {
        GElem h = g.scalar_mul(rho[i], g.hash_to_group(items[i].msg));
        rhs = g.gt_mul(rhs, g.pair(vk.y, h));
    }
    return lhs == rhs;
}

}  // namespace fsd::blsig
