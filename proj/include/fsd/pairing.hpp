#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fsd/bigint.hpp"
#include "fsd/ops.hpp"

namespace fsd::pairing {

// Element of the source group G. The curve backend stores an affine point;
// the mock backend stores a scalar in x. Identity is the canonical
// {0, 0, inf=true}.
struct GElem {
    Int x = 0;
    Int y = 0;
    bool inf = true;
    bool operator==(const GElem&) const = default;
};

// Element of the target group G_T.
struct GtElem {
    Int a = 1;
    Int b = 0;
    bool operator==(const GtElem&) const = default;
};

// Symmetric bilinear group (G, G_T, e) of prime order q1 with generator P.
// pair() and pair_check() each count as one pairing-primitive evaluation;
// pair_check fuses e(a1,b1) == e(a2,b2) into a single evaluation with one
// shared final exponentiation.
class BilinearGroup {
public:
    virtual ~BilinearGroup() = default;

    virtual std::string name() const = 0;
    virtual const Int& order() const = 0;
    virtual const GElem& generator() const = 0;

    virtual GElem add(const GElem& a, const GElem& b) const = 0;
    virtual GElem neg(const GElem& a) const = 0;
    virtual GElem scalar_mul(const Int& k, const GElem& a) const = 0;
    // Membership in G, identity included.
    virtual bool is_valid(const GElem& a) const = 0;
    virtual GElem hash_to_group(std::span<const uint8_t> msg) const = 0;

    GtElem pair(const GElem& a, const GElem& b) const {
        ops::bump_pairing();
        return do_pair(a, b);
    }
    bool pair_check(const GElem& a1, const GElem& b1, const GElem& a2,
                    const GElem& b2) const {
        ops::bump_pairing();
        return do_pair_check(a1, b1, a2, b2);
    }
    virtual GtElem gt_mul(const GtElem& a, const GtElem& b) const = 0;
    virtual GtElem gt_one() const = 0;

    virtual size_t element_size() const = 0;
    virtual std::vector<uint8_t> serialize(const GElem& a) const = 0;
    // nullopt on any malformed encoding (wrong length, off-curve, wrong
    // subgroup).
    virtual std::optional<GElem> deserialize(std::span<const uint8_t> bytes) const = 0;

protected:
    virtual GtElem do_pair(const GElem& a, const GElem& b) const = 0;
    virtual bool do_pair_check(const GElem& a1, const GElem& b1, const GElem& a2,
                               const GElem& b2) const = 0;
};

using GroupPtr = std::shared_ptr<const BilinearGroup>;

// Parameters of the supersingular curve y^2 = x^3 + x over F_p with
// p = q1 * cofactor - 1 = 3 (mod 4); G is the order-q1 subgroup of E(F_p)
// and the pairing is the Tate pairing composed with the distortion map
// (x, y) -> (-x, iy).
struct SsParams {
    Int p;
    Int q1;
    Int cofactor;
    Int gx, gy;  // generator
};

SsParams generate_ss_params(unsigned q1_bits, unsigned p_bits, Rng& rng);

GroupPtr make_ss_group(const SsParams& params);
GroupPtr make_mock_group();  // deterministic insecure test group

// Named parameter sets: "mock", "ss160" (fast test curve), "ss256"
// (128-bit-security curve). Throws Errc::argument on unknown names.
GroupPtr make_group(const std::string& name);

}  // namespace fsd::pairing
