#include "fsd/pairing.hpp"

#include <cstring>

#include "fsd/hash.hpp"

namespace fsd::pairing {

namespace {

// ---------------------------------------------------------------------------
// F_{p^2} = F_p[i]/(i^2 + 1), valid because p = 3 (mod 4) makes -1 a
// non-residue. Elements are a + b*i.

struct Fp2 {
    Int a, b;
};

struct FpCtx {
    const Int& p;

    Int reduce(const Int& x) const {
        Int r = x % p;
        if (sgn(r) < 0) r += p;
        return r;
    }
    Fp2 one() const { return {1, 0}; }
    bool is_one(const Fp2& x) const { return x.a == 1 && sgn(x.b) == 0; }

    Fp2 mul(const Fp2& x, const Fp2& y) const {
        return {reduce(x.a * y.a - x.b * y.b), reduce(x.a * y.b + x.b * y.a)};
    }
    Fp2 sqr(const Fp2& x) const {
        return {reduce((x.a - x.b) * (x.a + x.b)), reduce(2 * x.a * x.b)};
    }
    Fp2 conj(const Fp2& x) const { return {x.a, reduce(-x.b)}; }
    Fp2 inv(const Fp2& x) const {
        Int norm = reduce(x.a * x.a + x.b * x.b);
        Int ninv = invmod(norm, p);
        return {reduce(x.a * ninv), reduce(-x.b * ninv)};
    }
    Fp2 pow(const Fp2& base, const Int& e) const {
        Fp2 acc = one();
        for (long i = static_cast<long>(bit_length(e)) - 1; i >= 0; --i) {
            acc = sqr(acc);
            if (mpz_tstbit(e.get_mpz_t(), i)) acc = mul(acc, base);
        }
        return acc;
    }
};

// ---------------------------------------------------------------------------
// Affine arithmetic on E: y^2 = x^3 + x over F_p.

Int fp_mod(const Int& p, const Int& v) {
    Int r = v % p;
    if (sgn(r) < 0) r += p;
    return r;
}

bool curve_contains(const Int& p, const GElem& a) {
    if (a.inf) return true;
    return (a.y * a.y - (a.x * a.x % p * a.x + a.x)) % p == 0;
}

GElem curve_slope_add(const Int& p, const Int& lam, const GElem& a, const GElem& b) {
    Int x3 = fp_mod(p, lam * lam - a.x - b.x);
    Int y3 = fp_mod(p, lam * (a.x - x3) - a.y);
    return {x3, y3, false};
}

Int tangent_slope(const Int& p, const GElem& a) {
    return (3 * a.x * a.x + 1) % p * invmod(2 * a.y % p, p) % p;
}

GElem curve_add(const Int& p, const GElem& a, const GElem& b) {
    if (a.inf) return b;
    if (b.inf) return a;
    if (a.x == b.x) {
        if ((a.y + b.y) % p == 0) return GElem{};
        return curve_slope_add(p, tangent_slope(p, a), a, a);
    }
    Int lam = fp_mod(p, b.y - a.y) * invmod(fp_mod(p, b.x - a.x), p) % p;
    return curve_slope_add(p, lam, a, b);
}

GElem curve_smul(const Int& p, const Int& k, const GElem& a) {
    GElem acc{};
    for (long i = static_cast<long>(bit_length(k)) - 1; i >= 0; --i) {
        acc = curve_add(p, acc, acc);
        if (mpz_tstbit(k.get_mpz_t(), i)) acc = curve_add(p, acc, a);
    }
    return acc;
}

// Lift x to a curve point if x^3 + x is a square; parity selects the root.
std::optional<GElem> curve_lift_x(const Int& p, const Int& sqrt_exp, const Int& x,
                                  bool want_odd) {
    Int rhs = (x * x % p * x + x) % p;
    if (sgn(rhs) == 0) return std::nullopt;
    Int y = powm(rhs, sqrt_exp, p);
    if (y * y % p != rhs) return std::nullopt;
    if (mpz_odd_p(y.get_mpz_t()) != static_cast<int>(want_odd)) y = p - y;
    return GElem{x, y, false};
}

// ---------------------------------------------------------------------------
// Supersingular backend. #E(F_p) = p + 1 = q1 * cofactor; G is the order-q1
// subgroup. The pairing is the Tate pairing evaluated through the distortion
// map (x, y) -> (-x, iy), which makes it symmetric and non-degenerate on G.

class SsGroup final : public BilinearGroup {
public:
    explicit SsGroup(SsParams params)
        : prm_(std::move(params)),
          gen_{prm_.gx, prm_.gy, false},
          sqrt_exp_((prm_.p + 1) / 4),
          xbytes_((bit_length(prm_.p) + 7) / 8) {
        if (prm_.p % 4 != 3) throw Error(Errc::argument, "curve prime must be 3 mod 4");
        if (prm_.q1 * prm_.cofactor != prm_.p + 1)
            throw Error(Errc::argument, "q1 * cofactor must equal p + 1");
        if (!curve_contains(prm_.p, gen_) || !curve_smul(prm_.p, prm_.q1, gen_).inf ||
            gen_.inf)
            throw Error(Errc::argument, "generator is not an order-q1 curve point");
    }

    std::string name() const override { return "ss" + std::to_string(bit_length(prm_.q1)); }
    const Int& order() const override { return prm_.q1; }
    const GElem& generator() const override { return gen_; }

    GElem add(const GElem& a, const GElem& b) const override {
        return curve_add(prm_.p, a, b);
    }

    GElem neg(const GElem& a) const override {
        if (a.inf) return a;
        return {a.x, fp_mod(prm_.p, -a.y), false};
    }

    GElem scalar_mul(const Int& k, const GElem& a) const override {
        Int e = k % prm_.q1;
        if (sgn(e) < 0) e += prm_.q1;
        return curve_smul(prm_.p, e, a);
    }

    bool is_valid(const GElem& a) const override {
        if (a.inf) return sgn(a.x) == 0 && sgn(a.y) == 0;
        if (sgn(a.x) < 0 || a.x >= prm_.p || sgn(a.y) < 0 || a.y >= prm_.p) return false;
        return curve_contains(prm_.p, a) && curve_smul(prm_.p, prm_.q1, a).inf;
    }

    GElem hash_to_group(std::span<const uint8_t> msg) const override {
        std::vector<uint8_t> input(msg.begin(), msg.end());
        input.resize(msg.size() + 4);
        for (uint32_t ctr = 0; ctr < 1000; ++ctr) {
            input[msg.size() + 0] = static_cast<uint8_t>(ctr >> 24);
            input[msg.size() + 1] = static_cast<uint8_t>(ctr >> 16);
            input[msg.size() + 2] = static_cast<uint8_t>(ctr >> 8);
            input[msg.size() + 3] = static_cast<uint8_t>(ctr);
            auto bytes = hash_expand("fsd/hash-to-curve", input, xbytes_ + 17);
            Int x = int_from_be(std::span(bytes).first(xbytes_ + 16)) % prm_.p;
            bool want_odd = (bytes.back() & 1) != 0;
            auto lifted = curve_lift_x(prm_.p, sqrt_exp_, x, want_odd);
            if (!lifted) continue;
            GElem pt = curve_smul(prm_.p, prm_.cofactor, *lifted);
            if (pt.inf) continue;
            return pt;
        }
        throw Error(Errc::internal, "hash-to-curve failed to find a point");
    }

    GtElem gt_mul(const GtElem& x, const GtElem& y) const override {
        FpCtx f{prm_.p};
        Fp2 r = f.mul({x.a, x.b}, {y.a, y.b});
        return {r.a, r.b};
    }
    GtElem gt_one() const override { return {1, 0}; }

    size_t element_size() const override { return 1 + xbytes_; }

    std::vector<uint8_t> serialize(const GElem& a) const override {
        std::vector<uint8_t> out(1 + xbytes_, 0);
        if (a.inf) return out;
        out[0] = mpz_odd_p(a.y.get_mpz_t()) ? 0x03 : 0x02;
        auto xb = int_to_be(a.x, xbytes_);
        std::memcpy(out.data() + 1, xb.data(), xbytes_);
        return out;
    }

    std::optional<GElem> deserialize(std::span<const uint8_t> bytes) const override {
        if (bytes.size() != 1 + xbytes_) return std::nullopt;
        Int x = int_from_be(bytes.subspan(1));
        if (bytes[0] == 0x00) {
            if (sgn(x) != 0) return std::nullopt;
            return GElem{};
        }
        if (bytes[0] != 0x02 && bytes[0] != 0x03) return std::nullopt;
        if (x >= prm_.p) return std::nullopt;
        auto pt = curve_lift_x(prm_.p, sqrt_exp_, x, bytes[0] == 0x03);
        if (!pt || !curve_smul(prm_.p, prm_.q1, *pt).inf) return std::nullopt;
        return pt;
    }

protected:
    GtElem do_pair(const GElem& a, const GElem& b) const override {
        Fp2 r = final_exp(miller(a, b));
        return {r.a, r.b};
    }

    bool do_pair_check(const GElem& a1, const GElem& b1, const GElem& a2,
                       const GElem& b2) const override {
        // e(a1,b1) * e(-a2,b2) == 1 with one shared final exponentiation
        FpCtx f{prm_.p};
        Fp2 m = f.mul(miller(a1, b1), miller(neg(a2), b2));
        return f.is_one(final_exp(m));
    }

private:
    // Line through t with slope lam, evaluated at the distorted image
    // phi(s) = (-xs, i*ys) of the base-field point s. No point of E(F_p) has
    // x-coordinate -xs (that would need -1 to be a square), so the value is
    // never zero; pure F_p factors like vertical lines die in the final
    // exponentiation.
    Fp2 line_value(const GElem& t, const Int& lam, const GElem& s) const {
        return {fp_mod(prm_.p, lam * (s.x + t.x) - t.y), s.y};
    }

    // Miller loop f_{q1, a} evaluated at phi(b).
    Fp2 miller(const GElem& a, const GElem& b) const {
        FpCtx f{prm_.p};
        if (a.inf || b.inf) return f.one();
        const Int& p = prm_.p;
        const Int& r = prm_.q1;
        Fp2 acc = f.one();
        GElem t = a;
        for (long i = static_cast<long>(bit_length(r)) - 2; i >= 0; --i) {
            Int lam = tangent_slope(p, t);
            acc = f.mul(f.sqr(acc), line_value(t, lam, b));
            t = curve_slope_add(p, lam, t, t);
            if (mpz_tstbit(r.get_mpz_t(), i)) {
                if (t.x == a.x) {
                    // t == -a at the loop's end: vertical line, F_p factor only
                    t = curve_add(p, t, a);
                } else {
                    Int lam2 = fp_mod(p, a.y - t.y) * invmod(fp_mod(p, a.x - t.x), p) % p;
                    acc = f.mul(acc, line_value(t, lam2, b));
                    t = curve_slope_add(p, lam2, t, a);
                }
            }
        }
        return acc;
    }

    // f^((p^2-1)/q1) computed as (conj(f)/f)^cofactor, using
    // p^2 - 1 = (p-1)(p+1) and f^(p-1) = conj(f)/f in F_{p^2}.
    Fp2 final_exp(const Fp2& m) const {
        FpCtx f{prm_.p};
        Fp2 g = f.mul(f.conj(m), f.inv(m));
        return f.pow(g, prm_.cofactor);
    }

    SsParams prm_;
    GElem gen_;
    Int sqrt_exp_;
    size_t xbytes_;
};

// ---------------------------------------------------------------------------
// Mock backend: G is Z_q1 written additively with P = 1, G_T holds exponents
// in Z_q1, e(a, b) = a*b. Bilinear and non-degenerate but trivially
// breakable; exists for fast deterministic tests.

const Int& mock_order() {
    // the secp256k1 group order, a convenient fixed 256-bit prime
    static const Int q(
        "115792089237316195423570985008687907852837564279074904382605163141518161494337");
    return q;
}

class MockGroup final : public BilinearGroup {
public:
    MockGroup() : q_(mock_order()), gen_{1, 0, false} {}

    std::string name() const override { return "mock"; }
    const Int& order() const override { return q_; }
    const GElem& generator() const override { return gen_; }

    GElem add(const GElem& a, const GElem& b) const override {
        return make((a.x + b.x) % q_);
    }
    GElem neg(const GElem& a) const override { return make((q_ - a.x) % q_); }
    GElem scalar_mul(const Int& k, const GElem& a) const override {
        Int e = k % q_;
        if (sgn(e) < 0) e += q_;
        return make(e * a.x % q_);
    }
    bool is_valid(const GElem& a) const override {
        if (sgn(a.x) < 0 || a.x >= q_ || sgn(a.y) != 0) return false;
        return a.inf == (sgn(a.x) == 0);
    }
    GElem hash_to_group(std::span<const uint8_t> msg) const override {
        auto bytes = hash_expand("fsd/mock-hash", msg, 48);
        Int v = int_from_be(bytes) % q_;
        if (sgn(v) == 0) v = 1;
        return make(v);
    }
    GtElem gt_mul(const GtElem& a, const GtElem& b) const override {
        return {(a.a + b.a) % q_, 0};
    }
    GtElem gt_one() const override { return {0, 0}; }

    size_t element_size() const override { return 32; }
    std::vector<uint8_t> serialize(const GElem& a) const override {
        return int_to_be(a.x, 32);
    }
    std::optional<GElem> deserialize(std::span<const uint8_t> bytes) const override {
        if (bytes.size() != 32) return std::nullopt;
        Int v = int_from_be(bytes);
        if (v >= q_) return std::nullopt;
        return make(v);
    }

protected:
    GtElem do_pair(const GElem& a, const GElem& b) const override {
        return {a.x * b.x % q_, 0};
    }
    bool do_pair_check(const GElem& a1, const GElem& b1, const GElem& a2,
                       const GElem& b2) const override {
        return a1.x * b1.x % q_ == a2.x * b2.x % q_;
    }

private:
    GElem make(Int v) const {
        bool zero = sgn(v) == 0;
        return {std::move(v), 0, zero};
    }

    const Int& q_;
    GElem gen_;
};

// Fixed parameter sets minted once with generate_ss_params (see
// tools/mint_curve.cpp, seed 20250810). Embedded so every run agrees on the
// groups, the same way standardized curves are shipped. ss160 is a fast test
// curve; ss256 pairs a 256-bit subgroup with a 1536-bit field (3072-bit
// F_{p^2}) for the 128-bit level.
SsParams ss160_params() {
    SsParams prm;
    prm.p = Int(
        "695562762344838439371276072129697470780994466489237541791630458786017558485708665916372773248941366749785911916228062835001389205106705873052224373762547"
        "9");
    prm.q1 = Int("1096605628655651899312004351843847914725044900757");
    prm.cofactor = Int(
        "634287061974632618316798555085121696469394572715133815711070412902839615703353831240979460569452473091364"
        "0");
    prm.gx = Int(
        "426623681098332169923784560056017929762918956595543987909707485439392698362147104226001819612925895274766018501167999128966880997582323669578559928702130"
        "4");
    prm.gy = Int(
        "77711730822922952831436326577864028039124180647696874329386908367869351486349163998463943865610640158840997390155384328824920845302552585840435059667884"
        "9");
    return prm;
}

SsParams ss256_params() {
    SsParams prm;
    prm.p = Int(
        "127946631123551532760121471451885834488738076188091856909665656406044319150786155686328521678023115103322902617453506841916240275288703489382935130475123"
        "490806444368973985233863536903443764094596887826047937150902157311065028466018676172780705775775939569936072427542694059761597305725864113635504223324627"
        "312679820732575955671288092979709922146055423761013498771430570532394101686253765405139674207916272212697093763830400842181361031230876689765264220521751"
        "8231");
    prm.q1 = Int(
        "67585871992761677045677194980647387774845371348399190136122817751657887696973");
    prm.cofactor = Int(
        "189309729017411186660956368721440269978551849630636966694977473806331624300647520718234792017414911843924683715418151945276871172094253710010424025475394"
        "727761433112834899143721177979546853538900182873084260051557832858693751472143241620709649418358425485267274284685496853563470947849093434531839570729900"
        "67211314169725023448176104897026526271103896834329812250938335802132873875982584");
    prm.gx = Int(
        "572191610118078310521335712478815174669247659835884314798937669469791934523248237952861826149341412643930408523018744768020183429099093108779784743225781"
        "679523095866153273603432184669797872275798529470272379001906077708276815564198146407861583051361533193208050984790742594924190869366146978833762714907559"
        "158367750780536429559661728836726896726427902553256980351015833555191988842392886323090185393621814980575184899796243252811755246441974214656587700928315"
        "879");
    prm.gy = Int(
        "226916908958038903325316671361155662974500519595675607952572896308353758283049132452820423650052037955129027979503894929564541921622549894168317814168976"
        "063719336962855002498866281481585157956144437199498202397705816966954889239258402146116773459980615794295522854150905044168046091300307883594214676586508"
        "048729984083081281085666653522882399311468909316734542493738317419259105507124368198164799902055754637606404469013109263998065320927870988563018760191469"
        "593");
    return prm;
}

}  // namespace

SsParams generate_ss_params(unsigned q1_bits, unsigned p_bits, Rng& rng) {
    if (q1_bits < 16 || p_bits < q1_bits + 16)
        throw Error(Errc::argument, "field must be meaningfully larger than the group order");
    constexpr int kMaxTries = 200000;
    Int q1 = random_prime(q1_bits, rng);
    for (int tries = 0; tries < kMaxTries; ++tries) {
        // cofactor divisible by 4 makes p = q1*c - 1 = 3 (mod 4)
        Int c = rng.bits(p_bits - q1_bits);
        mpz_setbit(c.get_mpz_t(), p_bits - q1_bits - 1);
        c -= c % 4;
        Int p = q1 * c - 1;
        if (bit_length(p) != p_bits) continue;
        if (mpz_probab_prime_p(p.get_mpz_t(), 40) == 0) continue;

        Int sqrt_exp = (p + 1) / 4;
        for (int i = 0; i < 1000; ++i) {
            Int x = rng.below(p);
            bool odd = (rng.u64() & 1) != 0;
            auto lifted = curve_lift_x(p, sqrt_exp, x, odd);
            if (!lifted) continue;
            GElem gen = curve_smul(p, c, *lifted);
            if (gen.inf) continue;
            SsParams prm;
            prm.p = std::move(p);
            prm.q1 = q1;
            prm.cofactor = std::move(c);
            prm.gx = gen.x;
            prm.gy = gen.y;
            return prm;
        }
    }
    throw Error(Errc::keygen, "no suitable curve prime found");
}

GroupPtr make_ss_group(const SsParams& params) {
    return std::make_shared<SsGroup>(params);
}

GroupPtr make_mock_group() { return std::make_shared<MockGroup>(); }

GroupPtr make_group(const std::string& name) {
    if (name == "mock") return make_mock_group();
    if (name == "ss160") return make_ss_group(ss160_params());
    if (name == "ss256") return make_ss_group(ss256_params());
    throw Error(Errc::argument, "unknown pairing group: " + name);
}

}  // namespace fsd::pairing
