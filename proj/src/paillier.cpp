#include "fsd/paillier.hpp"

#include <json.hpp>

#include "fsd/ops.hpp"

namespace fsd::paillier {

namespace {

using nlohmann::json;

Int L(const Int& u, const Int& n) { return (u - 1) / n; }

void check_unit(const Ciphertext& c, const PublicKey& pk) {
    if (sgn(c.value) <= 0 || c.value >= pk.n_sq || gcd(c.value, pk.n) != 1)
        throw Error(Errc::ciphertext, "ciphertext is not a unit mod n^2");
}

}  // namespace

PublicKey PublicKey::make(Int n, Int g) {
    PublicKey pk;
    pk.n_sq = n * n;
    pk.n = std::move(n);
    pk.g = std::move(g);
    return pk;
}

std::string PublicKey::to_json() const {
    return json{{"n", int_to_dec(n)}, {"g", int_to_dec(g)}}.dump();
}

PublicKey PublicKey::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.contains("n") || !j.contains("g"))
        throw Error(Errc::parse, "public key JSON needs string fields n, g");
    return make(int_from_dec(j.at("n").get<std::string>()),
                int_from_dec(j.at("g").get<std::string>()));
}

std::string PrivateKey::to_json() const {
    return json{{"lambda", int_to_dec(lambda)}, {"mu", int_to_dec(mu)}}.dump();
}

PrivateKey PrivateKey::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded() || !j.contains("lambda") || !j.contains("mu"))
        throw Error(Errc::parse, "private key JSON needs string fields lambda, mu");
    PrivateKey sk;
    sk.lambda = int_from_dec(j.at("lambda").get<std::string>());
    sk.mu = int_from_dec(j.at("mu").get<std::string>());
    return sk;
}

Keypair keypair_from_primes(const Int& p, const Int& q) {
    if (p == q) throw Error(Errc::argument, "p and q must differ");
    if (p < 2 || q < 2) throw Error(Errc::argument, "p, q must be primes >= 2");
    Int n = p * q;
    PublicKey pk = PublicKey::make(n, n + 1);
    PrivateKey sk;
    sk.lambda = lcm(p - 1, q - 1);
    Int l_val = L(powm(pk.g, sk.lambda, pk.n_sq), n);
    if (gcd(l_val, n) != 1)
        throw Error(Errc::keygen, "generator invalid: L(g^lambda) not invertible mod n");
    sk.mu = invmod(l_val, n);
    sk.p = p;
    sk.q = q;
    return {pk, sk};
}

Keypair keygen(unsigned kappa_bits, Rng& rng, bool allow_small) {
    if (kappa_bits < kMinKappaBits)
        throw Error(Errc::argument, "kappa below minimum of 16 bits");
    if (kappa_bits < kMinSecureKappaBits && !allow_small)
        throw Error(Errc::argument,
                    "kappa below 1024 bits requires the explicit insecure flag");
    for (int tries = 0; tries < 1000; ++tries) {
        Int p = random_prime(kappa_bits, rng);
        Int q = random_prime(kappa_bits, rng);
        if (p == q) continue;
        if (bit_length(p * q) != 2 * static_cast<size_t>(kappa_bits)) continue;
        return keypair_from_primes(p, q);
    }
    throw Error(Errc::keygen, "could not find a modulus of the requested size");
}

Ciphertext encrypt_with(const PublicKey& pk, const Int& m, const Int& r) {
    if (sgn(m) < 0 || m >= pk.n)
        throw Error(Errc::range, "plaintext outside Z_n");
    if (sgn(r) <= 0 || r >= pk.n || gcd(r, pk.n) != 1)
        throw Error(Errc::randomness, "encryption randomness is not a unit mod n");
    ops::bump_exp_zn2(2);  // g^m and r^n
    Int c = powm(pk.g, m, pk.n_sq) * powm(r, pk.n, pk.n_sq) % pk.n_sq;
    ops::bump_mul_zn2();
    return {c};
}

Ciphertext encrypt(const PublicKey& pk, const Int& m, Rng& rng) {
    return encrypt_with(pk, m, rng.unit_mod(pk.n));
}

Int decrypt(const PrivateKey& sk, const PublicKey& pk, const Ciphertext& c) {
    check_unit(c, pk);
    ops::bump_exp_zn2();
    return L(powm(c.value, sk.lambda, pk.n_sq), pk.n) * sk.mu % pk.n;
}

Ciphertext ct_mul(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2) {
    ops::bump_mul_zn2();
    return {c1.value * c2.value % pk.n_sq};
}

Ciphertext ct_pow(const PublicKey& pk, const Ciphertext& c, const Int& k) {
    if (sgn(k) < 0) throw Error(Errc::argument, "exponent must be non-negative");
    ops::bump_exp_zn2();
    return {powm(c.value, k, pk.n_sq)};
}

Ciphertext ct_div(const PublicKey& pk, const Ciphertext& c1, const Ciphertext& c2) {
    ops::bump_mul_zn2();
    return {c1.value * invmod(c2.value, pk.n_sq) % pk.n_sq};
}

}  // namespace fsd::paillier
