#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fsd/blsig.hpp"
#include "fsd/detection.hpp"
#include "fsd/packing.hpp"
#include "fsd/paillier.hpp"

namespace fsd::protocol {

// Bit counts used by the communication-overhead model. Independent of the
// simulator's actual encodings; the totals (ss+ts, report+sd+ts) are what
// the size comparison depends on.
struct SizeModel {
    uint32_t ss_bits = 25;
    uint32_t ts_bits = 25;
    uint32_t report_bits = 1;
    uint32_t sd_bits = 34;
    uint32_t sig_bits = 160;
    uint32_t aes_block_bits = 128;
};

struct PublicParams {
    pairing::GroupPtr group;
    std::string curve;  // group name, for serialization
    paillier::PublicKey pk;
    blsig::VerifyKey ys, yf, yu;
    packing::SuperSeqs seqs;
    SchemeDims dims;
    SizeModel size_model;
    std::string hash_id = "sha256";
    int64_t freshness_ms = 30000;

    size_t ciphertext_width() const;  // bytes of a serialized ciphertext

    std::string to_json() const;
    static PublicParams from_json(const std::string& text);
};

struct SsSecret {
    blsig::SigningKey xu;
};
struct FdSecret {
    blsig::SigningKey xf;
};
// Only the second-layer device can decrypt; its bundle is the only one
// carrying Paillier private material.
struct SdSecret {
    paillier::PrivateKey paillier_sk;
    blsig::SigningKey xs;
};

struct EncryptedSample {
    paillier::Ciphertext c;
    std::string sensor_id;
    int64_t ts_ms = 0;
    blsig::Signature sigma;
};

struct AggregationResult {
    paillier::Ciphertext rf;
    std::string sensor_id;
    std::string fd_id;
    int64_t ts_ms = 0;
    blsig::Signature sigma;
};

struct DetectionReport {
    int verdict = 1;  // 1 = normal, 0 = faulty
    std::string sensor_id;
    std::string sd_id;
    int64_t ts_ms = 0;
    blsig::Signature sigma;
};

// Canonical signed content: tag byte, then length-prefixed fields
// (ciphertext fixed-width big-endian, ids UTF-8, timestamp 8-byte
// big-endian). Length prefixes rule out concatenation ambiguity.
std::vector<uint8_t> sample_sign_bytes(const PublicParams& pp, const paillier::Ciphertext& c,
                                       const std::string& sensor_id, int64_t ts_ms);
std::vector<uint8_t> aggregate_sign_bytes(const PublicParams& pp, const paillier::Ciphertext& rf,
                                          const std::string& sensor_id, const std::string& fd_id,
                                          int64_t ts_ms);
std::vector<uint8_t> report_sign_bytes(int verdict, const std::string& sensor_id,
                                       const std::string& sd_id, int64_t ts_ms);

// Wire form: the sign bytes followed by the length-prefixed signature
// encoding. The adversary hook operates on these bytes.
struct WireMessage {
    enum class Kind { sample, aggregate, report };
    Kind kind;
    std::vector<uint8_t> body;
};

WireMessage wire_encode(const PublicParams& pp, const EncryptedSample& m);
WireMessage wire_encode(const PublicParams& pp, const AggregationResult& m);
WireMessage wire_encode(const PublicParams& pp, const DetectionReport& m);
EncryptedSample parse_sample(const PublicParams& pp, const WireMessage& w);
AggregationResult parse_aggregate(const PublicParams& pp, const WireMessage& w);
DetectionReport parse_report(const PublicParams& pp, const WireMessage& w);

struct Ids {
    std::string ss = "SS-1";
    std::string fd = "FD-1";
    std::string sd = "SD-1";
};

struct InitResult {
    PublicParams params;
    SdSecret sd;
    FdSecret fd;
    SsSecret ss;
};

// System bootstrap: Paillier keypair, three signing keypairs, sequences
// sized to the generated modulus. Surfaces the packing capacity error (with
// max feasible n) when dims do not fit.
InitResult cc_init(unsigned kappa_bits, const std::string& curve, const SchemeDims& dims,
                   Rng& rng, bool allow_small_kappa = false,
                   const SizeModel& size_model = {}, int64_t freshness_ms = 30000);

class Sensor {
public:
    Sensor(const PublicParams& pp, SsSecret secret, std::string id);
    EncryptedSample produce(const DataSample& sample, int64_t now_ms, Rng& rng);

    const ops::Counters& counters() const { return counters_; }
    const std::string& id() const { return id_; }

private:
    const PublicParams& pp_;
    SsSecret secret_;
    std::string id_;
    ops::Counters counters_;
};

class FogAggregator {
public:
    // offset_fault shifts the cached offset exponent, modeling a misbehaving
    // or misconfigured aggregator whose output still carries a valid
    // signature; the analyzer's structural checks must catch it.
    FogAggregator(const PublicParams& pp, FdSecret secret, std::string id,
                  const Int& offset_fault = 0);
    AggregationResult aggregate(std::span<const EncryptedSample> inbox, int64_t now_ms);

    const ops::Counters& counters() const { return counters_; }
    const std::string& id() const { return id_; }
    // Everything this entity retains, for privacy-boundary inspection.
    std::string debug_state_json() const;

private:
    const PublicParams& pp_;
    FdSecret secret_;
    std::string id_;
    paillier::Ciphertext c_a_;  // g^(sum a_i d), fixed per system, reused
    std::set<std::pair<std::string, int64_t>> seen_;
    ops::Counters counters_;
};

class FogAnalyzer {
public:
    FogAnalyzer(const PublicParams& pp, SdSecret secret, std::string id, double threshold);

    struct Analysis {
        DetectionReport report;
        Int m_f;
        packing::ScatterDecode scatter;
        detect::DispersionResult dispersion;
    };
    Analysis analyze(const AggregationResult& msg, int64_t now_ms);

    const ops::Counters& counters() const { return counters_; }
    const std::string& id() const { return id_; }
    double threshold() const { return threshold_; }

private:
    const PublicParams& pp_;
    SdSecret secret_;
    std::string id_;
    double threshold_;
    std::set<std::pair<std::string, int64_t>> seen_;
    ops::Counters counters_;
};

class ControlCenter {
public:
    explicit ControlCenter(const PublicParams& pp);
    int receive(const DetectionReport& report, int64_t now_ms);

    const ops::Counters& counters() const { return counters_; }

private:
    const PublicParams& pp_;
    std::set<std::pair<std::string, int64_t>> seen_;
    ops::Counters counters_;
};

struct WorldConfig {
    unsigned kappa = 1024;
    bool allow_insecure_kappa = false;
    std::string curve = "mock";
    SchemeDims dims{2, 10, 4095};
    double threshold = 1e7;
    int64_t freshness_ms = 30000;
    int64_t sample_interval_ms = 100;
    uint64_t seed = 1;
    SizeModel size_model;
    Ids ids;
    bool fd_offset_fault = false;

    std::string to_json() const;
    static WorldConfig from_json(const std::string& text);
};

struct MessageRecord {
    std::string kind;
    std::string from;
    std::string to;
    int64_t ts_ms = 0;
    size_t wire_bytes = 0;
};

struct RoundTrace {
    std::vector<MessageRecord> messages;
    Int m_f;
    std::vector<std::vector<Int>> scatter_exact;
    Matrix scatter;
    detect::DispersionResult dispersion;
    int verdict = 1;
    int cc_verdict = 1;
    ops::Counters ss_ops, fd_ops, sd_ops, cc_ops;
    double ss_ms = 0, fd_ms = 0, sd_ms = 0, cc_ms = 0;
    uint64_t model_bits_to_cc = 0;

    std::string to_json_line() const;
};

// Channel interposer: receives each in-flight wire message and returns the
// messages actually delivered (empty = drop, several = replay/inject).
using Adversary = std::function<std::vector<WireMessage>(const WireMessage&)>;

// Owns the four entities and a simulated clock; one round is N sensor
// messages, one aggregate, one report, all passed by value through the
// adversary hook. Deterministic for a given config (seed included).
class World {
public:
    explicit World(const WorldConfig& cfg);

    RoundTrace run_round(std::span<const DataSample> samples, const Adversary* adv = nullptr);

    const PublicParams& params() const { return init_.params; }
    const WorldConfig& config() const { return cfg_; }
    const FogAggregator& fd() const { return fd_; }
    int64_t now_ms() const { return now_ms_; }
    void advance_clock(int64_t delta_ms) { now_ms_ += delta_ms; }
    Rng& rng() { return rng_; }

private:
    WorldConfig cfg_;
    SeededRng rng_;
    InitResult init_;
    Sensor ss_;
    FogAggregator fd_;
    FogAnalyzer sd_;
    ControlCenter cc_;
    int64_t now_ms_ = 1'600'000'000'000;
};

}  // namespace fsd::protocol
