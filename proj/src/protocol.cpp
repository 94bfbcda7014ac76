#include "fsd/protocol.hpp"

#include <json.hpp>

#include <chrono>

#include "fsd/hash.hpp"

namespace fsd::protocol {

namespace {

using nlohmann::json;

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out.push_back(static_cast<uint8_t>(v >> s));
}

void put_lp(std::vector<uint8_t>& out, std::span<const uint8_t> part) {
    put_u32(out, static_cast<uint32_t>(part.size()));
    out.insert(out.end(), part.begin(), part.end());
}

void put_lp_str(std::vector<uint8_t>& out, const std::string& s) {
    put_lp(out, std::span(reinterpret_cast<const uint8_t*>(s.data()), s.size()));
}

std::vector<uint8_t> ts_bytes(int64_t ts_ms) {
    if (ts_ms < 0) throw Error(Errc::argument, "negative timestamp");
    std::vector<uint8_t> out(8);
    uint64_t v = static_cast<uint64_t>(ts_ms);
    for (int i = 7; i >= 0; --i) {
        out[i] = static_cast<uint8_t>(v);
        v >>= 8;
    }
    return out;
}

struct Reader {
    std::span<const uint8_t> data;
    size_t pos = 0;

    uint8_t byte() {
        if (pos + 1 > data.size()) throw Error(Errc::parse, "truncated message");
        return data[pos++];
    }
    std::span<const uint8_t> take(size_t n) {
        if (pos + n > data.size()) throw Error(Errc::parse, "truncated message");
        auto s = data.subspan(pos, n);
        pos += n;
        return s;
    }
    uint32_t u32() {
        auto s = take(4);
        return (uint32_t(s[0]) << 24) | (uint32_t(s[1]) << 16) | (uint32_t(s[2]) << 8) |
               uint32_t(s[3]);
    }
    std::span<const uint8_t> lp() { return take(u32()); }
    std::string lp_str() {
        auto s = lp();
        return std::string(reinterpret_cast<const char*>(s.data()), s.size());
    }
    int64_t lp_ts() {
        auto s = lp();
        if (s.size() != 8) throw Error(Errc::parse, "timestamp field must be 8 bytes");
        uint64_t v = 0;
        for (uint8_t b : s) v = (v << 8) | b;
        if (v > static_cast<uint64_t>(INT64_MAX))
            throw Error(Errc::parse, "timestamp out of range");
        return static_cast<int64_t>(v);
    }
    void expect_end() const {
        if (pos != data.size()) throw Error(Errc::parse, "trailing bytes in message");
    }
};

constexpr uint8_t kTagSample = 0x01;
constexpr uint8_t kTagAggregate = 0x02;
constexpr uint8_t kTagReport = 0x03;

blsig::Signature parse_signature(const PublicParams& pp, Reader& r) {
    auto bytes = r.lp();
    if (bytes.size() != pp.group->element_size())
        throw Error(Errc::parse, "signature has wrong length");
    auto elem = pp.group->deserialize(bytes);
    if (!elem) throw Error(Errc::parse, "signature is not a valid group element");
    return {*elem};
}

paillier::Ciphertext parse_ciphertext(const PublicParams& pp, Reader& r) {
    auto bytes = r.lp();
    if (bytes.size() != pp.ciphertext_width())
        throw Error(Errc::parse, "ciphertext has wrong length");
    return {int_from_be(bytes)};
}

void check_fresh(int64_t now_ms, int64_t ts_ms, int64_t window_ms) {
    if (ts_ms > now_ms + window_ms || ts_ms < now_ms - window_ms)
        throw Error(Errc::replay, "timestamp outside the freshness window");
}

void remember(std::set<std::pair<std::string, int64_t>>& seen, const std::string& id,
              int64_t ts_ms, int64_t now_ms, int64_t window_ms) {
    seen.emplace(id, ts_ms);
    // prune entries that can no longer pass the freshness check anyway
    for (auto it = seen.begin(); it != seen.end();) {
        it = (it->second < now_ms - 2 * window_ms) ? seen.erase(it) : std::next(it);
    }
}

json counters_json(const ops::Counters& c) {
    return {{"exp_zn2", c.exp_zn2},
            {"mul_zn2", c.mul_zn2},
            {"mul_g", c.mul_g},
            {"pairings", c.pairings}};
}

ops::Counters counters_delta(const ops::Counters& now, const ops::Counters& before) {
    ops::Counters d;
    d.exp_zn2 = now.exp_zn2 - before.exp_zn2;
    d.mul_zn2 = now.mul_zn2 - before.mul_zn2;
    d.mul_g = now.mul_g - before.mul_g;
    d.pairings = now.pairings - before.pairings;
    return d;
}

template <typename F>
auto at_entity(const char* who, F&& f) {
    try {
        return f();
    } catch (const CapacityError&) {
        throw;
    } catch (const Error& e) {
        throw Error(e.code(), std::string(who) + ": " + e.what());
    }
}

}  // namespace

size_t PublicParams::ciphertext_width() const {
    return (2 * bit_length(pk.n) + 7) / 8;
}

std::string PublicParams::to_json() const {
    json j;
    j["curve"] = curve;
    j["paillier"] = json::parse(pk.to_json());
    j["verify_keys"] = {{"ys", hex_encode(group->serialize(ys.y))},
                        {"yf", hex_encode(group->serialize(yf.y))},
                        {"yu", hex_encode(group->serialize(yu.y))}};
    json a = json::array(), b = json::array();
    for (const auto& v : seqs.a) a.push_back(int_to_dec(v));
    for (const auto& v : seqs.b) b.push_back(int_to_dec(v));
    j["a"] = a;
    j["b"] = b;
    j["dims"] = {{"l", dims.l}, {"n", dims.n}, {"d", dims.d}};
    j["size_model"] = {{"ss_bits", size_model.ss_bits},     {"ts_bits", size_model.ts_bits},
                       {"report_bits", size_model.report_bits}, {"sd_bits", size_model.sd_bits},
                       {"sig_bits", size_model.sig_bits},
                       {"aes_block_bits", size_model.aes_block_bits}};
    j["hash"] = hash_id;
    j["freshness_ms"] = freshness_ms;
    return j.dump();
}

PublicParams PublicParams::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::parse, "public params: invalid JSON");
    PublicParams pp;
    pp.curve = j.at("curve").get<std::string>();
    pp.group = pairing::make_group(pp.curve);
    pp.pk = paillier::PublicKey::from_json(j.at("paillier").dump());
    auto read_key = [&](const char* name) -> blsig::VerifyKey {
        auto bytes = hex_decode(j.at("verify_keys").at(name).get<std::string>());
        auto elem = pp.group->deserialize(bytes);
        if (!elem) throw Error(Errc::parse, "invalid verify key element");
        return {*elem};
    };
    pp.ys = read_key("ys");
    pp.yf = read_key("yf");
    pp.yu = read_key("yu");
    for (const auto& v : j.at("a")) pp.seqs.a.push_back(int_from_dec(v.get<std::string>()));
    for (const auto& v : j.at("b")) pp.seqs.b.push_back(int_from_dec(v.get<std::string>()));
    pp.dims.l = j.at("dims").at("l").get<uint32_t>();
    pp.dims.n = j.at("dims").at("n").get<uint32_t>();
    pp.dims.d = j.at("dims").at("d").get<uint64_t>();
    const auto& sm = j.at("size_model");
    pp.size_model.ss_bits = sm.at("ss_bits").get<uint32_t>();
    pp.size_model.ts_bits = sm.at("ts_bits").get<uint32_t>();
    pp.size_model.report_bits = sm.at("report_bits").get<uint32_t>();
    pp.size_model.sd_bits = sm.at("sd_bits").get<uint32_t>();
    pp.size_model.sig_bits = sm.at("sig_bits").get<uint32_t>();
    pp.size_model.aes_block_bits = sm.at("aes_block_bits").get<uint32_t>();
    pp.hash_id = j.at("hash").get<std::string>();
    pp.freshness_ms = j.at("freshness_ms").get<int64_t>();
    if (!packing::sequences_valid(pp.seqs, pp.dims, pp.pk.n))
        throw Error(Errc::parse, "sequences in public params fail their constraints");
    return pp;
}

std::vector<uint8_t> sample_sign_bytes(const PublicParams& pp, const paillier::Ciphertext& c,
                                       const std::string& sensor_id, int64_t ts_ms) {
    std::vector<uint8_t> out{kTagSample};
    put_lp(out, int_to_be(c.value, pp.ciphertext_width()));
    put_lp_str(out, sensor_id);
    put_lp(out, ts_bytes(ts_ms));
    return out;
}

std::vector<uint8_t> aggregate_sign_bytes(const PublicParams& pp, const paillier::Ciphertext& rf,
                                          const std::string& sensor_id, const std::string& fd_id,
                                          int64_t ts_ms) {
    std::vector<uint8_t> out{kTagAggregate};
    put_lp(out, int_to_be(rf.value, pp.ciphertext_width()));
    put_lp_str(out, sensor_id);
    put_lp_str(out, fd_id);
    put_lp(out, ts_bytes(ts_ms));
    return out;
}

std::vector<uint8_t> report_sign_bytes(int verdict, const std::string& sensor_id,
                                       const std::string& sd_id, int64_t ts_ms) {
    std::vector<uint8_t> out{kTagReport};
    uint8_t bit = verdict ? 1 : 0;
    put_lp(out, std::span(&bit, 1));
    put_lp_str(out, sensor_id);
    put_lp_str(out, sd_id);
    put_lp(out, ts_bytes(ts_ms));
    return out;
}

WireMessage wire_encode(const PublicParams& pp, const EncryptedSample& m) {
    auto body = sample_sign_bytes(pp, m.c, m.sensor_id, m.ts_ms);
    put_lp(body, pp.group->serialize(m.sigma.sigma));
    return {WireMessage::Kind::sample, std::move(body)};
}

WireMessage wire_encode(const PublicParams& pp, const AggregationResult& m) {
    auto body = aggregate_sign_bytes(pp, m.rf, m.sensor_id, m.fd_id, m.ts_ms);
    put_lp(body, pp.group->serialize(m.sigma.sigma));
    return {WireMessage::Kind::aggregate, std::move(body)};
}

WireMessage wire_encode(const PublicParams& pp, const DetectionReport& m) {
    auto body = report_sign_bytes(m.verdict, m.sensor_id, m.sd_id, m.ts_ms);
    put_lp(body, pp.group->serialize(m.sigma.sigma));
    return {WireMessage::Kind::report, std::move(body)};
}

EncryptedSample parse_sample(const PublicParams& pp, const WireMessage& w) {
    Reader r{w.body};
    if (r.byte() != kTagSample) throw Error(Errc::parse, "wrong message tag");
    EncryptedSample m;
    m.c = parse_ciphertext(pp, r);
    m.sensor_id = r.lp_str();
    m.ts_ms = r.lp_ts();
    m.sigma = parse_signature(pp, r);
    r.expect_end();
    return m;
}

AggregationResult parse_aggregate(const PublicParams& pp, const WireMessage& w) {
    Reader r{w.body};
    if (r.byte() != kTagAggregate) throw Error(Errc::parse, "wrong message tag");
    AggregationResult m;
    m.rf = parse_ciphertext(pp, r);
    m.sensor_id = r.lp_str();
    m.fd_id = r.lp_str();
    m.ts_ms = r.lp_ts();
    m.sigma = parse_signature(pp, r);
    r.expect_end();
    return m;
}

DetectionReport parse_report(const PublicParams& pp, const WireMessage& w) {
    Reader r{w.body};
    if (r.byte() != kTagReport) throw Error(Errc::parse, "wrong message tag");
    DetectionReport m;
    auto bit = r.lp();
    if (bit.size() != 1 || bit[0] > 1) throw Error(Errc::parse, "verdict must be one bit");
    m.verdict = bit[0];
    m.sensor_id = r.lp_str();
    m.sd_id = r.lp_str();
    m.ts_ms = r.lp_ts();
    m.sigma = parse_signature(pp, r);
    r.expect_end();
    return m;
}

InitResult cc_init(unsigned kappa_bits, const std::string& curve, const SchemeDims& dims,
                   Rng& rng, bool allow_small_kappa, const SizeModel& size_model,
                   int64_t freshness_ms) {
    dims.validate();
    InitResult out;
    out.params.group = pairing::make_group(curve);
    out.params.curve = curve;

    auto kp = paillier::keygen(kappa_bits, rng, allow_small_kappa);
    out.params.pk = kp.pub;
    out.params.seqs = packing::build_sequences(dims, kp.pub.n);
    out.params.dims = dims;
    out.params.size_model = size_model;
    out.params.freshness_ms = freshness_ms;

    auto [xs, ys] = blsig::sig_keygen(*out.params.group, rng);
    auto [xf, yf] = blsig::sig_keygen(*out.params.group, rng);
    auto [xu, yu] = blsig::sig_keygen(*out.params.group, rng);
    out.params.ys = ys;
    out.params.yf = yf;
    out.params.yu = yu;
    out.sd = SdSecret{kp.priv, xs};
    out.fd = FdSecret{xf};
    out.ss = SsSecret{xu};
    return out;
}

Sensor::Sensor(const PublicParams& pp, SsSecret secret, std::string id)
    : pp_(pp), secret_(std::move(secret)), id_(std::move(id)) {}

EncryptedSample Sensor::produce(const DataSample& sample, int64_t now_ms, Rng& rng) {
    ops::CountScope scope(&counters_);
    Int m = packing::encode_sample(pp_.seqs, pp_.dims, sample);
    auto c = paillier::encrypt(pp_.pk, m, rng);
    auto bytes = sample_sign_bytes(pp_, c, id_, now_ms);
    auto sig = blsig::sign(*pp_.group, secret_.xu, bytes);
    return {c, id_, now_ms, sig};
}

FogAggregator::FogAggregator(const PublicParams& pp, FdSecret secret, std::string id,
                             const Int& offset_fault)
    : pp_(pp), secret_(std::move(secret)), id_(std::move(id)) {
    // fixed per system, computed once and reused; deterministic randomness
    // is fine here because every CD_i inherits fresh randomness from C_i
    Int offset = packing::expected_offset(pp_.seqs, pp_.dims) + offset_fault;
    c_a_ = {powm(pp_.pk.g, offset, pp_.pk.n_sq)};
}

AggregationResult FogAggregator::aggregate(std::span<const EncryptedSample> inbox,
                                           int64_t now_ms) {
    ops::CountScope scope(&counters_);

    std::set<std::pair<std::string, int64_t>> in_round;
    for (const auto& m : inbox) {
        check_fresh(now_ms, m.ts_ms, pp_.freshness_ms);
        auto key = std::make_pair(m.sensor_id, m.ts_ms);
        if (in_round.contains(key) || seen_.contains(key))
            throw Error(Errc::replay, "duplicate sample (sensor, timestamp)");
        in_round.insert(key);
    }
    if (inbox.size() != pp_.dims.n)
        throw Error(Errc::argument, "aggregation needs exactly n samples");
    for (const auto& m : inbox)
        if (m.sensor_id != inbox.front().sensor_id)
            throw Error(Errc::argument, "samples from different sensors in one round");

    std::vector<blsig::BatchItem> items;
    items.reserve(inbox.size());
    for (const auto& m : inbox)
        items.push_back({sample_sign_bytes(pp_, m.c, m.sensor_id, m.ts_ms), m.sigma});
    if (!blsig::batch_verify(*pp_.group, pp_.yu, items))
        throw Error(Errc::verify, "batch verification failed; rejecting the round");

    paillier::Ciphertext c = inbox.front().c;
    for (size_t i = 1; i < inbox.size(); ++i) c = paillier::ct_mul(pp_.pk, c, inbox[i].c);

    Int n_scalar = Int(pp_.dims.n);
    paillier::Ciphertext rf;
    bool first = true;
    for (size_t i = 0; i < inbox.size(); ++i) {
        auto cd = paillier::ct_div(
            pp_.pk, paillier::ct_pow(pp_.pk, paillier::ct_mul(pp_.pk, inbox[i].c, c_a_), n_scalar),
            c);
        auto term = paillier::ct_pow(pp_.pk, cd, pp_.seqs.b[i]);
        rf = first ? term : paillier::ct_mul(pp_.pk, rf, term);
        first = false;
    }

    auto bytes = aggregate_sign_bytes(pp_, rf, inbox.front().sensor_id, id_, now_ms);
    auto sig = blsig::sign(*pp_.group, secret_.xf, bytes);
    for (const auto& key : in_round)
        remember(seen_, key.first, key.second, now_ms, pp_.freshness_ms);
    return {rf, inbox.front().sensor_id, id_, now_ms, sig};
}

std::string FogAggregator::debug_state_json() const {
    json j;
    j["id"] = id_;
    j["signing_key_kind"] = "bls_fd";
    j["c_a"] = int_to_dec(c_a_.value);
    json seen = json::array();
    for (const auto& [sid, ts] : seen_) seen.push_back({{"sensor", sid}, {"ts_ms", ts}});
    j["seen"] = seen;
    j["counters"] = counters_json(counters_);
    return j.dump();
}

FogAnalyzer::FogAnalyzer(const PublicParams& pp, SdSecret secret, std::string id,
                         double threshold)
    : pp_(pp), secret_(std::move(secret)), id_(std::move(id)), threshold_(threshold) {}

FogAnalyzer::Analysis FogAnalyzer::analyze(const AggregationResult& msg, int64_t now_ms) {
    ops::CountScope scope(&counters_);

    check_fresh(now_ms, msg.ts_ms, pp_.freshness_ms);
    auto key = std::make_pair(msg.fd_id, msg.ts_ms);
    if (seen_.contains(key)) throw Error(Errc::replay, "duplicate aggregation result");

    auto bytes = aggregate_sign_bytes(pp_, msg.rf, msg.sensor_id, msg.fd_id, msg.ts_ms);
    if (!blsig::verify(*pp_.group, pp_.yf, bytes, msg.sigma))
        throw Error(Errc::verify, "aggregation result signature failed");

    Analysis out;
    out.m_f = paillier::decrypt(secret_.paillier_sk, pp_.pk, msg.rf);
    out.scatter = packing::decode_aggregate(pp_.seqs, pp_.dims, out.m_f);
    out.dispersion = detect::dispersion(out.scatter.m);
    int verdict = out.dispersion.dispersion > threshold_ ? 0 : 1;

    auto rbytes = report_sign_bytes(verdict, msg.sensor_id, id_, now_ms);
    auto sig = blsig::sign(*pp_.group, secret_.xs, rbytes);
    out.report = {verdict, msg.sensor_id, id_, now_ms, sig};
    remember(seen_, key.first, key.second, now_ms, pp_.freshness_ms);
    return out;
}

ControlCenter::ControlCenter(const PublicParams& pp) : pp_(pp) {}

int ControlCenter::receive(const DetectionReport& report, int64_t now_ms) {
    ops::CountScope scope(&counters_);

    check_fresh(now_ms, report.ts_ms, pp_.freshness_ms);
    auto key = std::make_pair(report.sd_id, report.ts_ms);
    if (seen_.contains(key)) throw Error(Errc::replay, "duplicate detection report");

    auto bytes = report_sign_bytes(report.verdict, report.sensor_id, report.sd_id,
                                   report.ts_ms);
    if (!blsig::verify_fused(*pp_.group, pp_.ys, bytes, report.sigma))
        throw Error(Errc::verify, "detection report signature failed");
    remember(seen_, key.first, key.second, now_ms, pp_.freshness_ms);
    return report.verdict;
}

std::string WorldConfig::to_json() const {
    json j;
    j["kappa"] = kappa;
    j["allow_insecure_kappa"] = allow_insecure_kappa;
    j["curve"] = curve;
    j["l"] = dims.l;
    j["N"] = dims.n;
    j["d"] = dims.d;
    j["threshold"] = threshold;
    j["freshness_ms"] = freshness_ms;
    j["sample_interval_ms"] = sample_interval_ms;
    j["seed"] = seed;
    j["size_model"] = {{"ss_bits", size_model.ss_bits},
                       {"ts_bits", size_model.ts_bits},
                       {"report_bits", size_model.report_bits},
                       {"sd_bits", size_model.sd_bits},
                       {"sig_bits", size_model.sig_bits},
                       {"aes_block_bits", size_model.aes_block_bits}};
    j["ids"] = {{"ss", ids.ss}, {"fd", ids.fd}, {"sd", ids.sd}};
    j["fd_offset_fault"] = fd_offset_fault;
    return j.dump();
}

WorldConfig WorldConfig::from_json(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::parse, "world config: invalid JSON");
    WorldConfig cfg;
    cfg.kappa = j.value("kappa", cfg.kappa);
    cfg.allow_insecure_kappa = j.value("allow_insecure_kappa", cfg.allow_insecure_kappa);
    cfg.curve = j.value("curve", cfg.curve);
    cfg.dims.l = j.value("l", cfg.dims.l);
    cfg.dims.n = j.value("N", cfg.dims.n);
    cfg.dims.d = j.value("d", cfg.dims.d);
    cfg.threshold = j.value("threshold", cfg.threshold);
    cfg.freshness_ms = j.value("freshness_ms", cfg.freshness_ms);
    cfg.sample_interval_ms = j.value("sample_interval_ms", cfg.sample_interval_ms);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("size_model")) {
        const auto& sm = j.at("size_model");
        cfg.size_model.ss_bits = sm.value("ss_bits", cfg.size_model.ss_bits);
        cfg.size_model.ts_bits = sm.value("ts_bits", cfg.size_model.ts_bits);
        cfg.size_model.report_bits = sm.value("report_bits", cfg.size_model.report_bits);
        cfg.size_model.sd_bits = sm.value("sd_bits", cfg.size_model.sd_bits);
        cfg.size_model.sig_bits = sm.value("sig_bits", cfg.size_model.sig_bits);
        cfg.size_model.aes_block_bits =
            sm.value("aes_block_bits", cfg.size_model.aes_block_bits);
    }
    if (j.contains("ids")) {
        cfg.ids.ss = j.at("ids").value("ss", cfg.ids.ss);
        cfg.ids.fd = j.at("ids").value("fd", cfg.ids.fd);
        cfg.ids.sd = j.at("ids").value("sd", cfg.ids.sd);
    }
    cfg.fd_offset_fault = j.value("fd_offset_fault", cfg.fd_offset_fault);
    return cfg;
}

std::string RoundTrace::to_json_line() const {
    json msgs = json::array();
    for (const auto& m : messages)
        msgs.push_back({{"kind", m.kind},
                        {"from", m.from},
                        {"to", m.to},
                        {"ts_ms", m.ts_ms},
                        {"wire_bytes", m.wire_bytes}});
    json sx = json::array();
    for (const auto& row : scatter_exact) {
        json r = json::array();
        for (const auto& v : row) r.push_back(int_to_dec(v));
        sx.push_back(r);
    }
    json j;
    j["messages"] = msgs;
    j["m_f"] = int_to_dec(m_f);
    j["scatter_exact"] = sx;
    j["scatter"] = scatter;
    j["eigenvalues"] = dispersion.eigenvalues;
    j["dispersion"] = dispersion.dispersion;
    j["rank_used"] = dispersion.rank_used;
    j["verdict"] = verdict;
    j["cc_verdict"] = cc_verdict;
    j["counters"] = {{"ss", counters_json(ss_ops)},
                     {"fd", counters_json(fd_ops)},
                     {"sd", counters_json(sd_ops)},
                     {"cc", counters_json(cc_ops)}};
    j["timings_ms"] = {{"ss", ss_ms}, {"fd", fd_ms}, {"sd", sd_ms}, {"cc", cc_ms}};
    j["model_bits_to_cc"] = model_bits_to_cc;
    return j.dump();
}

World::World(const WorldConfig& cfg)
    : cfg_(cfg),
      rng_(cfg.seed),
      init_(cc_init(cfg.kappa, cfg.curve, cfg.dims, rng_, cfg.allow_insecure_kappa,
                    cfg.size_model, cfg.freshness_ms)),
      ss_(init_.params, init_.ss, cfg.ids.ss),
      fd_(init_.params, init_.fd, cfg.ids.fd,
          cfg.fd_offset_fault ? Int(cfg.dims.d) : Int(0)),
      sd_(init_.params, init_.sd, cfg.ids.sd, cfg.threshold),
      cc_(init_.params) {}

RoundTrace World::run_round(std::span<const DataSample> samples, const Adversary* adv) {
    const auto& pp = init_.params;
    if (samples.size() != pp.dims.n)
        throw Error(Errc::argument, "round needs exactly n samples");

    RoundTrace tr;
    auto ss0 = ss_.counters();
    auto fd0 = fd_.counters();
    auto sd0 = sd_.counters();
    auto cc0 = cc_.counters();

    using clock = std::chrono::steady_clock;
    auto ms_since = [](clock::time_point t0) {
        return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    };
    auto pass = [&](const WireMessage& w) -> std::vector<WireMessage> {
        if (adv && *adv) return (*adv)(w);
        return {w};
    };

    std::vector<EncryptedSample> inbox;
    for (const auto& sample : samples) {
        now_ms_ += cfg_.sample_interval_ms;
        auto t0 = clock::now();
        auto msg = at_entity("ss", [&] { return ss_.produce(sample, now_ms_, rng_); });
        tr.ss_ms += ms_since(t0);
        for (const auto& w : pass(wire_encode(pp, msg))) {
            auto parsed = at_entity("fd", [&] { return parse_sample(pp, w); });
            inbox.push_back(parsed);
            tr.messages.push_back({"sample", cfg_.ids.ss, cfg_.ids.fd, parsed.ts_ms,
                                   w.body.size()});
        }
    }

    auto t0 = clock::now();
    auto agg = at_entity("fd", [&] { return fd_.aggregate(inbox, now_ms_); });
    tr.fd_ms = ms_since(t0);

    std::optional<FogAnalyzer::Analysis> analysis;
    for (const auto& w : pass(wire_encode(pp, agg))) {
        auto parsed = at_entity("sd", [&] { return parse_aggregate(pp, w); });
        tr.messages.push_back({"aggregate", cfg_.ids.fd, cfg_.ids.sd, parsed.ts_ms,
                               w.body.size()});
        t0 = clock::now();
        analysis = at_entity("sd", [&] { return sd_.analyze(parsed, now_ms_); });
        tr.sd_ms += ms_since(t0);
    }
    if (!analysis) throw Error(Errc::argument, "sd: aggregation result was dropped in flight");

    for (const auto& w : pass(wire_encode(pp, analysis->report))) {
        auto parsed = at_entity("cc", [&] { return parse_report(pp, w); });
        tr.messages.push_back({"report", cfg_.ids.sd, "CC", parsed.ts_ms, w.body.size()});
        t0 = clock::now();
        tr.cc_verdict = at_entity("cc", [&] { return cc_.receive(parsed, now_ms_); });
        tr.cc_ms += ms_since(t0);
    }

    tr.m_f = analysis->m_f;
    tr.scatter_exact = analysis->scatter.s;
    tr.scatter = analysis->scatter.m;
    tr.dispersion = analysis->dispersion;
    tr.verdict = analysis->report.verdict;
    tr.ss_ops = counters_delta(ss_.counters(), ss0);
    tr.fd_ops = counters_delta(fd_.counters(), fd0);
    tr.sd_ops = counters_delta(sd_.counters(), sd0);
    tr.cc_ops = counters_delta(cc_.counters(), cc0);
    tr.model_bits_to_cc = pp.size_model.report_bits + pp.size_model.sd_bits +
                          pp.size_model.ts_bits + pp.size_model.sig_bits;
    return tr;
}

}  // namespace fsd::protocol
