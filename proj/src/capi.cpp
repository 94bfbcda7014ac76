#include "fsd.h"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <fstream>

#include "fsd/harness.hpp"

namespace {

using nlohmann::json;
using namespace fsd;

thread_local std::string g_last_error;

fsd_status map_errc(Errc e) {
    switch (e) {
        case Errc::ok: return FSD_OK;
        case Errc::argument: return FSD_ERR_ARGUMENT;
        case Errc::range: return FSD_ERR_RANGE;
        case Errc::capacity: return FSD_ERR_CAPACITY;
        case Errc::randomness: return FSD_ERR_RANDOMNESS;
        case Errc::ciphertext: return FSD_ERR_CIPHERTEXT;
        case Errc::keygen: return FSD_ERR_KEYGEN;
        case Errc::verify: return FSD_ERR_VERIFY;
        case Errc::replay: return FSD_ERR_REPLAY;
        case Errc::tamper: return FSD_ERR_TAMPER;
        case Errc::parse: return FSD_ERR_PARSE;
        case Errc::io: return FSD_ERR_IO;
        case Errc::training: return FSD_ERR_TRAINING;
        case Errc::internal: return FSD_ERR_INTERNAL;
    }
    return FSD_ERR_INTERNAL;
}

template <typename F>
fsd_status wrap(F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        g_last_error = e.what();
        return map_errc(e.code());
    } catch (const json::exception& e) {
        g_last_error = std::string("config: ") + e.what();
        return FSD_ERR_PARSE;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return FSD_ERR_INTERNAL;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

fsd_status require(bool cond, const char* msg) {
    if (!cond) {
        g_last_error = msg;
        return FSD_ERR_ARGUMENT;
    }
    return FSD_OK;
}

json parse_config(const char* config_json) {
    if (config_json == nullptr || *config_json == '\0') return json::object();
    json j = json::parse(config_json, nullptr, false);
    if (j.is_discarded()) throw Error(Errc::parse, "config is not valid JSON");
    return j;
}

harness::IngestSpec ingest_spec_from(const json& j) {
    harness::IngestSpec spec;
    spec.path = j.at("path").get<std::string>();
    spec.columns = j.at("columns").get<std::vector<std::string>>();
    spec.scale = j.value("scale", spec.scale);
    spec.offset = j.value("offset", spec.offset);
    spec.d = j.value("d", spec.d);
    spec.window = j.value("window", spec.window);
    spec.stride = j.value("stride", spec.stride);
    return spec;
}

harness::SynthConfig synth_config_from(const json& j) {
    harness::SynthConfig cfg;
    cfg.l = j.value("l", cfg.l);
    cfg.d = j.value("d", cfg.d);
    cfg.mid_frac = j.value("mid_frac", cfg.mid_frac);
    cfg.amplitude_frac = j.value("amplitude_frac", cfg.amplitude_frac);
    cfg.period = j.value("period", cfg.period);
    cfg.noise_frac = j.value("noise_frac", cfg.noise_frac);
    return cfg;
}

// Data rows for train/evaluate: an ingest section wins, synthetic otherwise.
std::vector<DataSample> rows_from_config(const json& cfg, size_t rows_needed,
                                         uint64_t seed, uint64_t* d_out) {
    if (cfg.contains("ingest")) {
        auto spec = ingest_spec_from(cfg.at("ingest"));
        *d_out = spec.d;
        return harness::ingest_rows(spec);
    }
    auto synth = synth_config_from(cfg.value("synth", json::object()));
    *d_out = synth.d;
    size_t count = std::max<size_t>(rows_needed, cfg.value("synth", json::object())
                                                     .value("rows", rows_needed));
    SeededRng rng(seed ^ 0x53594e54ULL);
    return harness::synth_rows(synth, count, rng);
}

}  // namespace

struct fsd_paillier {
    paillier::Keypair kp;
};

struct fsd_world {
    protocol::World world;
    explicit fsd_world(const protocol::WorldConfig& cfg) : world(cfg) {}
};

extern "C" {

const char* fsd_version(void) { return "0.1.0"; }

const char* fsd_last_error(void) { return g_last_error.c_str(); }

void fsd_string_free(char* s) { std::free(s); }

fsd_status fsd_paillier_keygen(unsigned kappa_bits, int allow_insecure,
                               unsigned long long seed, int use_seed,
                               fsd_paillier** out) {
    if (auto e = require(out != nullptr, "null output pointer")) return e;
    return wrap([&] {
        paillier::Keypair kp = [&] {
            if (use_seed) {
                SeededRng rng(seed);
                return paillier::keygen(kappa_bits, rng, allow_insecure != 0);
            }
            SystemRng rng;
            return paillier::keygen(kappa_bits, rng, allow_insecure != 0);
        }();
        *out = new fsd_paillier{std::move(kp)};
        return FSD_OK;
    });
}

fsd_status fsd_paillier_from_primes(const char* p_dec, const char* q_dec,
                                    fsd_paillier** out) {
    if (auto e = require(out && p_dec && q_dec, "null argument")) return e;
    return wrap([&] {
        *out = new fsd_paillier{
            paillier::keypair_from_primes(int_from_dec(p_dec), int_from_dec(q_dec))};
        return FSD_OK;
    });
}

void fsd_paillier_free(fsd_paillier* kp) { delete kp; }

fsd_status fsd_paillier_public_json(const fsd_paillier* kp, char** out_json) {
    if (auto e = require(kp && out_json, "null argument")) return e;
    return wrap([&] {
        *out_json = dup_string(kp->kp.pub.to_json());
        return FSD_OK;
    });
}

fsd_status fsd_paillier_private_json(const fsd_paillier* kp, char** out_json) {
    if (auto e = require(kp && out_json, "null argument")) return e;
    return wrap([&] {
        *out_json = dup_string(kp->kp.priv.to_json());
        return FSD_OK;
    });
}

fsd_status fsd_paillier_encrypt(const fsd_paillier* kp, const char* m_dec,
                                const char* r_dec, char** out_ct_dec) {
    if (auto e = require(kp && m_dec && out_ct_dec, "null argument")) return e;
    return wrap([&] {
        paillier::Ciphertext ct;
        if (r_dec) {
            ct = paillier::encrypt_with(kp->kp.pub, int_from_dec(m_dec), int_from_dec(r_dec));
        } else {
            SystemRng rng;
            ct = paillier::encrypt(kp->kp.pub, int_from_dec(m_dec), rng);
        }
        *out_ct_dec = dup_string(int_to_dec(ct.value));
        return FSD_OK;
    });
}

fsd_status fsd_paillier_decrypt(const fsd_paillier* kp, const char* ct_dec,
                                char** out_m_dec) {
    if (auto e = require(kp && ct_dec && out_m_dec, "null argument")) return e;
    return wrap([&] {
        Int m = paillier::decrypt(kp->kp.priv, kp->kp.pub, {int_from_dec(ct_dec)});
        *out_m_dec = dup_string(int_to_dec(m));
        return FSD_OK;
    });
}

fsd_status fsd_paillier_add(const fsd_paillier* kp, const char* c1_dec,
                            const char* c2_dec, char** out_ct_dec) {
    if (auto e = require(kp && c1_dec && c2_dec && out_ct_dec, "null argument")) return e;
    return wrap([&] {
        auto ct = paillier::ct_mul(kp->kp.pub, {int_from_dec(c1_dec)}, {int_from_dec(c2_dec)});
        *out_ct_dec = dup_string(int_to_dec(ct.value));
        return FSD_OK;
    });
}

fsd_status fsd_paillier_scale(const fsd_paillier* kp, const char* c_dec,
                              const char* k_dec, char** out_ct_dec) {
    if (auto e = require(kp && c_dec && k_dec && out_ct_dec, "null argument")) return e;
    return wrap([&] {
        auto ct = paillier::ct_pow(kp->kp.pub, {int_from_dec(c_dec)}, int_from_dec(k_dec));
        *out_ct_dec = dup_string(int_to_dec(ct.value));
        return FSD_OK;
    });
}

fsd_status fsd_paillier_subtract(const fsd_paillier* kp, const char* c1_dec,
                                 const char* c2_dec, char** out_ct_dec) {
    if (auto e = require(kp && c1_dec && c2_dec && out_ct_dec, "null argument")) return e;
    return wrap([&] {
        auto ct = paillier::ct_div(kp->kp.pub, {int_from_dec(c1_dec)}, {int_from_dec(c2_dec)});
        *out_ct_dec = dup_string(int_to_dec(ct.value));
        return FSD_OK;
    });
}

fsd_status fsd_world_create(const char* config_json, fsd_world** out) {
    if (auto e = require(out != nullptr, "null output pointer")) return e;
    return wrap([&] {
        auto cfg = protocol::WorldConfig::from_json(
            config_json && *config_json ? config_json : "{}");
        *out = new fsd_world(cfg);
        return FSD_OK;
    });
}

void fsd_world_free(fsd_world* w) { delete w; }

fsd_status fsd_world_params_json(const fsd_world* w, char** out_json) {
    if (auto e = require(w && out_json, "null argument")) return e;
    return wrap([&] {
        *out_json = dup_string(w->world.params().to_json());
        return FSD_OK;
    });
}

fsd_status fsd_world_run_round(fsd_world* w, const char* samples_json,
                               char** out_trace_json) {
    if (auto e = require(w && samples_json && out_trace_json, "null argument")) return e;
    return wrap([&] {
        json j = json::parse(samples_json, nullptr, false);
        if (j.is_discarded() || !j.is_array())
            throw Error(Errc::parse, "samples must be a JSON array of rows");
        std::vector<DataSample> samples;
        for (const auto& row : j) {
            if (!row.is_array()) throw Error(Errc::parse, "each sample must be an array");
            DataSample s;
            for (const auto& v : row) s.v.push_back(v.get<int64_t>());
            samples.push_back(std::move(s));
        }
        auto trace = w->world.run_round(samples);
        *out_trace_json = dup_string(trace.to_json_line());
        return FSD_OK;
    });
}

fsd_status fsd_keygen_json(const char* config_json, char** out_json) {
    if (auto e = require(out_json != nullptr, "null output pointer")) return e;
    return wrap([&] {
        json cfg = parse_config(config_json);
        auto wc = protocol::WorldConfig::from_json(cfg.dump());
        protocol::InitResult init = [&] {
            if (cfg.contains("seed")) {
                SeededRng rng(wc.seed);
                return protocol::cc_init(wc.kappa, wc.curve, wc.dims, rng,
                                         wc.allow_insecure_kappa, wc.size_model,
                                         wc.freshness_ms);
            }
            SystemRng rng;
            return protocol::cc_init(wc.kappa, wc.curve, wc.dims, rng,
                                     wc.allow_insecure_kappa, wc.size_model,
                                     wc.freshness_ms);
        }();
        json out;
        out["public_params"] = json::parse(init.params.to_json());
        out["secrets"] = {
            {"sd",
             {{"paillier", json::parse(init.sd.paillier_sk.to_json())},
              {"x_s", int_to_dec(init.sd.xs.x)}}},
            {"fd", {{"x_f", int_to_dec(init.fd.xf.x)}}},
            {"ss", {{"x_u", int_to_dec(init.ss.xu.x)}}},
        };
        *out_json = dup_string(out.dump(2));
        return FSD_OK;
    });
}

fsd_status fsd_capacity_csv(const char* config_json, char** out_csv) {
    if (auto e = require(out_csv != nullptr, "null output pointer")) return e;
    return wrap([&] {
        json cfg = parse_config(config_json).value("capacity", json::object());
        auto l_list = cfg.value("l_list", std::vector<uint32_t>{1, 2, 3, 5, 10});
        auto d_list = cfg.value("d_list", std::vector<uint64_t>{255, 4095, 65535});
        auto bits_list = cfg.value("bits_list", std::vector<uint32_t>{2048, 4096});
        bool strict = cfg.value("strict", false);
        *out_csv = dup_string(harness::experiment_capacity(l_list, d_list, bits_list, strict));
        return FSD_OK;
    });
}

fsd_status fsd_ingest_check_json(const char* config_json, char** out_json) {
    if (auto e = require(out_json != nullptr, "null output pointer")) return e;
    return wrap([&] {
        json cfg = parse_config(config_json);
        if (!cfg.contains("ingest"))
            throw Error(Errc::argument, "config needs an \"ingest\" section");
        auto spec = ingest_spec_from(cfg.at("ingest"));
        auto rows = harness::ingest_rows(spec);
        auto sets = harness::window_sets(rows, spec.window, spec.stride);

        size_t l = rows.empty() ? 0 : rows[0].v.size();
        std::vector<int64_t> mn(l, INT64_MAX), mx(l, INT64_MIN);
        for (const auto& r : rows)
            for (size_t j = 0; j < l; ++j) {
                mn[j] = std::min(mn[j], r.v[j]);
                mx[j] = std::max(mx[j], r.v[j]);
            }
        json out;
        out["rows"] = rows.size();
        out["sets"] = sets.size();
        out["columns"] = spec.columns;
        out["quantized_min"] = mn;
        out["quantized_max"] = mx;
        out["d"] = spec.d;
        *out_json = dup_string(out.dump(2));
        return FSD_OK;
    });
}

fsd_status fsd_train_json(const char* config_json, char** out_json) {
    if (auto e = require(out_json != nullptr, "null output pointer")) return e;
    return wrap([&] {
        json cfg = parse_config(config_json);
        json tc = cfg.value("train", json::object());
        double alpha_sq = tc.value("alpha_sq", 0.05);
        double target_tpr = tc.value("target_tpr", 0.95);
        double inject_fraction = tc.value("inject_fraction", 0.2);
        uint32_t n = tc.value("N", 10u);
        uint32_t sets = tc.value("sets", 1000u);
        uint64_t seed = cfg.value("seed", 1ull);

        uint64_t d = 0;
        auto rows = rows_from_config(cfg, static_cast<size_t>(sets) * n, seed, &d);
        auto th = harness::train_from_rows(rows, d, alpha_sq, target_tpr, inject_fraction,
                                           n, sets, seed);
        json out;
        out["value"] = th.value;
        out["alpha_sq"] = th.alpha_sq;
        out["N"] = th.n;
        out["target_tpr"] = th.target_tpr;
        *out_json = dup_string(out.dump(2));
        return FSD_OK;
    });
}

fsd_status fsd_evaluate_csv(const char* config_json, char** out_csv) {
    if (auto e = require(out_csv != nullptr, "null output pointer")) return e;
    return wrap([&] {
        json cfg = parse_config(config_json);
        json ec = cfg.value("evaluate", json::object());
        harness::EffectivenessSpec spec;
        spec.alpha_sq_list =
            ec.value("alpha_sq_list", std::vector<double>{0.04, 0.045, 0.05, 0.055, 0.06});
        spec.n_list = ec.value("n_list", std::vector<uint32_t>{10, 15, 20, 25});
        if (!ec.contains("threshold"))
            throw Error(Errc::argument, "evaluate config needs a threshold");
        spec.threshold = ec.at("threshold").get<double>();
        spec.inject_fraction = ec.value("inject_fraction", 0.2);
        spec.sets_per_cell = ec.value("sets", 1000u);
        uint64_t seed = cfg.value("seed", 1ull);

        uint32_t n_max = *std::max_element(spec.n_list.begin(), spec.n_list.end());
        uint64_t d = 0;
        auto rows = rows_from_config(cfg, static_cast<size_t>(spec.sets_per_cell) * n_max,
                                     seed, &d);
        *out_csv = dup_string(harness::experiment_effectiveness(rows, d, spec, seed));
        return FSD_OK;
    });
}

fsd_status fsd_commcost_csv(const char* config_json, char** out_csv) {
    if (auto e = require(out_csv != nullptr, "null output pointer")) return e;
    return wrap([&] {
        json cfg = parse_config(config_json);
        auto wc = protocol::WorldConfig::from_json(cfg.dump());
        json cc = cfg.value("commcost", json::object());
        uint32_t n_min = cc.value("n_min", 1u);
        uint32_t n_max = cc.value("n_max", 100u);
        *out_csv = dup_string(harness::experiment_commcost(n_min, n_max, wc.size_model));
        return FSD_OK;
    });
}

fsd_status fsd_simulate(const char* config_json, const char* trace_path,
                        char** out_summary_json) {
    if (auto e = require(out_summary_json != nullptr, "null output pointer")) return e;
    return wrap([&] {
        json cfg = parse_config(config_json);
        harness::SimConfig sim;
        sim.world = protocol::WorldConfig::from_json(cfg.dump());
        json sc = cfg.value("simulate", json::object());
        sim.rounds = sc.value("rounds", sim.rounds);
        sim.inject_alpha_sq = sc.value("inject_alpha_sq", sim.inject_alpha_sq);
        sim.inject_fraction = sc.value("inject_fraction", sim.inject_fraction);
        sim.adversary = sc.value("adversary", sim.adversary);
        if (cfg.contains("synth")) sim.synth = synth_config_from(cfg.at("synth"));
        if (cfg.contains("ingest")) sim.ingest = ingest_spec_from(cfg.at("ingest"));

        auto res = harness::simulate(sim);
        if (trace_path != nullptr && *trace_path != '\0') {
            std::ofstream out(trace_path);
            if (!out) throw Error(Errc::io, std::string("cannot write ") + trace_path);
            out << res.trace_jsonl;
        }
        *out_summary_json = dup_string(res.summary_json);
        if (res.tamper_alarm) {
            g_last_error = "tamper alarm raised during simulation";
            return FSD_ERR_TAMPER;
        }
        return FSD_OK;
    });
}

}  // extern "C"
