#include "fsd/harness.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fsd::harness {

namespace {

using nlohmann::json;

std::string fmt_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur.push_back(ch);
        }
    }
    out.push_back(cur);
    for (auto& f : out) {
        size_t b = f.find_first_not_of(" \t\"");
        size_t e = f.find_last_not_of(" \t\"");
        f = (b == std::string::npos) ? std::string() : f.substr(b, e - b + 1);
    }
    return out;
}

uint64_t mix_seed(uint64_t seed, uint64_t a, uint64_t b) {
    uint64_t x = seed ^ (a * 0x9e3779b97f4a7c15ULL) ^ (b * 0xc2b2ae3d27d4eb4fULL);
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdULL;
    x ^= x >> 33;
    return x;
}

}  // namespace

std::vector<DataSample> ingest_rows(const IngestSpec& spec) {
    if (spec.columns.empty()) throw Error(Errc::argument, "no columns selected");
    std::ifstream in(spec.path);
    if (!in) throw Error(Errc::io, "cannot open " + spec.path);

    std::string line;
    if (!std::getline(in, line)) throw Error(Errc::argument, "empty CSV file");
    auto header = split_csv_line(line);
    std::vector<size_t> idx;
    for (const auto& want : spec.columns) {
        auto it = std::find(header.begin(), header.end(), want);
        if (it == header.end())
            throw Error(Errc::argument, "column not found in CSV header: " + want);
        idx.push_back(static_cast<size_t>(it - header.begin()));
    }

    std::vector<DataSample> rows;
    std::vector<std::string> overflow_notes;
    size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        DataSample s;
        s.v.reserve(idx.size());
        for (size_t j : idx) {
            if (j >= fields.size())
                throw Error(Errc::parse,
                            "row " + std::to_string(line_no) + ": too few fields");
            double raw;
            try {
                raw = std::stod(fields[j]);
            } catch (const std::exception&) {
                throw Error(Errc::parse, "row " + std::to_string(line_no) +
                                             ": not a number: " + fields[j]);
            }
            double q = std::round((raw - spec.offset) * spec.scale);
            if (q < 0 || q > static_cast<double>(spec.d)) {
                if (overflow_notes.size() < 8)
                    overflow_notes.push_back("row " + std::to_string(line_no) + ": " +
                                             fields[j] + " -> " + fmt_real(q));
                s.v.push_back(0);
                continue;
            }
            s.v.push_back(static_cast<int64_t>(q));
        }
        rows.push_back(std::move(s));
    }
    if (!overflow_notes.empty()) {
        std::string msg = "quantization outside [0, d] for " +
                          std::to_string(overflow_notes.size()) + "+ values:";
        for (const auto& n : overflow_notes) msg += " " + n + ";";
        throw Error(Errc::range, msg);
    }
    return rows;
}

std::vector<SampleSet> window_sets(std::span<const DataSample> rows, uint32_t window,
                                   uint32_t stride) {
    if (window < 1 || stride < 1) throw Error(Errc::argument, "window and stride must be >= 1");
    if (rows.size() < window)
        throw Error(Errc::argument, "file too short for a single window");
    std::vector<SampleSet> sets;
    for (size_t start = 0; start + window <= rows.size(); start += stride)
        sets.emplace_back(rows.begin() + start, rows.begin() + start + window);
    return sets;
}

std::vector<SampleSet> ingest(const IngestSpec& spec) {
    auto rows = ingest_rows(spec);
    return window_sets(rows, spec.window, spec.stride);
}

std::vector<DataSample> synth_rows(const SynthConfig& cfg, size_t count, Rng& rng) {
    if (cfg.l < 1 || cfg.d < 1) throw Error(Errc::argument, "invalid synthetic dims");
    std::vector<DataSample> rows(count);
    double d = static_cast<double>(cfg.d);
    double mid = cfg.mid_frac * d;
    double amp = cfg.amplitude_frac * d;
    double sigma = cfg.noise_frac * d;
    constexpr double kTau = 6.283185307179586;
    for (size_t t = 0; t < count; ++t) {
        rows[t].v.resize(cfg.l);
        for (uint32_t j = 0; j < cfg.l; ++j) {
            // per-dimension phase shift keeps the channels distinct
            double phase = kTau * static_cast<double>(j) / static_cast<double>(cfg.l + 1);
            double v = mid + amp * std::sin(kTau * static_cast<double>(t) / cfg.period + phase) +
                       rng.normal(0.0, sigma);
            v = std::clamp(std::round(v), 0.0, d);
            rows[t].v[j] = static_cast<int64_t>(v);
        }
    }
    return rows;
}

std::vector<SampleSet> sets_from_rows(std::span<const DataSample> rows, uint32_t n,
                                      size_t count) {
    if (n < 2) throw Error(Errc::argument, "sets need n >= 2");
    if (count < 1) throw Error(Errc::argument, "need at least one set");
    if (rows.size() < n)
        throw Error(Errc::argument,
                    "not enough rows for one set of " + std::to_string(n) +
                        "; supply more data or reduce N");
    size_t nonoverlap = rows.size() / n;
    size_t stride;
    if (nonoverlap >= count) {
        stride = n;
    } else if (count == 1) {
        stride = n;
    } else {
        stride = std::max<size_t>(1, (rows.size() - n) / (count - 1));
        size_t available = (rows.size() - n) / stride + 1;
        if (available < count)
            throw Error(Errc::argument,
                        "not enough rows for " + std::to_string(count) +
                            " sets even with overlapping windows; reduce the set count or N");
    }
    std::vector<SampleSet> sets;
    sets.reserve(count);
    for (size_t i = 0, start = 0; i < count; ++i, start += stride)
        sets.emplace_back(rows.begin() + start, rows.begin() + start + n);
    return sets;
}

std::string experiment_capacity(std::span<const uint32_t> l_list,
                                std::span<const uint64_t> d_list,
                                std::span<const uint32_t> bits_list, bool strict) {
    if (l_list.empty() || d_list.empty() || bits_list.empty())
        throw Error(Errc::argument, "capacity sweep needs non-empty ranges");
    std::ostringstream out;
    out << "l,d,bits,n_max\n";
    for (uint32_t bits : bits_list)
        for (uint32_t l : l_list)
            for (uint64_t d : d_list)
                out << l << ',' << d << ',' << bits << ','
                    << packing::max_samples(l, d, bits, strict) << '\n';
    return out.str();
}

std::string experiment_effectiveness(std::span<const DataSample> rows, uint64_t d,
                                     const EffectivenessSpec& spec, uint64_t seed) {
    if (spec.alpha_sq_list.empty() || spec.n_list.empty())
        throw Error(Errc::argument, "effectiveness sweep needs non-empty grids");
    std::ostringstream out;
    out << "alpha_sq,N,threshold,tpr,fpr,seed\n";
    detect::Threshold th{spec.threshold, 0.0, 0, 0.0};
    for (size_t ni = 0; ni < spec.n_list.size(); ++ni) {
        auto sets = sets_from_rows(rows, spec.n_list[ni], spec.sets_per_cell);
        for (size_t ai = 0; ai < spec.alpha_sq_list.size(); ++ai) {
            SeededRng rng(mix_seed(seed, ni + 1, ai + 1));
            auto counts = detect::evaluate(sets, d, th, spec.alpha_sq_list[ai],
                                           spec.inject_fraction, rng);
            out << fmt_real(spec.alpha_sq_list[ai]) << ',' << spec.n_list[ni] << ','
                << fmt_real(spec.threshold) << ',' << fmt_real(counts.tpr()) << ','
                << fmt_real(counts.fpr()) << ',' << seed << '\n';
        }
    }
    return out.str();
}

std::string experiment_commcost(uint32_t n_min, uint32_t n_max,
                                const protocol::SizeModel& model) {
    if (n_min < 1 || n_max < n_min) throw Error(Errc::argument, "bad N range");
    std::ostringstream out;
    out << "n,s_trad_bits,s_proposed_bits\n";
    uint64_t s_prop = static_cast<uint64_t>(model.report_bits) + model.sd_bits +
                      model.ts_bits + model.sig_bits;
    for (uint32_t n = n_min; n <= n_max; ++n) {
        uint64_t s_trad = static_cast<uint64_t>(n) * model.aes_block_bits + model.ss_bits +
                          model.ts_bits + model.sig_bits;
        out << n << ',' << s_trad << ',' << s_prop << '\n';
    }
    return out.str();
}

detect::Threshold train_from_rows(std::span<const DataSample> rows, uint64_t d,
                                  double alpha_sq, double target_tpr,
                                  double inject_fraction, uint32_t n, uint32_t sets,
                                  uint64_t seed) {
    auto training = sets_from_rows(rows, n, sets);
    SeededRng rng(mix_seed(seed, 0x7A11, 0));
    return detect::train_threshold(training, d, alpha_sq, target_tpr, inject_fraction, rng);
}

SimResult simulate(const SimConfig& cfg) {
    protocol::WorldConfig wc = cfg.world;
    if (cfg.adversary == "corrupt-aggregate") wc.fd_offset_fault = true;
    protocol::World world(wc);
    const auto& dims = world.params().dims;

    size_t rows_needed = static_cast<size_t>(cfg.rounds) * dims.n;
    std::vector<DataSample> rows;
    if (cfg.ingest) {
        rows = ingest_rows(*cfg.ingest);
        if (rows.size() < rows_needed)
            throw Error(Errc::argument, "ingested data too short for the requested rounds");
    } else {
        SynthConfig sc = cfg.synth;
        sc.l = dims.l;
        sc.d = dims.d;
        SeededRng synth_rng(mix_seed(wc.seed, 0x5157, 1));
        rows = synth_rows(sc, rows_needed, synth_rng);
    }

    SeededRng aux_rng(mix_seed(wc.seed, 0xADD5, 2));
    std::ostringstream traces;
    json rejections = json::array();
    uint64_t normal = 0, faulty = 0, completed = 0;
    bool tamper = false;
    std::optional<protocol::WireMessage> replay_capture;

    for (uint32_t r = 0; r < cfg.rounds; ++r) {
        std::vector<DataSample> samples(rows.begin() + static_cast<long>(r) * dims.n,
                                        rows.begin() + static_cast<long>(r + 1) * dims.n);
        bool injected =
            cfg.inject_fraction > 0 &&
            aux_rng.u64_below(1000000) <
                static_cast<uint64_t>(cfg.inject_fraction * 1000000.0);
        if (injected)
            for (auto& s : samples)
                s = detect::inject_deviation(s, cfg.inject_alpha_sq, dims.d, aux_rng);

        protocol::Adversary adv;
        size_t flip_target = 0, msg_index = 0;
        if (cfg.adversary == "bitflip") {
            flip_target = aux_rng.u64_below(dims.n + 2);
            adv = [&](const protocol::WireMessage& w) {
                std::vector<protocol::WireMessage> out{w};
                if (msg_index++ == flip_target) {
                    size_t bit = aux_rng.u64_below(out[0].body.size() * 8);
                    out[0].body[bit / 8] ^= static_cast<uint8_t>(1u << (bit % 8));
                }
                return out;
            };
        } else if (cfg.adversary == "replay") {
            adv = [&](const protocol::WireMessage& w) {
                std::vector<protocol::WireMessage> out;
                if (replay_capture && w.kind == protocol::WireMessage::Kind::sample &&
                    msg_index++ == 0) {
                    out.push_back(*replay_capture);  // stale duplicate first
                }
                out.push_back(w);
                if (!replay_capture && w.kind == protocol::WireMessage::Kind::sample)
                    replay_capture = w;
                return out;
            };
        }

        try {
            auto trace = world.run_round(samples, adv ? &adv : nullptr);
            traces << trace.to_json_line() << '\n';
            ++completed;
            (trace.cc_verdict == 1 ? normal : faulty) += 1;
        } catch (const Error& e) {
            rejections.push_back({{"round", r},
                                  {"code", errc_name(e.code())},
                                  {"message", e.what()}});
            if (e.code() == Errc::tamper) tamper = true;
        }
        if (cfg.adversary == "replay")
            world.advance_clock(2 * wc.freshness_ms + 1000);
    }

    json summary;
    summary["rounds_requested"] = cfg.rounds;
    summary["rounds_completed"] = completed;
    summary["verdict_normal"] = normal;
    summary["verdict_faulty"] = faulty;
    summary["rejections"] = rejections;
    summary["tamper_alarm"] = tamper;
    summary["adversary"] = cfg.adversary;
    summary["config"] = json::parse(wc.to_json());

    SimResult res;
    res.trace_jsonl = traces.str();
    res.summary_json = summary.dump(2);
    res.tamper_alarm = tamper;
    return res;
}

}  // namespace fsd::harness
