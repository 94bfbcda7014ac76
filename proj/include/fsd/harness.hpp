#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "fsd/detection.hpp"
#include "fsd/protocol.hpp"

namespace fsd::harness {

// CSV ingestion: selected columns are affinely quantized,
// q = round((value - offset) * scale), and must land in [0, d].
struct IngestSpec {
    std::string path;
    std::vector<std::string> columns;
    double scale = 1.0;
    double offset = 0.0;
    uint64_t d = 4095;
    uint32_t window = 10;
    uint32_t stride = 10;
};

std::vector<DataSample> ingest_rows(const IngestSpec& spec);
std::vector<SampleSet> window_sets(std::span<const DataSample> rows, uint32_t window,
                                   uint32_t stride);
std::vector<SampleSet> ingest(const IngestSpec& spec);

// Per-dimension slow sinusoid plus white noise, quantized into [0, d];
// stands in for steady-condition physiological data.
struct SynthConfig {
    uint32_t l = 2;
    uint64_t d = 4095;
    double mid_frac = 0.5;
    double amplitude_frac = 0.25;
    double period = 2000.0;
    double noise_frac = 0.002;
};

std::vector<DataSample> synth_rows(const SynthConfig& cfg, size_t count, Rng& rng);

// Builds `count` sets of `n` consecutive rows: non-overlapping windows when
// the data suffices, otherwise the stride shrinks (down to 1) to fit.
// Throws Errc::argument when even overlapping windows cannot supply them.
std::vector<SampleSet> sets_from_rows(std::span<const DataSample> rows, uint32_t n,
                                      size_t count);

// ---------------------------------------------------------------------------
// Experiments. All emit CSV with a header row; integers in decimal, reals
// with 6 significant digits. Deterministic for a given seed.

std::string experiment_capacity(std::span<const uint32_t> l_list,
                                std::span<const uint64_t> d_list,
                                std::span<const uint32_t> bits_list, bool strict = false);

struct EffectivenessSpec {
    std::vector<double> alpha_sq_list;
    std::vector<uint32_t> n_list;
    double threshold = 0.0;
    double inject_fraction = 0.2;
    uint32_t sets_per_cell = 1000;
};

std::string experiment_effectiveness(std::span<const DataSample> rows, uint64_t d,
                                     const EffectivenessSpec& spec, uint64_t seed);

std::string experiment_commcost(uint32_t n_min, uint32_t n_max,
                                const protocol::SizeModel& model);

detect::Threshold train_from_rows(std::span<const DataSample> rows, uint64_t d,
                                  double alpha_sq, double target_tpr,
                                  double inject_fraction, uint32_t n, uint32_t sets,
                                  uint64_t seed);

// ---------------------------------------------------------------------------
// Protocol simulation driver.

struct SimConfig {
    protocol::WorldConfig world;
    uint32_t rounds = 10;
    double inject_alpha_sq = 0.05;
    double inject_fraction = 0.0;  // fraction of rounds fed deviated samples
    std::string adversary = "none";  // none | bitflip | replay | corrupt-aggregate
    SynthConfig synth;
    std::optional<IngestSpec> ingest;
};

struct SimResult {
    std::string trace_jsonl;   // one line per completed round
    std::string summary_json;
    bool tamper_alarm = false;
};

SimResult simulate(const SimConfig& cfg);

}  // namespace fsd::harness
