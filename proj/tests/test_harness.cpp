#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "fsd/harness.hpp"

using namespace fsd;
using namespace fsd::harness;

namespace {

bool throws_code(Errc want, const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code() == want;
    }
    return false;
}

struct TempCsv {
    std::string path;
    explicit TempCsv(const std::string& content) {
        static int counter = 0;
        path = "/tmp/fsd_test_" + std::to_string(::getpid()) + "_" +
               std::to_string(counter++) + ".csv";
        std::ofstream out(path);
        out << content;
    }
    ~TempCsv() { std::remove(path.c_str()); }
};

std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string line;
    while (std::getline(ss, line)) out.push_back(line);
    return out;
}

}  // namespace

TEST_CASE("ingest windows rows as specified") {
    std::string content = "t,a,b\n";
    for (int i = 0; i < 20; ++i)
        content += std::to_string(i) + "," + std::to_string(10 + i) + "," +
                   std::to_string(50 - i) + "\n";
    TempCsv file(content);

    IngestSpec spec;
    spec.path = file.path;
    spec.columns = {"a", "b"};
    spec.d = 4095;
    spec.window = 10;
    spec.stride = 10;

    auto sets = ingest(spec);
    CHECK(sets.size() == 2);
    CHECK(sets[0].size() == 10);
    CHECK(sets[0][0].v == std::vector<int64_t>{10, 50});
    CHECK(sets[1][9].v == std::vector<int64_t>{29, 31});

    spec.stride = 5;
    CHECK(ingest(spec).size() == 3);
}

TEST_CASE("constant files give zero scatter everywhere") {
    std::string content = "x,y\n";
    for (int i = 0; i < 12; ++i) content += "7,9\n";
    TempCsv file(content);
    IngestSpec spec;
    spec.path = file.path;
    spec.columns = {"x", "y"};
    spec.window = 4;
    spec.stride = 4;
    for (const auto& set : ingest(spec)) {
        auto m = detect::scatter_matrix(set);
        for (const auto& row : m)
            for (double v : row) CHECK(v == 0.0);
    }
}

TEST_CASE("quantization inverts within one step") {
    // raw sine sampled coarsely, quantized with scale 100 after offset -1
    std::string content = "v\n";
    std::vector<double> raw;
    for (int i = 0; i < 30; ++i) {
        double v = 1.0 + std::sin(i / 5.0);
        raw.push_back(v);
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.9f\n", v);
        content += buf;
    }
    TempCsv file(content);
    IngestSpec spec;
    spec.path = file.path;
    spec.columns = {"v"};
    spec.scale = 100.0;
    spec.offset = 0.0;
    spec.d = 300;
    auto rows = ingest_rows(spec);
    REQUIRE(rows.size() == raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        double back = static_cast<double>(rows[i].v[0]) / spec.scale + spec.offset;
        CHECK(std::fabs(back - raw[i]) <= 0.5 / spec.scale + 1e-12);
    }
}

TEST_CASE("ingest error paths") {
    IngestSpec missing;
    missing.path = "/tmp/does_not_exist_fsd.csv";
    missing.columns = {"a"};
    CHECK(throws_code(Errc::io, [&] { ingest_rows(missing); }));

    TempCsv file("a,b\n1,2\n3,4\n");
    IngestSpec spec;
    spec.path = file.path;
    spec.columns = {"z"};
    CHECK(throws_code(Errc::argument, [&] { ingest_rows(spec); }));

    spec.columns = {"a"};
    spec.window = 10;
    CHECK(throws_code(Errc::argument, [&] { ingest(spec); }));

    TempCsv overflow("a\n5\n-3\n");
    IngestSpec ospec;
    ospec.path = overflow.path;
    ospec.columns = {"a"};
    CHECK(throws_code(Errc::range, [&] { ingest_rows(ospec); }));

    TempCsv garbage("a\nxyz\n");
    IngestSpec gspec;
    gspec.path = garbage.path;
    gspec.columns = {"a"};
    CHECK(throws_code(Errc::parse, [&] { ingest_rows(gspec); }));
}

TEST_CASE("set construction falls back to overlapping windows") {
    SeededRng rng(101);
    SynthConfig sc;
    sc.l = 1;
    auto rows = synth_rows(sc, 100, rng);

    auto plenty = sets_from_rows(rows, 10, 10);
    CHECK(plenty.size() == 10);
    // non-overlapping when possible
    CHECK(plenty[1][0].v == rows[10].v);

    auto packed = sets_from_rows(rows, 10, 40);
    CHECK(packed.size() == 40);

    CHECK(throws_code(Errc::argument, [&] { sets_from_rows(rows, 101, 1); }));
    CHECK(throws_code(Errc::argument, [&] { sets_from_rows(rows, 10, 1000); }));
}

TEST_CASE("capacity table is monotone and favors the larger modulus") {
    std::vector<uint32_t> l_list{1, 2, 4};
    std::vector<uint64_t> d_list{255, 4095};
    std::vector<uint32_t> bits_list{2048, 4096};
    auto csv = experiment_capacity(l_list, d_list, bits_list);
    auto lines = lines_of(csv);
    REQUIRE(lines.size() == 1 + 2 * 3 * 2);
    CHECK(lines[0] == "l,d,bits,n_max");

    // parse into a lookup
    auto value = [&](uint32_t l, uint64_t d, uint32_t bits) -> uint64_t {
        std::string prefix = std::to_string(l) + "," + std::to_string(d) + "," +
                             std::to_string(bits) + ",";
        for (const auto& line : lines)
            if (line.rfind(prefix, 0) == 0) return std::stoull(line.substr(prefix.size()));
        FAIL("row not found");
        return 0;
    };
    for (uint32_t bits : bits_list) {
        CHECK(value(1, 255, bits) >= value(2, 255, bits));
        CHECK(value(2, 255, bits) >= value(4, 255, bits));
        CHECK(value(2, 255, bits) >= value(2, 4095, bits));
    }
    for (uint32_t l : l_list)
        for (uint64_t d : d_list) CHECK(value(l, d, 4096) > value(l, d, 2048));
}

TEST_CASE("communication cost rows match the fixed formulas") {
    protocol::SizeModel model;
    auto csv = experiment_commcost(1, 100, model);
    auto lines = lines_of(csv);
    REQUIRE(lines.size() == 101);
    CHECK(lines[0] == "n,s_trad_bits,s_proposed_bits");
    CHECK(lines[10] == "10,1490,220");
    CHECK(lines[1] == "1,338,220");

    // constant proposed size, trad slope of one AES block per sample
    uint64_t prev_trad = 0;
    for (size_t i = 1; i < lines.size(); ++i) {
        auto l = lines[i];
        auto c1 = l.find(','), c2 = l.rfind(',');
        uint64_t trad = std::stoull(l.substr(c1 + 1, c2 - c1 - 1));
        CHECK(l.substr(c2 + 1) == "220");
        if (i > 1) CHECK(trad - prev_trad == 128);
        prev_trad = trad;
    }
}

TEST_CASE("effectiveness grid separates clean from deviated data") {
    SeededRng rng(102);
    SynthConfig sc;
    sc.l = 2;
    sc.d = 4095;
    sc.noise_frac = 0.001;
    auto rows = synth_rows(sc, 4000, rng);

    EffectivenessSpec spec;
    spec.alpha_sq_list = {0.05};
    spec.n_list = {10};
    spec.threshold = 1e300;  // nothing can exceed it
    spec.sets_per_cell = 200;
    auto csv = experiment_effectiveness(rows, sc.d, spec, 7);
    auto lines = lines_of(csv);
    REQUIRE(lines.size() == 2);
    CHECK(lines[0] == "alpha_sq,N,threshold,tpr,fpr,seed");
    CHECK(lines[1].find(",0,0,7") != std::string::npos);  // tpr=0, fpr=0

    // a trained threshold separates the populations
    auto th = train_from_rows(rows, sc.d, 0.05, 0.95, 0.2, 10, 400, 7);
    CHECK(th.value > 0);
    spec.threshold = th.value;
    auto csv2 = experiment_effectiveness(rows, sc.d, spec, 8);
    auto cell = lines_of(csv2)[1];
    // tpr column
    size_t pos = 0;
    for (int i = 0; i < 3; ++i) pos = cell.find(',', pos) + 1;
    double tpr = std::stod(cell.substr(pos));
    CHECK(tpr >= 0.9);
}

TEST_CASE("experiments are deterministic per seed") {
    SeededRng r1(103), r2(103);
    SynthConfig sc;
    auto rows1 = synth_rows(sc, 500, r1);
    auto rows2 = synth_rows(sc, 500, r2);
    CHECK(rows1 == rows2);

    EffectivenessSpec spec;
    spec.alpha_sq_list = {0.04, 0.06};
    spec.n_list = {5, 10};
    spec.threshold = 123.0;
    spec.sets_per_cell = 50;
    CHECK(experiment_effectiveness(rows1, sc.d, spec, 99) ==
          experiment_effectiveness(rows2, sc.d, spec, 99));
}

TEST_CASE("simulation runs honest rounds deterministically") {
    SimConfig cfg;
    cfg.world.kappa = 64;
    cfg.world.allow_insecure_kappa = true;
    cfg.world.curve = "mock";
    cfg.world.dims = {2, 5, 4095};
    cfg.world.threshold = 1e7;
    cfg.world.seed = 11;
    cfg.rounds = 3;

    auto res1 = simulate(cfg);
    auto res2 = simulate(cfg);
    CHECK(res1.trace_jsonl == res2.trace_jsonl);
    CHECK(res1.summary_json == res2.summary_json);
    CHECK_FALSE(res1.tamper_alarm);
    CHECK(lines_of(res1.trace_jsonl).size() == 3);
    CHECK(res1.summary_json.find("\"rounds_completed\": 3") != std::string::npos);
}

TEST_CASE("simulation flags deviated rounds against a trained threshold") {
    SeededRng rng(104);
    SynthConfig sc;
    sc.l = 2;
    sc.d = 4095;
    auto rows = synth_rows(sc, 4000, rng);
    auto th = train_from_rows(rows, sc.d, 0.05, 0.95, 0.2, 10, 300, 5);

    SimConfig cfg;
    cfg.world.kappa = 64;
    cfg.world.allow_insecure_kappa = true;
    cfg.world.dims = {2, 10, 4095};
    cfg.world.threshold = th.value;
    cfg.world.seed = 12;
    cfg.rounds = 20;
    cfg.inject_fraction = 1.0;  // every round deviated
    cfg.inject_alpha_sq = 0.10;

    auto res = simulate(cfg);
    CHECK(res.summary_json.find("\"rounds_completed\": 20") != std::string::npos);
    // most deviated rounds must be flagged
    auto pos = res.summary_json.find("\"verdict_faulty\": ");
    REQUIRE(pos != std::string::npos);
    int faulty = std::stoi(res.summary_json.substr(pos + 18));
    CHECK(faulty >= 17);
}

TEST_CASE("simulation adversary modes") {
    SimConfig cfg;
    cfg.world.kappa = 64;
    cfg.world.allow_insecure_kappa = true;
    cfg.world.dims = {2, 4, 100};
    cfg.world.seed = 13;
    cfg.rounds = 5;

    SUBCASE("bitflip causes rejections, not crashes") {
        cfg.adversary = "bitflip";
        auto res = simulate(cfg);
        CHECK(res.summary_json.find("\"rejections\": []") == std::string::npos);
        CHECK_FALSE(res.tamper_alarm);
    }
    SUBCASE("replay of stale messages is rejected") {
        cfg.adversary = "replay";
        auto res = simulate(cfg);
        CHECK(res.summary_json.find("\"code\": \"replay\"") != std::string::npos);
    }
    SUBCASE("corrupt aggregation trips the tamper alarm") {
        cfg.adversary = "corrupt-aggregate";
        auto res = simulate(cfg);
        CHECK(res.tamper_alarm);
        CHECK(res.summary_json.find("\"code\": \"tamper\"") != std::string::npos);
    }
}
