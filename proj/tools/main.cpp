// fsd command-line front end. Talks to the core library exclusively through
// the C API in fsd.h; every subcommand is config-JSON in, text out.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>

#include "fsd.h"

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitTamper = 3;

struct Options {
    std::string config_path;
    std::string out_path;
    unsigned long long seed = 0;
    bool seed_set = false;
};

std::string load_config(const Options& opt) {
    std::string text = "{}";
    if (!opt.config_path.empty()) {
        std::ifstream in(opt.config_path);
        if (!in) {
            std::cerr << "fsd: cannot open config " << opt.config_path << "\n";
            std::exit(kExitValidation);
        }
        std::stringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    if (opt.seed_set) {
        // splice the seed override into the top-level object
        auto pos = text.find_last_of('}');
        if (pos == std::string::npos) {
            std::cerr << "fsd: config must be a JSON object\n";
            std::exit(kExitValidation);
        }
        std::string trimmed = text.substr(0, pos);
        bool empty_obj = trimmed.find_first_not_of(" \t\r\n", trimmed.find('{') + 1) ==
                         std::string::npos;
        text = trimmed + (empty_obj ? "" : ",") + "\"seed\":" + std::to_string(opt.seed) + "}";
    }
    return text;
}

int emit(const Options& opt, const char* text) {
    if (!opt.out_path.empty()) {
        std::ofstream out(opt.out_path);
        if (!out) {
            std::cerr << "fsd: cannot write " << opt.out_path << "\n";
            return kExitValidation;
        }
        out << text;
        return 0;
    }
    std::cout << text;
    return 0;
}

using StringOp = fsd_status (*)(const char*, char**);

int run_string_op(StringOp op, const Options& opt) {
    std::string cfg = load_config(opt);
    char* out = nullptr;
    fsd_status st = op(cfg.c_str(), &out);
    if (st != FSD_OK) {
        std::cerr << "fsd: " << fsd_last_error() << "\n";
        return st == FSD_ERR_TAMPER ? kExitTamper : kExitValidation;
    }
    int rc = emit(opt, out);
    fsd_string_free(out);
    return rc;
}

int run_simulate(const Options& opt) {
    std::string cfg = load_config(opt);
    char* summary = nullptr;
    fsd_status st = fsd_simulate(cfg.c_str(),
                                 opt.out_path.empty() ? nullptr : opt.out_path.c_str(),
                                 &summary);
    if (summary != nullptr) {
        std::cout << summary << "\n";
        fsd_string_free(summary);
    }
    if (st == FSD_ERR_TAMPER) {
        std::cerr << "fsd: " << fsd_last_error() << "\n";
        return kExitTamper;
    }
    if (st != FSD_OK) {
        std::cerr << "fsd: " << fsd_last_error() << "\n";
        return kExitValidation;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fog-assisted unstable-sensor detection over encrypted aggregates"};
    app.require_subcommand(1);

    Options opt;
    app.add_option("--config", opt.config_path, "JSON config file");
    app.add_option("--out", opt.out_path, "output path (default: stdout)");
    auto* seed_opt = app.add_option("--seed", opt.seed, "override config seed");

    auto* keygen = app.add_subcommand("keygen", "generate system key material");
    auto* capacity = app.add_subcommand("capacity", "sweep max samples per ciphertext");
    auto* ingest = app.add_subcommand("ingest-check", "validate a CSV ingest spec");
    auto* train = app.add_subcommand("train", "train a dispersion threshold");
    auto* evaluate = app.add_subcommand("evaluate", "TPR/FPR grid for a threshold");
    auto* commcost = app.add_subcommand("commcost", "communication-size comparison");
    auto* simulate = app.add_subcommand("simulate", "run full protocol rounds");

    CLI11_PARSE(app, argc, argv);
    opt.seed_set = seed_opt->count() > 0;

    if (keygen->parsed()) return run_string_op(&fsd_keygen_json, opt);
    if (capacity->parsed()) return run_string_op(&fsd_capacity_csv, opt);
    if (ingest->parsed()) return run_string_op(&fsd_ingest_check_json, opt);
    if (train->parsed()) return run_string_op(&fsd_train_json, opt);
    if (evaluate->parsed()) return run_string_op(&fsd_evaluate_csv, opt);
    if (commcost->parsed()) return run_string_op(&fsd_commcost_csv, opt);
    if (simulate->parsed()) return run_simulate(opt);
    return kExitValidation;
}
