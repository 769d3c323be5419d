// Experiment runner CLI. Talks to the library exclusively through the
// C API so it doubles as a smoke test of the shared-library surface.
//
//   boostvi run <cfg>            [--seed N] [--out DIR]
//   boostvi compare <cfg>...     [--seed N] [--out DIR]
//   boostvi verify <cfg> [--json]
//
// Exit codes: 0 ok, 1 runtime failure, 2 invalid configuration/usage.

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include "boostvi.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

void usage(std::FILE* to) {
    std::fprintf(to,
                 "usage:\n"
                 "  boostvi run <config> [--seed N] [--out DIR]\n"
                 "  boostvi compare <config>... [--seed N] [--out DIR]\n"
                 "  boostvi verify <config> [--json]\n");
}

struct Options {
    std::vector<std::string> configs;
    bool have_seed = false;
    unsigned long long seed = 0;
    std::string out_dir;
    bool json = false;
};

bool parse_options(int argc, char** argv, Options& opt) {
    for (int i = 0; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--seed") {
            if (i + 1 >= argc) {
                std::fprintf(stderr, "boostvi: --seed needs a value\n");
                return false;
            }
            char* end = nullptr;
            opt.seed = std::strtoull(argv[++i], &end, 10);
            if (!end || *end != '\0') {
                std::fprintf(stderr, "boostvi: --seed needs an integer\n");
                return false;
            }
            opt.have_seed = true;
        } else if (arg == "--out") {
            if (i + 1 >= argc) {
                std::fprintf(stderr, "boostvi: --out needs a directory\n");
                return false;
            }
            opt.out_dir = argv[++i];
        } else if (arg == "--json") {
            opt.json = true;
        } else if (!arg.empty() && arg[0] == '-') {
            std::fprintf(stderr, "boostvi: unknown option '%s'\n", arg.c_str());
            return false;
        } else {
            opt.configs.push_back(arg);
        }
    }
    return true;
}

int status_to_exit(int status) {
    switch (status) {
        case BV_OK: return kExitOk;
        case BV_ERR_CONFIG: return kExitConfig;
        default: return kExitRuntime;
    }
}

int open_with_overrides(const std::string& path, const Options& opt, bv_experiment** out) {
    int rc = bv_experiment_open(path.c_str(), out);
    if (rc != BV_OK) {
        std::fprintf(stderr, "boostvi: %s: %s\n", path.c_str(), bv_last_error());
        return rc;
    }
    if (opt.have_seed) rc = bv_experiment_set_seed(*out, opt.seed);
    if (rc == BV_OK && !opt.out_dir.empty())
        rc = bv_experiment_set_output_dir(*out, opt.out_dir.c_str());
    if (rc != BV_OK) {
        std::fprintf(stderr, "boostvi: %s: %s\n", path.c_str(), bv_last_error());
        bv_experiment_close(*out);
        *out = nullptr;
    }
    return rc;
}

int cmd_run(const Options& opt) {
    if (opt.configs.size() != 1) {
        std::fprintf(stderr, "boostvi: run needs exactly one config\n");
        return kExitConfig;
    }
    bv_experiment* exp = nullptr;
    int rc = open_with_overrides(opt.configs[0], opt, &exp);
    if (rc != BV_OK) return status_to_exit(rc);

    bv_result* res = nullptr;
    rc = bv_experiment_run(exp, &res);
    if (rc != BV_OK)
        std::fprintf(stderr, "boostvi: %s\n", bv_last_error());
    if (res) {
        const long long rows = bv_result_row_count(res);
        if (rc == BV_OK && rows > 0) {
            bv_trace_row last;
            bv_result_row(res, rows - 1, &last);
            std::printf("%s: %lld iterations, final objective %.12g\n",
                        bv_experiment_algorithm(exp), rows - 1, last.objective);
        }
        std::printf("trace:    %s\n", bv_result_trace_path(res));
        std::printf("summary:  %s\n", bv_result_summary_path(res));
        std::printf("config:   %s\n", bv_result_config_snapshot_path(res));
        bv_result_close(res);
    }
    bv_experiment_close(exp);
    return status_to_exit(rc);
}

int cmd_compare(const Options& opt) {
    if (opt.configs.size() < 2) {
        std::fprintf(stderr, "boostvi: compare needs at least two configs\n");
        return kExitConfig;
    }
    std::vector<bv_experiment*> exps;
    const auto cleanup = [&] {
        for (bv_experiment* e : exps) bv_experiment_close(e);
    };

    for (const std::string& path : opt.configs) {
        bv_experiment* exp = nullptr;
        const int rc = open_with_overrides(path, opt, &exp);
        if (rc != BV_OK) {
            cleanup();
            return status_to_exit(rc);
        }
        exps.push_back(exp);
    }
    for (std::size_t i = 1; i < exps.size(); ++i) {
        if (!bv_experiment_same_except_algorithm(exps[0], exps[i])) {
            std::fprintf(stderr,
                         "boostvi: compare refused: '%s' and '%s' differ outside "
                         "solver.algorithm\n",
                         opt.configs[0].c_str(), opt.configs[i].c_str());
            cleanup();
            return kExitConfig;
        }
    }
    for (std::size_t i = 0; i < exps.size(); ++i)
        for (std::size_t j = i + 1; j < exps.size(); ++j)
            if (std::strcmp(bv_experiment_algorithm(exps[i]),
                            bv_experiment_algorithm(exps[j])) == 0) {
                std::fprintf(stderr, "boostvi: compare refused: duplicate algorithm '%s'\n",
                             bv_experiment_algorithm(exps[i]));
                cleanup();
                return kExitConfig;
            }

    const std::string base = opt.out_dir.empty() ? bv_experiment_output_dir(exps[0])
                                                 : opt.out_dir;
    std::vector<bv_result*> results(exps.size(), nullptr);
    int worst = BV_OK;
    for (std::size_t i = 0; i < exps.size(); ++i) {
        const std::string dir = base + "/" + bv_experiment_algorithm(exps[i]);
        int rc = bv_experiment_set_output_dir(exps[i], dir.c_str());
        if (rc == BV_OK) rc = bv_experiment_run(exps[i], &results[i]);
        if (rc != BV_OK) {
            std::fprintf(stderr, "boostvi: %s: %s\n", opt.configs[i].c_str(), bv_last_error());
            worst = rc;
        }
    }

    long long max_rows = 0;
    for (bv_result* r : results)
        if (r && bv_result_row_count(r) > max_rows) max_rows = bv_result_row_count(r);

    // merged CSV: one objective/gap column pair per run
    std::string merged = base + "/compare.csv";
    if (std::FILE* f = std::fopen((merged + ".tmp").c_str(), "wb")) {
        std::fprintf(f, "t");
        for (std::size_t i = 0; i < exps.size(); ++i)
            std::fprintf(f, ",objective_%s,gap_%s", bv_experiment_algorithm(exps[i]),
                         bv_experiment_algorithm(exps[i]));
        std::fprintf(f, "\n");
        for (long long t = 0; t < max_rows; ++t) {
            std::fprintf(f, "%lld", t);
            for (bv_result* r : results) {
                bv_trace_row row;
                if (r && t < bv_result_row_count(r) && bv_result_row(r, t, &row) == BV_OK)
                    std::fprintf(f, ",%.17g,%.17g", row.objective, row.gap);
                else
                    std::fprintf(f, ",,");
            }
            std::fprintf(f, "\n");
        }
        std::fclose(f);
        std::rename((merged + ".tmp").c_str(), merged.c_str());
    } else {
        std::fprintf(stderr, "boostvi: cannot write '%s'\n", merged.c_str());
        worst = worst == BV_OK ? BV_ERR_RUNTIME : worst;
    }

    // aligned per-iteration objective table
    std::printf("%6s", "t");
    for (std::size_t i = 0; i < exps.size(); ++i)
        std::printf(" %22s", bv_experiment_algorithm(exps[i]));
    std::printf("\n");
    for (long long t = 0; t < max_rows; ++t) {
        std::printf("%6lld", t);
        for (bv_result* r : results) {
            bv_trace_row row;
            if (r && t < bv_result_row_count(r) && bv_result_row(r, t, &row) == BV_OK)
                std::printf(" %22.12g", row.objective);
            else
                std::printf(" %22s", "-");
        }
        std::printf("\n");
    }
    std::printf("final:\n");
    for (std::size_t i = 0; i < exps.size(); ++i) {
        bv_trace_row last;
        const long long rows = results[i] ? bv_result_row_count(results[i]) : 0;
        if (rows > 0 && bv_result_row(results[i], rows - 1, &last) == BV_OK)
            std::printf("  %-18s objective %.12g +- %.3g (%lld iterations)\n",
                        bv_experiment_algorithm(exps[i]), last.objective,
                        last.objective_stderr, rows - 1);
        else
            std::printf("  %-18s failed\n", bv_experiment_algorithm(exps[i]));
    }
    std::printf("merged: %s\n", merged.c_str());

    for (bv_result* r : results)
        if (r) bv_result_close(r);
    cleanup();
    return status_to_exit(worst);
}

int cmd_verify(const Options& opt) {
    if (opt.configs.size() != 1) {
        std::fprintf(stderr, "boostvi: verify needs exactly one config\n");
        return kExitConfig;
    }
    char* report = nullptr;
    const int rc = bv_verify(opt.configs[0].c_str(), opt.json ? 1 : 0, &report);
    if (report) {
        std::fputs(report, stdout);
        bv_free(report);
    }
    if (rc == BV_ERR_CONFIG)
        std::fprintf(stderr, "boostvi: %s: %s\n", opt.configs[0].c_str(), bv_last_error());
    return status_to_exit(rc);
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        usage(stderr);
        return kExitConfig;
    }
    const std::string cmd = argv[1];
    Options opt;
    if (!parse_options(argc - 2, argv + 2, opt)) return kExitConfig;

    if (cmd == "run") return cmd_run(opt);
    if (cmd == "compare") return cmd_compare(opt);
    if (cmd == "verify") return cmd_verify(opt);
    if (cmd == "--help" || cmd == "help") {
        usage(stdout);
        return kExitOk;
    }
    std::fprintf(stderr, "boostvi: unknown command '%s'\n", cmd.c_str());
    usage(stderr);
    return kExitConfig;
}
