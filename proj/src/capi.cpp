#include "boostvi.h"

#include <cstring>
#include <string>

#include "boostvi/errors.hpp"
#include "boostvi/experiment.hpp"

using bvi::ArgumentError;
using bvi::ExperimentConfig;

struct bv_experiment {
    ExperimentConfig config;
    std::string algorithm; // stable storage for the returned pointers
    mutable std::string output_dir;
};

struct bv_result {
    bvi::ConvergenceTrace trace;
    std::string summary_json;
    bvi::RunArtifacts artifacts;
};

namespace {

thread_local std::string g_last_error;

int set_error(int code, const std::string& msg) {
    g_last_error = msg;
    return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        return fn();
    } catch (const ArgumentError& e) {
        return set_error(BV_ERR_CONFIG, e.what());
    } catch (const std::exception& e) {
        return set_error(BV_ERR_RUNTIME, e.what());
    }
}

} // namespace

extern "C" {

const char* bv_version(void) { return "0.1.0"; }

const char* bv_last_error(void) { return g_last_error.c_str(); }

int bv_experiment_open(const char* config_path, bv_experiment** out) {
    if (!config_path || !out) return set_error(BV_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    return guarded([&] {
        auto exp = new bv_experiment{ExperimentConfig::load(config_path), "", ""};
        exp->algorithm = exp->config.algorithm();
        *out = exp;
        return BV_OK;
    });
}

int bv_experiment_set_seed(bv_experiment* exp, unsigned long long seed) {
    if (!exp) return set_error(BV_ERR_ARGUMENT, "null experiment");
    return guarded([&] {
        exp->config.override_seed(seed);
        return BV_OK;
    });
}

int bv_experiment_set_output_dir(bv_experiment* exp, const char* dir) {
    if (!exp || !dir) return set_error(BV_ERR_ARGUMENT, "null argument");
    return guarded([&] {
        exp->config.override_output_dir(dir);
        return BV_OK;
    });
}

const char* bv_experiment_algorithm(const bv_experiment* exp) {
    return exp ? exp->algorithm.c_str() : "";
}

const char* bv_experiment_output_dir(const bv_experiment* exp) {
    if (!exp) return "";
    exp->output_dir = exp->config.output_dir();
    return exp->output_dir.c_str();
}

int bv_experiment_same_except_algorithm(const bv_experiment* a, const bv_experiment* b) {
    if (!a || !b) return 0;
    return a->config.same_except_algorithm(b->config) ? 1 : 0;
}

void bv_experiment_close(bv_experiment* exp) { delete exp; }

int bv_experiment_run(bv_experiment* exp, bv_result** out) {
    if (!exp || !out) return set_error(BV_ERR_ARGUMENT, "null argument");
    *out = nullptr;
    try {
        bvi::RunOutput run = bvi::run_experiment(exp->config);
        *out = new bv_result{std::move(run.trace), std::move(run.summary_json),
                             std::move(run.artifacts)};
        return BV_OK;
    } catch (const bvi::SolverFailure& e) {
        // partial artifacts were written; expose the partial trace
        const auto dir = exp->config.output_dir();
        *out = new bv_result{e.partial_trace(), "", bvi::RunArtifacts{
                                 dir + "/trace.csv", dir + "/summary.json",
                                 dir + "/resolved.cfg"}};
        return set_error(BV_ERR_RUNTIME, e.what());
    } catch (const ArgumentError& e) {
        return set_error(BV_ERR_CONFIG, e.what());
    } catch (const std::exception& e) {
        return set_error(BV_ERR_RUNTIME, e.what());
    }
}

long long bv_result_row_count(const bv_result* res) {
    return res ? static_cast<long long>(res->trace.rows.size()) : 0;
}

int bv_result_row(const bv_result* res, long long index, bv_trace_row* out) {
    if (!res || !out) return set_error(BV_ERR_ARGUMENT, "null argument");
    if (index < 0 || index >= static_cast<long long>(res->trace.rows.size()))
        return set_error(BV_ERR_ARGUMENT, "row index out of range");
    const bvi::TraceRow& r = res->trace.rows[static_cast<std::size_t>(index)];
    out->t = static_cast<long long>(r.t);
    out->objective = r.objective;
    out->objective_stderr = r.objective_stderr;
    out->gamma = r.gamma;
    out->gap = r.gap;
    out->gap_stderr = r.gap_stderr;
    out->lmo_value = r.lmo_value;
    out->active_atoms = static_cast<long long>(r.active_atoms);
    out->wallclock_ms = r.wallclock_ms;
    return BV_OK;
}

const char* bv_result_trace_path(const bv_result* res) {
    return res ? res->artifacts.trace_path.c_str() : "";
}

const char* bv_result_summary_path(const bv_result* res) {
    return res ? res->artifacts.summary_path.c_str() : "";
}

const char* bv_result_config_snapshot_path(const bv_result* res) {
    return res ? res->artifacts.config_snapshot_path.c_str() : "";
}

const char* bv_result_summary_json(const bv_result* res) {
    return res ? res->summary_json.c_str() : "";
}

void bv_result_close(bv_result* res) { delete res; }

int bv_verify(const char* config_path, int as_json, char** out_report) {
    if (!config_path || !out_report) return set_error(BV_ERR_ARGUMENT, "null argument");
    *out_report = nullptr;
    try {
        const ExperimentConfig cfg = ExperimentConfig::load(config_path);
        const bvi::VerifyOutput v = bvi::verify_report(cfg, as_json != 0);
        char* buf = new char[v.report.size() + 1];
        std::memcpy(buf, v.report.c_str(), v.report.size() + 1);
        *out_report = buf;
        return v.all_passed ? BV_OK : set_error(BV_ERR_RUNTIME, "verification checks failed");
    } catch (const ArgumentError& e) {
        return set_error(BV_ERR_CONFIG, e.what());
    } catch (const std::exception& e) {
        return set_error(BV_ERR_RUNTIME, e.what());
    }
}

void bv_free(char* p) { delete[] p; }

} // extern "C"
