#include "infprim.h"

#include <cstring>
#include <exception>
#include <fstream>
#include <new>
#include <string>

#include "infprim/errors.hpp"
#include "infprim/experiments.hpp"
#include "infprim/ising.hpp"
#include "infprim/protocol.hpp"

using namespace infprim;

struct infprim_problem {
    IsingProblem problem;
};

struct infprim_protocol {
    ProtocolGraph graph;
};

struct infprim_run {
    RunRecord record;
};

namespace {

thread_local std::string g_last_error;

infprim_status fail(infprim_status status, const char* what) {
    g_last_error = what;
    return status;
}

// Runs the body and translates exceptions into status codes + message.
template <typename Fn>
infprim_status guarded(Fn&& fn) {
    try {
        fn();
        return INFPRIM_OK;
    } catch (const EmptyEliteSetError& e) {
        return fail(INFPRIM_ERR_EMPTY_ELITE, e.what());
    } catch (const DegenerateInstanceError& e) {
        return fail(INFPRIM_ERR_DEGENERATE, e.what());
    } catch (const DegenerateWeightError& e) {
        return fail(INFPRIM_ERR_DEGENERATE, e.what());
    } catch (const ParseError& e) {
        return fail(INFPRIM_ERR_PARSE, e.what());
    } catch (const IoError& e) {
        return fail(INFPRIM_ERR_IO, e.what());
    } catch (const std::domain_error& e) {
        return fail(INFPRIM_ERR_DOMAIN, e.what());
    } catch (const std::out_of_range& e) {
        return fail(INFPRIM_ERR_INDEX, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(INFPRIM_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::bad_alloc&) {
        return fail(INFPRIM_ERR_INTERNAL, "out of memory");
    } catch (const std::exception& e) {
        return fail(INFPRIM_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(INFPRIM_ERR_INTERNAL, "unknown error");
    }
}

infprim_status require(bool ok, const char* what) {
    return ok ? INFPRIM_OK : fail(INFPRIM_ERR_INVALID_ARGUMENT, what);
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << text;
    if (!out) throw IoError("failed writing file: " + path);
}

}  // namespace

extern "C" {

const char* infprim_last_error(void) { return g_last_error.c_str(); }

const char* infprim_status_name(infprim_status status) {
    switch (status) {
        case INFPRIM_OK: return "ok";
        case INFPRIM_ERR_INVALID_ARGUMENT: return "invalid argument";
        case INFPRIM_ERR_DOMAIN: return "domain error";
        case INFPRIM_ERR_INDEX: return "index error";
        case INFPRIM_ERR_IO: return "i/o error";
        case INFPRIM_ERR_PARSE: return "parse error";
        case INFPRIM_ERR_EMPTY_ELITE: return "empty elite set";
        case INFPRIM_ERR_DEGENERATE: return "degenerate input";
        case INFPRIM_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

infprim_status infprim_problem_read(const char* path, infprim_problem** out) {
    if (auto s = require(path && out, "path and out must be non-null")) return s;
    return guarded([&] { *out = new infprim_problem{read_instance(path)}; });
}

infprim_status infprim_problem_write(const infprim_problem* problem, const char* path) {
    if (auto s = require(problem && path, "problem and path must be non-null")) return s;
    return guarded([&] { write_instance(problem->problem, path); });
}

infprim_status infprim_problem_sk(int n, uint64_t seed, int fix_last_down,
                                  infprim_problem** out) {
    if (auto s = require(out != nullptr, "out must be non-null")) return s;
    return guarded([&] {
        *out = new infprim_problem{fix_last_down ? generate_sk_fixed(n, seed)
                                                 : generate_sk(n, seed)};
    });
}

void infprim_problem_free(infprim_problem* problem) { delete problem; }

int infprim_problem_num_spins(const infprim_problem* problem) {
    return problem ? problem->problem.n : -1;
}

infprim_status infprim_problem_energy(const infprim_problem* problem, const int8_t* spins,
                                      int len, double* out) {
    if (auto s = require(problem && spins && out, "problem, spins, out must be non-null"))
        return s;
    return guarded([&] {
        SpinConfig config(spins, spins + len);
        *out = energy(problem->problem, config);
    });
}

infprim_status infprim_problem_ground_energy(const infprim_problem* problem, int cap,
                                             double* out) {
    if (auto s = require(problem && out, "problem and out must be non-null")) return s;
    return guarded([&] { *out = exhaustive_solve(problem->problem, cap).energy; });
}

infprim_status infprim_problem_write_ground_states(const infprim_problem* problem, int cap,
                                                   const char* path) {
    if (auto s = require(problem && path, "problem and path must be non-null")) return s;
    return guarded([&] {
        const GroundStates gs = exhaustive_solve(problem->problem, cap);
        write_file(path, format_ground_states(gs));
    });
}

infprim_status infprim_protocol_read(const char* path, infprim_protocol** out) {
    if (auto s = require(path && out, "path and out must be non-null")) return s;
    return guarded([&] { *out = new infprim_protocol{parse_protocol(path)}; });
}

infprim_status infprim_protocol_parse(const char* text, infprim_protocol** out) {
    if (auto s = require(text && out, "text and out must be non-null")) return s;
    return guarded([&] { *out = new infprim_protocol{parse_protocol_text(text)}; });
}

infprim_status infprim_protocol_to_json(const infprim_protocol* protocol, char** out) {
    if (auto s = require(protocol && out, "protocol and out must be non-null")) return s;
    return guarded([&] {
        const std::string text = serialize_protocol(protocol->graph);
        char* buf = new char[text.size() + 1];
        std::memcpy(buf, text.c_str(), text.size() + 1);
        *out = buf;
    });
}

void infprim_protocol_free(infprim_protocol* protocol) { delete protocol; }

void infprim_string_free(char* s) { delete[] s; }

infprim_status infprim_run_protocol(const infprim_problem* problem,
                                    const infprim_protocol* protocol, int64_t seed_override,
                                    int workers_override, infprim_run** out) {
    if (auto s = require(problem && protocol && out, "problem, protocol, out must be non-null"))
        return s;
    return guarded([&] {
        ProtocolGraph graph = protocol->graph;
        if (seed_override >= 0) graph.seed = static_cast<std::uint64_t>(seed_override);
        if (workers_override >= 1) graph.workers = workers_override;
        *out = new infprim_run{run_protocol(graph, problem->problem)};
    });
}

double infprim_run_best_energy(const infprim_run* run) {
    return run ? run->record.best_energy : 0.0;
}

int infprim_run_rounds(const infprim_run* run) { return run ? run->record.rounds_executed : -1; }

infprim_status infprim_run_best_config(const infprim_run* run, int8_t* buf, int len) {
    if (auto s = require(run && buf, "run and buf must be non-null")) return s;
    const auto& config = run->record.best_config;
    if (len < static_cast<int>(config.size()))
        return fail(INFPRIM_ERR_INVALID_ARGUMENT, "buffer too small for configuration");
    for (std::size_t i = 0; i < config.size(); ++i) buf[i] = static_cast<int8_t>(config[i]);
    return INFPRIM_OK;
}

infprim_status infprim_run_write_events(const infprim_run* run, const char* path) {
    if (auto s = require(run && path, "run and path must be non-null")) return s;
    return guarded([&] { write_file(path, run->record.event_log()); });
}

infprim_status infprim_run_write_summary(const infprim_run* run, const char* header_comment,
                                         const char* path) {
    if (auto s = require(run && path, "run and path must be non-null")) return s;
    return guarded([&] {
        std::string text = header_comment ? header_comment : "";
        text += run->record.summary_csv();
        write_file(path, text);
    });
}

infprim_status infprim_run_write_reads(const infprim_run* run, const char* path) {
    if (auto s = require(run && path, "run and path must be non-null")) return s;
    return guarded([&] { write_reads_csv(run->record.best_member_reads, path); });
}

void infprim_run_free(infprim_run* run) { delete run; }

infprim_status infprim_gen_instances(int n, int count, uint64_t seed, const char* out_dir) {
    if (auto s = require(out_dir != nullptr, "out_dir must be non-null")) return s;
    return guarded([&] {
        GenConfig cfg;
        cfg.n = n;
        cfg.count = count;
        cfg.seed = seed;
        cfg.out_dir = out_dir;
        run_gen(cfg);
    });
}

infprim_status infprim_solve_files(const char* instance_path, const char* protocol_path,
                                   int64_t seed_override, int workers_override,
                                   const char* out_prefix, int dump_reads) {
    if (auto s = require(instance_path && protocol_path && out_prefix,
                         "instance, protocol, out_prefix must be non-null"))
        return s;
    return guarded([&] {
        SolveConfig cfg;
        cfg.instance_path = instance_path;
        cfg.protocol_path = protocol_path;
        if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
        if (workers_override >= 1) cfg.workers = workers_override;
        cfg.out_prefix = out_prefix;
        cfg.dump_reads = dump_reads != 0;
        run_solve(cfg);
    });
}

infprim_status infprim_oracle_files(const char* instance_path, const char* out_path, int cap) {
    if (auto s = require(instance_path && out_path, "instance and out path must be non-null"))
        return s;
    return guarded([&] { run_oracle(instance_path, out_path, cap); });
}

infprim_status infprim_bp_files(const char* instance_path, double temperature, int max_iters,
                                double damping, double tolerance, const char* out_csv) {
    if (auto s = require(instance_path && out_csv, "instance and out path must be non-null"))
        return s;
    return guarded([&] {
        BPParams params;
        params.temperature = temperature;
        params.max_iters = max_iters;
        params.damping = damping;
        params.tolerance = tolerance;
        run_bp_csv(instance_path, params, out_csv);
    });
}

infprim_status infprim_calibration_run(const infprim_calibration_config* config,
                                       const char* out_csv) {
    if (auto s = require(config && out_csv, "config and out_csv must be non-null")) return s;
    return guarded([&] {
        CalibrationConfig cfg;
        cfg.instances = config->instances;
        cfg.n = config->n;
        cfg.reads = config->reads;
        cfg.bins = config->bins;
        cfg.tau = config->tau;
        cfg.trotter_slices = config->trotter_slices;
        cfg.temperature = config->temperature;
        cfg.seed = config->seed;
        const CalibrationHistogram hist = run_calibration(cfg);
        write_calibration_csv(hist, cfg, out_csv);
    });
}

infprim_status infprim_bp_csv(const infprim_problem* problem, double temperature, int max_iters,
                              double damping, double tolerance, const char* out_csv) {
    if (auto s = require(problem && out_csv, "problem and out_csv must be non-null")) return s;
    return guarded([&] {
        BPParams params;
        params.temperature = temperature;
        params.max_iters = max_iters;
        params.damping = damping;
        params.tolerance = tolerance;
        write_file(out_csv, format_bp_csv(problem->problem, params));
    });
}

}  // extern "C"
