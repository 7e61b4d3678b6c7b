// Command line front end; talks to the library exclusively through the C API.

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "infprim.h"

namespace {

int report(infprim_status status) {
    if (status == INFPRIM_OK) return 0;
    std::fprintf(stderr, "error (%s): %s\n", infprim_status_name(status), infprim_last_error());
    return 1;
}

std::string default_out_dir() {
    const char* env = std::getenv("INFPRIM_OUT_DIR");
    return env && *env ? env : ".";
}

std::string join(const std::string& dir, const std::string& name) {
    if (dir.empty() || dir == ".") return name;
    return dir.back() == '/' ? dir + name : dir + "/" + name;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid annealer protocols on Ising problems"};
    app.require_subcommand(1);
    const std::string out_dir = default_out_dir();

    // gen: random symmetry-broken SK instances
    auto* gen = app.add_subcommand("gen", "generate spin-glass instances (last spin fixed down)");
    int gen_n = 12, gen_count = 10;
    std::uint64_t gen_seed = 1;
    std::string gen_dir = join(out_dir, "instances");
    gen->add_option("-n,--spins", gen_n, "spin count before fixing (>= 3)");
    gen->add_option("-c,--count", gen_count, "number of instances");
    gen->add_option("-s,--seed", gen_seed, "generator seed");
    gen->add_option("-o,--out-dir", gen_dir, "output directory");

    // solve: run a protocol file against an instance
    auto* solve = app.add_subcommand("solve", "run a protocol file against an instance");
    std::string solve_instance, solve_protocol;
    std::string solve_prefix = join(out_dir, "run");
    std::int64_t solve_seed = -1;
    int solve_workers = 0;
    bool solve_reads = false;
    solve->add_option("instance", solve_instance, "instance file")->required();
    solve->add_option("protocol", solve_protocol, "protocol file (JSON)")->required();
    solve->add_option("-s,--seed", solve_seed, "seed override (default: protocol file)");
    solve->add_option("-w,--workers", solve_workers, "worker threads override");
    solve->add_option("-o,--out-prefix", solve_prefix, "output path prefix");
    solve->add_flag("--dump-reads", solve_reads, "also write the best member's raw reads");

    // fig2: uncertainty calibration histogram
    auto* fig2 = app.add_subcommand(
        "fig2", "uncertainty calibration histogram (per-bin agreement with the exact oracle)");
    infprim_calibration_config cal{100, 12, 201, 10, 20, 30, 0.8246, 1};
    std::string fig2_out = join(out_dir, "calibration.csv");
    fig2->add_option("-i,--instances", cal.instances, "instance count");
    fig2->add_option("-n,--spins", cal.n, "spin count before fixing");
    fig2->add_option("-r,--reads", cal.reads, "reads per instance");
    fig2->add_option("-b,--bins", cal.bins, "histogram bins over [0, 0.5]");
    fig2->add_option("-T,--temperature", cal.temperature, "sampler temperature");
    fig2->add_option("--tau", cal.tau, "sweeps per schedule leg");
    fig2->add_option("-P,--trotter-slices", cal.trotter_slices, "path-integral slices");
    fig2->add_option("-s,--seed", cal.seed, "experiment seed");
    fig2->add_option("-o,--out", fig2_out, "output CSV path");
    bool fig2_paper_scale = false;
    fig2->add_flag("--paper-scale", fig2_paper_scale,
                   "use the large preset (1500 instances, n=17, 1001 reads)");

    // oracle: exhaustive ground states
    auto* oracle = app.add_subcommand("oracle", "exhaustive ground states of an instance");
    std::string oracle_instance;
    std::string oracle_out = join(out_dir, "oracle.txt");
    int oracle_cap = 24;
    oracle->add_option("instance", oracle_instance, "instance file")->required();
    oracle->add_option("-o,--out", oracle_out, "output path");
    oracle->add_option("--cap", oracle_cap, "refuse instances above this spin count");

    // bp: belief propagation marginals
    auto* bp = app.add_subcommand("bp", "sum-product marginals and their (S, P) belief");
    std::string bp_instance;
    std::string bp_out = join(out_dir, "marginals.csv");
    double bp_t = 1.0, bp_damping = 0.3, bp_tol = 1e-10;
    int bp_iters = 500;
    bp->add_option("instance", bp_instance, "instance file")->required();
    bp->add_option("-T,--temperature", bp_t, "marginal temperature");
    bp->add_option("--max-iters", bp_iters, "iteration limit");
    bp->add_option("--damping", bp_damping, "message damping in [0, 1)");
    bp->add_option("--tolerance", bp_tol, "convergence tolerance");
    bp->add_option("-o,--out", bp_out, "output CSV path");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed())
        return report(infprim_gen_instances(gen_n, gen_count, gen_seed, gen_dir.c_str()));

    if (solve->parsed())
        return report(infprim_solve_files(solve_instance.c_str(), solve_protocol.c_str(),
                                          solve_seed, solve_workers, solve_prefix.c_str(),
                                          solve_reads ? 1 : 0));

    if (fig2->parsed()) {
        if (fig2_paper_scale) {
            cal.instances = 1500;
            cal.n = 17;
            cal.reads = 1001;
        }
        return report(infprim_calibration_run(&cal, fig2_out.c_str()));
    }

    if (oracle->parsed())
        return report(
            infprim_oracle_files(oracle_instance.c_str(), oracle_out.c_str(), oracle_cap));

    if (bp->parsed())
        return report(infprim_bp_files(bp_instance.c_str(), bp_t, bp_iters, bp_damping, bp_tol,
                                       bp_out.c_str()));

    return 0;
}
