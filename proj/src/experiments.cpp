#include "infprim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "infprim/backends.hpp"
#include "infprim/errors.hpp"
#include "infprim/processing.hpp"
#include "infprim/rng.hpp"

namespace infprim {

IsingProblem generate_sk_fixed(int n, std::uint64_t seed) {
    if (n < 3) throw std::invalid_argument("symmetry-broken SK instance needs n >= 3");
    return fix_spin(generate_sk(n, seed), n - 1, -1);
}

std::vector<std::string> run_gen(const GenConfig& cfg) {
    if (cfg.n < 3) throw std::invalid_argument("instance generation needs n >= 3");
    if (cfg.count < 1) throw std::invalid_argument("instance count must be >= 1");
    std::filesystem::create_directories(cfg.out_dir);

    std::vector<std::string> paths;
    paths.reserve(cfg.count);
    for (int i = 0; i < cfg.count; ++i) {
        const IsingProblem p = generate_sk_fixed(cfg.n, derive_seed(cfg.seed, i));
        std::ostringstream name;
        name << "sk_fix_n" << cfg.n << "_" << std::setfill('0') << std::setw(4) << i << ".ising";
        const std::string path = (std::filesystem::path(cfg.out_dir) / name.str()).string();
        write_instance(p, path);
        paths.push_back(path);
    }
    return paths;
}

namespace {

std::string protocol_one_line(const ProtocolGraph& g) {
    return nlohmann::json::parse(serialize_protocol(g)).dump();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << text;
    if (!out) throw IoError("failed writing file: " + path);
}

}  // namespace

SolveResult run_solve(const SolveConfig& cfg) {
    const IsingProblem problem = read_instance(cfg.instance_path);
    ProtocolGraph graph = parse_protocol(cfg.protocol_path);
    if (cfg.seed) graph.seed = *cfg.seed;
    if (cfg.workers) graph.workers = *cfg.workers;
    graph.validate();

    SolveResult result;
    result.record = run_protocol(graph, problem);

    std::ostringstream comment;
    comment << "# instance=" << cfg.instance_path << " protocol=" << cfg.protocol_path
            << " seed=" << graph.seed << "\n# config " << protocol_one_line(graph) << "\n";

    result.events_path = cfg.out_prefix + ".events.log";
    result.summary_path = cfg.out_prefix + ".summary.csv";
    result.best_path = cfg.out_prefix + ".best.txt";
    write_text(result.events_path, result.record.event_log());
    write_text(result.summary_path, comment.str() + result.record.summary_csv());

    std::ostringstream best;
    best.precision(17);
    best << "energy " << result.record.best_energy << "\n";
    best << "config";
    for (int s : result.record.best_config) best << " " << s;
    best << "\n";
    write_text(result.best_path, best.str());

    if (cfg.dump_reads) {
        result.reads_path = cfg.out_prefix + ".reads.csv";
        write_text(result.reads_path,
                   comment.str() + format_reads_csv(result.record.best_member_reads));
    }
    return result;
}

void CalibrationConfig::validate() const {
    if (instances < 1) throw std::invalid_argument("instance count must be >= 1");
    if (n < 3) throw std::invalid_argument("calibration needs n >= 3");
    if (n > exhaustive_cap)
        throw std::invalid_argument("calibration needs n within the exhaustive cap");
    if (reads < 1) throw std::invalid_argument("reads must be >= 1");
    if (bins < 2) throw std::invalid_argument("bins must be >= 2");
}

std::vector<double> CalibrationHistogram::error_fraction() const {
    std::vector<double> out(total.size());
    for (std::size_t k = 0; k < total.size(); ++k)
        out[k] = total[k] > 0 ? static_cast<double>(disagree[k]) / total[k]
                              : std::numeric_limits<double>::quiet_NaN();
    return out;
}

void calibration_accumulate(const IsingProblem& problem, const CalibrationConfig& cfg,
                            std::uint64_t instance_seed, CalibrationHistogram& hist) {
    cfg.validate();
    if (hist.total.empty()) {
        hist.total.assign(cfg.bins, 0);
        hist.agree.assign(cfg.bins, 0);
        hist.disagree.assign(cfg.bins, 0);
    }

    const GroundStates oracle = exhaustive_solve(problem, cfg.exhaustive_cap);
    if (oracle.configs.size() != 1)
        throw DegenerateInstanceError("instance rejected: ground state is not unique");
    const SpinConfig& ground = oracle.configs.front();

    AnnealParams params;
    params.temperature = cfg.temperature;
    params.tau = cfg.tau;
    params.trotter_slices = cfg.trotter_slices;
    params.reads = cfg.reads;
    params.seed = instance_seed;

    const ClusterSet clusters = ClusterSet::singletons(problem.n);
    const Belief init = f_init(clusters, problem.n);
    const CandidateSet reads = infer(BackendKind::Piqa, init, problem, params);
    const Belief raw = belief_raw(reads, clusters);

    const double width = 0.5 / cfg.bins;
    for (int i = 0; i < problem.n; ++i) {
        const double p = raw.uncertainty[i];
        const int bin = std::min(static_cast<int>(p / width), cfg.bins - 1);
        ++hist.total[bin];
        if (raw.values[i] == ground[i])
            ++hist.agree[bin];
        else
            ++hist.disagree[bin];
    }
    ++hist.instances_used;
}

CalibrationHistogram run_calibration(const CalibrationConfig& cfg) {
    cfg.validate();
    CalibrationHistogram hist;
    std::uint64_t stream = 0;
    int rejected = 0;
    while (hist.instances_used < cfg.instances) {
        const std::uint64_t instance_seed = derive_seed(cfg.seed, stream++);
        const IsingProblem problem = generate_sk_fixed(cfg.n, instance_seed);
        try {
            calibration_accumulate(problem, cfg, instance_seed, hist);
        } catch (const DegenerateInstanceError&) {
            // continuous couplers make this a measure-zero event; draw again
            if (++rejected > 10 * cfg.instances)
                throw std::runtime_error("too many degenerate instances; check the generator");
        }
    }
    return hist;
}

std::string format_calibration_csv(const CalibrationHistogram& hist,
                                   const CalibrationConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "# uncertainty calibration histogram\n";
    out << "# config instances=" << cfg.instances << " n=" << cfg.n << " reads=" << cfg.reads
        << " bins=" << cfg.bins << " T=" << cfg.temperature << " tau=" << cfg.tau
        << " trotter_slices=" << cfg.trotter_slices << " seed=" << cfg.seed << "\n";
    out << "# note: every bit of every instance is counted, including instances whose ground\n";
    out << "# note: state was never sampled\n";
    out << "bin_lo,bin_hi,total,agree,disagree\n";
    const double width = 0.5 / cfg.bins;
    for (std::size_t k = 0; k < hist.total.size(); ++k) {
        out << k * width << "," << (k + 1) * width << "," << hist.total[k] << ","
            << hist.agree[k] << "," << hist.disagree[k] << "\n";
    }
    return out.str();
}

void write_calibration_csv(const CalibrationHistogram& hist, const CalibrationConfig& cfg,
                           const std::string& path) {
    write_text(path, format_calibration_csv(hist, cfg));
}

std::string format_ground_states(const GroundStates& gs) {
    std::ostringstream out;
    out.precision(17);
    out << "energy " << gs.energy << "\n";
    for (const auto& c : gs.configs) {
        out << "config";
        for (int s : c) out << " " << s;
        out << "\n";
    }
    return out.str();
}

void run_oracle(const std::string& instance_path, const std::string& out_path, int cap) {
    const IsingProblem problem = read_instance(instance_path);
    const GroundStates gs = exhaustive_solve(problem, cap);
    std::ostringstream out;
    out << "# exhaustive ground states of " << instance_path << "\n";
    out << format_ground_states(gs);
    write_text(out_path, out.str());
}

std::string format_bp_csv(const IsingProblem& problem, const BPParams& params) {
    const Marginals m = bp_run(problem, params);
    const ClusterSet clusters = ClusterSet::singletons(problem.n);
    const Belief b = marginal_to_belief(m, clusters);

    std::ostringstream out;
    out.precision(17);
    out << "# config T=" << params.temperature << " max_iters=" << params.max_iters
        << " damping=" << params.damping << " tolerance=" << params.tolerance << "\n";
    out << "# converged=" << (m.converged ? 1 : 0) << " iterations=" << m.iterations << "\n";
    out << "bit,b_plus,b_minus,S,P\n";
    for (int i = 0; i < problem.n; ++i) {
        out << i << "," << m.b[i][0] << "," << m.b[i][1] << "," << b.values[i] << ","
            << b.uncertainty[i] << "\n";
    }
    return out.str();
}

void run_bp_csv(const std::string& instance_path, const BPParams& params,
                const std::string& out_path) {
    const IsingProblem problem = read_instance(instance_path);
    write_text(out_path, format_bp_csv(problem, params));
}

}  // namespace infprim
