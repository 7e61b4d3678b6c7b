#include "infprim/ising.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "infprim/errors.hpp"

namespace infprim {

void IsingProblem::validate() const {
    if (n < 0) throw std::invalid_argument("spin count must be non-negative");
    if (static_cast<int>(fields.size()) != n)
        throw std::invalid_argument("field list length does not match spin count");
    std::set<std::pair<int, int>> seen;
    for (const auto& c : couplers) {
        if (c.i < 0 || c.i >= n || c.j < 0 || c.j >= n)
            throw std::invalid_argument("coupler index out of range");
        if (c.i >= c.j) throw std::invalid_argument("couplers must satisfy i < j");
        if (!seen.insert({c.i, c.j}).second)
            throw std::invalid_argument("duplicate coupler pair");
    }
}

bool IsingProblem::has_fields() const {
    return std::any_of(fields.begin(), fields.end(), [](double h) { return h != 0.0; });
}

double energy(const IsingProblem& p, const SpinConfig& s) {
    if (static_cast<int>(s.size()) != p.n)
        throw std::invalid_argument("configuration length does not match problem size");
    double e = p.offset;
    for (int i = 0; i < p.n; ++i) e -= p.fields[i] * s[i];
    for (const auto& c : p.couplers) e -= c.value * s[c.i] * s[c.j];
    return e;
}

IsingProblem generate_sk(int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("SK instance needs at least 2 spins");
    IsingProblem p;
    p.n = n;
    p.fields.assign(n, 0.0);
    p.couplers.reserve(static_cast<std::size_t>(n) * (n - 1) / 2);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uniform(-1.0, 1.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) p.couplers.push_back({i, j, uniform(rng)});
    return p;
}

ReducedProblem reduce_problem(const IsingProblem& p, const SpinConfig& pinned) {
    p.validate();
    if (static_cast<int>(pinned.size()) != p.n)
        throw std::invalid_argument("pinned list length does not match problem size");
    for (int v : pinned)
        if (v != -1 && v != 0 && v != 1)
            throw std::invalid_argument("pinned entries must be -1, 0, or +1");

    ReducedProblem out;
    out.pinned = pinned;
    std::vector<int> new_index(p.n, -1);
    for (int i = 0; i < p.n; ++i) {
        if (pinned[i] == 0) {
            new_index[i] = static_cast<int>(out.kept.size());
            out.kept.push_back(i);
        }
    }
    IsingProblem& r = out.problem;
    r.n = static_cast<int>(out.kept.size());
    r.fields.assign(r.n, 0.0);
    r.offset = p.offset;
    for (int i = 0; i < p.n; ++i) {
        if (pinned[i] == 0)
            r.fields[new_index[i]] = p.fields[i];
        else
            r.offset -= p.fields[i] * pinned[i];
    }
    for (const auto& c : p.couplers) {
        const int vi = pinned[c.i];
        const int vj = pinned[c.j];
        if (vi == 0 && vj == 0) {
            r.couplers.push_back({new_index[c.i], new_index[c.j], c.value});
        } else if (vi == 0) {
            // -J s_i v_j == -(J v_j) s_i, so the coupler folds into the field of i
            r.fields[new_index[c.i]] += c.value * vj;
        } else if (vj == 0) {
            r.fields[new_index[c.j]] += c.value * vi;
        } else {
            r.offset -= c.value * vi * vj;
        }
    }
    return out;
}

IsingProblem fix_spin(const IsingProblem& p, int index, int value) {
    if (index < 0 || index >= p.n) throw std::out_of_range("spin index out of range");
    if (value != 1 && value != -1) throw std::invalid_argument("fixed value must be +1 or -1");
    SpinConfig pinned(p.n, 0);
    pinned[index] = value;
    return reduce_problem(p, pinned).problem;
}

SpinConfig lift_config(const ReducedProblem& r, const SpinConfig& reduced) {
    if (reduced.size() != r.kept.size())
        throw std::invalid_argument("reduced configuration length mismatch");
    SpinConfig full = r.pinned;
    for (std::size_t k = 0; k < r.kept.size(); ++k) full[r.kept[k]] = reduced[k];
    return full;
}

GroundStates exhaustive_solve(const IsingProblem& p, int cap) {
    p.validate();
    if (p.n > cap) {
        std::ostringstream msg;
        msg << "exhaustive search refused: " << p.n << " spins exceeds cap of " << cap;
        throw std::invalid_argument(msg.str());
    }
    GroundStates out;
    if (p.n == 0) {
        out.configs.push_back({});
        out.energy = p.offset;
        return out;
    }

    std::vector<std::vector<std::pair<int, double>>> adj(p.n);
    for (const auto& c : p.couplers) {
        adj[c.i].push_back({c.j, c.value});
        adj[c.j].push_back({c.i, c.value});
    }

    SpinConfig s(p.n, 1);
    double e = energy(p, s);
    double best = e;
    // Gray-code walk with a shortlist tolerance; candidates are re-evaluated
    // exactly afterwards so accumulated float drift cannot change the result.
    const double tol = 1e-9;
    std::vector<SpinConfig> shortlist{s};
    const std::uint64_t total = 1ULL << p.n;
    for (std::uint64_t k = 1; k < total; ++k) {
        const int i = std::countr_zero(k);
        double delta = 2.0 * p.fields[i] * s[i];
        for (const auto& [j, v] : adj[i]) delta += 2.0 * v * s[i] * s[j];
        s[i] = -s[i];
        e += delta;
        if (e < best - tol) {
            best = e;
            shortlist.clear();
            shortlist.push_back(s);
        } else if (e <= best + tol) {
            shortlist.push_back(s);
        }
    }

    double exact_best = 0.0;
    std::vector<double> exact(shortlist.size());
    for (std::size_t k = 0; k < shortlist.size(); ++k) {
        exact[k] = energy(p, shortlist[k]);
        if (k == 0 || exact[k] < exact_best) exact_best = exact[k];
    }
    const double keep_tol = 1e-12 * (1.0 + std::abs(exact_best));
    for (std::size_t k = 0; k < shortlist.size(); ++k)
        if (exact[k] <= exact_best + keep_tol) out.configs.push_back(std::move(shortlist[k]));
    out.energy = exact_best;
    return out;
}

SpinConfig global_flip(const SpinConfig& c) {
    SpinConfig out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) out[i] = -c[i];
    return out;
}

int hamming_distance(const SpinConfig& a, const SpinConfig& b) {
    if (a.size() != b.size()) throw std::invalid_argument("hamming distance needs equal lengths");
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) ++d;
    return d;
}

namespace {

[[noreturn]] void parse_fail(const std::string& name, int line, const std::string& what) {
    std::ostringstream msg;
    msg << name << ":" << line << ": " << what;
    throw ParseError(msg.str());
}

}  // namespace

IsingProblem parse_instance(std::istream& in, const std::string& name) {
    IsingProblem p;
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    std::vector<bool> field_seen;
    std::set<std::pair<int, int>> pair_seen;

    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;  // blank

        if (tok == "#") {
            std::string key;
            if (ls >> key && key == "offset") {
                double v = 0.0;
                if (ls >> v) p.offset = v;
            }
            continue;
        }
        if (tok.front() == '#') continue;

        if (!header_seen) {
            std::string version, nfield;
            if (tok != "ising" || !(ls >> version >> nfield) || version != "v1" ||
                nfield.rfind("n=", 0) != 0)
                parse_fail(name, lineno, "expected header 'ising v1 n=<N>'");
            try {
                p.n = std::stoi(nfield.substr(2));
            } catch (const std::exception&) {
                parse_fail(name, lineno, "bad spin count in header");
            }
            if (p.n < 0) parse_fail(name, lineno, "negative spin count");
            p.fields.assign(p.n, 0.0);
            field_seen.assign(p.n, false);
            header_seen = true;
            continue;
        }

        if (tok == "h") {
            int i;
            double v;
            if (!(ls >> i >> v)) parse_fail(name, lineno, "expected 'h <i> <value>'");
            if (i < 0 || i >= p.n) parse_fail(name, lineno, "field index out of range");
            if (field_seen[i]) parse_fail(name, lineno, "duplicate field entry");
            field_seen[i] = true;
            p.fields[i] = v;
        } else if (tok == "J") {
            int i, j;
            double v;
            if (!(ls >> i >> j >> v)) parse_fail(name, lineno, "expected 'J <i> <j> <value>'");
            if (i < 0 || i >= p.n || j < 0 || j >= p.n)
                parse_fail(name, lineno, "coupler index out of range");
            if (i >= j) parse_fail(name, lineno, "couplers must satisfy i < j");
            if (!pair_seen.insert({i, j}).second) parse_fail(name, lineno, "duplicate coupler pair");
            p.couplers.push_back({i, j, v});
        } else {
            parse_fail(name, lineno, "unknown record '" + tok + "'");
        }
    }
    if (!header_seen) parse_fail(name, lineno, "missing 'ising v1' header");
    p.validate();
    return p;
}

IsingProblem read_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open instance file: " + path);
    return parse_instance(in, path);
}

std::string format_instance(const IsingProblem& p) {
    p.validate();
    std::ostringstream out;
    out.precision(17);
    out << "ising v1 n=" << p.n << "\n";
    out << "# convention: energy(s) = -sum_i h_i*s_i - sum_{i<j} J_ij*s_i*s_j\n";
    if (p.offset != 0.0) out << "# offset " << p.offset << "\n";
    for (int i = 0; i < p.n; ++i)
        if (p.fields[i] != 0.0) out << "h " << i << " " << p.fields[i] << "\n";
    for (const auto& c : p.couplers) out << "J " << c.i << " " << c.j << " " << c.value << "\n";
    return out.str();
}

void write_instance(const IsingProblem& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open instance file for writing: " + path);
    out << format_instance(p);
    if (!out) throw IoError("failed writing instance file: " + path);
}

}  // namespace infprim
