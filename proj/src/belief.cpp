#include "infprim/belief.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace infprim {

void ClusterSet::validate(int n_bits) const {
    std::set<std::vector<int>> seen;
    for (const auto& c : clusters) {
        if (c.empty()) throw std::invalid_argument("empty cluster");
        std::vector<int> sorted = c;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("repeated spin inside cluster");
        for (int i : sorted)
            if (i < 0 || i >= n_bits) throw std::invalid_argument("cluster spin index out of range");
        if (!seen.insert(std::move(sorted)).second)
            throw std::invalid_argument("duplicate cluster");
    }
}

std::vector<int> ClusterSet::singleton_of_spin(int n_bits) const {
    std::vector<int> out(n_bits, -1);
    for (int k = 0; k < size(); ++k) {
        const auto& c = clusters[k];
        if (c.size() == 1 && c[0] >= 0 && c[0] < n_bits && out[c[0]] == -1) out[c[0]] = k;
    }
    return out;
}

ClusterSet ClusterSet::singletons(int n_bits) {
    ClusterSet r;
    r.clusters.reserve(n_bits);
    for (int i = 0; i < n_bits; ++i) r.clusters.push_back({i});
    return r;
}

void Belief::validate() const {
    clusters.validate(n_bits());
    if (uncertainty.size() != clusters.clusters.size())
        throw std::invalid_argument("uncertainty list length must equal cluster count");
    for (double p : uncertainty)
        if (!(p >= 0.0 && p <= 0.5))
            throw std::domain_error("uncertainty values must lie in [0, 0.5]");
    for (int s : values)
        if (s != 1 && s != -1) throw std::invalid_argument("belief values must be +1 or -1");
}

void CandidateSet::validate() const {
    if (configs.size() != energies.size())
        throw std::invalid_argument("candidate and energy lists must have equal length");
    for (const auto& g : configs) {
        if (g.size() != configs.front().size())
            throw std::invalid_argument("candidates must share one length");
        for (int s : g)
            if (s != 1 && s != -1) throw std::invalid_argument("candidate entries must be +1 or -1");
    }
}

int CandidateSet::best_index() const {
    if (configs.empty()) throw std::invalid_argument("empty candidate set");
    int best = 0;
    for (int j = 1; j < size(); ++j)
        if (energies[j] < energies[best]) best = j;
    return best;
}

double CandidateSet::min_energy() const { return energies[best_index()]; }

}  // namespace infprim
