#include "infprim/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "infprim/errors.hpp"

namespace infprim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double interpolate(const std::vector<std::pair<double, double>>& pts, double s) {
    if (s <= pts.front().first) return pts.front().second;
    if (s >= pts.back().first) return pts.back().second;
    auto hi = std::upper_bound(pts.begin(), pts.end(), s,
                               [](double x, const auto& p) { return x < p.first; });
    auto lo = hi - 1;
    const double w = (s - lo->first) / (hi->first - lo->first);
    return lo->second + w * (hi->second - lo->second);
}

std::vector<std::pair<double, double>> read_curve(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open schedule file: " + path);
    std::vector<std::pair<double, double>> pts;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first) || first.front() == '#') continue;
        double s, v;
        std::istringstream row(line);
        if (!(row >> s >> v)) {
            std::ostringstream msg;
            msg << path << ":" << lineno << ": expected two columns 's value'";
            throw ParseError(msg.str());
        }
        pts.push_back({s, v});
    }
    return pts;
}

}  // namespace

ScheduleFunctions ScheduleFunctions::linear(double gamma0, double t_phys) {
    ScheduleFunctions sf;
    sf.kind_ = Kind::Linear;
    sf.gamma0_ = gamma0;
    sf.t_phys_ = t_phys;
    sf.check();
    return sf;
}

ScheduleFunctions ScheduleFunctions::tabulated(std::vector<std::pair<double, double>> a_points,
                                               std::vector<std::pair<double, double>> b_points,
                                               double t_phys) {
    ScheduleFunctions sf;
    sf.kind_ = Kind::Tabulated;
    sf.a_pts_ = std::move(a_points);
    sf.b_pts_ = std::move(b_points);
    sf.t_phys_ = t_phys;
    sf.check();
    return sf;
}

ScheduleFunctions ScheduleFunctions::from_files(const std::string& a_path,
                                                const std::string& b_path, double t_phys) {
    return tabulated(read_curve(a_path), read_curve(b_path), t_phys);
}

double ScheduleFunctions::a(double s) const {
    if (kind_ == Kind::Linear) return gamma0_ * (1.0 - s);
    return interpolate(a_pts_, s);
}

double ScheduleFunctions::b(double s) const {
    if (kind_ == Kind::Linear) return s;
    return interpolate(b_pts_, s);
}

void ScheduleFunctions::check() const {
    if (t_phys_ < 0.0) throw std::invalid_argument("physical temperature must be >= 0");
    if (kind_ == Kind::Linear) {
        if (!(gamma0_ > 0.0)) throw std::invalid_argument("driver scale gamma0 must be > 0");
        return;
    }
    for (const auto* pts : {&a_pts_, &b_pts_}) {
        if (pts->size() < 2) throw std::invalid_argument("tabulated schedule needs >= 2 points");
        for (std::size_t k = 1; k < pts->size(); ++k)
            if ((*pts)[k].first <= (*pts)[k - 1].first)
                throw std::invalid_argument("schedule grid must be strictly increasing in s");
        for (const auto& [s, v] : *pts) {
            if (s < 0.0 || s > 1.0) throw std::invalid_argument("schedule grid must lie in [0, 1]");
            if (v < 0.0) throw std::invalid_argument("schedule values must be >= 0");
        }
    }
    for (std::size_t k = 1; k < a_pts_.size(); ++k)
        if (a_pts_[k].second > a_pts_[k - 1].second)
            throw std::invalid_argument("A(s) must be non-increasing");
    for (std::size_t k = 1; k < b_pts_.size(); ++k)
        if (b_pts_[k].second < b_pts_[k - 1].second)
            throw std::invalid_argument("B(s) must be non-decreasing");
    // Endpoint separation: the driver must dominate at s=0 and the problem
    // at s=1 (a vanishing opposite scale trivially satisfies this).
    const double a0 = a(0.0), b0 = b(0.0), a1 = a(1.0), b1 = b(1.0);
    if (!(a0 > 10.0 * b0)) throw std::invalid_argument("schedule needs A(0) > 10 B(0)");
    if (!(b1 > 10.0 * a1)) throw std::invalid_argument("schedule needs B(1) > 10 A(1)");
}

namespace {

// |sqrt(A^2+B^2)/A + B/A|^2, the Boltzmann-ratio factor; +inf when A = 0.
double spectrum_ratio(double s_prime, const ScheduleFunctions& sf) {
    if (s_prime < 0.0 || s_prime > 1.0)
        throw std::domain_error("s' must lie in [0, 1]");
    const double a = sf.a(s_prime);
    const double b = sf.b(s_prime);
    if (a == 0.0 && b == 0.0)
        throw std::domain_error("degenerate schedule: A and B both vanish");
    if (a == 0.0) return kInf;
    const double r = (std::sqrt(a * a + b * b) + b) / a;
    return r * r;
}

}  // namespace

double effective_temperature(double s_prime, const ScheduleFunctions& sf) {
    const double x = spectrum_ratio(s_prime, sf);
    if (x == kInf) return 0.0;
    if (x <= 1.0) return kInf;  // B = 0: ratio collapses to 1
    return 2.0 / std::log(x);
}

double nishimori_temperature(double p) {
    if (!(p > 0.0 && p <= 0.5)) throw std::domain_error("P must lie in (0, 0.5]");
    if (p == 0.5) return kInf;
    return 2.0 / std::log((1.0 - p) / p);
}

double uncertainty_from_s(double s_prime, const ScheduleFunctions& sf) {
    const double x = spectrum_ratio(s_prime, sf);
    if (x == kInf) return 0.0;
    return 1.0 / (1.0 + x);
}

double uncertainty_from_s_thermal(double s_prime, const ScheduleFunctions& sf) {
    if (s_prime < 0.0 || s_prime > 1.0)
        throw std::domain_error("s' must lie in [0, 1]");
    const double b = sf.b(s_prime);
    if (b == 0.0) {
        if (sf.a(s_prime) == 0.0)
            throw std::domain_error("degenerate schedule: A and B both vanish");
        return 0.5;  // infinite thermal smearing limit
    }
    const double t_eff = effective_temperature(s_prime, sf);
    if (t_eff == kInf) return 0.5;
    const double width = std::sqrt(t_eff * t_eff + (sf.t_phys() / b) * (sf.t_phys() / b));
    if (width == 0.0) return 0.0;
    return 1.0 / (1.0 + std::exp(2.0 / width));
}

double s_from_uncertainty(double p, const ScheduleFunctions& sf) {
    if (!(p >= 0.0 && p <= 0.5)) throw std::domain_error("P must lie in [0, 0.5]");
    const bool thermal = sf.t_phys() > 0.0;
    auto pf = [&](double s) {
        return thermal ? uncertainty_from_s_thermal(s, sf) : uncertainty_from_s(s, sf);
    };

    // Strict monotone decrease is what makes the inverse well defined.
    const int grid = 64;
    double prev = pf(0.0);
    for (int k = 1; k <= grid; ++k) {
        const double cur = pf(static_cast<double>(k) / grid);
        if (cur >= prev)
            throw std::invalid_argument(
                "schedule does not yield a strictly decreasing uncertainty map; inversion unsupported");
        prev = cur;
    }

    if (p >= pf(0.0)) return 0.0;
    if (p <= pf(1.0)) return 1.0;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (pf(mid) > p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace infprim
