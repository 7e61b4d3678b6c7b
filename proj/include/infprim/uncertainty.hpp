#pragma once

#include <string>
#include <utility>
#include <vector>

namespace infprim {

// Annealing energy scales A(s) (driver) and B(s) (problem) on s in [0, 1],
// with A non-increasing and B non-decreasing. Either a linear family
// A(s) = gamma0*(1-s), B(s) = s, or tabulated curves with linear
// interpolation. t_phys is the physical bath temperature used by the
// quadrature-corrected uncertainty map (0 = quantum-only).
class ScheduleFunctions {
public:
    static ScheduleFunctions linear(double gamma0 = 1.0, double t_phys = 0.0);
    static ScheduleFunctions tabulated(std::vector<std::pair<double, double>> a_points,
                                       std::vector<std::pair<double, double>> b_points,
                                       double t_phys = 0.0);
    // Two-column "s value" text files, one per function.
    static ScheduleFunctions from_files(const std::string& a_path, const std::string& b_path,
                                        double t_phys = 0.0);

    double a(double s) const;
    double b(double s) const;
    double t_phys() const { return t_phys_; }

    bool is_linear() const { return kind_ == Kind::Linear; }
    double gamma0() const { return gamma0_; }
    const std::vector<std::pair<double, double>>& a_points() const { return a_pts_; }
    const std::vector<std::pair<double, double>>& b_points() const { return b_pts_; }

private:
    enum class Kind { Linear, Tabulated };
    Kind kind_ = Kind::Linear;
    double gamma0_ = 1.0;
    double t_phys_ = 0.0;
    std::vector<std::pair<double, double>> a_pts_;
    std::vector<std::pair<double, double>> b_pts_;

    void check() const;
};

// Effective temperature of a single spin held at s_prime, from the two-level
// spectrum of -A sigma_x + B sigma_z matched to a Boltzmann ratio:
//   T'(s') = 2 / ln(|sqrt(A^2+B^2)/A + B/A|^2).
// Returns +inf where B = 0 and 0 in the A -> 0 limit.
double effective_temperature(double s_prime, const ScheduleFunctions& sf);

// T_N = 2 / ln((1-P)/P) for P in (0, 0.5]; P = 0.5 gives +inf.
double nishimori_temperature(double p);

// Uncertainty encoded by holding a spin at s_prime:
//   P(s') = [1 + |sqrt(A^2+B^2)/A + B/A|^2]^-1,
// the unit-constant inversion of T'(s') = T_N(P). Endpoints: B=0 -> 0.5,
// A=0 -> 0.
double uncertainty_from_s(double s_prime, const ScheduleFunctions& sf);

// Same with thermal noise added in quadrature:
//   P(s') = [1 + exp(2 / sqrt(T'^2 + (T_phys/B)^2))]^-1.
// Reduces exactly to uncertainty_from_s at T_phys = 0; B = 0 -> 0.5.
double uncertainty_from_s_thermal(double s_prime, const ScheduleFunctions& sf);

// Numerical inverse of the uncertainty map (thermal form when t_phys > 0),
// bisected to |s - s*| < 1e-9. P = 0.5 -> 0, P = 0 -> 1. Throws if the map
// is not strictly decreasing for this schedule.
double s_from_uncertainty(double p, const ScheduleFunctions& sf);

}  // namespace infprim
