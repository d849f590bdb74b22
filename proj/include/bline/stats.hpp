#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <vector>

namespace bline::stats {

// p-values smaller than this are reported as the cap with `capped` set,
// never as a hard zero.
inline constexpr double kMinPValue = 1e-300;

struct PValue {
    double p = 1.0;
    bool capped = false;
};

struct PearsonResult {
    double r;
    PValue p;  // two-sided, via the t transform with n-2 dof
};

struct TTestResult {
    double t;
    PValue p;  // two-sided, n-1 dof
};

struct ZeroVarianceError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

double mean(std::span<const double> xs);
double sample_sd(std::span<const double> xs);       // ddof = 1
double standard_error(std::span<const double> xs);  // sample_sd / sqrt(n), 0 when n < 2

// Standard normal CDF (erfc-based, machine precision).
double normal_cdf(double z);

// Inverse standard normal CDF: Acklam's rational approximation plus one
// Halley refinement against the erfc CDF; absolute error well below 1e-9.
double normal_quantile(double p);

// Regularized incomplete beta I_x(a,b), Lentz continued fraction.
double regularized_incomplete_beta(double a, double b, double x);

// Two-sided tail probability of Student's t with dof degrees of freedom.
PValue student_t_two_sided_p(double t, double dof);

// Sample Pearson correlation with two-sided p. Rejects length mismatches,
// n < 3, and zero variance in either argument (ZeroVarianceError).
PearsonResult pearson(std::span<const double> xs, std::span<const double> ys);

// Paired t-test on xs - ys. All-zero differences give t = 0, p = 1; zero
// variance with non-zero mean gives an infinite t and a capped p.
TTestResult paired_t(std::span<const double> xs, std::span<const double> ys);

struct BootstrapConfig {
    std::size_t replicates = 10000;  // >= 100
    double alpha = 0.05;             // in (0,1)
    std::uint64_t seed = 0;
};

using Statistic = std::function<double(std::span<const double>)>;

// Statistic over `replicates` resamples drawn with replacement. Replicate i
// is generated from its own stream derived from (seed, i), so results are
// independent of evaluation order.
std::vector<double> bootstrap_replicates(std::span<const double> samples,
                                         const Statistic& statistic,
                                         const BootstrapConfig& cfg);

struct BcaResult {
    double low;
    double high;
    double bias_z0;       // Phi^-1(fraction of replicates below the observed value)
    double acceleration;  // jackknife skewness term
};

// Bias-corrected and accelerated bootstrap CI at level 1 - alpha. Endpoint
// quantiles use the nearest-rank rule on the sorted replicate list.
// Degenerate replicate distributions collapse to a point interval.
BcaResult bca_bootstrap(std::span<const double> samples,
                        const Statistic& statistic,
                        const BootstrapConfig& cfg);

}  // namespace bline::stats
