#include "bline/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bline/rng.hpp"

namespace bline::stats {

namespace {

PValue make_p(double raw) {
    if (raw < kMinPValue) return {kMinPValue, true};
    return {std::min(raw, 1.0), false};
}

}  // namespace

double mean(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean: empty input");
    double s = 0.0;
    for (const double x : xs) s += x;
    return s / static_cast<double>(xs.size());
}

double sample_sd(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean(xs);
    double ss = 0.0;
    for (const double x : xs) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double standard_error(std::span<const double> xs) {
    if (xs.size() < 2) return 0.0;
    return sample_sd(xs) / std::sqrt(static_cast<double>(xs.size()));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("normal_quantile: p must be in (0,1)");

    // Acklam's rational approximation.
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    double x;
    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    } else if (p <= 1.0 - p_low) {
        const double q = p - 0.5;
        const double r = q * q;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
            ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }

    // One Halley step against the exact CDF.
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
    x = x - u / (1.0 + x * u / 2.0);
    return x;
}

namespace {

// Continued fraction for the incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
    constexpr int max_iter = 300;
    constexpr double eps = 3e-16;
    constexpr double fpmin = 1e-300;

    const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= max_iter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::fabs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < eps) break;
    }
    return h;
}

}  // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * betacf(a, b, x) / a;
    }
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

PValue student_t_two_sided_p(double t, double dof) {
    if (dof <= 0.0) throw std::invalid_argument("student_t_two_sided_p: dof must be > 0");
    if (std::isnan(t)) throw std::invalid_argument("student_t_two_sided_p: t is NaN");
    if (std::isinf(t)) return {kMinPValue, true};
    const double x = dof / (dof + t * t);
    return make_p(regularized_incomplete_beta(dof / 2.0, 0.5, x));
}

PearsonResult pearson(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("pearson: length mismatch");
    const std::size_t n = xs.size();
    if (n < 3) throw std::invalid_argument("pearson: need at least 3 points");

    const double mx = mean(xs), my = mean(ys);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = xs[i] - mx, dy = ys[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw ZeroVarianceError("pearson: zero variance input");

    double r = sxy / std::sqrt(sxx * syy);
    r = std::clamp(r, -1.0, 1.0);

    const double dof = static_cast<double>(n - 2);
    PValue p;
    if (std::fabs(r) >= 1.0) {
        p = {kMinPValue, true};
    } else {
        const double t = r * std::sqrt(dof / (1.0 - r * r));
        p = student_t_two_sided_p(t, dof);
    }
    return {r, p};
}

TTestResult paired_t(std::span<const double> xs, std::span<const double> ys) {
    if (xs.size() != ys.size()) throw std::invalid_argument("paired_t: length mismatch");
    const std::size_t n = xs.size();
    if (n < 2) throw std::invalid_argument("paired_t: need at least 2 pairs");

    std::vector<double> diff(n);
    for (std::size_t i = 0; i < n; ++i) diff[i] = xs[i] - ys[i];
    const double m = mean(diff);
    const double se = standard_error(diff);
    if (se == 0.0) {
        if (m == 0.0) return {0.0, {1.0, false}};
        const double inf = std::numeric_limits<double>::infinity();
        return {m > 0.0 ? inf : -inf, {kMinPValue, true}};
    }
    const double t = m / se;
    return {t, student_t_two_sided_p(t, static_cast<double>(n - 1))};
}

std::vector<double> bootstrap_replicates(std::span<const double> samples,
                                         const Statistic& statistic,
                                         const BootstrapConfig& cfg) {
    if (samples.empty()) throw std::invalid_argument("bootstrap: empty sample");
    if (cfg.replicates < 100) throw std::invalid_argument("bootstrap: replicates must be >= 100");
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0))
        throw std::invalid_argument("bootstrap: alpha must be in (0,1)");

    const std::size_t n = samples.size();
    std::vector<double> reps(cfg.replicates);
    std::vector<double> resample(n);
    for (std::size_t rep = 0; rep < cfg.replicates; ++rep) {
        Rng rng = derive_rng(cfg.seed, "bootstrap", rep);
        for (std::size_t i = 0; i < n; ++i) resample[i] = samples[rng.below(n)];
        reps[rep] = statistic(resample);
    }
    return reps;
}

namespace {

// Nearest-rank quantile on an already sorted list.
double nearest_rank(const std::vector<double>& sorted, double p) {
    const auto b = static_cast<double>(sorted.size());
    auto k = static_cast<long>(std::ceil(p * b));
    k = std::clamp<long>(k, 1, static_cast<long>(sorted.size()));
    return sorted[static_cast<std::size_t>(k - 1)];
}

}  // namespace

BcaResult bca_bootstrap(std::span<const double> samples,
                        const Statistic& statistic,
                        const BootstrapConfig& cfg) {
    const double observed = statistic(samples);
    std::vector<double> reps = bootstrap_replicates(samples, statistic, cfg);
    std::sort(reps.begin(), reps.end());

    if (reps.front() == reps.back())
        return {reps.front(), reps.front(), 0.0, 0.0};

    // Bias correction from the replicate distribution.
    std::size_t below = 0;
    for (const double r : reps)
        if (r < observed) ++below;
    const double frac = static_cast<double>(below) / static_cast<double>(reps.size());
    double z0;
    if (frac <= 0.0) {
        z0 = -std::numeric_limits<double>::infinity();
    } else if (frac >= 1.0) {
        z0 = std::numeric_limits<double>::infinity();
    } else {
        z0 = normal_quantile(frac);
    }

    // Acceleration from jackknife skewness of leave-one-out statistics.
    const std::size_t n = samples.size();
    double accel = 0.0;
    if (n >= 2) {
        std::vector<double> loo(n);
        std::vector<double> reduced(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t k = 0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) reduced[k++] = samples[j];
            loo[i] = statistic(reduced);
        }
        const double loo_mean = mean(loo);
        double s2 = 0.0, s3 = 0.0;
        for (const double v : loo) {
            const double d = loo_mean - v;
            s2 += d * d;
            s3 += d * d * d;
        }
        if (s2 > 0.0) accel = s3 / (6.0 * std::pow(s2, 1.5));
    }

    const double z_lo = normal_quantile(cfg.alpha / 2.0);
    const double z_hi = normal_quantile(1.0 - cfg.alpha / 2.0);
    const auto adjusted = [&](double z) {
        if (std::isinf(z0)) return z0 > 0.0 ? 1.0 : 0.0;
        const double num = z0 + z;
        const double denom = 1.0 - accel * num;
        if (denom <= 0.0) return num > 0.0 ? 1.0 : 0.0;
        const double arg = z0 + num / denom;
        return normal_cdf(arg);
    };

    double low = nearest_rank(reps, adjusted(z_lo));
    double high = nearest_rank(reps, adjusted(z_hi));
    if (low > high) std::swap(low, high);
    return {low, high, z0, accel};
}

}  // namespace bline::stats
