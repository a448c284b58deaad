#include "dyad/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <numeric>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

namespace dyad {

std::vector<double> PairedSample::differences() const {
    if (a.size() != b.size()) throw InputError("paired sample needs equal-length conditions");
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return d;
}

std::string_view to_string(TestKind k) { return k == TestKind::PairedT ? "PairedT" : "Wilcoxon"; }

namespace {

template <std::size_t N>
double poly(const double (&c)[N], double x) {
    double r = 0.0;
    for (std::size_t i = N; i-- > 0;) r = r * x + c[i];
    return r;
}

double normal_quantile(double p) { return boost::math::quantile(boost::math::normal(), p); }

double normal_upper(double z, double mean, double sd) {
    return 0.5 * std::erfc((z - mean) / (sd * std::numbers::sqrt2));
}

}  // namespace

ShapiroWilkResult shapiro_wilk(std::span<const double> data) {
    const std::size_t n = data.size();
    if (n < 3) throw InputError("Shapiro-Wilk needs at least 3 values");
    if (n > 5000) throw InputError("Shapiro-Wilk supports at most 5000 values");
    std::vector<double> x(data.begin(), data.end());
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (!(range > 1e-19 * std::max(1.0, std::abs(x.front())))) throw InputError("Shapiro-Wilk on zero-variance data");

    static constexpr double g[] = {-2.273, 0.459};
    static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
    static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static constexpr double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
    static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};

    const std::size_t half = n / 2;
    const double an = static_cast<double>(n);
    std::vector<double> a(half);  // upper-half coefficients, a[0] pairs with the extremes
    if (n == 3) {
        a[0] = std::numbers::sqrt2 / 2.0;
    } else {
        std::vector<double> m(half);
        double summ2 = 0.0;
        for (std::size_t i = 0; i < half; ++i) {
            m[i] = normal_quantile((static_cast<double>(i + 1) - 0.375) / (an + 0.25));
            summ2 += m[i] * m[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, rsn) - m[0] / ssumm2;
        std::size_t first_scaled;
        double fac;
        if (n > 5) {
            const double a2 = -m[1] / ssumm2 + poly(c2, rsn);
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0] - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            a[1] = a2;
            first_scaled = 2;
        } else {
            fac = std::sqrt((summ2 - 2.0 * m[0] * m[0]) / (1.0 - 2.0 * a1 * a1));
            first_scaled = 1;
        }
        a[0] = a1;
        for (std::size_t i = first_scaled; i < half; ++i) a[i] = -m[i] / fac;
    }

    // Full antisymmetric coefficient vector matching ascending order statistics.
    std::vector<double> coef(n, 0.0);
    for (std::size_t i = 0; i < half; ++i) {
        coef[i] = -a[i];
        coef[n - 1 - i] = a[i];
    }

    // W as the squared correlation between coefficients and range-scaled data.
    const double mean_a = std::accumulate(coef.begin(), coef.end(), 0.0) / an;
    double mean_x = 0.0;
    for (double v : x) mean_x += v / range;
    mean_x /= an;
    double ssa = 0.0, ssx = 0.0, sax = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = coef[i] - mean_a;
        const double dx = x[i] / range - mean_x;
        ssa += da * da;
        ssx += dx * dx;
        sax += da * dx;
    }
    const double root = std::sqrt(ssa * ssx);
    const double w1 = (root - sax) * (root + sax) / (ssa * ssx);
    const double w = 1.0 - w1;

    if (n == 3) {
        constexpr double six_over_pi = 6.0 / std::numbers::pi;
        constexpr double asin_sqrt_3_4 = std::numbers::pi / 3.0;
        const double p = six_over_pi * (std::asin(std::sqrt(std::min(w, 1.0))) - asin_sqrt_3_4);
        return {w, std::clamp(p, 0.0, 1.0)};
    }

    double y = std::log(w1);
    double mean, sd;
    if (n <= 11) {
        const double gamma = poly(g, an);
        if (y >= gamma) return {w, 1e-99};
        y = -std::log(gamma - y);
        mean = poly(c3, an);
        sd = std::exp(poly(c4, an));
    } else {
        const double ln_n = std::log(an);
        mean = poly(c5, ln_n);
        sd = std::exp(poly(c6, ln_n));
    }
    return {w, std::clamp(normal_upper(y, mean, sd), 0.0, 1.0)};
}

double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw InputError("degrees of freedom must be positive");
    if (std::isinf(t)) return 0.0;
    boost::math::students_t dist(df);
    return std::min(1.0, 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t))));
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::numbers::sqrt2); }

TestResult paired_t(const PairedSample& s) {
    const auto d = s.differences();
    const std::size_t n = d.size();
    if (n < 2) throw InputError("paired t needs at least two pairs");
    const double m = std::accumulate(d.begin(), d.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : d) ss += (v - m) * (v - m);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw DegenerateError("paired t with zero-variance differences");
    TestResult r;
    r.test = TestKind::PairedT;
    r.statistic = m / (sd / std::sqrt(static_cast<double>(n)));
    r.df = static_cast<int>(n) - 1;
    r.p_two_sided = student_t_two_sided_p(r.statistic, static_cast<double>(n - 1));
    r.n = static_cast<int>(n);
    return r;
}

std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    std::vector<double> ranks(v.size());
    for (std::size_t i = 0; i < order.size();) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double wilcoxon_exact_p(std::span<const double> diffs) {
    const std::size_t n = diffs.size();
    if (n == 0) throw InputError("exact signed-rank p needs at least one difference");
    if (n > 62) throw InputError("exact signed-rank p limited to small samples");
    std::vector<double> mags(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (diffs[i] == 0.0) throw InputError("exact signed-rank p expects non-zero differences");
        mags[i] = std::abs(diffs[i]);
    }
    const auto ranks = average_ranks(mags);

    // Doubled ranks are integers even with ties; count sign patterns by their positive-rank sum.
    std::vector<int> r2(n);
    int total = 0;
    int observed = 0;
    for (std::size_t i = 0; i < n; ++i) {
        r2[i] = static_cast<int>(std::lround(2.0 * ranks[i]));
        total += r2[i];
        if (diffs[i] > 0.0) observed += r2[i];
    }
    std::vector<std::uint64_t> count(static_cast<std::size_t>(total) + 1, 0);
    count[0] = 1;
    int reach = 0;
    for (int r : r2) {
        for (int s = reach; s >= 0; --s)
            if (count[static_cast<std::size_t>(s)]) count[static_cast<std::size_t>(s + r)] += count[static_cast<std::size_t>(s)];
        reach += r;
    }
    std::uint64_t upper = 0, lower = 0;
    for (int s = 0; s <= total; ++s) {
        if (s >= observed) upper += count[static_cast<std::size_t>(s)];
        if (s <= observed) lower += count[static_cast<std::size_t>(s)];
    }
    const double patterns = std::ldexp(1.0, static_cast<int>(n));
    return std::min(1.0, 2.0 * static_cast<double>(std::min(upper, lower)) / patterns);
}

TestResult wilcoxon_signed_rank(const PairedSample& s) {
    const auto d = s.differences();
    std::vector<double> nz;
    for (double v : d)
        if (v != 0.0) nz.push_back(v);
    if (nz.empty()) throw DegenerateError("signed-rank test with all differences zero");
    if (nz.size() < 3) throw InputError("signed-rank test needs at least 3 non-zero differences");

    const std::size_t n = nz.size();
    std::vector<double> mags(n);
    for (std::size_t i = 0; i < n; ++i) mags[i] = std::abs(nz[i]);
    const auto ranks = average_ranks(mags);
    double w_plus = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (nz[i] > 0.0) w_plus += ranks[i];

    // tie correction: sum over tie groups of (t^3 - t)
    std::vector<double> sorted = mags;
    std::sort(sorted.begin(), sorted.end());
    double ties = 0.0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && sorted[j + 1] == sorted[i]) ++j;
        const double t = static_cast<double>(j - i + 1);
        ties += t * t * t - t;
        i = j + 1;
    }
    const double nn = static_cast<double>(n);
    const double mu = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - ties / 48.0;

    TestResult r;
    r.test = TestKind::WilcoxonSignedRank;
    r.statistic = (w_plus - mu) / std::sqrt(var);
    r.p_two_sided = normal_two_sided_p(r.statistic);
    if (n <= 12) r.exact_p = wilcoxon_exact_p(nz);
    r.n = static_cast<int>(n);
    return r;
}

TestResult gated_compare(const PairedSample& s, double alpha) {
    const auto d = s.differences();
    const auto sw = shapiro_wilk(d);
    TestResult r = sw.p > alpha ? paired_t(s) : wilcoxon_signed_rank(s);
    r.normality_W = sw.W;
    r.normality_p = sw.p;
    return r;
}

std::string format_p(double p) {
    if (p < 0.01) return "< 0.01";
    char buf[16];
    std::snprintf(buf, sizeof buf, "%.2f", p);
    return buf;
}

std::string significance_flag(double p) {
    // p = 0.05 at two decimals counts as marginal significance
    return std::round(p * 100.0) <= 5.0 ? "*" : "";
}

}  // namespace dyad
