#include "affecta/stats.hpp"

#include "affecta/special_functions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace affecta::stats {

using special::normal_quantile;
using special::normal_upper_tail;
using special::student_t_two_sided_p;

std::string_view to_string(TestKind kind) {
    switch (kind) {
        case TestKind::MannWhitneyU: return "mann-whitney-u";
        case TestKind::IndependentT: return "t-independent";
        case TestKind::PairedT: return "t-paired";
        case TestKind::ShapiroWilk: return "shapiro-wilk";
    }
    return "?";
}

Summary summarize(std::span<const double> values) {
    Summary s;
    s.n = values.size();
    if (s.n == 0) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
    if (s.n > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - s.mean) * (v - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(s.n - 1));
    }
    return s;
}

std::vector<double> midranks(std::span<const double> values) {
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });

    std::vector<double> ranks(values.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
        const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
        i = j + 1;
    }
    return ranks;
}

double rank_biserial(double u, std::size_t n1, std::size_t n2) {
    return 1.0 - 2.0 * u / (static_cast<double>(n1) * static_cast<double>(n2));
}

namespace {

void require_non_empty(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("both groups must be non-empty");
}

struct RankSplit {
    std::vector<std::int64_t> doubled_ranks;  // pooled, group a first
    std::int64_t doubled_rank_sum_a = 0;
};

RankSplit pooled_ranks(std::span<const double> a, std::span<const double> b) {
    std::vector<double> pooled(a.begin(), a.end());
    pooled.insert(pooled.end(), b.begin(), b.end());
    const auto ranks = midranks(pooled);
    RankSplit split;
    split.doubled_ranks.reserve(ranks.size());
    for (double r : ranks) split.doubled_ranks.push_back(std::llround(2.0 * r));
    for (std::size_t i = 0; i < a.size(); ++i) split.doubled_rank_sum_a += split.doubled_ranks[i];
    return split;
}

}  // namespace

double mann_whitney_exact_p(std::span<const double> a, std::span<const double> b) {
    require_non_empty(a, b);
    if (a.size() > kExactUMaxGroup || b.size() > kExactUMaxGroup) {
        throw std::invalid_argument("exact U distribution limited to groups of at most 10");
    }
    const RankSplit split = pooled_ranks(a, b);
    const std::size_t n1 = a.size();
    const std::int64_t max_sum =
        std::accumulate(split.doubled_ranks.begin(), split.doubled_ranks.end(), std::int64_t{0});

    // ways[k][s]: number of k-subsets of the ranks seen so far with doubled sum s.
    std::vector<std::vector<std::uint64_t>> ways(n1 + 1, std::vector<std::uint64_t>(max_sum + 1, 0));
    ways[0][0] = 1;
    std::size_t seen = 0;
    for (std::int64_t r : split.doubled_ranks) {
        ++seen;
        for (std::size_t k = std::min(seen, n1); k >= 1; --k) {
            auto& dst = ways[k];
            const auto& src = ways[k - 1];
            for (std::int64_t s = max_sum - r; s >= 0; --s) {
                if (src[s] != 0) dst[s + r] += src[s];
            }
        }
    }

    std::uint64_t total = 0;
    std::uint64_t at_most = 0;
    std::uint64_t at_least = 0;
    for (std::int64_t s = 0; s <= max_sum; ++s) {
        const std::uint64_t w = ways[n1][s];
        total += w;
        if (s <= split.doubled_rank_sum_a) at_most += w;
        if (s >= split.doubled_rank_sum_a) at_least += w;
    }
    const double tail = static_cast<double>(std::min(at_most, at_least)) / static_cast<double>(total);
    return std::min(1.0, 2.0 * tail);
}

TestResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    require_non_empty(a, b);
    const double n1 = static_cast<double>(a.size());
    const double n2 = static_cast<double>(b.size());
    const RankSplit split = pooled_ranks(a, b);

    const double rank_sum_a = static_cast<double>(split.doubled_rank_sum_a) / 2.0;
    const double u_a = rank_sum_a - n1 * (n1 + 1.0) / 2.0;
    const double u_b = n1 * n2 - u_a;
    const double u = std::min(u_a, u_b);

    TestResult r;
    r.kind = TestKind::MannWhitneyU;
    r.statistic = u;
    r.effect_size = rank_biserial(u, a.size(), b.size());
    r.n1 = a.size();
    r.n2 = b.size();

    if (a.size() <= kExactUMaxGroup && b.size() <= kExactUMaxGroup) {
        r.exact = true;
        r.p_value = mann_whitney_exact_p(a, b);
        return r;
    }

    // Tie correction: sum of t^3 - t over tie groups, from doubled ranks.
    std::unordered_map<std::int64_t, double> tie_sizes;
    for (std::int64_t dr : split.doubled_ranks) tie_sizes[dr] += 1.0;
    double tie_term = 0.0;
    for (const auto& [_, t] : tie_sizes) tie_term += t * t * t - t;

    const double n = n1 + n2;
    const double mu = n1 * n2 / 2.0;
    const double var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if (!(var > 0.0)) {
        r.p_value = 1.0;
        return r;
    }
    const double z = std::max(0.0, std::fabs(u_a - mu) - 0.5) / std::sqrt(var);
    r.p_value = std::min(1.0, 2.0 * normal_upper_tail(z));
    return r;
}

namespace {

double pooled_sd(const Summary& a, const Summary& b) {
    if (a.n < 2 || b.n < 2) throw std::invalid_argument("pooled SD needs at least two values per group");
    const double df = static_cast<double>(a.n + b.n - 2);
    const double pooled_var =
        (static_cast<double>(a.n - 1) * a.sd * a.sd + static_cast<double>(b.n - 1) * b.sd * b.sd) / df;
    if (!(pooled_var > 0.0)) throw std::invalid_argument("zero variance in both groups");
    return std::sqrt(pooled_var);
}

}  // namespace

double cohens_d_pooled(const Summary& a, const Summary& b) { return (a.mean - b.mean) / pooled_sd(a, b); }

TestResult t_test_independent(const Summary& a, const Summary& b) {
    const double sp = pooled_sd(a, b);
    TestResult r;
    r.kind = TestKind::IndependentT;
    r.n1 = a.n;
    r.n2 = b.n;
    r.df = static_cast<double>(a.n + b.n - 2);
    r.effect_size = (a.mean - b.mean) / sp;
    r.statistic = (a.mean - b.mean) /
                  (sp * std::sqrt(1.0 / static_cast<double>(a.n) + 1.0 / static_cast<double>(b.n)));
    r.p_value = student_t_two_sided_p(r.statistic, *r.df);
    return r;
}

TestResult t_test(std::span<const double> a, std::span<const double> b, TTestMode mode) {
    if (mode == TTestMode::Independent) {
        if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("independent t test needs two values per group");
        return t_test_independent(summarize(a), summarize(b));
    }

    if (a.size() != b.size()) throw std::invalid_argument("paired t test needs equal-length samples");
    if (a.size() < 2) throw std::invalid_argument("paired t test needs at least two pairs");
    std::vector<double> diffs(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diffs[i] = a[i] - b[i];
    const Summary s = summarize(diffs);

    TestResult r;
    r.kind = TestKind::PairedT;
    r.n1 = r.n2 = a.size();
    r.df = static_cast<double>(s.n - 1);
    if (s.sd == 0.0) {
        if (s.mean != 0.0) throw std::invalid_argument("zero variance in paired differences");
        r.statistic = 0.0;
        r.p_value = 1.0;
        r.effect_size = 0.0;
        return r;
    }
    r.statistic = s.mean / (s.sd / std::sqrt(static_cast<double>(s.n)));
    r.p_value = student_t_two_sided_p(r.statistic, *r.df);
    r.effect_size = s.mean / s.sd;
    return r;
}

namespace {

double poly(const double* cc, int nord, double x) {
    double ret = cc[0];
    if (nord > 1) {
        double p = x * cc[nord - 1];
        for (int j = nord - 2; j > 0; --j) p = (p + cc[j]) * x;
        ret += p;
    }
    return ret;
}

}  // namespace

TestResult shapiro_wilk(std::span<const double> sample) {
    const std::size_t n = sample.size();
    if (n < 3 || n > 50) throw std::invalid_argument("Shapiro-Wilk needs 3 <= n <= 50");

    std::vector<double> x(sample.begin(), sample.end());
    std::sort(x.begin(), x.end());
    const double range = x.back() - x.front();
    if (range < 1e-19 * std::max(1.0, std::fabs(x.front()))) {
        throw std::invalid_argument("Shapiro-Wilk undefined for a constant sample");
    }

    static constexpr double g[] = {-2.273, 0.459};
    static constexpr double c1[] = {0.0, 0.221157, -0.147981, -2.07119, 4.434685, -2.706056};
    static constexpr double c2[] = {0.0, 0.042981, -0.293762, -1.752461, 5.682633, -3.582633};
    static constexpr double c3[] = {0.544, -0.39978, 0.025054, -6.714e-4};
    static constexpr double c4[] = {1.3822, -0.77857, 0.062767, -0.0020322};
    static constexpr double c5[] = {-1.5861, -0.31082, -0.083751, 0.0038915};
    static constexpr double c6[] = {-0.4803, -0.082676, 0.0030302};

    const std::size_t half = n / 2;
    const double an = static_cast<double>(n);

    // Coefficients a[1..half] (index 0 unused), positive, for the upper half.
    std::vector<double> coef(half + 1, 0.0);
    if (n == 3) {
        coef[1] = std::sqrt(0.5);
    } else {
        std::vector<double> m(half + 1, 0.0);
        double summ2 = 0.0;
        for (std::size_t i = 1; i <= half; ++i) {
            m[i] = normal_quantile((static_cast<double>(i) - 0.375) / (an + 0.25));
            summ2 += m[i] * m[i];
        }
        summ2 *= 2.0;
        const double ssumm2 = std::sqrt(summ2);
        const double rsn = 1.0 / std::sqrt(an);
        const double a1 = poly(c1, 6, rsn) - m[1] / ssumm2;

        std::size_t first;
        double fac;
        if (n > 5) {
            first = 3;
            const double a2 = -m[2] / ssumm2 + poly(c2, 6, rsn);
            fac = std::sqrt((summ2 - 2.0 * m[1] * m[1] - 2.0 * m[2] * m[2]) / (1.0 - 2.0 * a1 * a1 - 2.0 * a2 * a2));
            coef[2] = a2;
        } else {
            first = 2;
            fac = std::sqrt((summ2 - 2.0 * m[1] * m[1]) / (1.0 - 2.0 * a1 * a1));
        }
        coef[1] = a1;
        for (std::size_t i = first; i <= half; ++i) coef[i] = -m[i] / fac;
    }

    // Signed coefficient for sorted position i (1-based).
    auto signed_coef = [&](std::size_t i) {
        const std::size_t j = n + 1 - i;
        if (i == j) return 0.0;
        return i < j ? -coef[i] : coef[j];
    };

    double sa = 0.0;
    double sx = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        sa += signed_coef(i);
        sx += x[i - 1] / range;
    }
    sa /= an;
    sx /= an;
    double ssa = 0.0;
    double ssx = 0.0;
    double sax = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
        const double asa = signed_coef(i) - sa;
        const double xsx = x[i - 1] / range - sx;
        ssa += asa * asa;
        ssx += xsx * xsx;
        sax += asa * xsx;
    }
    const double ssassx = std::sqrt(ssa * ssx);
    const double w1 = (ssassx - sax) * (ssassx + sax) / (ssa * ssx);
    const double w = 1.0 - w1;

    TestResult r;
    r.kind = TestKind::ShapiroWilk;
    r.statistic = w;
    r.n1 = n;
    r.exact = n == 3;

    if (n == 3) {
        constexpr double six_over_pi = 1.90985931710274;
        constexpr double pi_over_three = 1.04719755119660;
        r.p_value = std::max(0.0, six_over_pi * (std::asin(std::sqrt(w)) - pi_over_three));
        return r;
    }

    double y = std::log(w1);
    double mean;
    double sd;
    if (n <= 11) {
        const double gamma = poly(g, 2, an);
        if (y >= gamma) {
            r.p_value = 1e-99;
            return r;
        }
        y = -std::log(gamma - y);
        mean = poly(c3, 4, an);
        sd = std::exp(poly(c4, 4, an));
    } else {
        const double ln_n = std::log(an);
        mean = poly(c5, 4, ln_n);
        sd = std::exp(poly(c6, 3, ln_n));
    }
    r.p_value = normal_upper_tail((y - mean) / sd);
    return r;
}

std::vector<double> mean_impute(std::span<const std::optional<double>> values, std::span<const int> groups) {
    if (values.size() != groups.size()) throw std::invalid_argument("values and group labels differ in length");

    std::unordered_map<int, std::pair<double, std::size_t>> observed;  // group -> (sum, count)
    for (std::size_t i = 0; i < values.size(); ++i) {
        auto& slot = observed[groups[i]];
        if (values[i]) {
            slot.first += *values[i];
            slot.second += 1;
        }
    }

    std::vector<double> out(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i]) {
            out[i] = *values[i];
            continue;
        }
        const auto& [sum, count] = observed.at(groups[i]);
        if (count == 0) {
            throw std::invalid_argument("cannot impute: group " + std::to_string(groups[i]) + " has no observed values");
        }
        out[i] = sum / static_cast<double>(count);
    }
    return out;
}

}  // namespace affecta::stats
