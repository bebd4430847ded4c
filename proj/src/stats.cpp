#include "mdaudit/stats.hpp"

#include <cmath>
#include <limits>

#include "mdaudit/error.hpp"

namespace mdaudit::stats {

std::string to_string(TTestKind k) { return k == TTestKind::welch ? "welch" : "pooled"; }

namespace {

// Continued fraction for I_x(a,b), valid for x < (a+1)/(a+b+2).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 100000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    throw Error("incomplete beta continued fraction did not converge");
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw Error("incomplete_beta requires a, b > 0");
    if (std::isnan(x)) return x;
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                      b * std::log1p(-x);
    double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
    if (!(df > 0.0)) throw Error("student_t_two_sided_p requires df > 0");
    if (std::isnan(t)) return t;
    if (std::isinf(t)) return 0.0;
    double x = df / (df + t * t);
    double p = incomplete_beta(df / 2.0, 0.5, x);
    if (p < 0.0) p = 0.0;
    if (p > 1.0) p = 1.0;
    return p;
}

GroupSummary summarize(const std::string& label, const std::vector<double>& values) {
    GroupSummary g;
    g.label = label;
    g.n = values.size();
    if (values.empty()) return g;
    double sum = 0.0;
    for (double v : values) sum += v;
    g.mean = sum / static_cast<double>(g.n);
    if (g.n < 2) return g;
    double ss = 0.0;
    for (double v : values) ss += (v - g.mean) * (v - g.mean);
    g.sd = std::sqrt(ss / static_cast<double>(g.n - 1));
    return g;
}

namespace {

void check_groups(const GroupSummary& a, const GroupSummary& b) {
    if (a.n < 2 || b.n < 2) throw ValidationError("t-test requires n >= 2 in both groups");
    if (a.sd < 0.0 || b.sd < 0.0) throw ValidationError("negative standard deviation");
}

TTestResult base(const GroupSummary& a, const GroupSummary& b) {
    TTestResult r;
    r.mean_a = a.mean;
    r.sd_a = a.sd;
    r.mean_b = b.mean;
    r.sd_b = b.sd;
    r.n_a = a.n;
    r.n_b = b.n;
    return r;
}

bool degenerate(const GroupSummary& a, const GroupSummary& b, TTestResult& r) {
    if (a.sd != 0.0 || b.sd != 0.0) return false;
    r.degenerate = true;
    r.df = static_cast<double>(a.n + b.n - 2);
    if (a.mean == b.mean) {
        r.t = 0.0;
        r.p = 1.0;
    } else {
        r.t = a.mean > b.mean ? std::numeric_limits<double>::infinity()
                              : -std::numeric_limits<double>::infinity();
        r.p = 0.0;
    }
    return true;
}

}  // namespace

TTestResult welch_t(const GroupSummary& a, const GroupSummary& b) {
    check_groups(a, b);
    TTestResult r = base(a, b);
    if (degenerate(a, b, r)) return r;
    double va = a.sd * a.sd / static_cast<double>(a.n);
    double vb = b.sd * b.sd / static_cast<double>(b.n);
    double se2 = va + vb;
    r.t = (a.mean - b.mean) / std::sqrt(se2);
    r.df = se2 * se2 / (va * va / static_cast<double>(a.n - 1) + vb * vb / static_cast<double>(b.n - 1));
    r.p = student_t_two_sided_p(r.t, r.df);
    return r;
}

TTestResult pooled_t(const GroupSummary& a, const GroupSummary& b) {
    check_groups(a, b);
    TTestResult r = base(a, b);
    if (degenerate(a, b, r)) return r;
    double na = static_cast<double>(a.n), nb = static_cast<double>(b.n);
    double sp2 = ((na - 1.0) * a.sd * a.sd + (nb - 1.0) * b.sd * b.sd) / (na + nb - 2.0);
    r.t = (a.mean - b.mean) / std::sqrt(sp2 * (1.0 / na + 1.0 / nb));
    r.df = na + nb - 2.0;
    r.p = student_t_two_sided_p(r.t, r.df);
    return r;
}

TTestResult t_test(const GroupSummary& a, const GroupSummary& b, TTestKind kind) {
    return kind == TTestKind::welch ? welch_t(a, b) : pooled_t(a, b);
}

std::vector<TTestResult> group_compare(const std::vector<OccurrenceVector>& group_a,
                                       const std::vector<OccurrenceVector>& group_b,
                                       const std::vector<std::string>& elements, double alpha,
                                       TTestKind kind) {
    if (group_a.empty() || group_b.empty()) throw ValidationError("group_compare requires non-empty groups");
    std::vector<TTestResult> out;
    std::vector<double> xa(group_a.size()), xb(group_b.size());
    for (const auto& e : elements) {
        for (std::size_t i = 0; i < group_a.size(); ++i) xa[i] = static_cast<double>(group_a[i].count(e));
        for (std::size_t i = 0; i < group_b.size(); ++i) xb[i] = static_cast<double>(group_b[i].count(e));
        auto r = t_test(summarize("a", xa), summarize("b", xb), kind);
        r.element_id = e;
        if (alpha >= 1.0 || r.p < alpha) out.push_back(std::move(r));
    }
    return out;
}

std::vector<std::string> default_test_elements(const ElementRegistry& reg) {
    std::vector<std::string> out;
    for (const auto& d : reg.descriptors)
        if ((!d.required && d.parent.empty()) || d.identifier_flag) out.push_back(d.element_id);
    return out;
}

}  // namespace mdaudit::stats
