#pragma once

#include <string>
#include <vector>

#include "mdaudit/schema_registry.hpp"

namespace mdaudit::stats {

struct GroupSummary {
    std::string label;
    std::size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
};

enum class TTestKind { welch, pooled };

std::string to_string(TTestKind k);

struct TTestResult {
    std::string element_id;
    double t = 0.0;
    double df = 0.0;
    double p = 1.0;
    double mean_a = 0.0, sd_a = 0.0, mean_b = 0.0, sd_b = 0.0;
    std::size_t n_a = 0, n_b = 0;
    bool degenerate = false;  // both sds zero
};

// Regularized incomplete beta I_x(a, b), continued fraction (modified Lentz).
double incomplete_beta(double a, double b, double x);
// Two-sided tail probability P(|T| >= |t|) for Student's t with df degrees of freedom.
double student_t_two_sided_p(double t, double df);

// Sample (n-1) standard deviation.
GroupSummary summarize(const std::string& label, const std::vector<double>& values);

TTestResult welch_t(const GroupSummary& a, const GroupSummary& b);
TTestResult pooled_t(const GroupSummary& a, const GroupSummary& b);
TTestResult t_test(const GroupSummary& a, const GroupSummary& b, TTestKind kind);

// Per element, per-record occurrence counts (0 when absent) are summarized and
// tested; only results with p < alpha are returned, unless alpha >= 1.
std::vector<TTestResult> group_compare(const std::vector<OccurrenceVector>& group_a,
                                       const std::vector<OccurrenceVector>& group_b,
                                       const std::vector<std::string>& elements, double alpha,
                                       TTestKind kind = TTestKind::welch);

// Optional root elements plus identifier-flagged elements.
std::vector<std::string> default_test_elements(const ElementRegistry& datacite_registry);

}  // namespace mdaudit::stats
