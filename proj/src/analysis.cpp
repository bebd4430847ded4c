#include "mdaudit/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "mdaudit/error.hpp"

namespace mdaudit {

// ---------------------------------------------------------------- pairing

namespace {

std::map<std::string, const PairInput*> collapse(const std::vector<PairInput>& side, const char* label,
                                                 Diagnostics* diag) {
    std::map<std::string, const PairInput*> out;
    for (const auto& in : side) {
        if (in.doi.empty()) continue;
        auto [it, fresh] = out.emplace(in.doi, &in);
        if (fresh) continue;
        note(diag, in.doi, "duplicate_doi",
             std::string("DOI appears more than once on the ") + label + " side; keeping the most recent harvest");
        if (in.harvested_at >= it->second->harvested_at) it->second = &in;
    }
    return out;
}

}  // namespace

PairingResult pair_records(const std::vector<PairInput>& oai, const std::vector<PairInput>& datacite,
                           Diagnostics* diag) {
    auto a = collapse(oai, "oai", diag);
    auto b = collapse(datacite, "datacite", diag);
    PairingResult r;
    for (const auto& [doi, in] : a) {
        auto it = b.find(doi);
        if (it == b.end()) {
            r.unpaired_oai.push_back(doi);
            continue;
        }
        RecordPair p;
        p.doi = doi;
        p.disciplinary = in->vector;
        p.datacite = it->second->vector;
        p.disciplinary_date = in->date;
        p.datacite_date = it->second->date;
        p.disciplinary_deleted = in->deleted;
        r.pairs.push_back(std::move(p));
    }
    for (const auto& [doi, in] : b)
        if (!a.count(doi)) r.unpaired_datacite.push_back(doi);
    return r;
}

// ----------------------------------------------------------------- usage

std::string to_string(SdConvention c) { return c == SdConvention::population ? "population" : "sample"; }

SdConvention sd_convention_from_string(std::string_view s) {
    if (s == "population") return SdConvention::population;
    if (s == "sample") return SdConvention::sample;
    throw ConfigError("unknown sd convention '" + std::string(s) + "'");
}

UsageProfile usage_profile(const std::string& repository_id, const std::vector<OccurrenceVector>& records,
                           const ElementRegistry& reg, SdConvention sd) {
    if (records.empty()) throw ValidationError("usage_profile of " + repository_id + ": no records");
    UsageProfile p;
    p.repository_id = repository_id;
    p.n_records = records.size();
    p.sd_convention = sd;
    std::vector<double> distinct;
    distinct.reserve(records.size());
    for (const auto& v : records) {
        if (v.schema_id != reg.schema_id) throw ValidationError("usage_profile: mixed schemas");
        distinct.push_back(static_cast<double>(distinct_elements(v)));
        for (const auto& [e, n] : v.counts)
            if (n > 0) ++p.records_with[e];
    }
    for (const auto& d : reg.descriptors) {
        auto it = p.records_with.find(d.element_id);
        std::uint64_t k = it == p.records_with.end() ? 0 : it->second;
        p.per_element_coverage[d.element_id] = static_cast<double>(k) / static_cast<double>(p.n_records);
    }
    double n = static_cast<double>(distinct.size());
    double sum = 0.0;
    for (double x : distinct) sum += x;
    p.mean_distinct = sum / n;
    double ss = 0.0;
    for (double x : distinct) ss += (x - p.mean_distinct) * (x - p.mean_distinct);
    double denom = sd == SdConvention::population ? n : n - 1.0;
    p.sd_distinct = denom > 0.0 ? std::sqrt(ss / denom) : 0.0;
    return p;
}

CrossRepoUsage cross_repo_usage(const std::vector<UsageProfile>& profiles, const ElementRegistry& reg) {
    if (profiles.empty()) throw ValidationError("cross_repo_usage requires at least one profile");
    CrossRepoUsage u;
    for (const auto& d : reg.descriptors) {
        bool all = true, none = true;
        for (const auto& p : profiles) {
            bool used = p.coverage(d.element_id) > 0.0;
            all = all && used;
            none = none && !used;
        }
        if (all) u.used_by_all.insert(d.element_id);
        if (none) u.used_by_none.insert(d.element_id);
    }
    return u;
}

std::vector<std::pair<std::string, double>> identifier_usage(const UsageProfile& profile,
                                                             const ElementRegistry& reg) {
    std::vector<std::pair<std::string, double>> out;
    for (const auto& d : reg.descriptors)
        if (d.identifier_flag) out.emplace_back(d.element_id, profile.coverage(d.element_id));
    std::sort(out.begin(), out.end(), [](auto& x, auto& y) {
        if (x.second != y.second) return x.second > y.second;
        return x.first < y.first;
    });
    return out;
}

// ------------------------------------------------------------ improvement

ImprovementReport improvement_potential(const std::string& repository_id, const std::vector<RecordPair>& pairs,
                                        const CrosswalkTable& table, const ElementRegistry& reg,
                                        Diagnostics* diag) {
    if (!table.is_resolved() && !one_to_n_groups(table).empty())
        throw ConfigError("improvement_potential requires a table with resolved primary sources");
    ImprovementReport r;
    r.repository_id = repository_id;
    std::vector<const RecordPair*> usable;
    for (const auto& p : pairs) {
        if (p.disciplinary_deleted) {
            ++r.excluded_deleted;
            note(diag, p.doi, "deleted_pair", "disciplinary record deleted; excluded from improvement");
            continue;
        }
        usable.push_back(&p);
    }
    r.n_pairs = usable.size();
    for (const auto& t : table.targets()) {
        const auto* d = reg.find(t);
        if (!d) continue;
        ElementImprovement imp;
        imp.n_pairs = r.n_pairs;
        imp.effective_sources = table.effective_sources(t);
        for (const auto* p : usable) {
            if (p->datacite.has(t)) {
                ++imp.current_count;
                continue;
            }
            for (const auto& s : imp.effective_sources) {
                if (p->disciplinary.has(s)) {
                    ++imp.added_count;
                    break;
                }
            }
        }
        if (d->required) {
            r.required_elements.emplace(t, std::move(imp));
            continue;
        }
        if (imp.improvable()) ++r.counts.n_any;
        if (imp.above_ten_percent()) ++r.counts.n_gt10;
        if (imp.reaches_full()) ++r.counts.n_full;
        r.per_element.emplace(t, std::move(imp));
    }
    return r;
}

std::string format_percent(std::uint64_t num, std::uint64_t den) {
    if (den == 0) return "0.00";
    std::uint64_t hundredths = (num * 20000 + den) / (2 * den);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%llu.%02llu", static_cast<unsigned long long>(hundredths / 100),
                  static_cast<unsigned long long>(hundredths % 100));
    return buf;
}

std::vector<RecommendedImprovement> recommended_improvement(const ImprovementReport& report,
                                                            const ElementRegistry& reg) {
    std::vector<std::pair<const std::string*, const ElementImprovement*>> rows;
    for (const auto& [e, imp] : report.per_element) {
        const auto* d = reg.find(e);
        if (d && d->recommended_flag && imp.improvable()) rows.emplace_back(&e, &imp);
    }
    std::sort(rows.begin(), rows.end(), [](auto& x, auto& y) {
        if (x.second->added_count != y.second->added_count) return x.second->added_count > y.second->added_count;
        return *x.first < *y.first;
    });
    std::vector<RecommendedImprovement> out;
    for (auto& [e, imp] : rows)
        out.push_back({*e, imp->added(), format_percent(imp->added_count, imp->n_pairs)});
    return out;
}

std::set<std::string> unmatched_source_usage(const std::vector<OccurrenceVector>& vectors,
                                             const CrosswalkTable& table) {
    auto mapped = table.sources();
    std::set<std::string> out;
    for (const auto& v : vectors)
        for (const auto& [e, n] : v.counts)
            if (n > 0 && !mapped.count(e)) out.insert(e);
    return out;
}

std::set<std::string> unmatched_target_usage(const std::vector<OccurrenceVector>& datacite_vectors,
                                             const CrosswalkTable& table) {
    auto mapped = table.targets();
    std::set<std::string> out;
    for (const auto& v : datacite_vectors)
        for (const auto& [e, n] : v.counts)
            if (n > 0 && !mapped.count(e)) out.insert(e);
    return out;
}

// --------------------------------------------------------------- temporal

AccumulationSeries accumulation_series(const std::string& repository_id, Source source,
                                       const std::vector<RecordDate>& dates, Granularity min_granularity,
                                       Diagnostics* diag) {
    AccumulationSeries s;
    s.repository_id = repository_id;
    s.source = source;
    std::vector<Day> days;
    days.reserve(dates.size());
    for (const auto& d : dates) {
        if (static_cast<int>(d.granularity) > static_cast<int>(min_granularity)) {
            ++s.n_excluded;
            continue;
        }
        days.push_back(d.date);
    }
    if (s.n_excluded > 0)
        note(diag, repository_id, "coarse_dates_excluded",
             std::to_string(s.n_excluded) + " " + to_string(source) + " dates coarser than " +
                 to_string(min_granularity) + " excluded");
    if (days.empty()) {
        if (!dates.empty())
            note(diag, repository_id, "empty_series", "all " + to_string(source) + " dates excluded");
        return s;
    }
    std::sort(days.begin(), days.end());
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < days.size(); ++i) {
        ++n;
        if (i + 1 == days.size() || days[i + 1] != days[i]) s.points.emplace_back(days[i], n);
    }
    s.n_included = n;
    return s;
}

}  // namespace mdaudit
