#ifndef LMSSS_STATS_HPP
#define LMSSS_STATS_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "lmsss/pipeline.hpp"

namespace lmsss {

struct RankSum {
    double u { 0.0 }; // Mann-Whitney U of the first sample
    double z { 0.0 };
    double p { 1.0 }; // two-sided
};

// Two-sided rank-sum test, normal approximation with tie-corrected variance
// and continuity correction plus the Edgeworth (kurtosis) term, which keeps
// small samples close to the exact null distribution. Needs >= 5 per sample.
RankSum rank_sum_test(std::span<double const> a, std::span<double const> b);

inline double wilcoxon_rank_sum(std::span<double const> a, std::span<double const> b)
{
    return rank_sum_test(a, b).p;
}

// Exact permutation p-value (midranks for ties). Enumerates every split, so
// only for small samples: |a| + |b| <= 20.
double wilcoxon_rank_sum_exact(std::span<double const> a, std::span<double const> b);

enum class Metric { hv, igd, mce };
std::string_view to_string(Metric m);
bool higher_is_better(Metric m);

enum class Mark { better, worse, no_difference };
std::string_view to_string(Mark m);

struct ComparisonCell {
    std::string dataset;
    Variant variant { Variant::lmsss };
    double mean { 0.0 };
    double std { 0.0 };
    double median { 0.0 };
    // The variant relative to the reference; empty for the reference column
    // and when either side has fewer than 5 runs.
    std::optional<Mark> mark {};
};

// From the reference's point of view: a win is a cell marked worse.
struct WinTieLoss {
    std::size_t wins { 0 };
    std::size_t ties { 0 };
    std::size_t losses { 0 };
};

struct Table {
    Metric metric { Metric::hv };
    Variant reference { Variant::lmsss };
    double alpha { 0.05 };
    std::vector<std::string> datasets;
    std::vector<Variant> variants;
    std::vector<ComparisonCell> cells; // dataset-major, variants in `variants` order
    std::map<Variant, WinTieLoss> summary;

    ComparisonCell const& cell(std::string const& dataset, Variant v) const;
};

// Per dataset, merge every report's test front into one reference front and
// set each report's igd against it.
void assign_igd(std::vector<RunReport>& reports);

// Reports for >= 2 variants with equal run counts per (dataset, variant).
// IGD is computed here when the reports do not carry it yet.
Table tabulate(std::vector<RunReport> reports, Metric metric, Variant reference, double alpha = 0.05);

// CSV: dataset,variant,mean,std,mark
std::string to_csv(Table const& t);
nlohmann::json to_json(Table const& t);

} // namespace lmsss

#endif
