#ifndef LMSSS_CLASSIFIER_HPP
#define LMSSS_CLASSIFIER_HPP

#include <cstddef>
#include <vector>

#include "lmsss/dataset.hpp"
#include "lmsss/feature_mask.hpp"

namespace lmsss {

enum class LossMetric { one_minus_macro_f1, error_rate };

struct ClassifierConfig {
    std::size_t k { 5 };
    LossMetric loss_metric { LossMetric::one_minus_macro_f1 };
};

// confusion[truth][predicted], row-major C x C.
struct ConfusionMatrix {
    std::size_t n_classes { 0 };
    std::vector<std::size_t> counts;

    explicit ConfusionMatrix(std::size_t c = 0) : n_classes(c), counts(c * c, 0) { }
    std::size_t& operator()(std::size_t truth, std::size_t predicted) { return counts[truth * n_classes + predicted]; }
    std::size_t operator()(std::size_t truth, std::size_t predicted) const { return counts[truth * n_classes + predicted]; }
    std::size_t total() const noexcept;
    std::size_t trace() const noexcept;

    friend bool operator==(ConfusionMatrix const&, ConfusionMatrix const&) = default;
};

struct EvalResult {
    double loss { 0.0 };
    double error_rate { 0.0 };
    double macro_f1 { 0.0 };
    ConfusionMatrix confusion;
};

// Unweighted mean of per-class F1; a class with P + R = 0 scores 0 and still
// counts in the mean.
double macro_f1(ConfusionMatrix const& confusion);

EvalResult summarize(ConfusionMatrix confusion, LossMetric metric);

// kNN with leave-one-out over the training set, Euclidean distance on the
// selected columns. Neighbours are ordered by (distance, instance index); a
// vote tie goes to the tied class whose member is nearest.
EvalResult loocv_eval(Dataset const& train, FeatureMask const& mask, ClassifierConfig const& cfg);

// Each test instance classified by its k nearest training instances.
EvalResult test_eval(Dataset const& train, Dataset const& test, FeatureMask const& mask, ClassifierConfig const& cfg);

} // namespace lmsss

#endif
