#pragma once

#include <span>

#include "dabag/classifiers.hpp"

namespace dabag::detail {

// Labels present in a labeled dataset, ascending.
std::vector<Label> present_classes(const Dataset& train);

LogisticModel fit_logistic(const LogisticSpec& spec, const Dataset& train);
Label predict_logistic(const LogisticModel& model, std::span<const double> x);

LdaModel fit_lda(const LdaSpec& spec, const Dataset& train);
Label predict_lda(const LdaModel& model, std::span<const double> x);

TreeModel fit_tree(const TreeSpec& spec, const Dataset& train, const RngStream& rng);
Label predict_tree(const TreeModel& model, std::span<const double> x);

}  // namespace dabag::detail
