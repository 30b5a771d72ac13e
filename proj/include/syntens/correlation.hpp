#pragma once

#include <span>

namespace syntens {

/// Centered product-moment correlation. Throws UndefinedValueError when either
/// input has zero variance, std::invalid_argument on length mismatch or n < 2.
double pearson(std::span<const double> xs, std::span<const double> ys);

/// Rank correlation with average ranks for ties (Pearson applied to ranks).
double spearman(std::span<const double> xs, std::span<const double> ys);

} // namespace syntens
