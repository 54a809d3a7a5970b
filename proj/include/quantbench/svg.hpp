#pragma once

#include <string>
#include <utility>
#include <vector>

#include "quantbench/date.hpp"

namespace quantbench::svg {

// Two polylines plus axes; first/last dates and value extremes as labels.
std::string line_chart(const std::vector<data::Date>& dates,
                       const std::vector<double>& continuous,
                       const std::vector<double>& indicative);

// Circles plus axes.
std::string scatter_chart(const std::vector<std::pair<double, double>>& points,
                          const std::string& x_label, const std::string& y_label);

} // namespace quantbench::svg
