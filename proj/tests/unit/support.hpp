#pragma once

#include <string>
#include <utility>
#include <vector>

#include "arl/demand.hpp"

namespace arl::test {

inline const std::vector<double>& standard_discounts() {
    static const std::vector<double> d{0, 15, 30, 45, 60};
    return d;
}

inline Instance linear_instance(std::vector<std::pair<double, double>> models,
                                std::vector<int> arrivals, double sigma = 15.0) {
    Instance inst;
    inst.label = "test";
    inst.grid = PriceGrid::from_discounts(10.0, standard_discounts());
    for (auto [a, b] : models) inst.candidates.push_back({DemandForm::Linear, a, b});
    inst.arrivals = std::move(arrivals);
    inst.noise.sigma = sigma;
    inst.validate();
    return inst;
}

inline Instance exponential_instance(std::vector<std::pair<double, double>> models,
                                     std::vector<int> arrivals, double sigma = 15.0) {
    Instance inst;
    inst.label = "test-exp";
    inst.grid = PriceGrid::from_discounts(30.0, standard_discounts());
    for (auto [a, b] : models) inst.candidates.push_back({DemandForm::Exponential, a, b});
    inst.arrivals = std::move(arrivals);
    inst.noise.sigma = sigma;
    inst.validate();
    return inst;
}

/// Well-separated two-model instance used by the guarantee checks.
inline Instance separated_instance(double sigma = 15.0) {
    return linear_instance({{325, 19}, {300, 21}}, std::vector<int>(8, 100), sigma);
}

}  // namespace arl::test
