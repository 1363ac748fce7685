#include "vou/quadrature.hpp"

#include <boost/math/quadrature/gauss.hpp>

namespace vou {

const GaussRule& gauss_legendre_16() {
  static const GaussRule rule = [] {
    using Gauss = boost::math::quadrature::gauss<double, 16>;
    const auto& x = Gauss::abscissa();
    const auto& w = Gauss::weights();
    GaussRule r{};
    std::size_t i = 0;
    // Boost stores the non-negative half of the symmetric rule.
    for (std::size_t k = 0; k < x.size(); ++k) {
      r.nodes[i] = 0.5 * (1.0 - x[k]);
      r.weights[i] = 0.5 * w[k];
      ++i;
      r.nodes[i] = 0.5 * (1.0 + x[k]);
      r.weights[i] = 0.5 * w[k];
      ++i;
    }
    return r;
  }();
  return rule;
}

}  // namespace vou
