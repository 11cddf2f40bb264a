#include "hsim/rng.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <numbers>

namespace hsim {

double normal_quantile(double p) {
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double RandomStream::normal() { return normal_quantile(uniform()); }

}  // namespace hsim
