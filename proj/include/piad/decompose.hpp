#ifndef PIAD_DECOMPOSE_HPP
#define PIAD_DECOMPOSE_HPP

#include "piad/numerics.hpp"

namespace piad::decompose {

using numerics::Vector;

/// Trend/seasonal pair with trend + seasonal == original, elementwise.
struct DecomposedSeries {
    Vector trend;
    Vector seasonal;
    std::size_t kernel = 0;
};

/**
 * Splits a series into a moving-average trend and the seasonal residual.
 *
 * The series is padded by edge replication before averaging: floor((k-1)/2)
 * copies of the first value in front, ceil((k-1)/2) copies of the last value
 * behind, so the output has the input's length. trend[t] is the mean of the
 * k-length window starting at padded index t; seasonal = series - trend.
 * Window sums run left to right so independent oracles can match bit for bit.
 *
 * Throws std::invalid_argument for kernel == 0 or an empty series.
 */
DecomposedSeries moving_average_decompose(const Vector& series, std::size_t kernel);

}  // namespace piad::decompose

#endif  // PIAD_DECOMPOSE_HPP
