#include "piad/decompose.hpp"

namespace piad::decompose {

DecomposedSeries moving_average_decompose(const Vector& series, std::size_t kernel) {
    if (kernel == 0) throw std::invalid_argument("moving_average_decompose: kernel must be >= 1");
    if (series.empty()) throw std::invalid_argument("moving_average_decompose: empty series");

    const std::size_t n = series.size();
    const std::size_t front = (kernel - 1) / 2;
    const std::size_t back = kernel - 1 - front;

    Vector padded;
    padded.reserve(n + kernel - 1);
    padded.insert(padded.end(), front, series.front());
    padded.insert(padded.end(), series.begin(), series.end());
    padded.insert(padded.end(), back, series.back());

    DecomposedSeries out;
    out.kernel = kernel;
    out.trend.resize(n);
    out.seasonal.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        double s = 0.0;
        for (std::size_t k = 0; k < kernel; ++k) s += padded[t + k];
        out.trend[t] = s / static_cast<double>(kernel);
        out.seasonal[t] = series[t] - out.trend[t];
    }
    return out;
}

}  // namespace piad::decompose
