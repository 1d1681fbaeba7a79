#ifndef PIAD_EVALSUITE_HPP
#define PIAD_EVALSUITE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "piad/dataio.hpp"
#include "piad/train.hpp"

namespace piad::evalsuite {

using dataio::IndexRange;
using dataio::Normalizer;
using dataio::SplitPlan;
using dataio::TimeSeriesFrame;
using dataio::WindowSpec;
using numerics::Vector;

/// Forecast errors at one horizon, in normalized and physical (ppm) units.
struct MetricsReport {
    std::string model;
    std::size_t horizon = 0;
    double mse = 0.0;
    double mae = 0.0;
    double mse_ppm = 0.0;
    double mae_ppm = 0.0;
    std::size_t window_count = 0;
    double runtime_s = 0.0;
};

/// Mean of per-window MSE/MAE over the target channel.
MetricsReport evaluate_forecast(const train::ForecastModel& model,
                                const std::vector<dataio::WindowData>& test_windows,
                                const Normalizer& normalizer, std::size_t target_channel);

// ---------------------------------------------------------------------------

/// Box-and-whisker outlier rule: threshold = Q3 + 1.5*IQR, quartiles by
/// type-7 linear interpolation of the order statistics, fitted in ppm on the
/// training split only.
struct EventThreshold {
    double q1 = 0.0;
    double q3 = 0.0;
    double iqr = 0.0;
    double threshold = 0.0;
    std::string fitted_on;
};

/// Requires at least 4 observed values.
EventThreshold event_threshold(const Vector& train_ppm, const std::string& fitted_on = "train");

/// Label 1 iff value > threshold, strictly.
std::vector<int> classify_events(const Vector& ppm, const EventThreshold& th);

struct EventReport {
    std::uint64_t tp = 0;
    std::uint64_t fp = 0;
    std::uint64_t tn = 0;
    std::uint64_t fn = 0;
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Counts plus derived rates; zero denominators yield 0.
EventReport confusion_metrics(const std::vector<int>& predicted, const std::vector<int>& truth);

/// Fits the threshold on the training target values, tiles the test range
/// with non-overlapping horizon-length forecasts (one prediction per
/// timestamp), de-normalizes, classifies, and scores against ground truth.
EventReport event_pipeline(const train::ForecastModel& model, const TimeSeriesFrame& frame,
                           const SplitPlan& split, const Normalizer& normalizer,
                           const std::string& target_channel);

// ---------------------------------------------------------------------------

struct ImputationResult {
    TimeSeriesFrame frame;
    std::vector<std::size_t> imputed_rows;  // rows whose target cell was filled
};

/**
 * Fills masked target cells chronologically with the model's one-step
 * forecast from the preceding lookback rows, consuming earlier fills.
 * Masked covariate cells inside a needed window are carried forward
 * transiently for input assembly only. Originally observed cells are left
 * bitwise untouched.
 *
 * A masked target cell within the first lookback rows is an error unless
 * mean_fallback is set, in which case it is filled with the training mean.
 */
ImputationResult impute_series(const train::ForecastModel& model, const TimeSeriesFrame& frame,
                               const Normalizer& normalizer, const std::string& target_channel,
                               bool mean_fallback = false);

}  // namespace piad::evalsuite

#endif  // PIAD_EVALSUITE_HPP
