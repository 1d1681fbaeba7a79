#ifndef PIAD_DATAIO_HPP
#define PIAD_DATAIO_HPP

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "piad/numerics.hpp"

namespace piad::dataio {

using numerics::Tensor2;
using numerics::Vector;

/// Parse/format errors carry the offending line number where applicable.
class CsvError : public std::runtime_error {
public:
    explicit CsvError(const std::string& what) : std::runtime_error(what) {}
};

// --- hourly timestamps -----------------------------------------------------
// Timestamps are ISO-8601 "YYYY-MM-DDTHH:MM:SS" on the wire and hours since
// the Unix epoch in memory. No time zones (see Non-goals).

std::int64_t parse_iso_hour(const std::string& text);
std::string format_iso_hour(std::int64_t hours_since_epoch);
int hour_of_day(std::int64_t hours_since_epoch);
/// Day of week, 0 = Monday .. 6 = Sunday.
int weekday(std::int64_t hours_since_epoch);

// ---------------------------------------------------------------------------

inline const std::array<const char*, 5> kCanonicalChannels = {
    "co2_in", "t_in", "t_out", "hour", "num_week"};

/// Multichannel hourly observations with a per-cell missingness mask.
struct TimeSeriesFrame {
    std::vector<std::int64_t> time;                  // hours since epoch, consecutive
    std::vector<std::string> channels;               // column names
    std::vector<std::vector<double>> values;         // [channel][row]
    std::vector<std::vector<std::uint8_t>> missing;  // [channel][row], 1 = missing

    std::size_t rows() const { return time.size(); }
    std::size_t channel_index(const std::string& name) const;
    bool has_channel(const std::string& name) const;

    /// Checks column lengths and the strictly-hourly timestamp contract.
    void validate() const;
};

/**
 * CSV format: header `timestamp,co2_in,t_in,t_out,hour,num_week`, UTF-8,
 * one row per hour, empty field = missing cell. Values are written with 17
 * significant digits so finite decimals round-trip bit-exactly.
 */
TimeSeriesFrame read_csv(const std::string& path);
void write_csv(const TimeSeriesFrame& frame, const std::string& path);

// ---------------------------------------------------------------------------

struct IndexRange {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
};

/// Per-channel z-score statistics fitted on the training split only.
/// Population standard deviation (divide by n), floored at kStdFloor.
struct Normalizer {
    static constexpr double kStdFloor = 1e-8;

    std::vector<std::string> channels;
    std::vector<double> mean;
    std::vector<double> stddev;

    double apply_one(std::size_t channel, double v) const;
    double invert_one(std::size_t channel, double v) const;
};

Normalizer fit_normalizer(const TimeSeriesFrame& frame, IndexRange train);
/// Returns a copy of the frame with every channel z-scored.
TimeSeriesFrame apply_normalizer(const Normalizer& n, const TimeSeriesFrame& frame);

// ---------------------------------------------------------------------------

struct SplitPlan {
    IndexRange train;
    IndexRange val;
    IndexRange test;
    bool missing_to_test = true;
};

/**
 * Contiguous chronological train/val/test ranges from ratios summing to 1.
 * With missing_to_test set, the test boundary moves earlier until every
 * masked cell lies in the test range (the train boundary follows if needed).
 * Throws if the resulting train range is shorter than min_train_len.
 */
SplitPlan chronological_split(const TimeSeriesFrame& frame, std::array<double, 3> ratios,
                              bool missing_to_test, std::size_t min_train_len = 0);

// ---------------------------------------------------------------------------

struct WindowSpec {
    std::size_t lookback = 96;  // L
    std::size_t horizon = 96;   // T
    std::size_t stride = 1;
};

struct WindowRef {
    std::size_t start = 0;     // first input row
    bool masked_input = false;   // any masked cell, any channel, in the input rows
    bool masked_target = false;  // masked target-channel cell in the horizon rows
};

/// Window count = floor((range_len - L - T)/stride) + 1; input rows
/// [start, start+L) immediately precede target rows [start+L, start+L+T).
std::vector<WindowRef> make_windows(const TimeSeriesFrame& frame, const WindowSpec& spec,
                                    IndexRange range, const std::string& target_channel);

/// One training/evaluation example in normalized units.
struct WindowData {
    Tensor2 inputs;  // lookback x channels, frame channel order
    Vector target;   // horizon values of the target channel
};

WindowData materialize_window(const TimeSeriesFrame& normalized_frame, const WindowRef& ref,
                              const WindowSpec& spec, std::size_t target_channel);

}  // namespace piad::dataio

#endif  // PIAD_DATAIO_HPP
