#include "piad/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace piad::dataio {

// --- timestamps --------------------------------------------------------------

namespace {

// Days since 1970-01-01 for a proleptic Gregorian civil date.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const int yoe = static_cast<int>(y - era * 400);
    const int doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
    const int doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + doe - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const int doe = static_cast<int>(z - era * 146097);
    const int yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const int doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const int mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yoe + era * 400) + (m <= 2);
}

int parse_int(const std::string& s, std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
        if (s[i] < '0' || s[i] > '9') throw CsvError("bad digit in timestamp '" + s + "'");
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

}  // namespace

std::int64_t parse_iso_hour(const std::string& text) {
    // YYYY-MM-DDTHH:MM:SS
    if (text.size() != 19 || text[4] != '-' || text[7] != '-' || text[10] != 'T' ||
        text[13] != ':' || text[16] != ':') {
        throw CsvError("timestamp '" + text + "' is not YYYY-MM-DDTHH:MM:SS");
    }
    const int y = parse_int(text, 0, 4);
    const int mo = parse_int(text, 5, 2);
    const int d = parse_int(text, 8, 2);
    const int h = parse_int(text, 11, 2);
    const int mi = parse_int(text, 14, 2);
    const int s = parse_int(text, 17, 2);
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23) {
        throw CsvError("timestamp '" + text + "' out of range");
    }
    if (mi != 0 || s != 0) {
        throw CsvError("timestamp '" + text + "' is not on an hour boundary");
    }
    return days_from_civil(y, mo, d) * 24 + h;
}

std::string format_iso_hour(std::int64_t hours) {
    std::int64_t days = hours / 24;
    int h = static_cast<int>(hours % 24);
    if (h < 0) {
        h += 24;
        days -= 1;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:00:00", y, m, d, h);
    return buf;
}

int hour_of_day(std::int64_t hours) {
    const int h = static_cast<int>(hours % 24);
    return h < 0 ? h + 24 : h;
}

int weekday(std::int64_t hours) {
    std::int64_t days = hours / 24;
    if (hours % 24 < 0) days -= 1;
    // 1970-01-01 was a Thursday (index 3 with Monday = 0).
    const int w = static_cast<int>((days + 3) % 7);
    return w < 0 ? w + 7 : w;
}

// --- frame -------------------------------------------------------------------

std::size_t TimeSeriesFrame::channel_index(const std::string& name) const {
    for (std::size_t i = 0; i < channels.size(); ++i) {
        if (channels[i] == name) return i;
    }
    throw std::invalid_argument("frame has no channel named '" + name + "'");
}

bool TimeSeriesFrame::has_channel(const std::string& name) const {
    return std::find(channels.begin(), channels.end(), name) != channels.end();
}

void TimeSeriesFrame::validate() const {
    if (values.size() != channels.size() || missing.size() != channels.size()) {
        throw std::invalid_argument("frame: channel count mismatch between names and columns");
    }
    for (std::size_t c = 0; c < channels.size(); ++c) {
        if (values[c].size() != time.size() || missing[c].size() != time.size()) {
            throw std::invalid_argument("frame: column '" + channels[c] +
                                        "' length differs from timestamp count");
        }
    }
    for (std::size_t t = 1; t < time.size(); ++t) {
        if (time[t] != time[t - 1] + 1) {
            throw std::invalid_argument("frame: timestamps not strictly hourly at row " +
                                        std::to_string(t));
        }
    }
}

// --- csv ---------------------------------------------------------------------

namespace {

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return fields;
}

std::string expected_header() {
    std::string h = "timestamp";
    for (const char* c : kCanonicalChannels) {
        h += ',';
        h += c;
    }
    return h;
}

}  // namespace

TimeSeriesFrame read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CsvError("cannot open '" + path + "' for reading");

    std::string line;
    if (!std::getline(in, line)) throw CsvError(path + ": empty file");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected_header()) {
        throw CsvError(path + ":1: unknown header '" + line + "', expected '" +
                       expected_header() + "'");
    }

    TimeSeriesFrame frame;
    frame.channels.assign(kCanonicalChannels.begin(), kCanonicalChannels.end());
    frame.values.resize(frame.channels.size());
    frame.missing.resize(frame.channels.size());

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::vector<std::string> fields = split_fields(line);
        if (fields.size() != frame.channels.size() + 1) {
            throw CsvError(path + ":" + std::to_string(lineno) + ": expected " +
                           std::to_string(frame.channels.size() + 1) + " fields, got " +
                           std::to_string(fields.size()));
        }
        std::int64_t t;
        try {
            t = parse_iso_hour(fields[0]);
        } catch (const CsvError& e) {
            throw CsvError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
        if (!frame.time.empty()) {
            if (t == frame.time.back()) {
                throw CsvError(path + ":" + std::to_string(lineno) + ": duplicated timestamp '" +
                               fields[0] + "'");
            }
            if (t != frame.time.back() + 1) {
                throw CsvError(path + ":" + std::to_string(lineno) +
                               ": timestamps must advance by exactly one hour");
            }
        }
        frame.time.push_back(t);
        for (std::size_t c = 0; c < frame.channels.size(); ++c) {
            const std::string& f = fields[c + 1];
            if (f.empty()) {
                frame.values[c].push_back(0.0);
                frame.missing[c].push_back(1);
            } else {
                char* end = nullptr;
                const double v = std::strtod(f.c_str(), &end);
                if (end != f.c_str() + f.size()) {
                    throw CsvError(path + ":" + std::to_string(lineno) + ": bad number '" + f +
                                   "' in column " + frame.channels[c]);
                }
                frame.values[c].push_back(v);
                frame.missing[c].push_back(0);
            }
        }
    }
    frame.validate();
    return frame;
}

void write_csv(const TimeSeriesFrame& frame, const std::string& path) {
    frame.validate();
    if (frame.channels.size() != kCanonicalChannels.size()) {
        throw CsvError("write_csv: frame does not carry the canonical channel set");
    }
    for (std::size_t c = 0; c < frame.channels.size(); ++c) {
        if (frame.channels[c] != kCanonicalChannels[c]) {
            throw CsvError("write_csv: channel '" + frame.channels[c] + "' at position " +
                           std::to_string(c) + " breaks the canonical order");
        }
    }
    std::ofstream out(path);
    if (!out) throw CsvError("cannot open '" + path + "' for writing");
    out << expected_header() << '\n';
    char buf[40];
    for (std::size_t t = 0; t < frame.rows(); ++t) {
        out << format_iso_hour(frame.time[t]);
        for (std::size_t c = 0; c < frame.channels.size(); ++c) {
            out << ',';
            if (!frame.missing[c][t]) {
                std::snprintf(buf, sizeof(buf), "%.17g", frame.values[c][t]);
                out << buf;
            }
        }
        out << '\n';
    }
    if (!out) throw CsvError("write failed for '" + path + "'");
}

// --- normalizer ----------------------------------------------------------------

double Normalizer::apply_one(std::size_t channel, double v) const {
    return (v - mean[channel]) / stddev[channel];
}

double Normalizer::invert_one(std::size_t channel, double v) const {
    return v * stddev[channel] + mean[channel];
}

Normalizer fit_normalizer(const TimeSeriesFrame& frame, IndexRange train) {
    if (train.size() == 0) throw std::invalid_argument("fit_normalizer: empty train range");
    if (train.end > frame.rows()) throw std::invalid_argument("fit_normalizer: range exceeds frame");

    Normalizer n;
    n.channels = frame.channels;
    n.mean.resize(frame.channels.size());
    n.stddev.resize(frame.channels.size());
    for (std::size_t c = 0; c < frame.channels.size(); ++c) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t t = train.begin; t < train.end; ++t) {
            if (frame.missing[c][t]) continue;
            sum += frame.values[c][t];
            ++count;
        }
        if (count == 0) {
            throw std::invalid_argument("fit_normalizer: channel '" + frame.channels[c] +
                                        "' is fully masked on the train range");
        }
        const double mean = sum / static_cast<double>(count);
        double sq = 0.0;
        for (std::size_t t = train.begin; t < train.end; ++t) {
            if (frame.missing[c][t]) continue;
            const double d = frame.values[c][t] - mean;
            sq += d * d;
        }
        const double stddev = std::sqrt(sq / static_cast<double>(count));
        n.mean[c] = mean;
        n.stddev[c] = std::max(stddev, Normalizer::kStdFloor);
    }
    return n;
}

TimeSeriesFrame apply_normalizer(const Normalizer& n, const TimeSeriesFrame& frame) {
    if (n.channels != frame.channels) {
        throw std::invalid_argument("apply_normalizer: channel sets differ");
    }
    TimeSeriesFrame out = frame;
    for (std::size_t c = 0; c < frame.channels.size(); ++c) {
        for (std::size_t t = 0; t < frame.rows(); ++t) {
            out.values[c][t] = n.apply_one(c, frame.values[c][t]);
        }
    }
    return out;
}

// --- split ---------------------------------------------------------------------

SplitPlan chronological_split(const TimeSeriesFrame& frame, std::array<double, 3> ratios,
                              bool missing_to_test, std::size_t min_train_len) {
    const double sum = ratios[0] + ratios[1] + ratios[2];
    if (ratios[0] <= 0 || ratios[1] <= 0 || ratios[2] <= 0 || std::abs(sum - 1.0) > 1e-9) {
        throw std::invalid_argument("chronological_split: ratios must be positive and sum to 1");
    }
    const std::size_t n = frame.rows();
    std::size_t train_end = static_cast<std::size_t>(ratios[0] * static_cast<double>(n));
    std::size_t val_end = static_cast<std::size_t>((ratios[0] + ratios[1]) * static_cast<double>(n));

    if (missing_to_test) {
        std::size_t first_masked = n;
        for (std::size_t t = 0; t < n && first_masked == n; ++t) {
            for (std::size_t c = 0; c < frame.channels.size(); ++c) {
                if (frame.missing[c][t]) {
                    first_masked = t;
                    break;
                }
            }
        }
        val_end = std::min(val_end, first_masked);
        train_end = std::min(train_end, val_end);
    }

    if (train_end < min_train_len) {
        throw std::invalid_argument("chronological_split: train range has " +
                                    std::to_string(train_end) + " rows, need at least " +
                                    std::to_string(min_train_len));
    }

    SplitPlan plan;
    plan.train = {0, train_end};
    plan.val = {train_end, val_end};
    plan.test = {val_end, n};
    plan.missing_to_test = missing_to_test;
    return plan;
}

// --- windows ---------------------------------------------------------------------

std::vector<WindowRef> make_windows(const TimeSeriesFrame& frame, const WindowSpec& spec,
                                    IndexRange range, const std::string& target_channel) {
    if (spec.lookback == 0 || spec.horizon == 0 || spec.stride == 0) {
        throw std::invalid_argument("make_windows: lookback, horizon, and stride must be >= 1");
    }
    if (range.end > frame.rows()) throw std::invalid_argument("make_windows: range exceeds frame");
    const std::size_t need = spec.lookback + spec.horizon;
    if (range.size() < need) {
        throw std::invalid_argument("make_windows: range of " + std::to_string(range.size()) +
                                    " rows is shorter than L+T = " + std::to_string(need));
    }
    const std::size_t target = frame.channel_index(target_channel);
    const std::size_t count = (range.size() - need) / spec.stride + 1;

    std::vector<WindowRef> windows;
    windows.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        WindowRef ref;
        ref.start = range.begin + k * spec.stride;
        for (std::size_t t = ref.start; t < ref.start + spec.lookback && !ref.masked_input; ++t) {
            for (std::size_t c = 0; c < frame.channels.size(); ++c) {
                if (frame.missing[c][t]) {
                    ref.masked_input = true;
                    break;
                }
            }
        }
        for (std::size_t t = ref.start + spec.lookback; t < ref.start + need; ++t) {
            if (frame.missing[target][t]) {
                ref.masked_target = true;
                break;
            }
        }
        windows.push_back(ref);
    }
    return windows;
}

WindowData materialize_window(const TimeSeriesFrame& frame, const WindowRef& ref,
                              const WindowSpec& spec, std::size_t target_channel) {
    if (ref.start + spec.lookback + spec.horizon > frame.rows()) {
        throw std::invalid_argument("materialize_window: window exceeds frame");
    }
    WindowData w;
    w.inputs = Tensor2(spec.lookback, frame.channels.size());
    for (std::size_t t = 0; t < spec.lookback; ++t) {
        for (std::size_t c = 0; c < frame.channels.size(); ++c) {
            w.inputs(t, c) = frame.values[c][ref.start + t];
        }
    }
    w.target.resize(spec.horizon);
    for (std::size_t t = 0; t < spec.horizon; ++t) {
        w.target[t] = frame.values[target_channel][ref.start + spec.lookback + t];
    }
    return w;
}

}  // namespace piad::dataio
