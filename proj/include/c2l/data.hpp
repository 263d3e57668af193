#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "c2l/matrix.hpp"

namespace c2l {

struct CycleMeta {
    std::string cycle_name;
    double ambient_temp_c = 25.0;
};

// One full discharge profile: timestamped current/voltage/temperature series
// plus the ground-truth state of charge.
struct DriveCycleRecord {
    std::string cycle_name;
    double ambient_temp_c = 25.0;
    double sample_period_s = 0.1;
    std::vector<Scalar> time_s;
    std::vector<Scalar> current_a;     // discharge negative
    std::vector<Scalar> voltage_v;
    std::vector<Scalar> temperature_c;
    std::vector<Scalar> soc;           // fraction in [0, 1]
    std::size_t size() const { return current_a.size(); }
};

inline constexpr const char* kCycleCsvHeader = "time_s,current_a,voltage_v,temperature_c,soc";

// Parses the cycle CSV format (header exactly kCycleCsvHeader, one sample per
// line). Each malformed input produces a distinct error message carrying the
// line number. With require_soc == false a four-column header without `soc`
// is accepted and the soc series is left empty.
DriveCycleRecord load_drive_cycle(std::istream& in, const CycleMeta& meta,
                                  bool require_soc = true);

// Loads from a path, deriving name and ambient temperature from the
// `<CYCLE>_<TEMP>C.csv` filename convention.
DriveCycleRecord load_drive_cycle_file(const std::string& path, bool require_soc = true);

CycleMeta meta_from_filename(const std::string& path);

struct ChannelRange {
    Scalar min = 0.0;
    Scalar max = 0.0;
};

// Per-channel extrema, fitted exclusively on training cycles.
struct ScalerParams {
    ChannelRange current;
    ChannelRange voltage;
    ChannelRange temperature;
};

ScalerParams fit_scaler(std::span<const DriveCycleRecord> train_records);

// (x - min) / (max - min) per input channel. Values outside [0, 1] are passed
// through unclamped; soc and time are untouched.
DriveCycleRecord apply_scaler(const DriveCycleRecord& record, const ScalerParams& s);

// One training/evaluation sample: a view into a scaled record. The window is
// the `window_len` consecutive rows ending at `end_index`; no padding rows
// ever exist, the first window_len-1 steps of a record yield no sample.
struct WindowSample {
    const DriveCycleRecord* source = nullptr;
    Index end_index = 0;
    Scalar target_soc = 0.0;

    // L x 3 matrix of (current, voltage, temperature), most recent last.
    Mat materialize(Index window_len) const;
};

std::vector<WindowSample> make_windows(const DriveCycleRecord& scaled, Index window_len,
                                       Index stride);

struct SplitCatalog {
    std::vector<std::string> train;
    std::vector<std::string> val;
    std::vector<std::string> test;
};

// The dataset's published cycle partition for the drive-cycle corpus this
// engine targets.
SplitCatalog default_split_catalog();

struct SplitRecords {
    std::vector<DriveCycleRecord> train;
    std::vector<DriveCycleRecord> val;
    std::vector<DriveCycleRecord> test;
};

// Partitions records by cycle name. A name appearing in several catalog
// lists, or in none, is a configuration error.
SplitRecords split_cycles(const SplitCatalog& catalog, std::vector<DriveCycleRecord> records);

} // namespace c2l
