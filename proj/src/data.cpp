#include "c2l/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <unordered_map>
#include <unordered_set>

namespace c2l {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    fields.push_back(cur);
    return fields;
}

Scalar parse_number(const std::string& field, std::size_t line_no, const std::string& column) {
    Scalar value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || field.empty()) {
        throw DataError("line " + std::to_string(line_no) + ": non-numeric value '" + field +
                        "' in column " + column);
    }
    if (!std::isfinite(value)) {
        throw DataError("line " + std::to_string(line_no) + ": non-finite value in column " +
                        column);
    }
    return value;
}

constexpr Scalar kSocTolerance = 1e-6;

const char* kColumns[5] = {"time_s", "current_a", "voltage_v", "temperature_c", "soc"};

} // namespace

DriveCycleRecord load_drive_cycle(std::istream& in, const CycleMeta& meta, bool require_soc) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("cycle '" + meta.cycle_name + "': empty file");
    }
    std::vector<std::string> header = split_csv_line(line);
    std::size_t expected_cols = 5;
    if (header.size() == 4 && !require_soc) {
        expected_cols = 4;
    }
    for (std::size_t c = 0; c < expected_cols; ++c) {
        const bool present = c < header.size() && header[c] == kColumns[c];
        if (!present) {
            // Distinguish a missing column from a scrambled header.
            bool found_anywhere = false;
            for (const std::string& h : header) {
                if (h == kColumns[c]) {
                    found_anywhere = true;
                    break;
                }
            }
            if (!found_anywhere) {
                throw DataError("cycle '" + meta.cycle_name + "': missing column '" +
                                kColumns[c] + "' (header must be '" +
                                std::string(kCycleCsvHeader) + "')");
            }
            throw DataError("cycle '" + meta.cycle_name + "': column order must be '" +
                            std::string(kCycleCsvHeader) + "', got '" + line + "'");
        }
    }
    if (header.size() > expected_cols) {
        throw DataError("cycle '" + meta.cycle_name + "': unexpected extra columns in header '" +
                        line + "'");
    }

    DriveCycleRecord record;
    record.cycle_name = meta.cycle_name;
    record.ambient_temp_c = meta.ambient_temp_c;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") {
            continue;
        }
        std::vector<std::string> fields = split_csv_line(line);
        if (fields.size() != expected_cols) {
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(expected_cols) + " fields, got " +
                            std::to_string(fields.size()));
        }
        record.time_s.push_back(parse_number(fields[0], line_no, "time_s"));
        record.current_a.push_back(parse_number(fields[1], line_no, "current_a"));
        record.voltage_v.push_back(parse_number(fields[2], line_no, "voltage_v"));
        record.temperature_c.push_back(parse_number(fields[3], line_no, "temperature_c"));
        if (expected_cols == 5) {
            Scalar soc = parse_number(fields[4], line_no, "soc");
            if (soc < -kSocTolerance || soc > 1.0 + kSocTolerance) {
                throw DataError("line " + std::to_string(line_no) + ": soc " +
                                std::to_string(soc) + " outside [0, 1]");
            }
            record.soc.push_back(std::clamp(soc, Scalar(0), Scalar(1)));
        }
    }
    if (record.size() == 0) {
        throw DataError("cycle '" + meta.cycle_name + "': no data rows");
    }
    if (record.time_s.size() >= 2) {
        const Scalar period = record.time_s[1] - record.time_s[0];
        if (!(period > 0.0)) {
            throw DataError("cycle '" + meta.cycle_name + "': non-increasing time column");
        }
        record.sample_period_s = period;
    }
    return record;
}

CycleMeta meta_from_filename(const std::string& path) {
    std::string stem = path;
    const std::size_t slash = stem.find_last_of("/\\");
    if (slash != std::string::npos) {
        stem = stem.substr(slash + 1);
    }
    const std::size_t dot = stem.rfind('.');
    if (dot != std::string::npos) {
        stem = stem.substr(0, dot);
    }
    const std::size_t underscore = stem.rfind('_');
    if (underscore == std::string::npos || underscore + 1 >= stem.size() ||
        stem.back() != 'C') {
        throw DataError("cannot derive cycle metadata from filename '" + path +
                        "': expected '<CYCLE>_<TEMP>C.csv'");
    }
    const std::string temp_part = stem.substr(underscore + 1, stem.size() - underscore - 2);
    Scalar temp = 0.0;
    const char* begin = temp_part.data();
    const char* end = begin + temp_part.size();
    auto [ptr, ec] = std::from_chars(begin, end, temp);
    if (ec != std::errc() || ptr != end || temp_part.empty()) {
        throw DataError("cannot parse ambient temperature from filename '" + path + "'");
    }
    return CycleMeta{stem.substr(0, underscore), temp};
}

DriveCycleRecord load_drive_cycle_file(const std::string& path, bool require_soc) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open cycle file '" + path + "'");
    }
    return load_drive_cycle(in, meta_from_filename(path), require_soc);
}

ScalerParams fit_scaler(std::span<const DriveCycleRecord> train_records) {
    if (train_records.empty()) {
        throw ParamError("fit_scaler: no training records");
    }
    const Scalar inf = std::numeric_limits<Scalar>::infinity();
    ScalerParams s{{inf, -inf}, {inf, -inf}, {inf, -inf}};
    auto absorb = [](ChannelRange& range, const std::vector<Scalar>& series) {
        for (Scalar v : series) {
            range.min = std::min(range.min, v);
            range.max = std::max(range.max, v);
        }
    };
    for (const DriveCycleRecord& r : train_records) {
        absorb(s.current, r.current_a);
        absorb(s.voltage, r.voltage_v);
        absorb(s.temperature, r.temperature_c);
    }
    auto check = [](const ChannelRange& range, const char* name) {
        if (!(range.max > range.min)) {
            throw DataError(std::string("fit_scaler: degenerate channel '") + name +
                            "' (max equals min at " + std::to_string(range.min) + ")");
        }
    };
    check(s.current, "current_a");
    check(s.voltage, "voltage_v");
    check(s.temperature, "temperature_c");
    return s;
}

DriveCycleRecord apply_scaler(const DriveCycleRecord& record, const ScalerParams& s) {
    DriveCycleRecord out = record;
    auto rescale = [](std::vector<Scalar>& series, const ChannelRange& range) {
        const Scalar span = range.max - range.min;
        for (Scalar& v : series) {
            v = (v - range.min) / span;
        }
    };
    rescale(out.current_a, s.current);
    rescale(out.voltage_v, s.voltage);
    rescale(out.temperature_c, s.temperature);
    return out;
}

Mat WindowSample::materialize(Index window_len) const {
    Mat w(window_len, 3);
    const Index first = end_index - window_len + 1;
    for (Index i = 0; i < window_len; ++i) {
        const std::size_t k = static_cast<std::size_t>(first + i);
        w(i, 0) = source->current_a[k];
        w(i, 1) = source->voltage_v[k];
        w(i, 2) = source->temperature_c[k];
    }
    return w;
}

std::vector<WindowSample> make_windows(const DriveCycleRecord& scaled, Index window_len,
                                       Index stride) {
    if (stride < 1) {
        throw ParamError("make_windows: stride must be >= 1");
    }
    if (window_len < 1) {
        throw ParamError("make_windows: window length must be >= 1");
    }
    const Index total = static_cast<Index>(scaled.size());
    if (total < window_len) {
        throw DataError("cycle '" + scaled.cycle_name + "': insufficient data, " +
                        std::to_string(total) + " samples < window length " +
                        std::to_string(window_len));
    }
    if (scaled.soc.size() != scaled.size()) {
        throw DataError("cycle '" + scaled.cycle_name + "': soc series missing");
    }
    std::vector<WindowSample> samples;
    samples.reserve(static_cast<std::size_t>((total - window_len) / stride) + 1);
    for (Index end = window_len - 1; end < total; end += stride) {
        samples.push_back(WindowSample{&scaled, end,
                                       scaled.soc[static_cast<std::size_t>(end)]});
    }
    return samples;
}

SplitCatalog default_split_catalog() {
    return SplitCatalog{
        {"BCDC", "LA92", "CSHVC", "HWFET", "IM", "US06", "PDTCB", "OCTBC"},
        {"HHDDT", "FTP-72"},
        {"FTP-75", "PDMHC"},
    };
}

SplitRecords split_cycles(const SplitCatalog& catalog, std::vector<DriveCycleRecord> records) {
    std::unordered_map<std::string, int> where; // 0 train, 1 val, 2 test
    auto ingest = [&where](const std::vector<std::string>& names, int tag) {
        for (const std::string& n : names) {
            auto [it, inserted] = where.emplace(n, tag);
            if (!inserted) {
                throw ConfigError("split catalog: cycle '" + n +
                                  "' appears in more than one split");
            }
        }
    };
    ingest(catalog.train, 0);
    ingest(catalog.val, 1);
    ingest(catalog.test, 2);

    SplitRecords out;
    for (DriveCycleRecord& r : records) {
        auto it = where.find(r.cycle_name);
        if (it == where.end()) {
            throw ConfigError("split catalog: cycle '" + r.cycle_name +
                              "' is not assigned to any split");
        }
        switch (it->second) {
        case 0: out.train.push_back(std::move(r)); break;
        case 1: out.val.push_back(std::move(r)); break;
        default: out.test.push_back(std::move(r)); break;
        }
    }
    return out;
}

} // namespace c2l
