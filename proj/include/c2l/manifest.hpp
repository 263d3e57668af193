#pragma once

#include <string>
#include <vector>

#include "c2l/data.hpp"

namespace c2l {

// JSON manifest describing a directory of cycle files and their split
// assignment:
//   { "cycles": [ { "file": "PULSE-A1_25C.csv", "name": "PULSE-A1",
//                   "ambient_temp_c": 25.0, "split": "train" }, ... ] }
struct DataManifestEntry {
    std::string file;
    std::string name;
    double ambient_temp_c = 25.0;
    std::string split; // train | val | test
};

struct DataManifest {
    std::vector<DataManifestEntry> entries;

    SplitCatalog catalog() const;
};

DataManifest read_data_manifest(const std::string& path);
void write_data_manifest(const DataManifest& manifest, const std::string& path);

struct LoadedDataset {
    SplitRecords records;
    SplitCatalog catalog;
};

// Loads every cycle under `data_dir`. A `manifest.json` drives file list and
// splits when present; otherwise *.csv files are discovered, metadata comes
// from the filename convention, and splits from the fallback catalog.
LoadedDataset load_dataset(const std::string& data_dir,
                           const SplitCatalog& fallback = default_split_catalog());

// Scaler sidecar file, JSON with per-channel {min, max}.
void write_scaler_json(const ScalerParams& scaler, const std::string& path);
ScalerParams read_scaler_json(const std::string& path);

} // namespace c2l
