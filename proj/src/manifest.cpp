#include "c2l/manifest.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace c2l {

namespace fs = std::filesystem;
using nlohmann::json;

SplitCatalog DataManifest::catalog() const {
    SplitCatalog cat;
    for (const DataManifestEntry& e : entries) {
        if (e.split == "train") {
            cat.train.push_back(e.name);
        } else if (e.split == "val") {
            cat.val.push_back(e.name);
        } else if (e.split == "test") {
            cat.test.push_back(e.name);
        } else {
            throw ConfigError("manifest: cycle '" + e.name + "' has unknown split '" +
                              e.split + "' (train|val|test)");
        }
    }
    return cat;
}

DataManifest read_data_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open manifest '" + path + "'");
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw DataError("manifest '" + path + "': " + e.what());
    }
    if (!doc.contains("cycles") || !doc["cycles"].is_array()) {
        throw DataError("manifest '" + path + "': missing 'cycles' array");
    }
    DataManifest manifest;
    for (const json& item : doc["cycles"]) {
        DataManifestEntry entry;
        try {
            entry.file = item.at("file").get<std::string>();
            entry.name = item.at("name").get<std::string>();
            entry.ambient_temp_c = item.at("ambient_temp_c").get<double>();
            entry.split = item.at("split").get<std::string>();
        } catch (const json::exception& e) {
            throw DataError("manifest '" + path + "': bad cycle entry: " + e.what());
        }
        manifest.entries.push_back(std::move(entry));
    }
    return manifest;
}

void write_data_manifest(const DataManifest& manifest, const std::string& path) {
    json doc;
    doc["cycles"] = json::array();
    for (const DataManifestEntry& e : manifest.entries) {
        doc["cycles"].push_back({{"file", e.file},
                                 {"name", e.name},
                                 {"ambient_temp_c", e.ambient_temp_c},
                                 {"split", e.split}});
    }
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write manifest '" + path + "'");
    }
    out << doc.dump(2) << '\n';
}

LoadedDataset load_dataset(const std::string& data_dir, const SplitCatalog& fallback) {
    const fs::path dir(data_dir);
    if (!fs::exists(dir) || !fs::is_directory(dir)) {
        throw IoError("data directory '" + data_dir + "' does not exist");
    }

    std::vector<DriveCycleRecord> records;
    SplitCatalog catalog;
    const fs::path manifest_path = dir / "manifest.json";
    if (fs::exists(manifest_path)) {
        DataManifest manifest = read_data_manifest(manifest_path.string());
        catalog = manifest.catalog();
        for (const DataManifestEntry& e : manifest.entries) {
            const fs::path file = dir / e.file;
            std::ifstream in(file);
            if (!in) {
                throw IoError("cannot open cycle file '" + file.string() + "'");
            }
            records.push_back(
                load_drive_cycle(in, CycleMeta{e.name, e.ambient_temp_c}));
        }
    } else {
        catalog = fallback;
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(dir)) {
            if (entry.is_regular_file() && entry.path().extension() == ".csv") {
                files.push_back(entry.path());
            }
        }
        if (files.empty()) {
            throw DataError("data directory '" + data_dir +
                            "' contains no manifest.json and no *.csv files");
        }
        std::sort(files.begin(), files.end());
        for (const fs::path& file : files) {
            records.push_back(load_drive_cycle_file(file.string()));
        }
    }

    LoadedDataset out;
    out.catalog = catalog;
    out.records = split_cycles(catalog, std::move(records));
    return out;
}

void write_scaler_json(const ScalerParams& scaler, const std::string& path) {
    json doc = {
        {"current", {{"min", scaler.current.min}, {"max", scaler.current.max}}},
        {"voltage", {{"min", scaler.voltage.min}, {"max", scaler.voltage.max}}},
        {"temperature",
         {{"min", scaler.temperature.min}, {"max", scaler.temperature.max}}},
    };
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write scaler file '" + path + "'");
    }
    out << doc.dump(2) << '\n';
}

ScalerParams read_scaler_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open scaler file '" + path + "'");
    }
    json doc;
    try {
        in >> doc;
        ScalerParams s;
        s.current = {doc.at("current").at("min").get<double>(),
                     doc.at("current").at("max").get<double>()};
        s.voltage = {doc.at("voltage").at("min").get<double>(),
                     doc.at("voltage").at("max").get<double>()};
        s.temperature = {doc.at("temperature").at("min").get<double>(),
                         doc.at("temperature").at("max").get<double>()};
        return s;
    } catch (const json::exception& e) {
        throw DataError("scaler file '" + path + "': " + e.what());
    }
}

} // namespace c2l
