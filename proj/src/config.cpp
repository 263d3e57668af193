#include "c2l/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace c2l {

namespace {

std::string trim(const std::string& s) {
    const std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) {
        return "";
    }
    const std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int parse_int(const std::string& key, const std::string& value) {
    int out = 0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + key + "': expected integer, got '" + value + "'");
    }
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    double out = 0.0;
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc() || ptr != value.data() + value.size()) {
        throw ConfigError("config key '" + key + "': expected number, got '" + value + "'");
    }
    return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
    if (value == "false" || value == "0" || value == "no" || value == "off") return false;
    throw ConfigError("config key '" + key + "': expected boolean, got '" + value + "'");
}

std::vector<std::uint64_t> parse_seed_list(const std::string& key, const std::string& value) {
    std::vector<std::uint64_t> seeds;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (item.empty()) {
            continue;
        }
        std::uint64_t seed = 0;
        auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), seed);
        if (ec != std::errc() || ptr != item.data() + item.size()) {
            throw ConfigError("config key '" + key + "': bad seed '" + item + "'");
        }
        seeds.push_back(seed);
    }
    if (seeds.empty()) {
        throw ConfigError("config key '" + key + "': empty seed list");
    }
    return seeds;
}

} // namespace

KvMap parse_kv_text(const std::string& text) {
    KvMap kv;
    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) +
                              ": expected 'key = value', got '" + line + "'");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        }
        kv[key] = value;
    }
    return kv;
}

KvMap parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file '" + path + "'");
    }
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_kv_text(buffer.str());
}

RunConfig parse_run_config(const KvMap& kv) {
    RunConfig cfg;
    for (const auto& [key, value] : kv) {
        if (key == "window_len") cfg.model.window_len = parse_int(key, value);
        else if (key == "chunks") cfg.model.chunks = parse_int(key, value);
        else if (key == "channels") cfg.model.channels = parse_int(key, value);
        else if (key == "hidden") cfg.model.hidden = parse_int(key, value);
        else if (key == "harmonics") cfg.model.harmonics = parse_int(key, value);
        else if (key == "token_len") cfg.model.token_len = parse_int(key, value);
        else if (key == "dropout") cfg.model.dropout = parse_double(key, value);
        else if (key == "attention_temp") cfg.model.attention_temp = parse_double(key, value);
        else if (key == "layernorm_eps") cfg.model.layernorm_eps = parse_double(key, value);
        else if (key == "seed") cfg.model.seed = static_cast<std::uint64_t>(parse_int(key, value));
        else if (key == "epochs") cfg.train.epochs = parse_int(key, value);
        else if (key == "batch_size") cfg.train.batch_size = parse_int(key, value);
        else if (key == "learning_rate") cfg.train.learning_rate = parse_double(key, value);
        else if (key == "beta1") cfg.train.beta1 = parse_double(key, value);
        else if (key == "beta2") cfg.train.beta2 = parse_double(key, value);
        else if (key == "adam_eps") cfg.train.adam_eps = parse_double(key, value);
        else if (key == "weight_decay") cfg.train.weight_decay = parse_double(key, value);
        else if (key == "seeds") cfg.train.seeds = parse_seed_list(key, value);
        else if (key == "shuffle") cfg.train.shuffle = parse_bool(key, value);
        else if (key == "train_stride") cfg.train.train_stride = parse_int(key, value);
        else if (key == "val_stride") cfg.train.val_stride = parse_int(key, value);
        else if (key == "select_best") cfg.train.select_best = parse_bool(key, value);
        else throw ConfigError("unknown config key '" + key + "'");
    }
    cfg.model.validate();
    cfg.train.validate();
    return cfg;
}

std::string canonical_config_text(const RunConfig& cfg) {
    char buf[2048];
    std::string seeds;
    for (std::size_t i = 0; i < cfg.train.seeds.size(); ++i) {
        if (i > 0) {
            seeds += ",";
        }
        seeds += std::to_string(cfg.train.seeds[i]);
    }
    std::snprintf(buf, sizeof(buf),
                  "window_len=%d\nchunks=%d\nchannels=%d\nhidden=%d\nharmonics=%d\n"
                  "token_len=%d\ndropout=%.17g\nattention_temp=%.17g\nlayernorm_eps=%.17g\n"
                  "seed=%llu\nepochs=%d\nbatch_size=%d\nlearning_rate=%.17g\nbeta1=%.17g\n"
                  "beta2=%.17g\nadam_eps=%.17g\nweight_decay=%.17g\nseeds=%s\nshuffle=%d\n"
                  "train_stride=%d\nval_stride=%d\nselect_best=%d\n",
                  cfg.model.window_len, cfg.model.chunks, cfg.model.channels,
                  cfg.model.hidden, cfg.model.harmonics, cfg.model.token_len,
                  cfg.model.dropout, cfg.model.attention_temp, cfg.model.layernorm_eps,
                  static_cast<unsigned long long>(cfg.model.seed), cfg.train.epochs,
                  cfg.train.batch_size, cfg.train.learning_rate, cfg.train.beta1,
                  cfg.train.beta2, cfg.train.adam_eps, cfg.train.weight_decay, seeds.c_str(),
                  cfg.train.shuffle ? 1 : 0, cfg.train.train_stride, cfg.train.val_stride,
                  cfg.train.select_best ? 1 : 0);
    return std::string(buf);
}

std::string config_hash(const RunConfig& cfg) {
    const std::string text = canonical_config_text(cfg);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace c2l
