#include "c2l/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <unordered_map>
#include <vector>

namespace c2l {

namespace {

constexpr char kMagic[8] = {'C', '2', 'L', 'C', 'K', 'P', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

std::uint64_t fnv1a(const std::vector<unsigned char>& bytes, std::size_t count) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < count; ++i) {
        h ^= bytes[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { put_le(v, 2); }
    void u32(std::uint32_t v) { put_le(v, 4); }
    void u64(std::uint64_t v) { put_le(v, 8); }
    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
    void bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        buf_.insert(buf_.end(), p, p + n);
    }
    std::vector<unsigned char>& buffer() { return buf_; }

private:
    void put_le(std::uint64_t v, int width) {
        for (int i = 0; i < width; ++i) {
            buf_.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
        }
    }
    std::vector<unsigned char> buf_;
};

class Reader {
public:
    Reader(const std::vector<unsigned char>& buf, std::size_t limit)
        : buf_(buf), limit_(limit) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(take_le(1)); }
    std::uint16_t u16() { return static_cast<std::uint16_t>(take_le(2)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(take_le(4)); }
    std::uint64_t u64() { return take_le(8); }
    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
    double f64() { return std::bit_cast<double>(u64()); }
    float f32() { return std::bit_cast<float>(u32()); }
    std::string str(std::size_t n) {
        need(n);
        std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    std::size_t pos() const { return pos_; }

private:
    void need(std::size_t n) {
        if (pos_ + n > limit_) {
            throw DataError("truncated checkpoint");
        }
    }
    std::uint64_t take_le(int width) {
        need(static_cast<std::size_t>(width));
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) {
            v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
        }
        pos_ += static_cast<std::size_t>(width);
        return v;
    }
    const std::vector<unsigned char>& buf_;
    std::size_t limit_;
    std::size_t pos_ = 0;
};

} // namespace

void save_checkpoint(const Model& model, const std::optional<ScalerParams>& scaler,
                     const std::string& path, CheckpointPrecision precision) {
    Writer w;
    w.bytes(kMagic, sizeof(kMagic));
    w.u32(kVersion);
    w.u32(static_cast<std::uint32_t>(precision));

    const ModelConfig& cfg = model.config;
    w.i32(cfg.window_len);
    w.i32(cfg.chunks);
    w.i32(cfg.channels);
    w.i32(cfg.hidden);
    w.i32(cfg.harmonics);
    w.i32(cfg.token_len);
    w.f64(cfg.dropout);
    w.f64(cfg.attention_temp);
    w.f64(cfg.layernorm_eps);
    w.u64(cfg.seed);

    w.u8(scaler.has_value() ? 1 : 0);
    if (scaler.has_value()) {
        for (const ChannelRange& r : {scaler->current, scaler->voltage, scaler->temperature}) {
            w.f64(r.min);
            w.f64(r.max);
        }
    }

    const auto tensors = collect_tensors(model.params);
    w.u32(static_cast<std::uint32_t>(tensors.size()));
    for (const NamedTensorView& t : tensors) {
        w.u16(static_cast<std::uint16_t>(t.name.size()));
        w.bytes(t.name.data(), t.name.size());
        w.u32(static_cast<std::uint32_t>(t.tensor->rows()));
        w.u32(static_cast<std::uint32_t>(t.tensor->cols()));
        for (Index i = 0; i < t.tensor->rows(); ++i) {
            for (Index j = 0; j < t.tensor->cols(); ++j) {
                if (precision == CheckpointPrecision::f64) {
                    w.f64((*t.tensor)(i, j));
                } else {
                    w.f32(static_cast<float>((*t.tensor)(i, j)));
                }
            }
        }
    }

    w.u64(fnv1a(w.buffer(), w.buffer().size()));

    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write checkpoint '" + path + "'");
    }
    out.write(reinterpret_cast<const char*>(w.buffer().data()),
              static_cast<std::streamsize>(w.buffer().size()));
    if (!out.good()) {
        throw IoError("write failed for checkpoint '" + path + "'");
    }
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open checkpoint '" + path + "'");
    }
    std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
    if (buf.size() < sizeof(kMagic) + 8) {
        throw DataError("truncated checkpoint");
    }
    if (std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0) {
        throw DataError("bad checkpoint magic in '" + path + "'");
    }
    const std::size_t body = buf.size() - 8;
    std::uint64_t stored = 0;
    for (int i = 0; i < 8; ++i) {
        stored |= static_cast<std::uint64_t>(buf[body + i]) << (8 * i);
    }
    if (stored != fnv1a(buf, body)) {
        throw DataError("checkpoint checksum mismatch in '" + path + "'");
    }

    Reader r(buf, body);
    r.str(sizeof(kMagic)); // magic, already validated
    const std::uint32_t version = r.u32();
    if (version != kVersion) {
        throw DataError("unsupported checkpoint version " + std::to_string(version));
    }
    const std::uint32_t width = r.u32();
    if (width != 8 && width != 4) {
        throw DataError("unsupported checkpoint scalar width " + std::to_string(width));
    }
    const auto precision = static_cast<CheckpointPrecision>(width);

    ModelConfig cfg;
    cfg.window_len = r.i32();
    cfg.chunks = r.i32();
    cfg.channels = r.i32();
    cfg.hidden = r.i32();
    cfg.harmonics = r.i32();
    cfg.token_len = r.i32();
    cfg.dropout = r.f64();
    cfg.attention_temp = r.f64();
    cfg.layernorm_eps = r.f64();
    cfg.seed = r.u64();

    LoadedCheckpoint loaded;
    loaded.precision = precision;
    if (r.u8() != 0) {
        ScalerParams s;
        for (ChannelRange* range : {&s.current, &s.voltage, &s.temperature}) {
            range->min = r.f64();
            range->max = r.f64();
        }
        loaded.scaler = s;
    }

    loaded.model = build_model(cfg);
    auto tensors = collect_tensors(loaded.model.params);
    std::unordered_map<std::string, Mat*> by_name;
    for (NamedTensor& t : tensors) {
        by_name.emplace(t.name, t.tensor);
    }

    const std::uint32_t count = r.u32();
    if (count != tensors.size()) {
        throw DataError("checkpoint tensor count " + std::to_string(count) +
                        " does not match architecture (" + std::to_string(tensors.size()) +
                        ")");
    }
    for (std::uint32_t k = 0; k < count; ++k) {
        const std::string name = r.str(r.u16());
        const Index rows = r.i32();
        const Index cols = r.i32();
        auto it = by_name.find(name);
        if (it == by_name.end()) {
            throw DataError("checkpoint tensor '" + name + "' unknown to this architecture");
        }
        Mat& dst = *it->second;
        if (dst.rows() != rows || dst.cols() != cols) {
            throw DataError("checkpoint tensor '" + name + "' has shape " +
                            shape_str(rows, cols) + ", expected " + shape_str(dst));
        }
        for (Index i = 0; i < rows; ++i) {
            for (Index j = 0; j < cols; ++j) {
                dst(i, j) = (precision == CheckpointPrecision::f64)
                                ? r.f64()
                                : static_cast<Scalar>(r.f32());
            }
        }
    }
    return loaded;
}

std::int64_t storage_bytes(const ModelParams& params, CheckpointPrecision precision) {
    return count_params(params) * static_cast<std::int64_t>(precision);
}

} // namespace c2l
