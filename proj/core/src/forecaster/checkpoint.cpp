#include "trackcast/forecaster/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "trackcast/errors.hpp"

namespace trackcast::forecaster {

namespace {

constexpr char kMagic[8] = {'T', 'R', 'K', 'C', 'K', 'P', 'T', '\0'};

class Writer {
public:
    void bytes(const void* p, std::size_t n) {
        const auto* b = static_cast<const std::uint8_t*>(p);
        out.insert(out.end(), b, b + n);
    }
    template <typename T>
    void integer(T v) {
        for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u32(std::uint32_t v) { integer(v); }
    void u64(std::uint64_t v) { integer(v); }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }

    std::vector<std::uint8_t> out;
};

class Reader {
public:
    explicit Reader(const std::vector<std::uint8_t>& in) : in_(in) {}

    void need(std::size_t n, const char* what) const {
        if (in_.size() - pos_ < n) {
            throw LoadError(std::string("checkpoint truncated while reading ") + what + " at byte " +
                            std::to_string(pos_));
        }
    }
    template <typename T>
    T integer(const char* what) {
        need(sizeof(T), what);
        T v = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(static_cast<T>(in_[pos_ + i]) << (8 * i));
        pos_ += sizeof(T);
        return v;
    }
    std::uint32_t u32(const char* what) { return integer<std::uint32_t>(what); }
    std::uint64_t u64(const char* what) { return integer<std::uint64_t>(what); }
    double f64(const char* what) { return std::bit_cast<double>(u64(what)); }
    std::string text(std::size_t n, const char* what) {
        need(n, what);
        std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
        pos_ += n;
        return s;
    }
    bool done() const { return pos_ == in_.size(); }

private:
    const std::vector<std::uint8_t>& in_;
    std::size_t pos_ = 0;
};

std::uint32_t flag_bits(const exo::ExogenousFlags& f) {
    std::uint32_t bits = 0;
    for (std::size_t i = 0; i < exo::kAllSources.size(); ++i)
        if (f.enabled(exo::kAllSources[i])) bits |= 1u << i;
    return bits;
}

} // namespace

std::vector<std::uint8_t> save_checkpoint(const ForecastModel& model) {
    Writer w;
    w.bytes(kMagic, sizeof(kMagic));
    w.u32(kCheckpointVersion);
    const auto& c = model.config();
    w.u32(static_cast<std::uint32_t>(c.variant));
    w.u64(c.window);
    w.u64(c.layers);
    w.u64(c.hidden);
    w.u64(c.kernel_width);
    w.u64(c.output_width);
    w.u64(c.positions);
    w.u32(flag_bits(c.flags));
    w.u32(c.per_category_embedding ? 1 : 0);
    w.u64(c.seed);
    for (double v : model.input_scaling.mean) w.f64(v);
    for (double v : model.input_scaling.scale) w.f64(v);
    for (double v : model.passthrough_scaling.mean) w.f64(v);
    for (double v : model.passthrough_scaling.scale) w.f64(v);

    const auto& store = model.parameters();
    w.u64(store.size());
    for (const auto& p : store) {
        w.u32(static_cast<std::uint32_t>(p.name.size()));
        w.bytes(p.name.data(), p.name.size());
        w.u32(static_cast<std::uint32_t>(p.value.rank()));
        for (auto d : p.value.shape()) w.u64(d);
    }
    for (const auto& p : store)
        for (double v : p.value.values()) w.f64(v);
    return std::move(w.out);
}

ForecastModel load_checkpoint(const std::vector<std::uint8_t>& bytes) {
    Reader r(bytes);
    if (r.text(sizeof(kMagic), "magic") != std::string(kMagic, sizeof(kMagic))) {
        throw LoadError("not a trackcast checkpoint (bad magic)");
    }
    const auto version = r.u32("version");
    if (version != kCheckpointVersion) {
        throw LoadError("checkpoint format version " + std::to_string(version) + ", expected " +
                        std::to_string(kCheckpointVersion));
    }
    ModelConfig c;
    const auto variant = r.u32("variant");
    if (variant > static_cast<std::uint32_t>(cells::CellKind::gru)) {
        throw LoadError("unknown variant code " + std::to_string(variant));
    }
    c.variant = static_cast<cells::CellKind>(variant);
    c.window = r.u64("window");
    c.layers = r.u64("layers");
    c.hidden = r.u64("hidden");
    c.kernel_width = r.u64("kernel_width");
    c.output_width = r.u64("output_width");
    c.positions = r.u64("positions");
    const auto bits = r.u32("flags");
    for (std::size_t i = 0; i < exo::kAllSources.size(); ++i) c.flags.set(exo::kAllSources[i], (bits >> i) & 1u);
    c.per_category_embedding = r.u32("per_category") != 0;
    c.seed = r.u64("seed");
    // Guard against absurd sizes before allocating anything.
    const std::uint64_t limit = 1u << 24;
    if (c.window > limit || c.layers > limit || c.hidden > limit || c.kernel_width > limit ||
        c.output_width > limit || c.positions > limit) {
        throw LoadError("checkpoint configuration block is corrupt");
    }
    try {
        c.validate();
    } catch (const ConfigurationError& e) {
        throw LoadError(std::string("checkpoint configuration invalid: ") + e.what());
    }

    InputScaling in;
    exo::PassthroughScaling pass;
    for (double& v : in.mean) v = r.f64("input scaling");
    for (double& v : in.scale) v = r.f64("input scaling");
    for (double& v : pass.mean) v = r.f64("passthrough scaling");
    for (double& v : pass.scale) v = r.f64("passthrough scaling");

    const auto count = r.u64("parameter count");
    // Validate the shape table against a freshly built model of this config.
    std::vector<std::string> names;
    std::vector<nn::Shape> shapes;
    for (std::uint64_t i = 0; i < count && i < limit; ++i) {
        const auto len = r.u32("parameter name length");
        names.push_back(r.text(len, "parameter name"));
        const auto rank = r.u32("parameter rank");
        if (rank == 0 || rank > 3) throw LoadError("parameter " + names.back() + " has invalid rank");
        nn::Shape shape;
        for (std::uint32_t k = 0; k < rank; ++k) shape.push_back(r.u64("parameter shape"));
        shapes.push_back(std::move(shape));
    }
    ForecastModel model(c);
    auto& store = model.parameters();
    if (count != store.size()) {
        throw LoadError("checkpoint holds " + std::to_string(count) + " parameters, configuration implies " +
                        std::to_string(store.size()));
    }
    for (std::size_t i = 0; i < store.size(); ++i) {
        if (names[i] != store[i].name || shapes[i] != store[i].value.shape()) {
            throw LoadError("parameter " + std::to_string(i) + " is " + names[i] + " " + nn::shape_string(shapes[i]) +
                            ", expected " + store[i].name + " " + nn::shape_string(store[i].value.shape()));
        }
    }
    for (auto& p : store)
        for (double& v : p.value.values()) v = r.f64("parameter payload");
    if (!r.done()) throw LoadError("trailing bytes after checkpoint payload");
    model.input_scaling = in;
    model.passthrough_scaling = pass;
    return model;
}

void write_checkpoint(const ForecastModel& model, const std::filesystem::path& path) {
    const auto bytes = save_checkpoint(model);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

ForecastModel read_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open checkpoint " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return load_checkpoint(bytes);
}

} // namespace trackcast::forecaster
