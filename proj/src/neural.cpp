#include "lgame/neural.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

namespace lgame::nn {

Algo algo_from_string(const std::string& s) {
    if (s == "sgd" || s == "sgd_nesterov") return Algo::SgdNesterov;
    if (s == "rmsprop") return Algo::RmsProp;
    if (s == "adadelta") return Algo::Adadelta;
    throw std::invalid_argument("unknown optimizer: " + s);
}

std::string algo_name(Algo a) {
    switch (a) {
        case Algo::SgdNesterov: return "sgd";
        case Algo::RmsProp: return "rmsprop";
        case Algo::Adadelta: return "adadelta";
    }
    return "?";
}

uint32_t crc32(const uint8_t* data, size_t len, uint32_t seed) {
    static uint32_t table[256];
    static bool ready = false;
    if (!ready) {
        for (uint32_t i = 0; i < 256; ++i) {
            uint32_t c = i;
            for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
            table[i] = c;
        }
        ready = true;
    }
    uint32_t c = seed ^ 0xffffffffu;
    for (size_t i = 0; i < len; ++i) c = table[(c ^ data[i]) & 0xff] ^ (c >> 8);
    return c ^ 0xffffffffu;
}

namespace {

constexpr char kMagic[5] = {'L', 'G', 'D', 'Q', 'N'};
constexpr uint32_t kVersion = 1;

void put_u32(std::string& buf, uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
}

void put_floats(std::string& buf, const float* p, size_t n) {
    // Row-major little-endian f32; the in-memory layout already matches on this target.
    buf.append(reinterpret_cast<const char*>(p), n * sizeof(float));
}

void put_layers(std::string& buf, const Network& net) {
    for (auto& l : net.layers) {
        put_u32(buf, uint32_t(l.w.rows()));
        put_u32(buf, uint32_t(l.w.cols()));
        put_floats(buf, l.w.data(), size_t(l.w.size()));
        put_floats(buf, l.b.data(), size_t(l.b.size()));
    }
}

struct Reader {
    const std::string& buf;
    size_t pos = 0;
    const char* what;

    uint32_t u32(const char* field) {
        if (pos + 4 > buf.size())
            throw std::runtime_error(std::string("checkpoint truncated reading ") + field);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= uint32_t(uint8_t(buf[pos + i])) << (8 * i);
        pos += 4;
        return v;
    }
    void floats(float* out, size_t n, const char* field) {
        if (pos + n * sizeof(float) > buf.size())
            throw std::runtime_error(std::string("checkpoint shape mismatch: truncated in ") + field);
        std::memcpy(out, buf.data() + pos, n * sizeof(float));
        pos += n * sizeof(float);
    }
    uint8_t byte(const char* field) {
        if (pos >= buf.size())
            throw std::runtime_error(std::string("checkpoint truncated reading ") + field);
        return uint8_t(buf[pos++]);
    }
};

Network read_layers(Reader& r, uint32_t n_layers, const Network* shape_like, const char* what) {
    Network net;
    for (uint32_t i = 0; i < n_layers; ++i) {
        Network::Layer l;
        uint32_t rows = r.u32("layer rows"), cols = r.u32("layer cols");
        if (rows == 0 || cols == 0 || rows > 100000 || cols > 100000)
            throw std::runtime_error(std::string("checkpoint shape mismatch in ") + what);
        if (shape_like && (rows != uint32_t(shape_like->layers[i].w.rows()) ||
                           cols != uint32_t(shape_like->layers[i].w.cols())))
            throw std::runtime_error(std::string("checkpoint shape mismatch in ") + what);
        l.w.resize(rows, cols);
        l.b.resize(rows);
        r.floats(l.w.data(), size_t(rows) * cols, "layer weights");
        r.floats(l.b.data(), rows, "layer biases");
        net.layers.push_back(std::move(l));
    }
    return net;
}

}  // namespace

void save_model(const Network& net, const OptimizerState& opt, Algo algo, const std::string& path) {
    std::string buf;
    buf.append(kMagic, 5);
    put_u32(buf, kVersion);
    put_u32(buf, uint32_t(net.layers.size()));
    put_layers(buf, net);
    buf.push_back(char(uint8_t(algo)));
    buf.push_back(char(uint8_t(opt.slots.size())));
    for (auto& slot : opt.slots) put_layers(buf, slot);
    put_u32(buf, crc32(reinterpret_cast<const uint8_t*>(buf.data()), buf.size()));

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    f.write(buf.data(), std::streamsize(buf.size()));
    if (!f) throw std::runtime_error("short write to checkpoint: " + path);
}

LoadedModel load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open checkpoint: " + path);
    std::string buf((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    Reader r{buf, 0, ""};
    if (buf.size() < 5 || std::memcmp(buf.data(), kMagic, 5) != 0)
        throw std::runtime_error("bad checkpoint magic");
    r.pos = 5;
    uint32_t version = r.u32("version");
    if (version != kVersion) throw std::runtime_error("unsupported checkpoint version");
    uint32_t n_layers = r.u32("layer count");
    if (n_layers == 0 || n_layers > 64) throw std::runtime_error("checkpoint shape mismatch in layer count");

    LoadedModel m;
    m.net = read_layers(r, n_layers, nullptr, "network parameters");
    m.algo = Algo(r.byte("optimizer tag"));
    if (uint8_t(m.algo) > 2) throw std::runtime_error("unknown optimizer tag in checkpoint");
    uint8_t n_slots = r.byte("optimizer buffer count");
    for (uint8_t i = 0; i < n_slots; ++i)
        m.opt.slots.push_back(read_layers(r, n_layers, &m.net, "optimizer buffers"));

    uint32_t stored = r.u32("checksum");
    uint32_t actual = crc32(reinterpret_cast<const uint8_t*>(buf.data()), r.pos - 4);
    if (stored != actual) throw std::runtime_error("checkpoint checksum mismatch");
    if (r.pos != buf.size()) throw std::runtime_error("trailing bytes after checkpoint checksum");
    return m;
}

}  // namespace lgame::nn
