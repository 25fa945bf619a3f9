#include "cxflow/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace cxflow {

namespace {

constexpr char kMagic[7] = {'C', 'X', 'F', 'L', 'O', 'W', '1'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint writer assumes a little-endian host");

void write_u32(std::ostream& o, uint32_t v) { o.write(reinterpret_cast<char*>(&v), 4); }

uint32_t read_u32(std::istream& i) {
    uint32_t v = 0;
    i.read(reinterpret_cast<char*>(&v), 4);
    return v;
}

} // namespace

void save_checkpoint(const std::string& path, const nn::Mlp& net, int mode) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof kMagic);
    write_u32(out, static_cast<uint32_t>(mode));
    write_u32(out, static_cast<uint32_t>(net.layers.size()));
    for (const nn::Linear& l : net.layers) {
        write_u32(out, static_cast<uint32_t>(l.in));
        write_u32(out, static_cast<uint32_t>(l.out));
    }
    for (const nn::Linear& l : net.layers) {
        out.write(reinterpret_cast<const char*>(l.W.data()),
                  static_cast<std::streamsize>(l.W.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(l.b.data()),
                  static_cast<std::streamsize>(l.b.size() * sizeof(double)));
    }
    if (!out) throw std::runtime_error("short write on checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[7];
    in.read(magic, sizeof magic);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("bad checkpoint magic in " + path);
    Checkpoint ck;
    ck.mode = static_cast<int>(read_u32(in));
    uint32_t layers = read_u32(in);
    if (!in || layers == 0 || layers > 64)
        throw std::runtime_error("bad checkpoint header in " + path);
    std::vector<std::pair<uint32_t, uint32_t>> dims(layers);
    for (auto& [li, lo] : dims) {
        li = read_u32(in);
        lo = read_u32(in);
    }
    for (auto& [li, lo] : dims) {
        nn::Linear l;
        l.in = static_cast<int>(li);
        l.out = static_cast<int>(lo);
        l.W.resize(static_cast<size_t>(li) * lo);
        l.b.resize(lo);
        in.read(reinterpret_cast<char*>(l.W.data()),
                static_cast<std::streamsize>(l.W.size() * sizeof(double)));
        in.read(reinterpret_cast<char*>(l.b.data()),
                static_cast<std::streamsize>(l.b.size() * sizeof(double)));
        ck.net.layers.push_back(std::move(l));
    }
    if (!in) throw std::runtime_error("truncated checkpoint: " + path);
    for (size_t k = 1; k < ck.net.layers.size(); ++k)
        if (ck.net.layers[k].in != ck.net.layers[k - 1].out)
            throw std::runtime_error("inconsistent layer dims in " + path);
    return ck;
}

} // namespace cxflow
