#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace cxflow {

enum class Approach : uint8_t { E = 0, W = 1, N = 2, S = 3 };
enum class Movement : uint8_t { L = 0, C = 1, R = 2 };

constexpr std::array<Approach, 4> kApproaches = {Approach::E, Approach::W, Approach::N, Approach::S};

// A traffic stream (moving direction): approach x movement, e.g. E-L.
struct StreamId {
    Approach approach;
    Movement movement;

    bool operator==(const StreamId&) const = default;
};

inline char approach_char(Approach a) {
    switch (a) {
    case Approach::E: return 'E';
    case Approach::W: return 'W';
    case Approach::N: return 'N';
    case Approach::S: return 'S';
    }
    return '?';
}

inline char movement_char(Movement m) {
    switch (m) {
    case Movement::L: return 'L';
    case Movement::C: return 'C';
    case Movement::R: return 'R';
    }
    return '?';
}

inline std::string stream_name(StreamId s) {
    return std::string{approach_char(s.approach), '-', movement_char(s.movement)};
}

// Canonical stream order. The first 8 slots are identical in both modes so a
// policy trained on 8 directions keeps its input layout; the controlled
// right-turn streams are appended after them in 12-direction mode.
inline const std::vector<StreamId>& canonical_streams(int mode) {
    static const std::vector<StreamId> k8 = {
        {Approach::E, Movement::L}, {Approach::E, Movement::C},
        {Approach::W, Movement::L}, {Approach::W, Movement::C},
        {Approach::N, Movement::L}, {Approach::N, Movement::C},
        {Approach::S, Movement::L}, {Approach::S, Movement::C},
    };
    static const std::vector<StreamId> k12 = [] {
        std::vector<StreamId> v = k8;
        for (Approach a : kApproaches) v.push_back({a, Movement::R});
        return v;
    }();
    if (mode == 8) return k8;
    if (mode == 12) return k12;
    throw std::invalid_argument("mode must be 8 or 12");
}

// Slot of a stream in the canonical order for the given mode, or -1.
inline int canonical_index(StreamId s, int mode) {
    const auto& order = canonical_streams(mode);
    for (size_t i = 0; i < order.size(); ++i)
        if (order[i] == s) return static_cast<int>(i);
    return -1;
}

inline StreamId parse_stream(const std::string& text) {
    if (text.size() != 3 || text[1] != '-') throw std::invalid_argument("bad stream name: " + text);
    Approach a;
    switch (text[0]) {
    case 'E': a = Approach::E; break;
    case 'W': a = Approach::W; break;
    case 'N': a = Approach::N; break;
    case 'S': a = Approach::S; break;
    default: throw std::invalid_argument("bad stream name: " + text);
    }
    Movement m;
    switch (text[2]) {
    case 'L': m = Movement::L; break;
    case 'C': m = Movement::C; break;
    case 'R': m = Movement::R; break;
    default: throw std::invalid_argument("bad stream name: " + text);
    }
    return {a, m};
}

} // namespace cxflow
