#pragma once

#include <cstdint>
#include <string>

#include "nlstorus/field.hpp"

namespace nlst {

// Self-describing binary container: magic, version, grid/box geometry, the
// torus as float and exact fraction, time, Sobolev index, seed, then the
// coefficients as little-endian complex doubles in row-major mode order.
struct Checkpoint {
    SpectralField field;
    double s = 2.0;
    std::uint64_t seed = 0;
};

inline constexpr char kCheckpointMagic[8] = {'N', 'L', 'S', 'T', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void write_checkpoint(const std::string& path, const SpectralField& field, double s,
                      std::uint64_t seed);
Checkpoint read_checkpoint(const std::string& path);

}  // namespace nlst
