#include "nlstorus/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace nlst {

namespace {

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is) {
    T v{};
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw std::runtime_error("truncated checkpoint");
    return v;
}

}  // namespace

void write_checkpoint(const std::string& path, const SpectralField& field, double s,
                      std::uint64_t seed) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open checkpoint for writing: " + path);
    os.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    put<std::uint32_t>(os, kCheckpointVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(field.grid_n()));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(field.k_alias()));
    put<std::uint8_t>(os, field.torus().kind() == TorusKind::Rational ? 0 : 1);
    put<double>(os, field.torus().omega_sq());
    put<std::int64_t>(os, field.torus().a());
    put<std::int64_t>(os, field.torus().b());
    put<double>(os, field.time());
    put<double>(os, s);
    put<std::uint64_t>(os, seed);
    for (const auto& c : field.coeffs()) {
        put<double>(os, c.real());
        put<double>(os, c.imag());
    }
    if (!os) throw std::runtime_error("checkpoint write failed: " + path);
}

Checkpoint read_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open checkpoint: " + path);
    char magic[sizeof(kCheckpointMagic)];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
        throw std::runtime_error("not a checkpoint file: " + path);
    const auto version = get<std::uint32_t>(is);
    if (version != kCheckpointVersion)
        throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
    const auto grid_n = static_cast<int>(get<std::uint32_t>(is));
    const auto k_alias = static_cast<int>(get<std::uint32_t>(is));
    const auto kind = get<std::uint8_t>(is);
    const auto omega_sq = get<double>(is);
    const auto a = get<std::int64_t>(is);
    const auto b = get<std::int64_t>(is);
    const auto time = get<double>(is);
    const auto s = get<double>(is);
    const auto seed = get<std::uint64_t>(is);

    TorusSpec torus = kind == 0 ? TorusSpec::rational(omega_sq) : TorusSpec::irrational(omega_sq);
    if (torus.a() != a || torus.b() != b)
        throw std::runtime_error("checkpoint fraction does not match its float: " + path);

    Checkpoint ck{SpectralField(grid_n, k_alias, torus, time), s, seed};
    for (auto& c : ck.field.coeffs()) {
        const double re = get<double>(is);
        const double im = get<double>(is);
        c = {re, im};
    }
    return ck;
}

}  // namespace nlst
