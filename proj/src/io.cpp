#include "nlstorus/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace nlst::io {

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return {buf, res.ptr};
}

std::string series_csv(const DiagnosticSeries& series) {
    std::ostringstream os;
    os << "t,mass,hamiltonian";
    for (double s : series.sobolev_s) os << ",sobolev_" << format_double(s);
    for (double M : series.tail_radii) os << ",tail_" << format_double(M);
    os << "\n";
    for (const auto& rec : series.records) {
        os << format_double(rec.t) << ',' << format_double(rec.mass) << ','
           << format_double(rec.hamiltonian);
        for (double v : rec.sobolev) os << ',' << format_double(v);
        for (double v : rec.tails) os << ',' << format_double(v);
        os << "\n";
    }
    return os.str();
}

std::string levels_csv(const LevelSets& levels) {
    std::ostringstream os;
    os << "m,l,level\n";
    for (std::size_t j = 0; j < levels.levels.size(); ++j)
        for (ModeIndex k : levels.levels[j])
            os << k.m << ',' << k.l << ',' << (j + 1) << "\n";
    return os.str();
}

std::string levels_json(const LevelSets& levels) {
    std::ostringstream os;
    os << "{\"exhausted\":" << (levels.exhausted ? "true" : "false") << ",\"levels\":[";
    for (std::size_t j = 0; j < levels.levels.size(); ++j) {
        if (j) os << ',';
        os << '[';
        for (std::size_t i = 0; i < levels.levels[j].size(); ++i) {
            if (i) os << ',';
            os << '[' << levels.levels[j][i].m << ',' << levels.levels[j][i].l << ']';
        }
        os << ']';
    }
    os << "]}";
    return os.str();
}

std::string quartets_json(const std::vector<Quartet>& quartets) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < quartets.size(); ++i) {
        if (i) os << ',';
        const Quartet& q = quartets[i];
        os << "[[" << q.k1.m << ',' << q.k1.l << "],[" << q.k2.m << ',' << q.k2.l << "],["
           << q.k3.m << ',' << q.k3.l << "],[" << q.k4.m << ',' << q.k4.l << "]]";
    }
    os << "]";
    return os.str();
}

std::string spectrum_csv(const SpectrumDump& spectrum) {
    std::ostringstream os;
    os << "m,l,energy\n";
    const int K = spectrum.k_alias;
    for (std::int64_t m = -K; m <= K; ++m)
        for (std::int64_t l = -K; l <= K; ++l)
            os << m << ',' << l << ',' << format_double(spectrum.at({m, l})) << "\n";
    return os.str();
}

std::string svg_series(const std::vector<std::vector<std::pair<double, double>>>& lines,
                       const std::string& x_label, const std::string& y_label) {
    const int W = 720, H = 420, pad = 50;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    bool first = true;
    for (const auto& line : lines)
        for (auto [x, y] : line) {
            if (first) {
                xmin = xmax = x;
                ymin = ymax = y;
                first = false;
            }
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    auto px = [&](double x) { return pad + (x - xmin) / (xmax - xmin) * (W - 2 * pad); };
    auto py = [&](double y) { return H - pad - (y - ymin) / (ymax - ymin) * (H - 2 * pad); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};
    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H << "'>\n";
    os << "<rect width='100%' height='100%' fill='white'/>\n";
    os << "<line x1='" << pad << "' y1='" << H - pad << "' x2='" << W - pad << "' y2='"
       << H - pad << "' stroke='black'/>\n";
    os << "<line x1='" << pad << "' y1='" << pad << "' x2='" << pad << "' y2='" << H - pad
       << "' stroke='black'/>\n";
    for (std::size_t i = 0; i < lines.size(); ++i) {
        os << "<polyline fill='none' stroke='" << colors[i % 10] << "' points='";
        for (auto [x, y] : lines[i]) os << px(x) << ',' << py(y) << ' ';
        os << "'/>\n";
    }
    os << "<text x='" << W / 2 << "' y='" << H - 12 << "' text-anchor='middle'>" << x_label
       << "</text>\n";
    os << "<text x='14' y='" << H / 2 << "' text-anchor='middle' transform='rotate(-90 14 "
       << H / 2 << ")'>" << y_label << "</text>\n";
    os << "</svg>\n";
    return os.str();
}

std::string svg_spectrum(const SpectrumDump& spectrum) {
    const int K = spectrum.k_alias;
    const int W = 2 * K + 1;
    const int cell = std::max(1, 640 / W);
    double emax = 0.0;
    for (double e : spectrum.energy) emax = std::max(emax, e);
    const double floor_e = emax > 0 ? emax * 1e-12 : 1.0;

    std::ostringstream os;
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W * cell << "' height='"
       << W * cell << "'>\n";
    for (std::int64_t m = -K; m <= K; ++m)
        for (std::int64_t l = -K; l <= K; ++l) {
            double e = spectrum.at({m, l});
            double v = e <= floor_e ? 0.0
                                    : std::log(e / floor_e) / std::log(emax / floor_e);
            int shade = static_cast<int>(255 * (1.0 - v));
            os << "<rect x='" << (l + K) * cell << "' y='" << (K - m) * cell << "' width='"
               << cell << "' height='" << cell << "' fill='rgb(" << 255 << ',' << shade << ','
               << shade << ")'/>\n";
        }
    os << "</svg>\n";
    return os.str();
}

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open for writing: " + tmp);
        os.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!os) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed: " + path);
}

std::string config_hash(const std::string& canonical_json) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : canonical_json) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace nlst::io
