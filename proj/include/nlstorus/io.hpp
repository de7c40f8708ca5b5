#pragma once

#include <string>
#include <vector>

#include "nlstorus/diagnostics.hpp"
#include "nlstorus/resonance.hpp"

namespace nlst::io {

// Shortest round-trip decimal representation; keeps CSV output byte-stable.
std::string format_double(double v);

std::string series_csv(const DiagnosticSeries& series);
std::string levels_csv(const LevelSets& levels);
std::string levels_json(const LevelSets& levels);
std::string quartets_json(const std::vector<Quartet>& quartets);
std::string spectrum_csv(const SpectrumDump& spectrum);

// Static plot-data renderings; quantitative artifacts stay in CSV/JSON.
std::string svg_series(const std::vector<std::vector<std::pair<double, double>>>& lines,
                       const std::string& x_label, const std::string& y_label);
std::string svg_spectrum(const SpectrumDump& spectrum);

void atomic_write(const std::string& path, const std::string& content);

std::string config_hash(const std::string& canonical_json);

}  // namespace nlst::io
