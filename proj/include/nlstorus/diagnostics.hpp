#pragma once

#include <string>
#include <vector>

#include "nlstorus/field.hpp"

namespace nlst {

double mass(const SpectralField& field);  // sum |psi_hat|^2
double sobolev_norm(const SpectralField& field, SobolevIndex s);

// h^s norm restricted to modes with Euclidean |k| strictly greater than M.
double tail_norm(const SpectralField& field, double M, SobolevIndex s);

struct ThresholdM {
    double M = 0.0;
    bool eps_exceeds_total = false;
};

// Smallest attained mode radius M with tail_norm(field, M, s) <= eps.
ThresholdM threshold_M(const SpectralField& field, double eps, SobolevIndex s);

struct HamiltonianParts {
    double h0 = 0.0;
    double p = 0.0;
    double total() const { return h0 + p; }
};

// H0 by spectral sum, P by dealiased physical-space quartic quadrature.
HamiltonianParts hamiltonian(const SpectralField& field);

struct SpectrumDump {
    int k_alias = 0;
    std::vector<double> energy;  // |psi_hat_k|^2, row-major, m outer from -K..K, l inner

    double at(ModeIndex k) const {
        int w = 2 * k_alias + 1;
        return energy[static_cast<std::size_t>((k.m + k_alias) * w + (k.l + k_alias))];
    }
};

SpectrumDump spectrum_dump(const SpectralField& field);

struct AnisotropyRatio {
    double value = 1.0;
    bool finite = true;  // false when the l-weighted energy vanishes
};

// (sum m^2 E_k) / (sum l^2 E_k); 1 for symmetric spectra.
AnisotropyRatio anisotropy_ratio(const SpectrumDump& spectrum);

struct EnsembleStats {
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
};

// Median of an even count is the lower-middle element.
EnsembleStats ensemble_stats(std::vector<double> values);

struct DiagnosticRecord {
    double t = 0.0;
    double mass = 0.0;
    double hamiltonian = 0.0;
    std::vector<double> sobolev;  // one per requested s
    std::vector<double> tails;    // one per requested M
};

struct DiagnosticSeries {
    int realization_id = 0;
    std::string config_hash;
    std::vector<double> sobolev_s;
    std::vector<double> tail_radii;
    std::vector<DiagnosticRecord> records;
};

}  // namespace nlst
