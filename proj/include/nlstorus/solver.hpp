#pragma once

#include <cstdint>
#include <functional>
#include <memory>

#include "nlstorus/diagnostics.hpp"
#include "nlstorus/field.hpp"

namespace nlst {

// Random-phase data on the 24-mode stencil |k|_inf <= 2, k != 0, with the
// amplitude C chosen so the h^s norm equals R. Phases are drawn row-major over
// the stencil (m outer) from a seeded mt19937_64, one 53-bit uniform each.
SpectralField make_initial_condition(double R, SobolevIndex s, std::uint64_t seed,
                                     const TorusSpec& torus, int grid_n, int k_alias);

// Pseudospectral engine: padded-grid transforms, the dealiased cubic term and
// the integrating-factor RK4 step for i d/dt psi_hat = -lambda psi_hat - (|psi|^2 psi)^.
class FourierEngine {
  public:
    FourierEngine(int grid_n, int k_alias, const TorusSpec& torus);
    ~FourierEngine();
    FourierEngine(const FourierEngine&) = delete;
    FourierEngine& operator=(const FourierEngine&) = delete;

    // Fourier coefficients of |psi|^2 psi on the alias-free box.
    void nonlinear_term(const std::vector<std::complex<double>>& coeffs,
                        std::vector<std::complex<double>>& out);

    void step_if_rk4(SpectralField& field, double dt);

    HamiltonianParts hamiltonian(const SpectralField& field);

    // Test hook: drop the cubic term so the step reduces to the exact linear phases.
    void set_nonlinearity_enabled(bool enabled) { nonlinearity_enabled_ = enabled; }

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    bool nonlinearity_enabled_ = true;
};

struct SimulationConfig {
    TorusSpec torus = TorusSpec::irrational(kOmegaSqSqrt2);
    int grid_n = 128;
    int k_alias = 32;
    double dt = 2.0 * 3.14159265358979323846 / 2000.0;
    double t_end = 0.0;
    double sample_interval = 2.0 * 3.14159265358979323846 / 2.0;
    SobolevIndex s{2.0};
    double R = 1.8263;
    std::uint64_t seed = 1;
    int n_realizations = 1;
    std::vector<double> tail_radii;
    std::string config_hash;
};

struct BlowupError : std::runtime_error {
    BlowupError(double t, int realization)
        : std::runtime_error("non-finite field value at t=" + std::to_string(t) +
                             " (realization " + std::to_string(realization) + ")"),
          time(t), realization(realization) {}
    double time;
    int realization;
};

// Called at every sample point with a read-only view of the field.
using Observer = std::function<void(int realization, const SpectralField&)>;

// Advances an existing field to config.t_end, sampling on the same step grid
// an unbroken run would use, so resumed runs reproduce series rows bitwise.
DiagnosticSeries run_single(const SimulationConfig& config, SpectralField& field,
                            int realization_id, const Observer& observer = {});

// Integrates n_realizations runs seeded seed+r; returns one series per run.
std::vector<DiagnosticSeries> run_simulation(const SimulationConfig& config,
                                             const Observer& observer = {});

inline constexpr double kFundamentalPeriod = 2.0 * 3.14159265358979323846;

}  // namespace nlst
