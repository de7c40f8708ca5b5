#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "nlstorus/lattice.hpp"

namespace nlst {

struct WorkBudgetError : std::runtime_error {
    explicit WorkBudgetError(const std::string& what) : std::runtime_error(what) {}
};

// Four mode indices with momentum conservation k1 + k2 - k3 - k4 = 0.
struct Quartet {
    ModeIndex k1, k2, k3, k4;

    Quartet(ModeIndex a, ModeIndex b, ModeIndex c, ModeIndex d) : k1(a), k2(b), k3(c), k4(d) {
        if (!(a + b == c + d)) throw std::invalid_argument("quartet violates momentum conservation");
    }
    static Quartet from_triplet(ModeIndex a, ModeIndex b, ModeIndex c) {
        return Quartet(a, b, c, a + b - c);
    }

    friend bool operator==(const Quartet&, const Quartet&) = default;
};

// Exact integers (p, q) with lambda_{k1}+lambda_{k2}-lambda_{k3}-lambda_{k4} = p + omega^2 q.
struct DefectPair {
    std::int64_t p = 0;
    std::int64_t q = 0;
};

DefectPair defect(const Quartet& q);

// Which per-mode weight the interaction-scale sum in the quasi-resonance bound
// uses. The frequency sum (lambda_k) reproduces the reference kinematics; the
// plain index sum |k|^2 is kept as an option. They coincide when omega^2 = 1.
enum class InteractionScale { Dispersion, Index };

struct QuasiResonanceParams {
    double lambda;
    double tau;
    InteractionScale scale = InteractionScale::Dispersion;

    QuasiResonanceParams(double lambda_, double tau_,
                         InteractionScale scale_ = InteractionScale::Dispersion)
        : lambda(lambda_), tau(tau_), scale(scale_) {
        if (!(lambda_ > 0.0) || !(tau_ > 0.0))
            throw std::invalid_argument("quasi-resonance parameters must be positive");
    }
};

bool is_axis_parallel_rectangle(const Quartet& q);
bool is_exact_resonant(const Quartet& q, const TorusSpec& torus);

// |p + omega^2 q| <= Lambda * S^{-(1+tau)}, ties included.
bool is_quasi_resonant(const Quartet& q, const QuasiResonanceParams& params,
                       const TorusSpec& torus);

double interaction_scale_sum(const Quartet& q, const TorusSpec& torus, InteractionScale scale);

struct LevelSets {
    std::vector<std::vector<ModeIndex>> levels;  // levels[0] = L1, sorted lexicographically
    bool exhausted = false;                      // expansion stopped with an empty next level
};

inline constexpr std::uint64_t kDefaultWorkBudget = 4'000'000'000ull;

// Iterative excitation: each new level holds the fourth modes of quasi-resonant
// quartets whose other three modes (any slot assignment, repetition allowed)
// lie in the union of the previous levels.
LevelSets expand_levels(const std::vector<ModeIndex>& level1, const QuasiResonanceParams& params,
                        const TorusSpec& torus, int max_level, std::int64_t search_box,
                        std::uint64_t work_budget = kDefaultWorkBudget);

// Every quasi-resonant quartet with all four modes in |k|_inf <= box,
// deduplicated under k1<->k2 and k3<->k4 swaps, lexicographic order.
std::vector<Quartet> enumerate_quasi_resonant_quartets(
    std::int64_t box, const QuasiResonanceParams& params, const TorusSpec& torus,
    std::uint64_t work_budget = kDefaultWorkBudget);

// Largest |k|_inf component over non-exact-resonant quasi-resonant quartets in
// the search box (0 if none). Requires tau > 1.
std::int64_t max_quasi_resonant_extent(const QuasiResonanceParams& params, const TorusSpec& torus,
                                       std::int64_t search_box,
                                       std::uint64_t work_budget = kDefaultWorkBudget);

}  // namespace nlst
