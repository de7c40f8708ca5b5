#include "nlstorus/resonance.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace nlst {

namespace {

constexpr std::int64_t kDefectLimit = std::int64_t{1} << 62;

std::int64_t narrow(int128 v) {
    if (v > int128(kDefectLimit) || v < -int128(kDefectLimit))
        throw std::overflow_error("defect exceeds supported integer range");
    return static_cast<std::int64_t>(v);
}

struct Budget {
    std::uint64_t left;
    void spend(std::uint64_t n) {
        if (n > left) throw WorkBudgetError("quartet enumeration exceeded the work budget");
        left -= n;
    }
};

// Dense membership set over the box |k|_inf <= B.
class BoxSet {
  public:
    explicit BoxSet(std::int64_t B) : B_(B), W_(2 * B + 1), bits_(W_ * W_, 0) {}

    bool in_box(ModeIndex k) const { return k.norm_inf() <= B_; }
    std::size_t idx(ModeIndex k) const {
        return static_cast<std::size_t>((k.m + B_) * W_ + (k.l + B_));
    }
    bool contains(ModeIndex k) const { return in_box(k) && bits_[idx(k)] != 0; }
    void insert(ModeIndex k) {
        if (!bits_[idx(k)]) {
            bits_[idx(k)] = 1;
            list_.push_back(k);
        }
    }
    const std::vector<ModeIndex>& list() const { return list_; }

  private:
    std::int64_t B_;
    std::int64_t W_;
    std::vector<std::uint8_t> bits_;
    std::vector<ModeIndex> list_;
};

bool exact_defect_pair(std::int64_t P, std::int64_t Q, const TorusSpec& torus) {
    return int128(torus.b()) * P + int128(torus.a()) * Q == 0;
}

// Defect of a quartet with factored halves P = dm13*dm23, Q = dl13*dl23,
// evaluated exactly as the float predicate does on (p, q) = (-2P, -2Q).
double defect_from_halves(std::int64_t P, std::int64_t Q, double w2) {
    return std::abs(static_cast<double>(-2 * P) + w2 * static_cast<double>(-2 * Q));
}

struct FeasiblePair {
    std::int64_t P, Q;
    double scale_cap;  // largest interaction-scale sum the bound admits
};

// All (P,Q) != (0,0), not exactly resonant, that some in-box quartet could
// realize while passing the quasi-resonance bound. Uses the lower bound
// S >= max(w_m |P|, w_l |Q|)/2 on the interaction-scale sum.
std::vector<FeasiblePair> feasible_nonexact_pairs(const QuasiResonanceParams& params,
                                                  const TorusSpec& torus, std::int64_t B,
                                                  Budget& budget) {
    const double w2 = torus.omega_sq();
    const double wl = params.scale == InteractionScale::Dispersion ? w2 : 1.0;
    const double smin_floor = params.scale == InteractionScale::Dispersion ? std::min(1.0, w2) : 1.0;
    const std::int64_t pqmax = 4 * B * B;
    const std::int64_t halfwin = static_cast<std::int64_t>(params.lambda / (2.0 * smin_floor)) + 2;

    budget.spend(static_cast<std::uint64_t>(2 * pqmax + 1) *
                 static_cast<std::uint64_t>(2 * halfwin + 1) / 4 + 1);

    std::vector<FeasiblePair> out;
    for (std::int64_t Q = -pqmax; Q <= pqmax; ++Q) {
        const std::int64_t P0 = std::llround(-w2 * static_cast<double>(Q));
        for (std::int64_t P = P0 - halfwin; P <= P0 + halfwin; ++P) {
            if (std::abs(P) > pqmax) continue;
            if (P == 0 && Q == 0) continue;
            if (exact_defect_pair(P, Q, torus)) continue;
            const double def = defect_from_halves(P, Q, w2);
            if (def == 0.0) continue;  // float-level tie with an exact pair; handled as exact
            const double smin = std::max({smin_floor, std::abs(static_cast<double>(P)) / 2.0,
                                          wl * std::abs(static_cast<double>(Q)) / 2.0});
            if (def <= params.lambda * std::pow(smin, -(1.0 + params.tau)))
                out.push_back({P, Q, std::pow(params.lambda / def, 1.0 / (1.0 + params.tau))});
        }
    }
    return out;
}

std::vector<std::int64_t> divisors_of(std::int64_t n) {
    std::vector<std::int64_t> out;
    for (std::int64_t d = 1; d * d <= n; ++d) {
        if (n % d == 0) {
            out.push_back(d);
            if (d != n / d) out.push_back(n / d);
        }
    }
    return out;
}

// Ordered factorizations c*e = P (P != 0), both signs.
std::vector<std::pair<std::int64_t, std::int64_t>> ordered_factor_pairs(std::int64_t P) {
    std::vector<std::pair<std::int64_t, std::int64_t>> out;
    for (std::int64_t d : divisors_of(std::abs(P))) {
        out.emplace_back(d, P / d);
        out.emplace_back(-d, P / -d);
    }
    return out;
}

ModeIndex perp_primitive(ModeIndex x) {
    std::int64_t g = std::gcd(std::abs(x.m), std::abs(x.l));
    return {-x.l / g, x.m / g};
}

// ---- per-level candidate generation -----------------------------------------

using CandidateSink = std::set<ModeIndex>;

void validate_and_add(ModeIndex a, ModeIndex b, ModeIndex c, ModeIndex d,
                      const QuasiResonanceParams& params, const TorusSpec& torus,
                      CandidateSink& sink) {
    if (is_quasi_resonant(Quartet(a, b, c, d), params, torus)) sink.insert(d);
}

// Axis-parallel completions: alpha, beta in U with the crossing corner
// (alpha.m, beta.l) in U excite (beta.m, alpha.l).
void gen_axis_parallel(const BoxSet& U, const QuasiResonanceParams& params, const TorusSpec& torus,
                       Budget& budget, CandidateSink& sink) {
    const auto& list = U.list();
    budget.spend(static_cast<std::uint64_t>(list.size()) * list.size());
    for (ModeIndex a : list) {
        for (ModeIndex b : list) {
            ModeIndex g{a.m, b.l};
            if (!U.contains(g)) continue;
            ModeIndex d{b.m, a.l};
            if (!U.contains(d)) validate_and_add(a, b, g, d, params, torus, sink);
        }
    }
}

// omega^2 = 1 exact resonances: (k1-k3).(k2-k3) = 0. For each right-angle
// corner g and leg end a, walk the perpendicular line through g.
void gen_unit_rational_rectangles(const BoxSet& U, std::int64_t B,
                                  const QuasiResonanceParams& params, const TorusSpec& torus,
                                  Budget& budget, CandidateSink& sink) {
    const auto& list = U.list();
    for (ModeIndex g : list) {
        for (ModeIndex a : list) {
            if (a == g) continue;
            ModeIndex w = perp_primitive(a - g);
            for (int dir : {1, -1}) {
                for (std::int64_t s = dir;; s += dir) {
                    ModeIndex c{g.m + s * w.m, g.l + s * w.l};
                    if (c.norm_inf() > B) break;
                    budget.spend(1);
                    if (!U.contains(c)) continue;
                    ModeIndex d{a.m + s * w.m, a.l + s * w.l};
                    if (d.norm_inf() <= B && !U.contains(d))
                        validate_and_add(a, c, g, d, params, torus, sink);
                }
            }
        }
    }
}

// General rational exact families (a t, -b t), t != 0, via divisor expansion.
void gen_rational_exact_families(const BoxSet& U, std::int64_t B,
                                 const QuasiResonanceParams& params, const TorusSpec& torus,
                                 Budget& budget, CandidateSink& sink) {
    const std::int64_t pqmax = 4 * B * B;
    const std::int64_t tmax = std::min(pqmax / torus.a(), pqmax / torus.b());
    for (std::int64_t t = 1; t <= tmax; ++t) {
        for (int sign : {1, -1}) {
            const std::int64_t P = torus.a() * t * sign;
            const std::int64_t Q = -torus.b() * t * sign;
            auto cps = ordered_factor_pairs(P);
            auto dps = ordered_factor_pairs(Q);
            budget.spend(static_cast<std::uint64_t>(cps.size()) * dps.size() * U.list().size());
            for (auto [c, e] : cps) {
                for (auto [d, f] : dps) {
                    for (ModeIndex g : U.list()) {
                        ModeIndex a{g.m + c, g.l + d};
                        if (!U.contains(a)) continue;
                        ModeIndex b{g.m + e, g.l + f};
                        if (!U.contains(b)) continue;
                        ModeIndex dd{g.m + c + e, g.l + d + f};
                        if (dd.norm_inf() <= B && !U.contains(dd))
                            validate_and_add(a, b, g, dd, params, torus, sink);
                    }
                }
            }
        }
    }
}

// Non-exact quartets whose defect halves are both nonzero, via divisor pairs.
void gen_nonexact_divisor(const BoxSet& U, std::int64_t B, const std::vector<FeasiblePair>& pairs,
                          const QuasiResonanceParams& params, const TorusSpec& torus,
                          Budget& budget, CandidateSink& sink) {
    for (const auto& pq : pairs) {
        if (pq.P == 0 || pq.Q == 0) continue;
        auto cps = ordered_factor_pairs(pq.P);
        auto dps = ordered_factor_pairs(pq.Q);
        budget.spend(static_cast<std::uint64_t>(cps.size()) * dps.size() * U.list().size());
        for (auto [c, e] : cps) {
            for (auto [d, f] : dps) {
                for (ModeIndex g : U.list()) {
                    ModeIndex a{g.m + c, g.l + d};
                    if (!U.contains(a)) continue;
                    ModeIndex b{g.m + e, g.l + f};
                    if (!U.contains(b)) continue;
                    ModeIndex dd{g.m + c + e, g.l + d + f};
                    if (dd.norm_inf() <= B && !U.contains(dd))
                        validate_and_add(a, b, g, dd, params, torus, sink);
                }
            }
        }
    }
}

// Ball radius (m, l) inside which every mode of a quartet with scale sum <= cap lives.
std::pair<std::int64_t, std::int64_t> cap_ball(double cap, const QuasiResonanceParams& params,
                                               const TorusSpec& torus) {
    double mr = std::sqrt(std::max(cap, 0.0));
    double lr = params.scale == InteractionScale::Dispersion
                    ? std::sqrt(std::max(cap, 0.0) / torus.omega_sq())
                    : mr;
    return {static_cast<std::int64_t>(mr), static_cast<std::int64_t>(lr)};
}

// Quartets with a vanishing defect half (P or Q zero) are confined to a small
// ball; brute-force the ordered triples there.
void gen_zero_half_brute(const BoxSet& U, std::int64_t B, const std::vector<FeasiblePair>& pairs,
                         const QuasiResonanceParams& params, const TorusSpec& torus,
                         Budget& budget, CandidateSink& sink) {
    double cap = 0.0;
    for (const auto& pq : pairs)
        if (pq.P == 0 || pq.Q == 0) cap = std::max(cap, pq.scale_cap);
    if (cap == 0.0) return;
    auto [mr, lr] = cap_ball(cap, params, torus);
    std::vector<ModeIndex> small;
    for (ModeIndex k : U.list())
        if (std::abs(k.m) <= mr && std::abs(k.l) <= lr) small.push_back(k);
    budget.spend(static_cast<std::uint64_t>(small.size()) * small.size() * small.size());
    for (ModeIndex a : small) {
        for (ModeIndex b : small) {
            for (ModeIndex g : small) {
                ModeIndex d = a + b - g;
                if (d.norm_inf() <= B && !U.contains(d))
                    validate_and_add(a, b, g, d, params, torus, sink);
            }
        }
    }
}

CandidateSink level_step(const BoxSet& U, std::int64_t B, const std::vector<FeasiblePair>& pairs,
                         const QuasiResonanceParams& params, const TorusSpec& torus,
                         Budget& budget) {
    CandidateSink sink;
    gen_axis_parallel(U, params, torus, budget, sink);
    if (torus.kind() == TorusKind::Rational) {
        if (torus.a() == 1 && torus.b() == 1)
            gen_unit_rational_rectangles(U, B, params, torus, budget, sink);
        else
            gen_rational_exact_families(U, B, params, torus, budget, sink);
    }
    gen_nonexact_divisor(U, B, pairs, params, torus, budget, sink);
    gen_zero_half_brute(U, B, pairs, params, torus, budget, sink);
    return sink;
}

using Key = std::array<std::int64_t, 8>;

Key canonical_key(ModeIndex a, ModeIndex b, ModeIndex c, ModeIndex d) {
    if (b < a) std::swap(a, b);
    if (d < c) std::swap(c, d);
    return {a.m, a.l, b.m, b.l, c.m, c.l, d.m, d.l};
}

}  // namespace

DefectPair defect(const Quartet& q) {
    auto sq = [](std::int64_t v) { return int128(v) * v; };
    int128 p = sq(q.k1.m) + sq(q.k2.m) - sq(q.k3.m) - sq(q.k4.m);
    int128 r = sq(q.k1.l) + sq(q.k2.l) - sq(q.k3.l) - sq(q.k4.l);
    return {narrow(p), narrow(r)};
}

bool is_axis_parallel_rectangle(const Quartet& q) {
    auto match = [](std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d) {
        return (a == c && b == d) || (a == d && b == c);
    };
    return match(q.k1.m, q.k2.m, q.k3.m, q.k4.m) && match(q.k1.l, q.k2.l, q.k3.l, q.k4.l);
}

bool is_exact_resonant(const Quartet& q, const TorusSpec& torus) {
    DefectPair d = defect(q);
    if (torus.kind() == TorusKind::IrrationalApproximated) return d.p == 0 && d.q == 0;
    return int128(torus.b()) * d.p + int128(torus.a()) * d.q == 0;
}

double interaction_scale_sum(const Quartet& q, const TorusSpec& torus, InteractionScale scale) {
    if (scale == InteractionScale::Dispersion)
        return dispersion(q.k1, torus) + dispersion(q.k2, torus) + dispersion(q.k3, torus) +
               dispersion(q.k4, torus);
    return static_cast<double>(q.k1.norm_sq()) + static_cast<double>(q.k2.norm_sq()) +
           static_cast<double>(q.k3.norm_sq()) + static_cast<double>(q.k4.norm_sq());
}

bool is_quasi_resonant(const Quartet& q, const QuasiResonanceParams& params,
                       const TorusSpec& torus) {
    DefectPair d = defect(q);
    double def = std::abs(static_cast<double>(d.p) + torus.omega_sq() * static_cast<double>(d.q));
    double S = interaction_scale_sum(q, torus, params.scale);
    return def <= params.lambda * std::pow(S, -(1.0 + params.tau));
}

LevelSets expand_levels(const std::vector<ModeIndex>& level1, const QuasiResonanceParams& params,
                        const TorusSpec& torus, int max_level, std::int64_t search_box,
                        std::uint64_t work_budget) {
    if (level1.empty()) throw std::invalid_argument("level-1 set must be nonempty");
    if (max_level < 1) throw std::invalid_argument("max_level must be >= 1");
    for (ModeIndex k : level1)
        if (k.norm_inf() > search_box)
            throw std::invalid_argument("search box smaller than the level-1 set");

    Budget budget{work_budget};
    BoxSet U(search_box);
    for (ModeIndex k : level1) U.insert(k);

    LevelSets out;
    std::vector<ModeIndex> l1 = U.list();
    std::sort(l1.begin(), l1.end());
    out.levels.push_back(std::move(l1));

    const auto pairs = feasible_nonexact_pairs(params, torus, search_box, budget);
    for (int lev = 2; lev <= max_level; ++lev) {
        CandidateSink next = level_step(U, search_box, pairs, params, torus, budget);
        if (next.empty()) {
            out.exhausted = true;
            return out;
        }
        out.levels.emplace_back(next.begin(), next.end());
        for (ModeIndex k : next) U.insert(k);
    }
    return out;
}

std::vector<Quartet> enumerate_quasi_resonant_quartets(std::int64_t box,
                                                       const QuasiResonanceParams& params,
                                                       const TorusSpec& torus,
                                                       std::uint64_t work_budget) {
    if (box < 1) throw std::invalid_argument("box must be >= 1");
    Budget budget{work_budget};
    const std::int64_t W = 2 * box + 1;
    std::set<Key> keys;

    auto consider = [&](ModeIndex a, ModeIndex b, ModeIndex c, ModeIndex d) {
        if (d.norm_inf() > box) return;
        if (is_quasi_resonant(Quartet(a, b, c, d), params, torus))
            keys.insert(canonical_key(a, b, c, d));
    };

    // Exact axis-parallel quartets: both pairings of (alpha, beta).
    budget.spend(static_cast<std::uint64_t>(W) * W * W * W);
    for (std::int64_t m1 = -box; m1 <= box; ++m1)
        for (std::int64_t l1 = -box; l1 <= box; ++l1)
            for (std::int64_t m2 = -box; m2 <= box; ++m2)
                for (std::int64_t l2 = -box; l2 <= box; ++l2) {
                    ModeIndex a{m1, l1}, b{m2, l2};
                    consider(a, b, a, b);
                    consider(a, b, ModeIndex{m1, l2}, ModeIndex{m2, l1});
                }

    if (torus.kind() == TorusKind::Rational) {
        BoxSet full(box);
        for (std::int64_t m = -box; m <= box; ++m)
            for (std::int64_t l = -box; l <= box; ++l) full.insert({m, l});
        if (torus.a() == 1 && torus.b() == 1) {
            for (ModeIndex g : full.list())
                for (ModeIndex a : full.list()) {
                    if (a == g) continue;
                    ModeIndex w = perp_primitive(a - g);
                    for (int dir : {1, -1})
                        for (std::int64_t s = dir;; s += dir) {
                            ModeIndex c{g.m + s * w.m, g.l + s * w.l};
                            if (c.norm_inf() > box) break;
                            budget.spend(1);
                            consider(a, c, g, a + c - g);
                        }
                }
        } else {
            const std::int64_t pqmax = 4 * box * box;
            const std::int64_t tmax = std::min(pqmax / torus.a(), pqmax / torus.b());
            for (std::int64_t t = 1; t <= tmax; ++t)
                for (int sign : {1, -1}) {
                    auto cps = ordered_factor_pairs(torus.a() * t * sign);
                    auto dps = ordered_factor_pairs(-torus.b() * t * sign);
                    budget.spend(static_cast<std::uint64_t>(cps.size()) * dps.size() *
                                 full.list().size());
                    for (auto [c, e] : cps)
                        for (auto [d, f] : dps)
                            for (ModeIndex g : full.list()) {
                                ModeIndex a{g.m + c, g.l + d};
                                ModeIndex b{g.m + e, g.l + f};
                                if (a.norm_inf() <= box && b.norm_inf() <= box)
                                    consider(a, b, g, ModeIndex{g.m + c + e, g.l + d + f});
                            }
                }
        }
    }

    // Non-exact quartets.
    const auto pairs = feasible_nonexact_pairs(params, torus, box, budget);
    double zero_cap = 0.0;
    for (const auto& pq : pairs) {
        if (pq.P == 0 || pq.Q == 0) {
            zero_cap = std::max(zero_cap, pq.scale_cap);
            continue;
        }
        auto cps = ordered_factor_pairs(pq.P);
        auto dps = ordered_factor_pairs(pq.Q);
        auto [mr, lr] = cap_ball(pq.scale_cap, params, torus);
        mr = std::min(mr, box);
        lr = std::min(lr, box);
        budget.spend(static_cast<std::uint64_t>(cps.size()) * dps.size() * (2 * mr + 1) *
                     (2 * lr + 1));
        for (auto [c, e] : cps)
            for (auto [d, f] : dps)
                for (std::int64_t gm = -mr; gm <= mr; ++gm)
                    for (std::int64_t gl = -lr; gl <= lr; ++gl) {
                        ModeIndex g{gm, gl};
                        ModeIndex a{gm + c, gl + d};
                        ModeIndex b{gm + e, gl + f};
                        if (a.norm_inf() <= box && b.norm_inf() <= box)
                            consider(a, b, g, ModeIndex{gm + c + e, gl + d + f});
                    }
    }
    if (zero_cap > 0.0) {
        auto [mr, lr] = cap_ball(zero_cap, params, torus);
        mr = std::min(mr, box);
        lr = std::min(lr, box);
        std::vector<ModeIndex> ball;
        for (std::int64_t m = -mr; m <= mr; ++m)
            for (std::int64_t l = -lr; l <= lr; ++l) ball.push_back({m, l});
        budget.spend(static_cast<std::uint64_t>(ball.size()) * ball.size() * ball.size());
        for (ModeIndex a : ball)
            for (ModeIndex b : ball)
                for (ModeIndex g : ball) consider(a, b, g, a + b - g);
    }

    std::vector<Quartet> out;
    out.reserve(keys.size());
    for (const Key& k : keys)
        out.emplace_back(ModeIndex{k[0], k[1]}, ModeIndex{k[2], k[3]}, ModeIndex{k[4], k[5]},
                         ModeIndex{k[6], k[7]});
    return out;
}

std::int64_t max_quasi_resonant_extent(const QuasiResonanceParams& params, const TorusSpec& torus,
                                       std::int64_t search_box, std::uint64_t work_budget) {
    if (!(params.tau > 1.0))
        throw std::invalid_argument("extent bound requires tau > 1");
    Budget budget{work_budget};
    const auto pairs = feasible_nonexact_pairs(params, torus, search_box, budget);
    std::int64_t extent = 0;

    auto consider = [&](ModeIndex a, ModeIndex b, ModeIndex g, ModeIndex d) {
        if (d.norm_inf() > search_box) return;
        Quartet q(a, b, g, d);
        if (!is_quasi_resonant(q, params, torus) || is_exact_resonant(q, torus)) return;
        extent = std::max({extent, a.norm_inf(), b.norm_inf(), g.norm_inf(), d.norm_inf()});
    };

    double zero_cap = 0.0;
    for (const auto& pq : pairs) {
        if (pq.P == 0 || pq.Q == 0) {
            zero_cap = std::max(zero_cap, pq.scale_cap);
            continue;
        }
        auto cps = ordered_factor_pairs(pq.P);
        auto dps = ordered_factor_pairs(pq.Q);
        auto [mr, lr] = cap_ball(pq.scale_cap, params, torus);
        mr = std::min(mr, search_box);
        lr = std::min(lr, search_box);
        budget.spend(static_cast<std::uint64_t>(cps.size()) * dps.size() * (2 * mr + 1) *
                     (2 * lr + 1));
        for (auto [c, e] : cps)
            for (auto [d, f] : dps)
                for (std::int64_t gm = -mr; gm <= mr; ++gm)
                    for (std::int64_t gl = -lr; gl <= lr; ++gl) {
                        ModeIndex g{gm, gl};
                        ModeIndex a{gm + c, gl + d};
                        ModeIndex b{gm + e, gl + f};
                        if (a.norm_inf() <= search_box && b.norm_inf() <= search_box)
                            consider(a, b, g, ModeIndex{gm + c + e, gl + d + f});
                    }
    }
    if (zero_cap > 0.0) {
        auto [mr, lr] = cap_ball(zero_cap, params, torus);
        mr = std::min(mr, search_box);
        lr = std::min(lr, search_box);
        std::vector<ModeIndex> ball;
        for (std::int64_t m = -mr; m <= mr; ++m)
            for (std::int64_t l = -lr; l <= lr; ++l) ball.push_back({m, l});
        budget.spend(static_cast<std::uint64_t>(ball.size()) * ball.size() * ball.size());
        for (ModeIndex a : ball)
            for (ModeIndex b : ball)
                for (ModeIndex g : ball) consider(a, b, g, a + b - g);
    }
    return extent;
}

}  // namespace nlst
