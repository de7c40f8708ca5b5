// Command-line driver: simulation ensembles, threshold studies, kinematic
// level maps, precision audits, truncated-system runs and convergence checks.

#include <CLI11.hpp>
#include <json.hpp>

#include <complex>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "nlstorus/checkpoint.hpp"
#include "nlstorus/diagnostics.hpp"
#include "nlstorus/io.hpp"
#include "nlstorus/lattice.hpp"
#include "nlstorus/resonance.hpp"
#include "nlstorus/solver.hpp"
#include "nlstorus/truncated.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nlst;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitBudget = 4;

json default_config() {
    return json{{"kind", "irrational"},
                {"omega_sq", kOmegaSqSqrt2},
                {"grid_n", 128},
                {"k_alias", 32},
                {"s", 2.0},
                {"R", 1.8263},
                {"seed", 1},
                {"n_realizations", 5},
                {"T_tf", 20.0},
                {"dt_tf", 1.0 / 2000.0},
                {"sample_tf", 0.5},
                {"tail_radii", json::array()},
                {"snapshot_times_tf", json::array()},
                {"formats", json::array({"csv", "json"})},
                {"eps_over_R", json::array({0.0125, 0.025, 0.05, 0.1})},
                {"R_list", json::array({1.8263, 2.5828, 3.6526})},
                {"lambda_list", json::array({10.0, 20.0, 30.0})},
                {"tau", 0.1},
                {"scale", "dispersion"},
                {"tori", json::array({"irrational", "rational"})},
                {"level_box", 2},
                {"search_box", 128},
                {"max_level", 6},
                {"support_box", 8},
                {"support_radius", 4},
                {"sign", 1},
                {"M_list", json::array({7})},
                {"exact_only", false},
                {"decoupled", false},
                {"export_table", false},
                {"dt_ladder_tf", json::array({1.0 / 500, 1.0 / 1000, 1.0 / 2000, 1.0 / 4000})},
                {"T_conv_tf", 1.0},
                {"resume", ""},
                {"work_budget", static_cast<std::uint64_t>(kDefaultWorkBudget)}};
}

json load_config(const std::string& path, const std::vector<std::string>& overrides) {
    json cfg = default_config();
    if (!path.empty()) {
        std::ifstream is(path);
        if (!is) throw std::invalid_argument("cannot open config file: " + path);
        json file_cfg = json::parse(is);
        cfg.update(file_cfg);
    }
    for (const std::string& kv : overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("--set expects key=value, got: " + kv);
        std::string key = kv.substr(0, eq);
        std::string value = kv.substr(eq + 1);
        json parsed;
        try {
            parsed = json::parse(value);
        } catch (const json::parse_error&) {
            parsed = value;  // plain string
        }
        cfg[key] = parsed;
    }
    return cfg;
}

TorusSpec torus_from(const json& cfg) {
    if (cfg.contains("omega_frac")) {
        auto frac = cfg.at("omega_frac");
        return TorusSpec::rational_fraction(frac.at(0).get<std::int64_t>(),
                                            frac.at(1).get<std::int64_t>());
    }
    const double w2 = cfg.at("omega_sq").get<double>();
    const std::string kind = cfg.at("kind").get<std::string>();
    if (kind == "rational") return TorusSpec::rational(w2);
    if (kind == "irrational") return TorusSpec::irrational(w2);
    throw std::invalid_argument("kind must be rational or irrational");
}

InteractionScale scale_from(const json& cfg) {
    const std::string s = cfg.at("scale").get<std::string>();
    if (s == "dispersion") return InteractionScale::Dispersion;
    if (s == "index") return InteractionScale::Index;
    throw std::invalid_argument("scale must be dispersion or index");
}

QuasiResonanceParams params_from(const json& cfg, double lambda) {
    return {lambda, cfg.at("tau").get<double>(), scale_from(cfg)};
}

SimulationConfig sim_config_from(const json& cfg) {
    SimulationConfig sc;
    sc.torus = torus_from(cfg);
    sc.grid_n = cfg.at("grid_n").get<int>();
    sc.k_alias = cfg.at("k_alias").get<int>();
    sc.dt = cfg.at("dt_tf").get<double>() * kFundamentalPeriod;
    sc.t_end = cfg.at("T_tf").get<double>() * kFundamentalPeriod;
    sc.sample_interval = cfg.at("sample_tf").get<double>() * kFundamentalPeriod;
    sc.s = SobolevIndex(cfg.at("s").get<double>());
    sc.R = cfg.at("R").get<double>();
    sc.seed = cfg.at("seed").get<std::uint64_t>();
    sc.n_realizations = cfg.at("n_realizations").get<int>();
    for (double M : cfg.at("tail_radii")) sc.tail_radii.push_back(M);
    sc.config_hash = io::config_hash(cfg.dump());
    return sc;
}

bool has_format(const json& cfg, const std::string& fmt) {
    for (const auto& f : cfg.at("formats"))
        if (f.get<std::string>() == fmt) return true;
    return false;
}

void write_manifest(const fs::path& out_dir, const std::string& command, const json& cfg,
                    const std::vector<std::string>& outputs) {
    json manifest{{"tool", "nlstorus"},
                  {"command", command},
                  {"config", cfg},
                  {"config_hash", io::config_hash(cfg.dump())},
                  {"outputs", outputs},
                  {"schema_versions",
                   {{"series_csv", 1},
                    {"levels_csv", 1},
                    {"spectrum_csv", 1},
                    {"checkpoint", kCheckpointVersion},
                    {"threshold_study", 1},
                    {"truncated_csv", 1}}}};
    io::atomic_write((out_dir / "manifest.json").string(), manifest.dump(2) + "\n");
}

std::string torus_label(const TorusSpec& torus) {
    return torus.kind() == TorusKind::Rational ? "rational" : "irrational";
}

// ---- simulate ---------------------------------------------------------------

int cmd_simulate(const json& cfg, const fs::path& out_dir) {
    SimulationConfig sc = sim_config_from(cfg);
    std::vector<std::string> outputs;
    std::vector<double> snap_times;
    for (double t : cfg.at("snapshot_times_tf")) snap_times.push_back(t * kFundamentalPeriod);

    const bool want_csv = has_format(cfg, "csv");
    const bool want_binary = has_format(cfg, "binary");
    const bool want_svg = has_format(cfg, "svg-plot-data");

    Observer observer = [&](int r, const SpectralField& field) {
        const bool final_sample = std::abs(field.time() - sc.t_end) < sc.dt / 2.0;
        bool snap = final_sample;
        for (double t : snap_times) snap = snap || std::abs(field.time() - t) < sc.dt / 2.0;
        if (!snap) return;
        char tag[64];
        std::snprintf(tag, sizeof(tag), "r%d_t%.6g", r, field.time() / kFundamentalPeriod);
        if (want_csv)
            io::atomic_write((out_dir / ("spectrum_" + std::string(tag) + ".csv")).string(),
                             io::spectrum_csv(spectrum_dump(field)));
        if (want_svg)
            io::atomic_write((out_dir / ("spectrum_" + std::string(tag) + ".svg")).string(),
                             io::svg_spectrum(spectrum_dump(field)));
        if (want_binary)
            write_checkpoint((out_dir / ("checkpoint_" + std::string(tag) + ".nlsck")).string(),
                             field, sc.s.s, sc.seed + r);
    };

    std::vector<DiagnosticSeries> series;
    const std::string resume = cfg.at("resume").get<std::string>();
    if (!resume.empty()) {
        Checkpoint ck = read_checkpoint(resume);
        SimulationConfig rc = sc;
        rc.torus = ck.field.torus();
        rc.grid_n = ck.field.grid_n();
        rc.k_alias = ck.field.k_alias();
        rc.s = SobolevIndex(ck.s);
        series.push_back(run_single(rc, ck.field, 0, observer));
    } else {
        series = run_simulation(sc, observer);
    }

    for (const auto& s : series) {
        if (want_csv) {
            std::string name = "series_r" + std::to_string(s.realization_id) + ".csv";
            io::atomic_write((out_dir / name).string(), io::series_csv(s));
            outputs.push_back(name);
        }
    }
    if (has_format(cfg, "json")) {
        json js = json::array();
        for (const auto& s : series) {
            json rows = json::array();
            for (const auto& rec : s.records)
                rows.push_back({{"t", rec.t},
                                {"mass", rec.mass},
                                {"hamiltonian", rec.hamiltonian},
                                {"sobolev", rec.sobolev},
                                {"tails", rec.tails}});
            js.push_back({{"realization", s.realization_id},
                          {"config_hash", s.config_hash},
                          {"records", rows}});
        }
        io::atomic_write((out_dir / "series.json").string(), js.dump(2) + "\n");
        outputs.push_back("series.json");
    }
    if (want_svg) {
        std::vector<std::vector<std::pair<double, double>>> lines;
        for (const auto& s : series) {
            std::vector<std::pair<double, double>> line;
            for (const auto& rec : s.records)
                line.emplace_back(rec.t / kFundamentalPeriod, rec.sobolev.at(0));
            lines.push_back(std::move(line));
        }
        io::atomic_write((out_dir / "sobolev_norm.svg").string(),
                         io::svg_series(lines, "t / T_f", "h^s norm"));
        outputs.push_back("sobolev_norm.svg");
    }
    write_manifest(out_dir, "simulate", cfg, outputs);
    return kExitOk;
}

// ---- threshold-study --------------------------------------------------------

int cmd_threshold_study(const json& cfg, const fs::path& out_dir) {
    const auto eps_over_R = cfg.at("eps_over_R").get<std::vector<double>>();
    const auto r_list = cfg.at("R_list").get<std::vector<double>>();
    if (eps_over_R.empty() || r_list.empty())
        throw std::invalid_argument("R_list and eps_over_R must be nonempty");

    const TorusSpec irr = torus_from(cfg);
    const TorusSpec rat = TorusSpec::rational(1.0);
    const SobolevIndex s(cfg.at("s").get<double>());

    json rows = json::array();
    std::ostringstream csv;
    csv << "omega_sq,kind,R,epsilon,median_M,min_M,max_M\n";

    for (double R : r_list) {
        for (const TorusSpec& torus : {rat, irr}) {
            json per_real = json::array();
            SimulationConfig sc = sim_config_from(cfg);
            sc.torus = torus;
            sc.R = R;

            struct FinalData {
                std::vector<double> thresholds;  // one per epsilon
                double norm = 0.0;
                double aniso = 0.0;
            };
            std::vector<FinalData> finals(static_cast<std::size_t>(sc.n_realizations));
            Observer observer = [&](int r, const SpectralField& field) {
                if (std::abs(field.time() - sc.t_end) >= sc.dt / 2.0) return;
                FinalData fd;
                for (double ef : eps_over_R)
                    fd.thresholds.push_back(threshold_M(field, ef * R, s).M);
                fd.norm = sobolev_norm(field, s);
                auto ar = anisotropy_ratio(spectrum_dump(field));
                fd.aniso = ar.finite ? ar.value : std::numeric_limits<double>::infinity();
                finals[static_cast<std::size_t>(r)] = std::move(fd);
            };
            run_simulation(sc, observer);

            for (std::size_t ei = 0; ei < eps_over_R.size(); ++ei) {
                std::vector<double> ms;
                for (const auto& fd : finals) ms.push_back(fd.thresholds.at(ei));
                EnsembleStats st = ensemble_stats(ms);
                const double eps = eps_over_R[ei] * R;
                rows.push_back({{"omega_sq", torus.omega_sq()},
                                {"kind", torus_label(torus)},
                                {"R", R},
                                {"epsilon", eps},
                                {"T", sc.t_end},
                                {"s", s.s},
                                {"per_realization_M", ms},
                                {"median", st.median},
                                {"min", st.min},
                                {"max", st.max}});
                csv << io::format_double(torus.omega_sq()) << ',' << torus_label(torus) << ','
                    << io::format_double(R) << ',' << io::format_double(eps) << ','
                    << io::format_double(st.median) << ',' << io::format_double(st.min) << ','
                    << io::format_double(st.max) << "\n";
            }
            std::vector<double> norms, anisos;
            for (const auto& fd : finals) {
                norms.push_back(fd.norm);
                anisos.push_back(std::abs(std::log(fd.aniso)));
            }
            rows.back()["final_norms"] = norms;
            rows.back()["abs_log_anisotropy"] = anisos;
        }
    }

    io::atomic_write((out_dir / "threshold_study.json").string(), rows.dump(2) + "\n");
    io::atomic_write((out_dir / "threshold_study.csv").string(), csv.str());
    write_manifest(out_dir, "threshold-study", cfg,
                   {"threshold_study.json", "threshold_study.csv"});
    return kExitOk;
}

// ---- kinematic --------------------------------------------------------------

int cmd_kinematic(const json& cfg, const fs::path& out_dir) {
    const auto lambdas = cfg.at("lambda_list").get<std::vector<double>>();
    if (lambdas.empty()) throw std::invalid_argument("lambda_list must be nonempty");
    const std::int64_t box = cfg.at("level_box").get<std::int64_t>();
    const std::int64_t search_box = cfg.at("search_box").get<std::int64_t>();
    const int max_level = cfg.at("max_level").get<int>();
    const auto budget = cfg.at("work_budget").get<std::uint64_t>();

    std::vector<ModeIndex> level1;
    for (std::int64_t m = -box; m <= box; ++m)
        for (std::int64_t l = -box; l <= box; ++l) level1.push_back({m, l});

    std::vector<TorusSpec> tori;
    for (const auto& t : cfg.at("tori")) {
        const std::string label = t.get<std::string>();
        if (label == "rational")
            tori.push_back(TorusSpec::rational(1.0));
        else if (label == "irrational")
            tori.push_back(torus_from(cfg));
        else
            throw std::invalid_argument("tori entries must be rational or irrational");
    }

    std::vector<std::string> outputs;
    json summary = json::array();
    for (const TorusSpec& torus : tori) {
        for (double lambda : lambdas) {
            LevelSets levels =
                expand_levels(level1, params_from(cfg, lambda), torus, max_level, search_box,
                              budget);
            std::string stem = "levels_" + torus_label(torus) + "_L" +
                               io::format_double(lambda);
            io::atomic_write((out_dir / (stem + ".csv")).string(), io::levels_csv(levels));
            io::atomic_write((out_dir / (stem + ".json")).string(), io::levels_json(levels));
            outputs.push_back(stem + ".csv");
            outputs.push_back(stem + ".json");

            json sizes = json::array();
            for (const auto& lv : levels.levels) sizes.push_back(lv.size());
            const auto computed = static_cast<int>(levels.levels.size());
            summary.push_back({{"kind", torus_label(torus)},
                               {"omega_sq", torus.omega_sq()},
                               {"lambda", lambda},
                               {"tau", cfg.at("tau").get<double>()},
                               {"level_sizes", sizes},
                               {"exhausted", levels.exhausted},
                               // N = min(max_level, level count at which excitation stops)
                               {"levels_computed", computed},
                               {"truncated_at", max_level}});
        }
    }
    io::atomic_write((out_dir / "kinematic_summary.json").string(), summary.dump(2) + "\n");
    outputs.push_back("kinematic_summary.json");
    write_manifest(out_dir, "kinematic", cfg, outputs);
    return kExitOk;
}

// ---- precision-audit --------------------------------------------------------

int cmd_precision_audit(double omega_sq, std::int64_t K, const std::string& mode,
                        const fs::path& out_dir, bool have_out) {
    const FractionMode fmode = mode == "binary" ? FractionMode::Binary : FractionMode::Decimal;
    const Fraction f = reduce_float_to_fraction(omega_sq, fmode);
    const bool pass = audit_precision(K, f.a, f.b);
    const int128 k2 = int128(K) * K;

    std::cout << "omega*^2 = " << io::format_double(omega_sq) << " (" << mode << " mode)\n";
    std::cout << "a = " << f.a << "\n";
    std::cout << "b = " << f.b << "\n";
    std::cout << "K^2 = " << static_cast<long long>(k2) << "\n";
    std::cout << "max(a,b) = " << std::max(f.a, f.b) << "\n";
    std::cout << "K^2 < max(a,b): " << (pass ? "PASS" : "FAIL") << "\n";

    // Alternate check: a genuinely rational aspect ratio can still pass the
    // audit and then behaves like an irrational torus on the given domain.
    const std::int64_t alt_a = 370723, alt_b = 262144;
    const bool alt_pass = audit_precision(K, alt_a, alt_b);
    std::cout << "alternate rational example " << alt_a << "/" << alt_b << " = "
              << io::format_double(static_cast<double>(alt_a) / static_cast<double>(alt_b))
              << ": " << (alt_pass ? "PASS (rational but audit-passing)" : "FAIL") << "\n";

    if (have_out) {
        json report{{"omega_sq", omega_sq},
                    {"mode", mode},
                    {"a", f.a},
                    {"b", f.b},
                    {"K", K},
                    {"K_sq", static_cast<std::int64_t>(k2)},
                    {"max_ab", std::max(f.a, f.b)},
                    {"pass", pass},
                    {"alternate", {{"a", alt_a}, {"b", alt_b}, {"pass", alt_pass}}}};
        io::atomic_write((out_dir / "audit.json").string(), report.dump(2) + "\n");
    }
    return kExitOk;
}

// ---- truncated --------------------------------------------------------------

int cmd_truncated(const json& cfg, const fs::path& out_dir) {
    const std::int64_t box = cfg.at("support_box").get<std::int64_t>();
    const std::int64_t radius = cfg.at("support_radius").get<std::int64_t>();
    const int sign = cfg.at("sign").get<int>();
    if (sign != 1 && sign != -1) throw std::invalid_argument("sign must be +1 or -1");
    const TorusSpec torus = torus_from(cfg);
    const auto lambdas = cfg.at("lambda_list").get<std::vector<double>>();
    const QuasiResonanceParams params = params_from(cfg, lambdas.at(0));
    const bool exact_only = cfg.at("exact_only").get<bool>();
    const auto budget = cfg.at("work_budget").get<std::uint64_t>();

    QuartetTable table = QuartetTable::build(box, params, torus, exact_only, budget);

    if (cfg.at("export_table").get<bool>()) {
        std::ostringstream os;
        os << "{\"support_box\":" << box << ",\"lambda\":" << io::format_double(params.lambda)
           << ",\"tau\":" << io::format_double(params.tau)
           << ",\"omega_sq\":" << io::format_double(torus.omega_sq())
           << ",\"nonexact_extent\":" << table.nonexact_extent()
           << ",\"n_entries\":" << table.size() << ",\"entries\":[";
        bool first = true;
        for (std::size_t k = 0; k < table.n_modes(); ++k) {
            ModeIndex out = table.mode_of(k);
            for (std::uint32_t e = table.offsets()[k]; e < table.offsets()[k + 1]; ++e) {
                const auto& en = table.entries()[e];
                ModeIndex k1 = table.mode_of(static_cast<std::size_t>(en.i1));
                ModeIndex k2 = table.mode_of(static_cast<std::size_t>(en.i2));
                ModeIndex k3 = table.mode_of(static_cast<std::size_t>(en.i3));
                if (!first) os << ',';
                first = false;
                os << "[[" << out.m << ',' << out.l << "],[" << k1.m << ',' << k1.l << "],["
                   << k2.m << ',' << k2.l << "],[" << k3.m << ',' << k3.l << "],"
                   << io::format_double(en.theta) << ']';
            }
        }
        os << "]}";
        io::atomic_write((out_dir / "quartet_table.json").string(), os.str());
    }

    TruncatedState state(box, sign);
    std::mt19937_64 rng(cfg.at("seed").get<std::uint64_t>());
    for (std::int64_t m = -radius; m <= radius; ++m)
        for (std::int64_t l = -radius; l <= radius; ++l) {
            const double u1 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            const double u2 = static_cast<double>(rng() >> 11) * 0x1.0p-53;
            state.at({m, l}) = std::polar(std::sqrt(u1), 2.0 * 3.14159265358979323846 * u2);
        }
    double m0 = 0.0;
    for (const auto& c : state.z) m0 += std::norm(c);
    for (auto& c : state.z) c /= std::sqrt(m0);

    const double dt = cfg.at("dt_tf").get<double>() * kFundamentalPeriod;
    const double t_end = cfg.at("T_tf").get<double>() * kFundamentalPeriod;
    const auto sample_every = std::max<std::int64_t>(
        1, std::llround(cfg.at("sample_tf").get<double>() * kFundamentalPeriod / dt));
    const auto m_list = cfg.at("M_list").get<std::vector<std::int64_t>>();
    const bool decoupled = cfg.at("decoupled").get<bool>();
    const SobolevIndex s1(1.0);

    std::ostringstream csv;
    csv << "t,l2_mass";
    for (auto M : m_list) csv << ",N_" << M;
    csv << "\n";
    std::ostringstream dec;
    if (decoupled) {
        dec << "t";
        for (std::int64_t m = -box; m <= box; ++m) dec << ",row_" << m;
        for (std::int64_t l = -box; l <= box; ++l) dec << ",col_" << l;
        dec << "\n";
    }

    auto emit = [&](const TruncatedState& st) {
        double mass = 0.0;
        for (const auto& c : st.z) mass += std::norm(c);
        csv << io::format_double(st.time) << ',' << io::format_double(mass);
        for (auto M : m_list) csv << ',' << io::format_double(n_m_norm(st, M, s1));
        csv << "\n";
        if (decoupled) {
            dec << io::format_double(st.time);
            for (std::int64_t m = -box; m <= box; ++m) {
                double acc = 0.0;
                for (std::int64_t l = -box; l <= box; ++l) acc += std::norm(st.at({m, l}));
                dec << ',' << io::format_double(acc);
            }
            for (std::int64_t l = -box; l <= box; ++l) {
                double acc = 0.0;
                for (std::int64_t m = -box; m <= box; ++m) acc += std::norm(st.at({m, l}));
                dec << ',' << io::format_double(acc);
            }
            dec << "\n";
        }
    };

    TruncatedStepper stepper(table, dt);
    emit(state);
    const auto n_steps = static_cast<std::int64_t>(std::llround(t_end / dt));
    for (std::int64_t i = 1; i <= n_steps; ++i) {
        stepper.step(state);
        if (i % sample_every == 0 || i == n_steps) emit(state);
    }

    std::vector<std::string> outputs{"truncated.csv"};
    io::atomic_write((out_dir / "truncated.csv").string(), csv.str());
    if (decoupled) {
        io::atomic_write((out_dir / "decoupled.csv").string(), dec.str());
        outputs.push_back("decoupled.csv");
    }
    json summary{{"support_box", box},
                 {"n_entries", table.size()},
                 {"nonexact_extent", table.nonexact_extent()},
                 {"sign", sign},
                 {"exact_only", exact_only}};
    io::atomic_write((out_dir / "truncated_summary.json").string(), summary.dump(2) + "\n");
    outputs.push_back("truncated_summary.json");
    write_manifest(out_dir, "truncated", cfg, outputs);
    return kExitOk;
}

// ---- convergence ------------------------------------------------------------

int cmd_convergence(const json& cfg, const fs::path& out_dir) {
    const auto ladder_tf = cfg.at("dt_ladder_tf").get<std::vector<double>>();
    if (ladder_tf.size() < 3)
        throw std::invalid_argument("dt ladder needs at least 3 values");
    for (std::size_t i = 1; i < ladder_tf.size(); ++i)
        if (std::abs(ladder_tf[i - 1] / ladder_tf[i] - 2.0) > 1e-12)
            throw std::invalid_argument("dt ladder entries must each halve the previous");

    const TorusSpec torus = torus_from(cfg);
    const double T = cfg.at("T_conv_tf").get<double>() * kFundamentalPeriod;
    json report;

    // Single-mode flow against the closed-form solution of i a' = -lambda a - |a|^2 a.
    {
        const double A = 0.75;
        const ModeIndex k0{1, 0};
        const double lam = dispersion(k0, torus);
        std::vector<double> errors;
        for (double dtf : ladder_tf) {
            const double dt = dtf * kFundamentalPeriod;
            SpectralField f(16, 4, torus);
            f.at(k0) = A;
            FourierEngine engine(16, 4, torus);
            const auto n = static_cast<std::int64_t>(std::llround(T / dt));
            for (std::int64_t i = 0; i < n; ++i) engine.step_if_rk4(f, dt);
            const std::complex<double> exact = std::polar(A, (lam + A * A) * f.time());
            errors.push_back(std::abs(f.at(k0) - exact));
        }
        std::vector<double> orders;
        for (std::size_t i = 0; i + 1 < errors.size(); ++i)
            orders.push_back(std::log2(errors[i] / errors[i + 1]));
        report["single_mode"] = {{"errors", errors}, {"orders", orders}};
    }

    // Linear-only hook: the integrating factor is exact on the linear flow.
    {
        const double dt = ladder_tf.front() * kFundamentalPeriod;
        SpectralField f(16, 4, torus);
        f.at({1, 0}) = 1.0;
        FourierEngine engine(16, 4, torus);
        engine.set_nonlinearity_enabled(false);
        const auto n = static_cast<std::int64_t>(std::llround(T / dt));
        for (std::int64_t i = 0; i < n; ++i) engine.step_if_rk4(f, dt);
        const std::complex<double> exact = std::polar(1.0, dispersion({1, 0}, torus) * f.time());
        report["linear_only_error"] = std::abs(f.at({1, 0}) - exact);
    }

    // Desk-scale field, Richardson self-reference against the finest rung.
    {
        SimulationConfig sc = sim_config_from(cfg);
        std::vector<std::vector<std::complex<double>>> states;
        for (double dtf : ladder_tf) {
            const double dt = dtf * kFundamentalPeriod;
            SpectralField f = make_initial_condition(sc.R, sc.s, sc.seed, torus, sc.grid_n,
                                                     sc.k_alias);
            FourierEngine engine(sc.grid_n, sc.k_alias, torus);
            const auto n = static_cast<std::int64_t>(std::llround(T / dt));
            for (std::int64_t i = 0; i < n; ++i) engine.step_if_rk4(f, dt);
            states.push_back(f.coeffs());
        }
        const auto& ref = states.back();
        std::vector<double> errors;
        for (std::size_t i = 0; i + 1 < states.size(); ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < ref.size(); ++j) acc += std::norm(states[i][j] - ref[j]);
            errors.push_back(std::sqrt(acc));
        }
        std::vector<double> orders;
        for (std::size_t i = 0; i + 1 < errors.size(); ++i)
            orders.push_back(std::log2(errors[i] / errors[i + 1]));
        bool monotone = true;
        for (std::size_t i = 0; i + 1 < errors.size(); ++i)
            if (errors[i] <= errors[i + 1]) monotone = false;
        report["desk_field"] = {{"errors", errors}, {"orders", orders}, {"monotone", monotone}};
    }

    bool pass = true;
    for (const auto& part : {"single_mode", "desk_field"})
        for (double p : report[part]["orders"].get<std::vector<double>>())
            if (p < 3.5 || p > 4.5) pass = false;
    if (!report["desk_field"]["monotone"].get<bool>()) pass = false;
    report["pass"] = pass;

    io::atomic_write((out_dir / "convergence.json").string(), report.dump(2) + "\n");
    write_manifest(out_dir, "convergence", cfg, {"convergence.json"});
    std::cout << report.dump(2) << "\n";
    return pass ? kExitOk : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"2D cubic NLS on rational and irrational tori: simulation, quasi-resonance "
                 "analysis and cascade diagnostics"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    std::vector<std::string> overrides;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file");
        sub->add_option("--set", overrides, "override config keys, key=value")
            ->take_all();
        sub->add_option("--out", out_dir, "output directory");
    };

    auto* simulate = app.add_subcommand("simulate", "integrate the full NLS ensemble");
    add_common(simulate);
    auto* threshold = app.add_subcommand("threshold-study",
                                         "frequency-threshold study over R and epsilon");
    add_common(threshold);
    auto* kinematic = app.add_subcommand("kinematic", "quasi-resonant level-set expansion");
    add_common(kinematic);
    auto* truncated = app.add_subcommand("truncated", "integrate the quasi-resonant system");
    add_common(truncated);
    auto* convergence = app.add_subcommand("convergence", "time-step order verification");
    add_common(convergence);

    auto* audit = app.add_subcommand("precision-audit",
                                     "rational reconstruction and spurious-resonance audit");
    double audit_w2 = kOmegaSqSqrt2;
    std::int64_t audit_K = 512;
    std::string audit_mode = "decimal";
    bool audit_have_out = false;
    audit->add_option("--omega-sq", audit_w2, "aspect parameter omega^2");
    audit->add_option("--K", audit_K, "maximum mode-number difference on the domain");
    audit->add_option("--mode", audit_mode, "fraction mode: decimal or binary")
        ->check(CLI::IsMember({"decimal", "binary"}));
    audit->add_option("--out", out_dir, "output directory")->each([&](const std::string&) {
        audit_have_out = true;
    });

    CLI11_PARSE(app, argc, argv);

    try {
        fs::create_directories(out_dir);
        if (audit->parsed())
            return cmd_precision_audit(audit_w2, audit_K, audit_mode, out_dir, audit_have_out);

        const json cfg = load_config(config_path, overrides);
        if (simulate->parsed()) return cmd_simulate(cfg, out_dir);
        if (threshold->parsed()) return cmd_threshold_study(cfg, out_dir);
        if (kinematic->parsed()) return cmd_kinematic(cfg, out_dir);
        if (truncated->parsed()) return cmd_truncated(cfg, out_dir);
        if (convergence->parsed()) return cmd_convergence(cfg, out_dir);
    } catch (const WorkBudgetError& e) {
        std::cerr << nlohmann::json{{"error", {{"type", "work-budget"}, {"message", e.what()}}}}
                  << "\n";
        return kExitBudget;
    } catch (const BlowupError& e) {
        std::cerr << nlohmann::json{{"error",
                                     {{"type", "numerical"},
                                      {"message", e.what()},
                                      {"time", e.time},
                                      {"realization", e.realization}}}}
                  << "\n";
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        std::cerr << nlohmann::json{{"error", {{"type", "config"}, {"message", e.what()}}}}
                  << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << nlohmann::json{{"error", {{"type", "runtime"}, {"message", e.what()}}}}
                  << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
