#include "lyaplab/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>

#include "lyap/avalanche.hpp"
#include "lyap/ldt.hpp"
#include "lyap/rates.hpp"
#include "lyaplab/output.hpp"

namespace lyaplab {

namespace {

using lyap::CocycleFamily;

class Session {
public:
    Session(const Config& cfg, const RunOptions& opts, std::string subcommand)
        : cfg_(cfg),
          dir_(opts.out_dir),
          subcommand_(std::move(subcommand)),
          writer_(cfg, opts.out_dir,
                  cfg.text("output.path").empty() ? default_prefix(subcommand_) : cfg.text("output.path")) {}

    template <class F>
    decltype(auto) stage(const std::string& name, F&& f) {
        const auto t0 = std::chrono::steady_clock::now();
        struct Record {
            Session* s;
            std::string name;
            std::chrono::steady_clock::time_point t0;
            ~Record() {
                s->stages_.push_back(
                    {name, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()});
            }
        } rec{this, name, t0};
        return f();
    }

    void emit(Table t) { tables_.push_back(std::move(t)); }

    int finish(int status) {
        std::vector<WrittenFile> files;
        for (const auto& t : tables_) files.push_back(writer_.write(t));
        write_manifest(dir_, subcommand_, cfg_, stages_, files, status);
        return status;
    }

private:
    static std::string default_prefix(std::string s) {
        for (char& c : s)
            if (c == '-') c = '_';
        return s;
    }

    const Config& cfg_;
    std::filesystem::path dir_;
    std::string subcommand_;
    OutputWriter writer_;
    std::vector<Table> tables_;
    std::vector<StageTime> stages_;
};

struct Common {
    std::size_t grid;
    std::size_t n_min;
    std::size_t n_max;
    lyap::ExecutionOptions exec;
};

Common common(const Config& cfg, const RunOptions& opts) {
    return {static_cast<std::size_t>(cfg.integer("numerics.grid")),
            static_cast<std::size_t>(cfg.integer("numerics.n_min")),
            static_cast<std::size_t>(cfg.integer("numerics.n_max")), lyap::ExecutionOptions{opts.threads}};
}

void require_index(const Config& cfg, const std::string& key, std::size_t dim) {
    if (static_cast<std::size_t>(cfg.integer(key)) > dim)
        throw ConfigError(ConfigErrorKind::out_of_range, key, cfg.line_of(key),
                          "exceeds the cocycle dimension " + std::to_string(dim));
}

int cmd_exponents(const Config& cfg, const RunOptions& opts, Session& s, std::ostream&) {
    const auto c = common(cfg, opts);
    const auto fam = s.stage("build", [&] { return build_family(cfg); });
    const auto ladder = lyap::dyadic_ladder(c.n_min, c.n_max);
    Table t("lambda", {"E", "n", "j", "lambda"});
    s.stage("ladder", [&] {
        for (double e : fam.params().values) {
            const auto rows = lyap::finite_scale_ladder(fam, e, ladder, c.grid, c.exec);
            for (std::size_t k = 0; k < ladder.size(); ++k)
                for (std::size_t j = 0; j < rows[k].size(); ++j) t.add({e, cell(ladder[k]), cell(j + 1), rows[k][j]});
        }
    });
    s.emit(std::move(t));
    return kExitOk;
}

int cmd_ap_verify(const Config& cfg, const RunOptions&, Session& s, std::ostream& err) {
    const auto& file = cfg.text("ap.file");
    if (file.empty()) throw ConfigError(ConfigErrorKind::invalid_value, "ap.file", 0, "required for ap-verify");
    std::filesystem::path path(file);
    if (path.is_relative()) path = cfg.base_dir() / path;
    const auto mats = s.stage("read", [&] { return read_matrix_file(path); });
    const lyap::ApInput input(mats);
    const auto rep = s.stage("report", [&] { return lyap::ap_report(input); });

    Table factors("factors", {"j", "norm", "alpha", "gap"});
    for (std::size_t j = 0; j < rep.factors.size(); ++j)
        factors.add({cell(j + 1), rep.factors[j].norm, rep.factors[j].alpha, rep.factors[j].gap});
    const bool have_lambda = !rep.lambda.empty();
    Table pairs("pairs", {"j", "rho", "lambda", "bracketed", "non_cancellation"});
    for (std::size_t j = 0; j < rep.rho.size(); ++j)
        pairs.add({cell(j + 1), rep.rho[j], have_lambda ? rep.lambda[j] : std::nan(""),
                   have_lambda ? static_cast<bool>(rep.bracketed[j]) : false,
                   static_cast<bool>(rep.hypotheses.non_cancellation_by_pair[j])});
    Table summary("summary", {"n", "d", "mu", "dominance", "mu_floor", "non_cancellation", "hypotheses_hold",
                              "discrepancy", "bound", "within_bound", "lambda_available"});
    summary.add({cell(input.size()), cell(input.dim()), rep.mu, rep.hypotheses.dominance, rep.hypotheses.mu_floor,
                 rep.hypotheses.non_cancellation, rep.hypotheses_hold(), rep.discrepancy, rep.bound,
                 rep.within_bound(), have_lambda});
    s.emit(std::move(factors));
    s.emit(std::move(pairs));
    s.emit(std::move(summary));
    if (!have_lambda) {
        err << "AP hypotheses unverifiable: degenerate top singular value\n";
        return kExitRefusal;
    }
    return kExitOk;
}

int cmd_ap_demo(const Config& cfg, const RunOptions&, Session& s, std::ostream&) {
    const auto mode = cfg.text("demo.mode");
    const std::vector<double> thetas(static_cast<std::size_t>(cfg.integer("demo.n") - 1), cfg.real("demo.theta"));
    const auto eps = cfg.real_list("demo.eps");
    if (eps.empty()) throw ConfigError(ConfigErrorKind::invalid_value, "demo.eps", cfg.line_of("demo.eps"), "empty sweep");
    std::vector<std::pair<std::string, lyap::ProjectionMode>> modes;
    if (mode != "rank2") modes.push_back({"rank1", lyap::ProjectionMode::rank1});
    if (mode != "rank1") modes.push_back({"rank2", lyap::ProjectionMode::rank2});
    Table sweep("sweep", {"mode", "eps", "discrepancy", "log_product_norm", "min_pair_norm", "max_pair_norm",
                          "certified_mu", "hypotheses_hold"});
    Table pairs("pairs", {"mode", "eps", "j", "pair_norm"});
    s.stage("sweep", [&] {
        for (const auto& [name, m] : modes)
            for (double e : eps) {
                const auto demo = lyap::projection_demo(thetas, e, m);
                double lo = demo.pair_norms.front();
                double hi = lo;
                for (std::size_t j = 0; j < demo.pair_norms.size(); ++j) {
                    lo = std::min(lo, demo.pair_norms[j]);
                    hi = std::max(hi, demo.pair_norms[j]);
                    pairs.add({name, e, cell(j + 1), demo.pair_norms[j]});
                }
                sweep.add({name, e, demo.discrepancy, demo.log_product_norm, lo, hi, demo.hypotheses.mu,
                           demo.hypotheses.hold()});
            }
    });
    s.emit(std::move(sweep));
    s.emit(std::move(pairs));
    return kExitOk;
}

int cmd_ldt(const Config& cfg, const RunOptions& opts, Session& s, std::ostream&) {
    const auto c = common(cfg, opts);
    const auto fam = s.stage("build", [&] { return build_family(cfg); });
    require_index(cfg, "ldt.p", fam.dim());
    const auto p = static_cast<std::size_t>(cfg.integer("ldt.p"));
    const auto deltas = cfg.real_list("ldt.delta");
    if (deltas.empty()) throw ConfigError(ConfigErrorKind::invalid_value, "ldt.delta", cfg.line_of("ldt.delta"), "empty");
    const auto& model_name = cfg.text("ldt.model");
    const auto model = model_name == "stretched" || (model_name == "auto" && fam.base().nu() >= 2)
                           ? lyap::DecayModel::stretched
                           : lyap::DecayModel::exp_poly;
    const auto ladder = lyap::dyadic_ladder(c.n_min, c.n_max);
    const auto k = static_cast<std::size_t>(cfg.integer("ldt.k"));

    Table profile("profile", {"E", "n", "delta", "measure", "grid"});
    Table fits("fit", {"E", "delta", "model", "verdict", "rows_used", "n_lo", "n_hi", "trend_slope", "c", "C", "b",
                       "tau", "k", "residual"});
    Table inv("almost_invariance", {"E", "n", "k", "sup_gap", "bound", "holds"});
    Table mono("monotonicity", {"E", "n", "lambda_n", "lambda_2n", "excess", "violation"});
    for (double e : fam.params().values) {
        const auto prof = s.stage("profile", [&] {
            return lyap::deviation_profile(fam, e, p, ladder, deltas, c.grid, c.exec);
        });
        for (const auto& r : prof.rows) profile.add({e, cell(r.n), r.delta, r.measure, cell(r.grid_size)});
        for (double d : deltas) {
            const auto f = lyap::fit_decay(prof, model, d);
            fits.add({e, d, std::string(model == lyap::DecayModel::exp_poly ? "exp_poly" : "stretched"), f.verdict,
                      cell(f.rows_used), cell(f.n_lo), cell(f.n_hi), f.trend_slope, f.c, f.big_c, f.b, f.tau, f.k,
                      f.residual});
        }
        const auto ai = s.stage("almost_invariance",
                                [&] { return lyap::almost_invariance(fam, e, c.n_max, k, c.grid, c.exec); });
        inv.add({e, cell(c.n_max), cell(k), ai.sup_gap, ai.bound, ai.holds()});
        if (ladder.size() >= 2) {
            const auto rep = s.stage("monotonicity", [&] {
                return lyap::monotonicity_audit(fam, e, ladder, c.grid, cfg.real("numerics.tol_quad"), c.exec);
            });
            for (const auto& r : rep.rows) mono.add({e, cell(r.n), r.lambda_n, r.lambda_2n, r.excess, r.violation});
        }
    }
    s.emit(std::move(profile));
    s.emit(std::move(fits));
    s.emit(std::move(inv));
    s.emit(std::move(mono));
    return kExitOk;
}

lyap::RateSeries engine_series(const Config& cfg, const CocycleFamily& fam, double e, const Common& c) {
    if (c.n_max < 8) throw ConfigError(ConfigErrorKind::invalid_value, "numerics.n_max", cfg.line_of("numerics.n_max"),
                                       "rate experiments need n_max >= 8");
    return lyap::rate_series(fam, e, static_cast<std::size_t>(cfg.integer("rates.j")), c.n_max, c.grid, c.exec);
}

int cmd_rates(const Config& cfg, const RunOptions& opts, Session& s, std::ostream&) {
    const auto c = common(cfg, opts);
    const auto fam = s.stage("build", [&] { return build_family(cfg); });
    require_index(cfg, "rates.j", fam.dim());
    const auto tail_start = static_cast<std::size_t>(cfg.integer("rates.tail_start"));
    Table series("series", {"E", "n", "lambda"});
    Table cn("c_over_n", {"E", "n", "lambda", "scaled_error", "used"});
    Table rr("r_sequence", {"E", "n", "R"});
    Table summary("summary", {"E", "j", "proxy_limit", "proxy_scale", "c_est", "r_tail_start", "r_tail_max",
                              "r_tail_median", "r_bounded", "min_gap", "gap_pass"});
    for (double e : fam.params().values) {
        const auto ser = s.stage("series", [&] { return engine_series(cfg, fam, e, c); });
        for (const auto& r : ser.rows) series.add({e, cell(r.n), r.lambda});
        const auto co = lyap::check_C_over_n(ser);
        for (const auto& r : co.table) cn.add({e, cell(r.n), r.lambda, r.scaled_error, r.used});
        const auto rs = lyap::r_sequence(ser, tail_start);
        for (const auto& r : rs.rows) rr.add({e, cell(r.n), r.r});
        const double es[] = {e};
        const auto gap = s.stage("gap", [&] {
            return lyap::gap_monitor(fam, es, c.n_max, cfg.real("holder.kappa"), c.grid, c.exec).front();
        });
        summary.add({e, cell(ser.j), ser.proxy_limit, cell(ser.proxy_scale), co.c_est, cell(rs.tail_start), rs.tail_max,
                     rs.tail_median, rs.bounded, gap.min_gap, gap.pass});
    }
    s.emit(std::move(series));
    s.emit(std::move(cn));
    s.emit(std::move(rr));
    s.emit(std::move(summary));
    return kExitOk;
}

void add_verdict(Table& verdicts, Table& evidence, double e, const lyap::RateSeries& ser,
                 const lyap::DichotomyVerdict& v) {
    verdicts.add({e, cell(ser.j), lyap::to_string(v.classification), v.c1, cell(v.l0), v.c1_est,
                  cell(v.trigger.value_or(0)), cell(v.cascade_rungs), v.cascade_holds, ser.proxy_limit,
                  cell(ser.proxy_scale), v.reason});
    for (const auto& ev : v.evidence) evidence.add({e, cell(ev.ell), ev.second_difference, ev.threshold, ev.deviation});
}

Table verdict_table() {
    return Table("verdict", {"E", "j", "classification", "c1", "l0", "c1_est", "trigger", "cascade_rungs",
                             "cascade_holds", "proxy_limit", "proxy_scale", "reason"});
}

Table evidence_table() { return Table("evidence", {"E", "ell", "second_difference", "threshold", "deviation"}); }

int cmd_dichotomy(const Config& cfg, const RunOptions& opts, Session& s, std::ostream&) {
    const auto c = common(cfg, opts);
    const auto fam = s.stage("build", [&] { return build_family(cfg); });
    require_index(cfg, "rates.j", fam.dim());
    const double c1 = cfg.real("dichotomy.c1");
    const auto l0 = static_cast<std::size_t>(cfg.integer("dichotomy.l0"));
    Table series("series", {"E", "n", "lambda"});
    auto verdicts = verdict_table();
    auto evidence = evidence_table();
    for (double e : fam.params().values) {
        const auto ser = s.stage("series", [&] { return engine_series(cfg, fam, e, c); });
        for (const auto& r : ser.rows) series.add({e, cell(r.n), r.lambda});
        add_verdict(verdicts, evidence, e, ser, lyap::dichotomy(ser, c1, l0));
    }
    s.emit(std::move(series));
    s.emit(std::move(verdicts));
    s.emit(std::move(evidence));
    return kExitOk;
}

Table gap_table(const std::vector<lyap::GapRecord>& gaps) {
    Table t("gaps", {"E", "min_gap", "pass"});
    for (const auto& g : gaps) t.add({g.e, g.min_gap, g.pass});
    return t;
}

int cmd_holder(const Config& cfg, const RunOptions& opts, Session& s, std::ostream& err) {
    const auto c = common(cfg, opts);
    const auto fam = s.stage("build", [&] { return build_family(cfg); });
    require_index(cfg, "holder.j", fam.dim());
    const double lo = cfg.real("param.E_min");
    const double hi = cfg.real("param.E_max");
    if (!(hi > lo))
        throw ConfigError(ConfigErrorKind::invalid_value, "param.E_max", cfg.line_of("param.E_max"),
                          "holder needs a window with E_max > E_min");
    lyap::HolderOptions ho;
    ho.pair_budget = static_cast<std::size_t>(cfg.integer("holder.pairs"));
    ho.kappa = cfg.real("holder.kappa");
    ho.tol_quad = cfg.real("numerics.tol_quad");
    ho.seed = cfg.unsigned_integer("numerics.seed");
    ho.grid_size = c.grid;
    const auto n = static_cast<std::size_t>(cfg.integer("holder.n"));
    lyap::HolderEstimate est;
    try {
        est = s.stage("estimate", [&] {
            return lyap::holder_estimate(fam, static_cast<std::size_t>(cfg.integer("holder.j")), lo, hi, n, ho, c.exec);
        });
    } catch (const lyap::GapRefusalError& e) {
        s.emit(gap_table(e.records()));
        err << "numerical refusal: " << e.what() << "\n";
        return kExitRefusal;
    }
    Table pairs("pairs", {"E", "E2", "distance", "difference", "excluded"});
    for (const auto& p : est.pairs) pairs.add({p.e, p.e2, p.distance, p.difference, p.excluded});
    Table summary("summary", {"j", "n", "E_lo", "E_hi", "verdict", "gamma_est", "intercept", "residual", "pairs_used",
                              "pairs_excluded", "kappa_min", "crude_log_lhs", "crude_log_rhs", "crude_c", "crude_pass",
                              "stretched_sigma", "stretched_c", "stretched_residual"});
    const auto& st = est.stretched;
    summary.add({cell(est.j), cell(est.n), est.e_lo, est.e_hi, est.verdict, est.gamma_est, est.intercept, est.residual,
                 cell(est.pairs_used), cell(est.pairs_excluded), est.kappa_min, est.beta0_check.log_lhs,
                 est.beta0_check.log_rhs, est.beta0_check.c, est.beta0_check.pass(),
                 st ? st->sigma : std::nan(""), st ? st->c : std::nan(""), st ? st->residual : std::nan("")});
    s.emit(std::move(pairs));
    s.emit(gap_table(est.gaps));
    s.emit(std::move(summary));
    return kExitOk;
}

int cmd_random(const Config& cfg, const RunOptions& opts, Session& s, std::ostream&) {
    const auto c = common(cfg, opts);
    const auto dist = s.stage("build", [&] { return build_distribution(cfg); });
    const auto trials = static_cast<std::size_t>(cfg.integer("random.trials"));
    const auto ladder = lyap::dyadic_ladder(c.n_min, c.n_max);
    const double c1 = cfg.real("dichotomy.c1");
    const auto l0 = static_cast<std::size_t>(cfg.integer("dichotomy.l0"));

    Table mc("mc", {"n", "estimate", "stderr", "trials"});
    auto verdicts = verdict_table();
    auto evidence = evidence_table();
    const bool run_dichotomy = c.n_max >= 4 * l0 && ladder.size() >= 2;
    std::vector<lyap::McEstimate> rows;
    if (run_dichotomy) {
        const auto rep = s.stage("dichotomy", [&] {
            return lyap::convergence_dichotomy_random(dist, ladder, trials, c1, l0, c.exec);
        });
        rows = rep.rows;
        add_verdict(verdicts, evidence, 0.0, rep.series, rep.verdict);
    } else {
        rows = s.stage("mc", [&] { return lyap::top_exponent_ladder(dist, ladder, trials, c.exec); });
    }
    for (const auto& r : rows) mc.add({cell(r.n), r.estimate, r.stderr_, cell(r.trials)});
    const auto& top = rows.back();

    std::vector<std::size_t> ld_n;
    for (auto v : cfg.integer_list("random.ld_n")) ld_n.push_back(static_cast<std::size_t>(v));
    std::sort(ld_n.begin(), ld_n.end());
    ld_n.erase(std::unique(ld_n.begin(), ld_n.end()), ld_n.end());
    Table ld("ld", {"n", "delta", "probability", "lambda_ref"});
    if (!ld_n.empty()) {
        const double delta = cfg.real("random.delta_rel") * std::abs(top.estimate);
        if (delta > 0.0) {
            const auto ldr = s.stage("ld", [&] { return lyap::ld_profile(dist, ld_n, delta, trials, c.exec); });
            for (const auto& r : ldr) ld.add({cell(r.n), r.delta, r.probability, r.lambda_ref});
        }
    }

    Table hist("projective", {"n", "bin", "angle_lo", "angle_hi", "mass"});
    double tv = std::nan("");
    if (dist.dim() == 2) {
        const auto bins = static_cast<std::size_t>(cfg.integer("random.bins"));
        const std::size_t half = std::max<std::size_t>(1, c.n_max / 2);
        const auto h1 = s.stage("projective", [&] { return lyap::projective_measure(dist, half, trials, bins, c.exec); });
        const auto h2 =
            s.stage("projective", [&] { return lyap::projective_measure(dist, c.n_max, trials, bins, c.exec); });
        for (const auto* h : {&h1, &h2}) {
            const auto m = h->mass();
            for (std::size_t b = 0; b < bins; ++b)
                hist.add({cell(h->n), cell(b), std::numbers::pi * static_cast<double>(b) / static_cast<double>(bins),
                          std::numbers::pi * static_cast<double>(b + 1) / static_cast<double>(bins), m[b]});
        }
        tv = lyap::total_variation(h1, h2);
    }
    const double probe =
        dist.dim() >= 2 ? s.stage("probe", [&] { return lyap::contraction_probe(dist, c.n_max, trials, c.exec); })
                        : std::nan("");

    Table summary("summary", {"distribution", "dim", "trials", "n_top", "estimate", "stderr", "z_score",
                              "contraction_log_ratio", "projective_tv"});
    summary.add({dist.describe(), cell(dist.dim()), cell(trials), cell(top.n), top.estimate, top.stderr_,
                 top.stderr_ > 0.0 ? top.estimate / top.stderr_ : std::nan(""), probe, tv});
    s.emit(std::move(mc));
    s.emit(std::move(ld));
    s.emit(std::move(hist));
    if (run_dichotomy) {
        s.emit(std::move(verdicts));
        s.emit(std::move(evidence));
    }
    s.emit(std::move(summary));
    return kExitOk;
}

std::vector<double> raw_omega(const Config& cfg) {
    const auto& o = cfg.text("shift.omega");
    if (o == "golden") return {(std::sqrt(5.0) - 1.0) / 2.0};
    if (o == "standard") return lyap::ShiftBase::standard(static_cast<std::size_t>(cfg.integer("shift.nu"))).omega();
    return cfg.real_list("shift.omega");
}

int cmd_dioph(const Config& cfg, const RunOptions&, Session& s, std::ostream&) {
    const double a = cfg.real("shift.dio_exponent");
    const auto n_max = static_cast<std::size_t>(cfg.integer("dioph.n_max"));
    Table t("report", {"component", "omega", "a", "n_max", "c_est", "worst_n"});
    s.stage("scan", [&] {
        const auto omega = raw_omega(cfg);
        for (std::size_t i = 0; i < omega.size(); ++i) {
            const auto r = lyap::diophantine_report(omega[i], a, n_max);
            t.add({cell(i + 1), omega[i], a, cell(n_max), r.c_est, cell(r.worst_n)});
        }
    });
    s.emit(std::move(t));
    return kExitOk;
}

using Handler = int (*)(const Config&, const RunOptions&, Session&, std::ostream&);

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> table = {
        {"exponents", cmd_exponents}, {"ap-verify", cmd_ap_verify}, {"ap-demo-projections", cmd_ap_demo},
        {"ldt", cmd_ldt},             {"rates", cmd_rates},         {"dichotomy", cmd_dichotomy},
        {"holder", cmd_holder},       {"random", cmd_random},       {"dioph", cmd_dioph},
    };
    return table;
}

}  // namespace

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"exponents", "ap-verify", "ap-demo-projections",
                                                   "ldt",       "rates",     "dichotomy",
                                                   "holder",    "random",    "dioph"};
    return names;
}

lyap::CocycleFamily build_family(const Config& cfg) {
    const auto nu = static_cast<std::size_t>(cfg.integer("shift.nu"));
    const double a = cfg.real("shift.dio_exponent");
    const auto& o = cfg.text("shift.omega");
    lyap::ShiftBase base = o == "golden"     ? lyap::ShiftBase::golden(a)
                           : o == "standard" ? lyap::ShiftBase::standard(nu, a)
                                             : lyap::ShiftBase(cfg.real_list("shift.omega"), a);
    const auto& kind = cfg.text("cocycle.kind");
    lyap::CocycleSpec spec;
    if (kind == "constant") {
        spec = lyap::ConstantCocycle{cfg.matrix("cocycle.matrix")};
    } else if (kind == "diagonal-exp") {
        spec = lyap::DiagonalExpCocycle{cfg.real_list("cocycle.amplitude"), cfg.real_list("cocycle.slope")};
    } else if (kind == "trig-poly") {
        auto c0 = cfg.matrix("cocycle.c0");
        auto energy = cfg.text("cocycle.energy").empty() ? lyap::RealMatrix(c0.dim()) : cfg.matrix("cocycle.energy");
        spec = lyap::TrigPolyCocycle{std::move(c0), cfg.matrix_list("cocycle.cos_terms"),
                                     cfg.matrix_list("cocycle.sin_terms"), std::move(energy)};
    } else {
        spec = lyap::SchrodingerCocycle{cfg.real("cocycle.coupling"), cfg.real_list("cocycle.cos"),
                                        cfg.real_list("cocycle.sin")};
    }
    const auto count = static_cast<std::size_t>(cfg.integer("param.E_count"));
    const double lo = cfg.real("param.E_min");
    const auto params = count == 1 ? lyap::ParameterGrid::single(lo)
                                   : lyap::ParameterGrid::linspace(lo, cfg.real("param.E_max"), count);
    const auto grid = static_cast<std::size_t>(cfg.integer("numerics.grid"));
    return lyap::CocycleFamily::create(std::move(base), std::move(spec), params, cfg.real("cocycle.holder_exponent"),
                                       std::min<std::size_t>(grid, 64));
}

lyap::MatrixDistribution build_distribution(const Config& cfg) {
    const auto seed = cfg.unsigned_integer("numerics.seed");
    const auto& name = cfg.text("random.dist");
    auto dist = name == "furstenberg"     ? lyap::MatrixDistribution::furstenberg_example(seed, cfg.real("random.angle"))
                : name == "rotation-pair" ? lyap::MatrixDistribution::rotation_pair(seed, cfg.real("random.alpha"))
                : name == "rotated-diagonal"
                    ? lyap::MatrixDistribution::rotated_diagonal(cfg.real("random.theta_lo"), cfg.real("random.theta_hi"),
                                                                 cfg.real("random.s"), seed)
                    : lyap::MatrixDistribution::finite(cfg.matrix_list("random.matrices"),
                                                       cfg.real_list("random.probabilities"), seed);
    const auto p = static_cast<std::size_t>(cfg.integer("random.exterior"));
    return p > 1 ? dist.exterior_power(p) : dist;
}

std::vector<lyap::RealMatrix> read_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw lyap::DomainError("cannot read matrix file " + path.string());
    std::vector<lyap::RealMatrix> out;
    std::vector<std::vector<double>> block;
    std::size_t block_line = 0;
    auto flush = [&] {
        if (block.empty()) return;
        const std::size_t d = block.size();
        std::vector<double> flat;
        for (const auto& r : block) {
            if (r.size() != d)
                throw lyap::DomainError("matrix starting at line " + std::to_string(block_line) + " is not square");
            flat.insert(flat.end(), r.begin(), r.end());
        }
        if (!out.empty() && out.front().dim() != d)
            throw lyap::DomainError("matrix starting at line " + std::to_string(block_line) +
                                    " has inconsistent dimension");
        out.emplace_back(d, std::move(flat));
        block.clear();
    };
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        std::istringstream is(line);
        std::vector<double> row;
        std::string tok;
        while (is >> tok) {
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size() || !std::isfinite(v))
                throw lyap::DomainError("malformed number '" + tok + "' at line " + std::to_string(line_no));
            row.push_back(v);
        }
        if (row.empty()) {
            flush();
            continue;
        }
        if (block.empty()) block_line = line_no;
        block.push_back(std::move(row));
    }
    flush();
    if (out.empty()) throw lyap::DomainError("matrix file " + path.string() + " contains no matrices");
    return out;
}

int run(const std::string& subcommand, const Config& cfg, const RunOptions& opts, std::ostream& err) {
    const auto it = handlers().find(subcommand);
    if (it == handlers().end()) {
        err << "unknown subcommand '" << subcommand << "'\n";
        return kExitValidation;
    }
    std::error_code ec;
    std::filesystem::create_directories(opts.out_dir, ec);
    if (ec) {
        err << "cannot create output directory " << opts.out_dir.string() << ": " << ec.message() << "\n";
        return kExitValidation;
    }
    Session session(cfg, opts, subcommand);
    int status = kExitOk;
    try {
        status = it->second(cfg, opts, session, err);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        status = kExitValidation;
    } catch (const lyap::RefusalError& e) {
        err << "numerical refusal: " << e.what() << "\n";
        status = kExitRefusal;
    } catch (const lyap::SingularMatrixError& e) {
        err << "numerical refusal: " << e.what() << "\n";
        status = kExitRefusal;
    } catch (const lyap::DomainError& e) {
        err << "validation error: " << e.what() << "\n";
        status = kExitValidation;
    }
    try {
        return session.finish(status);
    } catch (const std::exception& e) {
        err << "output error: " << e.what() << "\n";
        return kExitValidation;
    }
}

}  // namespace lyaplab
