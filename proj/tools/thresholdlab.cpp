// thresholdlab: near-threshold bound-state laboratory.
//
// Subcommands run one experiment kind each, driven by a TOML-style config;
// results land in an output bundle (CSV tables + JSON manifest + optional SVG
// plots) written atomically. Exit codes: 0 success, 1 validation or
// precondition failure, 2 numerical non-convergence.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "thresh/bundle.hpp"
#include "thresh/config.hpp"
#include "thresh/envelope.hpp"
#include "thresh/experiments.hpp"
#include "thresh/greens.hpp"
#include "thresh/svg.hpp"

namespace {

using namespace thresh;
using config::ExperimentConfig;

std::string num(double v) { return format_number(v); }

std::vector<double> logspace(double lo, double hi, int n) {
    std::vector<double> out;
    for (int i = 0; i < n; ++i)
        out.push_back(lo * std::pow(hi / lo, n == 1 ? 0.0 : static_cast<double>(i) / (n - 1)));
    return out;
}

// Energy targets increasing toward zero: -e_max ... -e_min.
std::vector<double> energy_targets(const ExperimentConfig& cfg, int points) {
    auto mags = logspace(cfg.e_max, cfg.e_min, points);
    std::vector<double> out;
    for (double m : mags) out.push_back(-m);
    return out;
}

void emit_sweep_rows(Bundle& bundle, const AbsorptionSweep& sweep) {
    auto& t = bundle.table("rows", {"lambda", "energy", "kappa", "p_within_R", "nodes",
                                    "hf_residual", "falloff_model", "falloff_param",
                                    "falloff_rms", "error"});
    for (const auto& row : sweep.rows)
        t.add_row({num(row.lambda), num(row.E), num(row.kappa), num(row.p_within),
                   std::to_string(row.nodes), num(row.hf_residual), row.falloff_model,
                   num(row.falloff_param), num(row.falloff_rms), row.error});
}

void emit_p_plot(Bundle& bundle, const AbsorptionSweep& sweep, bool plots) {
    if (!plots) return;
    svg::LinePlot plot;
    plot.title = "probability within the probe radius vs binding energy";
    plot.x_label = "|E|";
    plot.y_label = "P_R";
    plot.log_x = true;
    plot.log_y = true;
    std::vector<double> xs, ys;
    for (const auto& row : sweep.rows) {
        if (!row.converged) continue;
        xs.push_back(std::fabs(row.E));
        ys.push_back(row.p_within);
    }
    plot.add("P_R", xs, ys);
    const std::string body = plot.render();
    if (body.empty())
        bundle.log("plot skipped: not enough converged rows");
    else
        bundle.add_plot("p_within", body);
}

int run_solve(const ExperimentConfig& cfg, Bundle& bundle) {
    double w_min = 0.0;
    for (int i = 1; i <= 400; ++i)
        w_min = std::min(w_min, cfg.potential.eval_W(2.0 * cfg.potential.r0() * i / 400.0));
    const double floor = 1.05 * cfg.potential.lambda * w_min - 1.0;
    auto st = find_bound_state(cfg.potential, cfg.l, cfg.nodes, {floor, -1e-15}, cfg.solver);

    auto& sum = bundle.table("summary", {"lambda", "energy", "kappa", "p_within_R", "nodes",
                                         "mismatch", "h0_expectation", "absW_expectation"});
    sum.add_row({num(st.lambda), num(st.E), num(st.kappa),
                 num(probability_within(st.u, cfg.probe_radius)),
                 std::to_string(st.u.count_nodes(st.u.size() - 1)), num(st.mismatch),
                 num(st.h0_expectation), num(st.absW_expectation)});

    auto& state = bundle.table("state", {"r", "u"});
    for (std::size_t i = 0; i < st.u.size(); ++i)
        state.add_row({num(st.u.grid->r[i]), num(st.u.u[i])});
    bundle.set_manifest("energy", st.E);
    return 0;
}

int run_sweep(const ExperimentConfig& cfg, Bundle& bundle) {
    auto& t = bundle.table(
        "sweep", {"lambda", "energy", "kappa", "p_within_R", "nodes", "hf_residual"});
    if (!cfg.lambdas.empty()) {
        auto rows = energy_curve(cfg.potential, cfg.l, cfg.lambdas, cfg.probe_radius, cfg.solver);
        for (const auto& row : rows) {
            if (row.converged)
                t.add_row({num(row.lambda), num(row.E), num(row.kappa), num(row.p_within),
                           std::to_string(row.nodes), num(row.hf_residual)});
            else
                t.add_row({num(row.lambda), "", "", "", "", ""});
            if (!row.converged) bundle.log("lambda=" + num(row.lambda) + ": " + row.error);
        }
    } else {
        auto sweep = absorption_sweep_energies(cfg.potential, cfg.l,
                                               energy_targets(cfg, cfg.sweep_points),
                                               cfg.probe_radius, cfg.solver);
        for (const auto& row : sweep.rows) {
            if (row.converged)
                t.add_row({num(row.lambda), num(row.E), num(row.kappa), num(row.p_within),
                           std::to_string(row.nodes), num(row.hf_residual)});
            if (!row.converged) bundle.log("target failed: " + row.error);
        }
        bundle.set_manifest("lambda_cr", sweep.lambda_cr);
        emit_p_plot(bundle, sweep, cfg.plots);
    }
    return 0;
}

int run_greens(const ExperimentConfig& cfg, Bundle& bundle) {
    const TailSpec& tail = cfg.potential.tail;
    double k_pos_min = 0.0;
    for (double k : cfg.k_values)
        if (k > 0) k_pos_min = k_pos_min == 0.0 ? k : std::min(k_pos_min, k);
    auto grid = make_profile_grid(tail, k_pos_min, cfg.solver.inner_points,
                                  cfg.solver.points_per_decade, cfg.solver.zero_energy_r_max);
    for (std::size_t i = 0; i < cfg.k_values.size(); ++i) {
        auto prof = gk_profile(tail, cfg.k_values[i], grid);
        auto& t = bundle.table("profile_" + std::to_string(i), {"r", "ghat"});
        for (std::size_t j = 0; j < prof.ghat.size(); ++j)
            t.add_row({num(prof.grid->r[j]), num(prof.ghat[j])});
        bundle.log("profile_" + std::to_string(i) + ": k=" + num(cfg.k_values[i]) +
                   (prof.constant_branch ? " (constant branch)" : ""));
    }
    std::vector<double> ks = cfg.k_values;
    std::sort(ks.begin(), ks.end(), std::greater<>());
    auto rep = monotonicity_in_k_check(tail, ks, grid, cfg.r_limit);
    bundle.set_manifest("monotone_in_k", rep.monotone);
    bundle.set_manifest("monotonicity_violations", static_cast<double>(rep.violations));
    if (rep.limit_checked) bundle.set_manifest("limit_deviation", rep.limit_deviation);
    return 0;
}

int run_envelope(const ExperimentConfig& cfg, Bundle& bundle) {
    double A, R0;
    if (cfg.env_A && cfg.env_R0) {
        A = *cfg.env_A;
        R0 = *cfg.env_R0;
    } else if (cfg.potential.tail.kind == TailSpec::Kind::InverseSquare ||
               cfg.potential.tail.kind == TailSpec::Kind::InverseSquareWithCore) {
        A = cfg.potential.lambda * cfg.potential.tail.strength;
        R0 = cfg.potential.tail.r0;
    } else {
        throw config::ConfigError(
            "envelope: supply [envelope] A and R0 or an inverse-square tail");
    }

    const auto cb = corollary_bound(A, R0, cfg.r0_tilde);
    bundle.set_manifest("A", A);
    bundle.set_manifest("R0", R0);
    bundle.set_manifest("A_tilde", cb.A_tilde);
    bundle.set_manifest("R0_tilde", cb.R0_tilde);
    bundle.set_manifest("a_tilde", cb.a_tilde);
    bundle.set_manifest("delta", cb.delta);
    bundle.set_manifest("R", cb.R);
    bundle.set_manifest("C", cb.C);
    bundle.set_manifest("C_certified", cb.C_certified);

    const double k = cfg.env_k;
    auto grid = make_profile_grid(TailSpec::inverse_square(A, R0), k, cfg.solver.inner_points,
                                  cfg.solver.points_per_decade, cfg.solver.zero_energy_r_max);
    auto prof = gk_profile(TailSpec::inverse_square(A, R0), k, grid);
    LowerBoundProfile lb = lower_bound_profile(A, cfg.env_V0, R0, k, grid);
    bundle.set_manifest("C0", lb.C0);
    bundle.set_manifest("lower_monotone", lb.monotone);

    const double ca = cfg.env_a.value_or(0.0);
    auto& t = bundle.table("envelope", {"r", "F", "Fc", "lower", "ghat"});
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double r = grid->r[i];
        const double lower = r >= R0 ? lb.C0 * std::exp(-k * r) * std::pow(r, -lb.a) /
                                           (4.0 * M_PI * r)
                                     : 0.0;
        t.add_row({num(r), num(F_eval(A, R0, r)), num(ca > 0 ? Fc_eval(ca, R0, r) : 0.0),
                   num(lower), num(prof.ghat[i])});
    }
    if (cfg.plots) {
        svg::LinePlot plot;
        plot.title = "profile and closed-form envelopes";
        plot.x_label = "r";
        plot.y_label = "4 pi r G";
        plot.log_x = true;
        plot.log_y = true;
        std::vector<double> rs, fh, gh;
        for (std::size_t i = 0; i < grid->size(); ++i) {
            rs.push_back(grid->r[i]);
            fh.push_back(F_hat(A, R0, grid->r[i]));
            gh.push_back(prof.ghat[i]);
        }
        plot.add("F_hat", rs, fh);
        plot.add("ghat_k", rs, gh);
        const auto body = plot.render();
        if (!body.empty()) bundle.add_plot("envelope", body);
    }
    return 0;
}

int run_classify(const ExperimentConfig& cfg, Bundle& bundle) {
    auto sweep = absorption_sweep_energies(cfg.potential, cfg.l,
                                           energy_targets(cfg, cfg.sweep_points),
                                           cfg.probe_radius, cfg.solver);
    auto cls = classify_threshold_behavior(sweep, cfg.potential, cfg.l, cfg.solver);
    emit_sweep_rows(bundle, sweep);
    bundle.set_manifest("lambda_cr", sweep.lambda_cr);
    bundle.set_manifest("verdict", verdict_name(cls.verdict));
    nlohmann::ordered_json ev;
    ev["p_trend_slope"] = cls.slope;
    ev["slope_decisive"] = cls.slope_decisive;
    ev["threshold_normalizable"] = cls.normalizable;
    ev["envelope_dominance"] = cls.envelope_dominance;
    ev["conflict"] = cls.conflict;
    ev["a_eff"] = std::isfinite(cls.a_eff) ? nlohmann::ordered_json(cls.a_eff)
                                           : nlohmann::ordered_json(nullptr);
    ev["empirical_energy_rate"] = cls.empirical_energy_rate;
    if (!cls.warning.empty()) ev["warning"] = cls.warning;
    bundle.set_manifest_json("evidence", ev.dump());
    emit_p_plot(bundle, sweep, cfg.plots);
    return 0;
}

int run_verify_bounds(const ExperimentConfig& cfg, Bundle& bundle) {
    const TailSpec& tail = cfg.potential.tail;
    if (tail.kind != TailSpec::Kind::InverseSquare)
        throw config::ConfigError("verify-bounds: configure an inverse_square tail");
    const double A = tail.strength, R0 = tail.r0;

    auto& t = bundle.table("report", {"check", "value", "threshold", "status"});
    bool all_pass = true;
    auto record = [&](const std::string& name, double value, double threshold, bool pass) {
        t.add_row({name, num(value), num(threshold), pass ? "pass" : "fail"});
        all_pass = all_pass && pass;
    };

    std::vector<double> ks = cfg.k_values;
    std::sort(ks.begin(), ks.end(), std::greater<>());
    double k_pos_min = 0.0;
    for (double k : ks)
        if (k > 0) k_pos_min = k;
    auto grid = make_profile_grid(tail, k_pos_min, cfg.solver.inner_points,
                                  cfg.solver.points_per_decade, cfg.solver.zero_energy_r_max);

    // k-monotonicity plus the closed-form limit.
    auto mono = monotonicity_in_k_check(tail, ks, grid, cfg.r_limit);
    record("k_monotonicity_violations", mono.violations, 0, mono.violations == 0);
    if (mono.limit_checked) record("limit_vs_Fhat_rel", mono.limit_deviation, 0.01,
                                   mono.limit_deviation < 0.01);

    // Free-kernel domination and the ordered-pair check.
    std::vector<KernelSample> samples;
    for (int i = 0; i < cfg.samples; ++i) {
        const double r = R0 * std::pow(50.0, static_cast<double>(i % 20) / 19.0);
        const double rp = R0 * (0.1 + 0.8 * static_cast<double>(i % 7) / 6.0);
        const double ct = -1.0 + 2.0 * static_cast<double>(i % 11) / 10.0;
        samples.push_back({r, rp, ct});
    }
    const double k_dom = k_pos_min > 0 ? k_pos_min : 0.1;
    auto rep1 = domination_check(TailSpec::none(), tail, k_dom, samples, cfg.l_max);
    record("domination_free_worst_ratio", rep1.worst_ratio, 1.0 + 1e-6, rep1.holds);
    auto rep2 = domination_check(TailSpec::inverse_square(0.5 * A, R0), tail, k_dom, samples,
                                 cfg.l_max);
    record("domination_pair_worst_ratio", rep2.worst_ratio, 1.0 + 1e-6, rep2.holds);

    // Static integral equation and its negative control.
    double worst = 0.0;
    for (double r : {0.5 * R0, R0, 2.0 * R0, 10.0 * R0})
        worst = std::max(worst, integral_equation_residual(A, R0, r));
    record("integral_equation_residual", worst, 1e-6, worst < 1e-6);
    double worst_neg = 0.0;
    for (double r : {0.5 * R0, R0, 2.0 * R0, 10.0 * R0})
        worst_neg = std::max(worst_neg, integral_equation_residual(A, R0, r, 0.1));
    record("integral_equation_negative_control", worst_neg, 1e-3, worst_neg > 1e-3);

    // Resolvent identity at the positive momenta.
    double worst_res = 0.0;
    for (double k : ks) {
        if (!(k > 0)) continue;
        auto prof = gk_profile(tail, k, grid);
        for (double r : {0.5 * R0, 2.0 * R0, 5.0 * R0})
            worst_res = std::max(worst_res, resolvent_identity_residual(prof, A, R0, r));
    }
    record("resolvent_identity_residual", worst_res, 1e-5, worst_res < 1e-5);

    // Sandwich: lower-bound profile <= profile <= closed form.
    const double k_sw = k_pos_min > 0 ? k_pos_min : 0.1;
    auto prof_eta = gk_profile(tail, k_sw, grid);
    auto lb = lower_bound_profile(A, cfg.env_V0, R0, k_sw, grid);
    double sandwich_worst = 0.0;
    for (std::size_t i = 0; i < grid->size(); ++i) {
        const double up = F_hat(A, R0, grid->r[i]);
        sandwich_worst = std::max(sandwich_worst, prof_eta.ghat[i] / up);
        if (prof_eta.ghat[i] > 0)
            sandwich_worst =
                std::max(sandwich_worst, lb.fhat.ghat[i] / prof_eta.ghat[i]);
    }
    record("sandwich_worst_ratio", sandwich_worst, 1.0 + 1e-9, sandwich_worst <= 1.0 + 1e-9);
    record("lower_profile_g_monotone", lb.worst_g_increment, -1e-8, lb.monotone);

    // Envelope dominance with the certified far-field constant.
    const auto cb = corollary_bound(A, R0, cfg.r0_tilde);
    double env_worst = 0.0, far_worst = 0.0;
    PartialWaveKernel pw(tail, k_dom, cfg.l_max, grid);
    for (const auto& s : samples) {
        if (!(s.rp > 0)) continue;
        const double dist =
            std::sqrt(s.r * s.r + s.rp * s.rp - 2.0 * s.r * s.rp * s.cos_theta);
        if (!(dist > 0) || s.rp > R0) continue;
        const double kern = pw.evaluate(s.r, s.rp, s.cos_theta).value;
        const double env = envelope_upper(A, R0, s.rp, dist, cfg.beta);
        env_worst = std::max(env_worst, kern / env);
        if (s.r >= cb.R)
            far_worst = std::max(far_worst,
                                 env / (cb.C_certified * std::pow(s.r, -1.5 - cb.delta)));
    }
    record("kernel_vs_envelope_worst_ratio", env_worst, 1.0 + 1e-4, env_worst <= 1.0 + 1e-4);
    record("envelope_vs_certified_far_bound", far_worst, 1.0 + 1e-9, far_worst <= 1.0 + 1e-9);

    bundle.set_manifest("all_pass", all_pass);
    return all_pass ? 0 : 2;
}

int run_theorem1(const ExperimentConfig& cfg, Bundle& bundle) {
    if (!(cfg.t1_amplitude > 0) || !(cfg.t1_rate > 0))
        throw config::ConfigError("theorem1: [theorem1] amplitude and rate are required");
    auto rows = theorem1_ratio(cfg.potential, cfg.t1_amplitude, cfg.t1_rate,
                               energy_targets(cfg, cfg.t1_points), cfg.solver);
    auto& t = bundle.table("theorem1", {"e_target", "lambda", "energy", "sup_ratio",
                                        "absW_over_sqrtE", "h0_over_sqrtE"});
    double rmin = 1e300, rmax = 0;
    for (const auto& row : rows) {
        t.add_row({num(row.e_target), num(row.lambda), num(row.E), num(row.sup_ratio),
                   num(row.absW_over_sqrtE), num(row.h0_over_sqrtE)});
        rmin = std::min(rmin, row.sup_ratio);
        rmax = std::max(rmax, row.sup_ratio);
    }
    bundle.set_manifest("sup_ratio_spread", rmax / rmin);
    return 0;
}

int run_theorem4(const ExperimentConfig& cfg, Bundle& bundle) {
    auto bracket = bracket_critical_coupling(cfg.potential, cfg.l, 0, cfg.solver);
    const double lambda_cr =
        critical_coupling(cfg.potential, cfg.l, 0, bracket.first, bracket.second, cfg.solver);
    auto solve = find_lambda_for_energy(cfg.potential, cfg.l, 0, -cfg.t4_trial_energy,
                                        lambda_cr * (1 + 1e-12), 2.0 * lambda_cr, cfg.solver);
    RadialPotential p = cfg.potential;
    p.lambda = solve.lambda;

    auto ks = logspace(cfg.t4_k_max, cfg.t4_k_min, cfg.t4_points);
    auto res = theorem4_norm_growth(p, solve.state.u, ks, cfg.solver);
    auto& t = bundle.table("theorem4", {"k", "norm_sq_lower"});
    for (std::size_t i = 0; i < res.k.size(); ++i)
        t.add_row({num(res.k[i]), num(res.norm_sq_lower[i])});
    bundle.set_manifest("lambda_cr", lambda_cr);
    bundle.set_manifest("M", res.M);
    bundle.set_manifest("C", res.C);
    bundle.set_manifest("A_tilde", res.A_tilde);
    bundle.set_manifest("R0_tilde", res.R0_tilde);
    bundle.set_manifest("slope", res.slope);
    bundle.set_manifest("correlation", res.correlation);
    bundle.set_manifest("increasing", res.increasing);
    return 0;
}

int dispatch(const ExperimentConfig& cfg, Bundle& bundle) {
    if (cfg.kind == "solve") return run_solve(cfg, bundle);
    if (cfg.kind == "sweep") return run_sweep(cfg, bundle);
    if (cfg.kind == "greens") return run_greens(cfg, bundle);
    if (cfg.kind == "envelope") return run_envelope(cfg, bundle);
    if (cfg.kind == "classify") return run_classify(cfg, bundle);
    if (cfg.kind == "verify-bounds") return run_verify_bounds(cfg, bundle);
    if (cfg.kind == "theorem1") return run_theorem1(cfg, bundle);
    if (cfg.kind == "theorem4") return run_theorem4(cfg, bundle);
    throw config::ConfigError("unknown kind: " + cfg.kind);
}

void emit_error(const std::string& type, const std::string& message, int code) {
    nlohmann::ordered_json err;
    err["error"]["type"] = type;
    err["error"]["message"] = message;
    err["error"]["exit_code"] = code;
    std::cerr << err.dump() << std::endl;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"near-threshold bound-state laboratory"};
    app.require_subcommand(1);

    std::string config_path, out_override;
    bool quiet = false;
    for (const auto& kind : thresh::config::experiment_kinds()) {
        auto* sub = app.add_subcommand(kind, "run the '" + kind + "' experiment");
        sub->add_option("config", config_path, "experiment config file")->required();
        sub->add_option("--out", out_override, "override the bundle output directory");
        sub->add_flag("--quiet", quiet, "suppress the summary line");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string kind = app.get_subcommands().front()->get_name();

    try {
        ExperimentConfig cfg = config::load_experiment_config(config_path, kind);
        if (!out_override.empty()) cfg.out_dir = out_override;
        Bundle bundle(cfg.kind, cfg.resolved_json);
        const int rc = dispatch(cfg, bundle);
        bundle.write(cfg.out_dir);
        if (!quiet)
            std::cout << kind << ": bundle written to " << cfg.out_dir
                      << (rc == 0 ? "" : " (checks failed)") << std::endl;
        return rc;
    } catch (const config::ConfigError& e) {
        emit_error("config", e.what(), 1);
        return 1;
    } catch (const std::invalid_argument& e) {
        emit_error("precondition", e.what(), 1);
        return 1;
    } catch (const std::domain_error& e) {
        emit_error("domain", e.what(), 1);
        return 1;
    } catch (const thresh::NotConverged& e) {
        emit_error("non_convergence", e.what(), 2);
        return 2;
    } catch (const thresh::NoBoundState& e) {
        emit_error("no_bound_state", e.what(), 1);
        return 1;
    } catch (const std::exception& e) {
        emit_error("numerical", e.what(), 2);
        return 2;
    }
}
