#include "hssd/pipeline.hpp"

#include "hssd/csv.hpp"
#include "hssd/errors.hpp"
#include "hssd/posterior_io.hpp"
#include "hssd/rng.hpp"
#include "hssd/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <set>

namespace hssd {

namespace fs = std::filesystem;
using nlohmann::json;

void RunConfig::apply_profile() {
    if (profile == "paper") {
        mcmc.n_iter = 500000;
        mcmc.thin = 40;
        mcmc.n_chains = 3;
        mcmc.burn_in_fraction = 0.5;
        sim.n_theta_gec = 10000;
        sim.n_theta_ssd = 2000;
        sim.n_species_large = 4000000;
    } else if (profile == "test") {
        mcmc.n_iter = 20000;
        mcmc.thin = 10;
        mcmc.n_chains = 3;
        mcmc.burn_in_fraction = 0.5;
        sim.n_theta_gec = 2000;
        sim.n_theta_ssd = 500;
        sim.n_species_large = 100000;
    } else {
        throw DomainError("unknown profile '" + profile + "' (expected 'test' or 'paper')");
    }
    mcmc.seed = seed;
    mcmc.threads = threads;
}

namespace {

std::string fmt_level(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", x);
    return buf;
}

std::string out_path(const RunConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

// Wall-clock stage timer; results land in a sidecar that is documented as
// non-deterministic and excluded from byte-identity guarantees.
class StageTimer {
public:
    void start(const std::string& name) {
        name_ = name;
        t0_ = std::chrono::steady_clock::now();
    }
    void stop() {
        const auto dt = std::chrono::steady_clock::now() - t0_;
        seconds_[name_] += std::chrono::duration<double>(dt).count();
    }
    void write(const std::string& path) const {
        json j = json::object();
        for (const auto& [k, v] : seconds_) j[k] = v;
        std::ofstream out(path);
        out << j.dump(2) << '\n';
    }

private:
    std::string name_;
    std::chrono::steady_clock::time_point t0_;
    std::map<std::string, double> seconds_;
};

std::vector<std::string> select_contaminants(const BioassayDataset& ds, const RunConfig& cfg) {
    const auto all = ds.contaminant_ids();
    if (cfg.contaminant.empty()) {
        if (all.empty()) throw InsufficientDataError("dataset contains no observations");
        return all;
    }
    if (std::find(all.begin(), all.end(), cfg.contaminant) == all.end()) {
        throw Error("contaminant filter '" + cfg.contaminant + "' matched no observations");
    }
    return {cfg.contaminant};
}

struct CurveKey {
    std::string species;
    std::string contaminant;
    bool operator<(const CurveKey& o) const {
        return std::tie(species, contaminant) < std::tie(o.species, o.contaminant);
    }
};

std::map<CurveKey, std::vector<ResponsePoint>> group_points(const std::vector<ResponsePoint>& pts,
                                                            const std::set<std::string>& conts) {
    std::map<CurveKey, std::vector<ResponsePoint>> groups;
    for (const auto& p : pts) {
        if (!conts.count(p.contaminant_id)) continue;
        groups[{p.species_id, p.contaminant_id}].push_back(p);
    }
    return groups;
}

// Fits all selected curves; bootstrap intervals optional (the classical
// SSD only needs point estimates).
std::vector<CurveRow> fit_selected_curves(const RunConfig& cfg, const BioassayDataset& ds,
                                          const std::vector<std::string>& contaminants,
                                          bool with_intervals) {
    const auto groups = group_points(make_responses(ds),
                                     std::set<std::string>(contaminants.begin(), contaminants.end()));
    if (groups.empty()) {
        throw InsufficientDataError("no response points for the selected contaminants");
    }
    std::vector<CurveRow> rows;
    std::uint64_t curve_index = 0;
    for (const auto& [key, pts] : groups) {
        CurveRow row;
        try {
            const ControlSummary ctrl =
                estimate_control(ds, key.species, cfg.pooling, key.contaminant);
            row.fit = fit_curve(pts, ctrl.d);
        } catch (const Error& e) {
            std::cerr << "fit-curves: skipping " << key.species << "/" << key.contaminant << ": "
                      << e.what() << '\n';
            curve_index += 2;
            continue;
        }
        if (with_intervals && row.fit.converged) {
            row.ec10 = bootstrap_ec(pts, row.fit.d, 10.0, cfg.n_boot_ec,
                                    derive_seed(cfg.seed, RngDomain::generic, curve_index));
            row.ec50 = bootstrap_ec(pts, row.fit.d, 50.0, cfg.n_boot_ec,
                                    derive_seed(cfg.seed, RngDomain::generic, curve_index + 1));
            row.has_intervals = true;
        }
        curve_index += 2;
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_curves_csv(const std::vector<CurveRow>& rows, const std::string& path) {
    csv::Writer w(path);
    for (const char* h : {"species", "contaminant", "b", "e", "d", "sigma", "ec10", "ec10_lo",
                          "ec10_hi", "ec50", "ec50_lo", "ec50_hi", "converged"}) {
        w.field(std::string(h));
    }
    w.end_row();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : rows) {
        w.field(r.fit.species_id);
        w.field(r.fit.contaminant_id);
        w.field(r.fit.b);
        w.field(r.fit.e);
        w.field(r.fit.d);
        w.field(r.fit.sigma);
        w.field(r.has_intervals ? r.ec10.point : nan);
        w.field(r.has_intervals ? r.ec10.ci_low : nan);
        w.field(r.has_intervals ? r.ec10.ci_high : nan);
        w.field(r.has_intervals ? r.ec50.point : nan);
        w.field(r.has_intervals ? r.ec50.ci_low : nan);
        w.field(r.has_intervals ? r.ec50.ci_high : nan);
        w.field(std::string(r.fit.converged ? "true" : "false"));
        w.end_row();
    }
}

void write_band_csv(const CurveBand& band, double p, const std::string& path) {
    csv::Writer w(path);
    std::string grid_name, value_name;
    switch (band.kind) {
    case CurveBand::Kind::global_response:
        grid_name = "concentration_ugL";
        value_name = "r_tot";
        break;
    case CurveBand::Kind::ssd_fraction_affected:
        grid_name = "concentration_ugL";
        value_name = "fraction_affected";
        break;
    case CurveBand::Kind::hc5_vs_x:
        grid_name = "x_percent";
        value_name = "hc" + fmt_level(p) + "_ugL";
        break;
    }
    w.field(grid_name);
    w.field(value_name + "_lo");
    w.field(value_name + "_median");
    w.field(value_name + "_hi");
    w.end_row();
    for (std::size_t i = 0; i < band.grid.size(); ++i) {
        w.field(band.grid[i]);
        w.field(band.lo[i]);
        w.field(band.median[i]);
        w.field(band.hi[i]);
        w.end_row();
    }
}

json hc_json(const HcEstimate& hc) {
    return {{"p", hc.p},
            {"point", hc.point},
            {"ci_low", hc.ci_low},
            {"ci_high", hc.ci_high},
            {"n", hc.n_boot}};
}

json gec_json(const GecEstimate& g) {
    return {{"x", g.x}, {"point", g.point}, {"ci_low", g.ci_low}, {"ci_high", g.ci_high}};
}

json ec_json(const EcEstimate& e) {
    return {{"x", e.x},         {"point", e.point},       {"ci_low", e.ci_low},
            {"ci_high", e.ci_high}, {"n_boot", e.n_boot}, {"n_failed", e.n_failed}};
}

json config_json(const RunConfig& cfg) {
    return {{"input", cfg.input},
            {"out_dir", cfg.out_dir},
            {"contaminant_filter", cfg.contaminant},
            {"profile", cfg.profile},
            {"seed", cfg.seed},
            {"x_levels", cfg.x_levels},
            {"hc_percent", cfg.hc_percent},
            {"n_boot_ec", cfg.n_boot_ec},
            {"n_boot_hc", cfg.n_boot_hc},
            {"control_pooling",
             cfg.pooling == ControlPooling::per_species ? "per_species" : "per_species_contaminant"},
            {"mcmc",
             {{"n_iter", cfg.mcmc.n_iter},
              {"thin", cfg.mcmc.thin},
              {"n_chains", cfg.mcmc.n_chains},
              {"burn_in_fraction", cfg.mcmc.burn_in_fraction},
              {"adapt_window", cfg.mcmc.adapt_window}}},
            {"sim",
             {{"n_theta_gec", cfg.sim.n_theta_gec},
              {"n_species_community", cfg.sim.n_species_community},
              {"n_theta_ssd", cfg.sim.n_theta_ssd},
              {"n_species_large", cfg.sim.n_species_large},
              {"n_grid", cfg.sim.n_grid}}}};
}

json curve_row_json(const CurveRow& r) {
    json j = {{"species", r.fit.species_id}, {"contaminant", r.fit.contaminant_id},
              {"b", r.fit.b},                {"e", r.fit.e},
              {"d", r.fit.d},                {"sigma", r.fit.sigma},
              {"sse", r.fit.sse},            {"n_points", r.fit.n_points},
              {"converged", r.fit.converged}};
    if (r.has_intervals) {
        j["ec10"] = ec_json(r.ec10);
        j["ec50"] = ec_json(r.ec50);
    }
    return j;
}

json hier_summary_json(const PosteriorSample& posterior) {
    json hyper = json::object();
    for (std::size_t k = 0; k < 6; ++k) {
        std::vector<double> col = posterior.pooled_column(k);
        std::sort(col.begin(), col.end());
        hyper[PosteriorSample::hyper_names[k]] = {
            {"median", stats::quantile_sorted(col, 0.50)},
            {"q025", stats::quantile_sorted(col, 0.025)},
            {"q975", stats::quantile_sorted(col, 0.975)}};
    }
    json gr = json::object();
    for (const auto& [name, r] : posterior.gelman_rubin_stat) {
        if (std::isnan(r)) {
            gr[name] = nullptr;
        } else {
            gr[name] = r;
        }
    }
    json pp = json::array();
    for (const auto& row : prior_posterior_report(posterior, posterior.priors)) {
        pp.push_back({{"name", row.name},
                      {"prior_sd", row.prior_sd},
                      {"posterior_sd", row.posterior_sd},
                      {"ratio", row.ratio},
                      {"q025", row.q025},
                      {"q50", row.q50},
                      {"q975", row.q975},
                      {"data_weak", row.data_weak},
                      {"natural_constraint", row.natural_constraint}});
    }
    return {{"hyperparameters", hyper},
            {"gelman_rubin", gr},
            {"converged", posterior.converged()},
            {"n_draws", posterior.total_draws()},
            {"prior_posterior", pp},
            {"warnings", posterior.warnings}};
}

// Simulation stage shared by cmd_simulate and cmd_report.
SimulateResult simulate_posterior(const RunConfig& cfg, const PosteriorSample& posterior,
                                  StageTimer& timer, json& report) {
    if (!posterior.converged() && !cfg.override_convergence) {
        std::string values;
        for (const auto& [name, r] : posterior.gelman_rubin_stat) {
            values += " " + name + "=" + (std::isnan(r) ? "nan" : csv::format_full(r));
        }
        throw Error("posterior failed the Gelman-Rubin gate (< 1.05 required):" + values +
                    "; rerun with --override-convergence to simulate anyway");
    }
    if (!posterior.converged() && cfg.override_convergence) {
        std::cerr << "warning: convergence gate overridden; simulating from a posterior with "
                     "Gelman-Rubin >= 1.05\n";
    }
    if (!(posterior.data_c_min > 0.0) || !(posterior.data_c_max > posterior.data_c_min)) {
        throw SchemaError("posterior lacks a usable tested-concentration range");
    }
    const std::string& cont = posterior.contaminant_id;
    const double grid_lo = posterior.data_c_min / 100.0;
    const double grid_hi = posterior.data_c_max * 100.0;

    SimulateResult result;
    report["global_response"] = json::array();
    report["hierarchical_ssd"] = json::array();

    for (double x : cfg.x_levels) {
        GlobalResponseOptions gopt;
        gopt.n_theta = cfg.sim.n_theta_gec;
        gopt.n_species = cfg.sim.n_species_community;
        gopt.seed = cfg.seed;
        gopt.n_grid = cfg.sim.n_grid;
        gopt.grid_lo = grid_lo;
        gopt.grid_hi = grid_hi;
        gopt.threads = cfg.threads;

        timer.start("global_response_x" + fmt_level(x));
        GlobalResponseResult gr = global_response(posterior, x, gopt);
        timer.stop();
        const std::string gfile = "global_response_" + cont + "_x" + fmt_level(x) + ".csv";
        write_band_csv(gr.band, cfg.hc_percent, out_path(cfg, gfile));
        result.files.push_back(gfile);
        report["global_response"].push_back({{"x", x}, {"gec", gec_json(gr.gec)}});
        result.global_per_x.push_back(std::move(gr));

        HierSsdOptions sopt;
        sopt.n_theta = cfg.sim.n_theta_ssd;
        sopt.n_species = cfg.sim.n_species_large;
        sopt.p = cfg.hc_percent;
        sopt.seed = cfg.seed;
        sopt.n_grid = cfg.sim.n_grid;
        sopt.grid_lo = grid_lo;
        sopt.grid_hi = grid_hi;
        sopt.threads = cfg.threads;

        timer.start("hierarchical_ssd_x" + fmt_level(x));
        HierSsdResult ssd = hierarchical_ssd(posterior, x, sopt);
        timer.stop();
        const std::string sfile = "hier_ssd_" + cont + "_x" + fmt_level(x) + ".csv";
        write_band_csv(ssd.band, cfg.hc_percent, out_path(cfg, sfile));
        result.files.push_back(sfile);
        report["hierarchical_ssd"].push_back({{"x", x}, {"hc", hc_json(ssd.hc)}});
        result.ssd_per_x.push_back(std::move(ssd));
    }

    // HC_p as a function of x on a fixed 5..95 grid.
    {
        HierSsdOptions sopt;
        sopt.n_theta = cfg.sim.n_theta_ssd;
        sopt.n_species = cfg.sim.n_species_large;
        sopt.p = cfg.hc_percent;
        sopt.seed = cfg.seed;
        sopt.grid_lo = grid_lo;
        sopt.grid_hi = grid_hi;
        sopt.threads = cfg.threads;
        std::vector<double> x_grid;
        for (int x = 5; x <= 95; x += 5) x_grid.push_back(x);
        timer.start("hc_vs_x");
        result.hc_vs_x_band = hc_vs_x(posterior, x_grid, sopt);
        timer.stop();
        const std::string xfile = "hc" + fmt_level(cfg.hc_percent) + "_vs_x_" + cont + ".csv";
        write_band_csv(result.hc_vs_x_band, cfg.hc_percent, out_path(cfg, xfile));
        result.files.push_back(xfile);
        json tab = json::array();
        for (std::size_t i = 0; i < result.hc_vs_x_band.grid.size(); ++i) {
            tab.push_back({{"x", result.hc_vs_x_band.grid[i]},
                           {"lo", result.hc_vs_x_band.lo[i]},
                           {"median", result.hc_vs_x_band.median[i]},
                           {"hi", result.hc_vs_x_band.hi[i]}});
        }
        report["hc_vs_x"] = std::move(tab);
    }

    // Open point resolved at run time: how posterior draws map to theta
    // sets. Evenly spaced when enough retained draws exist, resampled with
    // replacement otherwise.
    const auto total = posterior.total_draws();
    report["theta_selection"] = {
        {"gec", total >= static_cast<std::size_t>(cfg.sim.n_theta_gec) ? "evenly_spaced"
                                                                       : "with_replacement"},
        {"ssd", total >= static_cast<std::size_t>(cfg.sim.n_theta_ssd) ? "evenly_spaced"
                                                                       : "with_replacement"}};
    return result;
}

void write_report(const RunConfig& cfg, json& report, std::vector<std::string>& files,
                  const std::string& report_name) {
    report["files"] = files;
    const std::string path = out_path(cfg, report_name);
    std::ofstream out(path);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << report.dump(2) << '\n';
}

} // namespace

FitCurvesResult cmd_fit_curves(const RunConfig& cfg) {
    const BioassayDataset ds = load_dataset(cfg.input, cfg.columns);
    for (const auto& w : ds.warnings) std::cerr << "warning: " << w << '\n';
    const auto contaminants = select_contaminants(ds, cfg);

    FitCurvesResult result;
    result.rows = fit_selected_curves(cfg, ds, contaminants, true);
    write_curves_csv(result.rows, out_path(cfg, "curves.csv"));
    result.files.push_back("curves.csv");

    int converged = 0;
    for (const auto& r : result.rows) converged += r.fit.converged ? 1 : 0;
    std::cout << "fit-curves: " << result.rows.size() << " curve(s), " << converged
              << " converged -> " << cfg.out_dir << "/curves.csv\n";
    for (const auto& r : result.rows) {
        if (!r.fit.converged) {
            std::cerr << "  non-converged: " << r.fit.species_id << "/" << r.fit.contaminant_id
                      << '\n';
        }
    }
    return result;
}

ClassicalSsdResult cmd_classical_ssd(const RunConfig& cfg) {
    const BioassayDataset ds = load_dataset(cfg.input, cfg.columns);
    const auto contaminants = select_contaminants(ds, cfg);

    ClassicalSsdResult result;
    for (const auto& cont : contaminants) {
        RunConfig sub = cfg;
        sub.contaminant = cont;
        const auto rows = fit_selected_curves(sub, ds, {cont}, false);
        for (double x : cfg.x_levels) {
            std::vector<double> ecs;
            for (const auto& r : rows) {
                if (r.fit.converged) ecs.push_back(ec_x(r.fit, x));
            }
            if (ecs.size() < 3) {
                throw InsufficientDataError("classical SSD for '" + cont + "' at x=" +
                                            fmt_level(x) + " needs >= 3 converged curves, got " +
                                            std::to_string(ecs.size()));
            }
            ClassicalSsdPerX per;
            per.x = x;
            per.contaminant = cont;
            per.n_curves_used = static_cast<int>(ecs.size());
            per.ssd = fit_lognormal(ecs);
            per.hc = bootstrap_hc(ecs, cfg.hc_percent, cfg.n_boot_hc,
                                  derive_seed(cfg.seed, RngDomain::generic,
                                              0x55d0 + static_cast<std::uint64_t>(x * 16)));

            const std::string base = "classical_ssd_" + cont + "_x" + fmt_level(x);
            json j = {{"mu_log10", per.ssd.mu_log10},
                      {"sigma_log10", per.ssd.sigma_log10},
                      {"n", per.ssd.n_species},
                      {"p", per.hc.p},
                      {"hc5", per.hc.point},
                      {"hc5_lo", per.hc.ci_low},
                      {"hc5_hi", per.hc.ci_high}};
            {
                std::ofstream out(out_path(cfg, base + ".json"));
                if (!out) throw Error("cannot write " + base + ".json");
                out << j.dump(2) << '\n';
            }
            result.files.push_back(base + ".json");

            // cumulative lognormal over 10^(mu +- 4 sigma)
            const double lo = std::pow(10.0, per.ssd.mu_log10 - 4.0 * per.ssd.sigma_log10);
            const double hi = std::pow(10.0, per.ssd.mu_log10 + 4.0 * per.ssd.sigma_log10);
            csv::Writer w(out_path(cfg, base + "_curve.csv"));
            w.field(std::string("concentration_ugL"));
            w.field(std::string("fraction_affected"));
            w.end_row();
            for (double c : log_grid(lo, hi, 201)) {
                w.field(c);
                w.field(fraction_affected(per.ssd, c));
                w.end_row();
            }
            result.files.push_back(base + "_curve.csv");

            std::cout << "classical-ssd: " << cont << " x=" << fmt_level(x) << " hc"
                      << fmt_level(cfg.hc_percent) << "=" << per.hc.point << " ["
                      << per.hc.ci_low << ", " << per.hc.ci_high << "] (n=" << per.n_curves_used
                      << ")\n";
            result.per_x.push_back(std::move(per));
        }
    }
    return result;
}

namespace {

PosteriorSample fit_hier_one(const RunConfig& cfg, const BioassayDataset& ds,
                             const std::string& cont) {
    std::vector<ResponsePoint> pts;
    for (const auto& p : make_responses(ds)) {
        if (p.contaminant_id == cont) pts.push_back(p);
    }
    std::set<std::string> species;
    std::vector<double> concentrations;
    for (const auto& p : pts) {
        species.insert(p.species_id);
        concentrations.push_back(p.concentration);
    }
    std::vector<ControlSummary> controls;
    for (const auto& sid : species) {
        controls.push_back(estimate_control(ds, sid, cfg.pooling, cont));
    }
    const HierData data = HierData::from_responses(pts, controls);
    const PriorSpec priors = PriorSpec::from_concentrations(concentrations);
    McmcConfig mc = cfg.mcmc;
    mc.seed = cfg.seed;
    mc.threads = cfg.threads;
    return run_mcmc(data, priors, mc);
}

} // namespace

FitHierResult cmd_fit_hier(const RunConfig& cfg) {
    const BioassayDataset ds = load_dataset(cfg.input, cfg.columns);
    const auto contaminants = select_contaminants(ds, cfg);

    FitHierResult result;
    for (const auto& cont : contaminants) {
        PosteriorSample sample = fit_hier_one(cfg, ds, cont);
        const std::string csv_name = "posterior_" + cont + ".csv";
        const std::string diag_name = "diagnostics_" + cont + ".json";
        write_posterior_csv(sample, out_path(cfg, csv_name));
        write_diagnostics_json(sample, out_path(cfg, diag_name));
        result.files.push_back(csv_name);
        result.files.push_back(diag_name);

        std::cout << "fit-hier: " << cont << " retained " << sample.total_draws()
                  << " draws; Gelman-Rubin:";
        for (const auto& [name, r] : sample.gelman_rubin_stat) {
            char buf[48];
            std::snprintf(buf, sizeof buf, " %s=%.3f", name.c_str(), r);
            std::cout << buf;
        }
        std::cout << (sample.converged() ? " (converged)" : " (NOT converged)") << '\n';
        for (const auto& w : sample.warnings) std::cerr << "  warning: " << w << '\n';
        result.posteriors.push_back(std::move(sample));
    }
    return result;
}

SimulateResult cmd_simulate(const RunConfig& cfg, const std::string& posterior_csv,
                            const std::string& diagnostics_json) {
    const PosteriorSample posterior = load_posterior(posterior_csv, diagnostics_json);
    StageTimer timer;
    json report;
    report["contaminant"] = posterior.contaminant_id;
    report["config"] = config_json(cfg);
    report["hierarchical"] = hier_summary_json(posterior);

    SimulateResult result = simulate_posterior(cfg, posterior, timer, report);

    const std::string report_name = "report_" + posterior.contaminant_id + ".json";
    const std::string timings_name = "timings_" + posterior.contaminant_id + ".json";
    timer.write(out_path(cfg, timings_name));
    std::vector<std::string> files = result.files;
    files.push_back(report_name);
    files.push_back(timings_name);
    write_report(cfg, report, files, report_name);
    result.files = files;

    std::cout << "simulate: " << posterior.contaminant_id << " -> " << cfg.out_dir << "/"
              << report_name << '\n';
    return result;
}

std::vector<std::string> cmd_synthesize(const RunConfig& cfg, const HyperParams& theta,
                                        const SynthDesign& design) {
    const SynthResult synth = synthesize_dataset(theta, design, cfg.seed);
    const std::string data_name = "synthetic_" + design.contaminant + ".csv";
    const std::string truth_name = "synthetic_" + design.contaminant + "_truth.json";
    save_dataset(synth.dataset, out_path(cfg, data_name), cfg.columns);

    json truth = {{"seed", synth.seed},
                  {"theta",
                   {{"mu_logb", theta.mu_logb},
                    {"sigma_logb", theta.sigma_logb},
                    {"mu_loge", theta.mu_loge},
                    {"sigma_loge", theta.sigma_loge},
                    {"rho", theta.rho},
                    {"sigma_err", theta.sigma_err}}},
                  {"design",
                   {{"concentrations", design.concentrations},
                    {"replicates", design.replicates},
                    {"n_species", design.n_species},
                    {"control_replicates", design.control_replicates},
                    {"control_d", design.control_d},
                    {"contaminant", design.contaminant}}}};
    json species = json::array();
    for (const auto& sp : synth.species) {
        species.push_back({{"species", sp.species_id},
                           {"log_b", sp.log_b},
                           {"log_e", sp.log_e},
                           {"b", std::pow(10.0, sp.log_b)},
                           {"e", std::pow(10.0, sp.log_e)}});
    }
    truth["species"] = std::move(species);
    {
        std::ofstream out(out_path(cfg, truth_name));
        if (!out) throw Error("cannot write " + truth_name);
        out << truth.dump(2) << '\n';
    }
    std::cout << "synthesize: " << synth.dataset.observations.size() << " observations -> "
              << cfg.out_dir << "/" << data_name << '\n';
    return {data_name, truth_name};
}

std::vector<std::string> cmd_report(const RunConfig& cfg) {
    const BioassayDataset ds = load_dataset(cfg.input, cfg.columns);
    for (const auto& w : ds.warnings) std::cerr << "warning: " << w << '\n';
    const auto contaminants = select_contaminants(ds, cfg);

    std::vector<std::string> all_files;
    for (const auto& cont : contaminants) {
        StageTimer timer;
        json report;
        report["contaminant"] = cont;
        report["config"] = config_json(cfg);
        std::vector<std::string> files;

        RunConfig sub = cfg;
        sub.contaminant = cont;

        timer.start("fit_curves");
        const auto rows = fit_selected_curves(sub, ds, {cont}, true);
        timer.stop();
        const std::string curves_name = "curves_" + cont + ".csv";
        write_curves_csv(rows, out_path(cfg, curves_name));
        files.push_back(curves_name);
        report["curves"] = json::array();
        for (const auto& r : rows) report["curves"].push_back(curve_row_json(r));

        timer.start("classical_ssd");
        report["classical_ssd"] = json::array();
        for (double x : cfg.x_levels) {
            std::vector<double> ecs;
            for (const auto& r : rows) {
                if (r.fit.converged) ecs.push_back(ec_x(r.fit, x));
            }
            if (ecs.size() < 3) {
                throw InsufficientDataError("classical SSD for '" + cont + "' at x=" +
                                            fmt_level(x) + " needs >= 3 converged curves, got " +
                                            std::to_string(ecs.size()));
            }
            const LognormalSsd ssd = fit_lognormal(ecs);
            const HcEstimate hc = bootstrap_hc(ecs, cfg.hc_percent, cfg.n_boot_hc,
                                               derive_seed(cfg.seed, RngDomain::generic,
                                                           0x55d0 + static_cast<std::uint64_t>(x * 16)));
            report["classical_ssd"].push_back({{"x", x},
                                               {"mu_log10", ssd.mu_log10},
                                               {"sigma_log10", ssd.sigma_log10},
                                               {"n", ssd.n_species},
                                               {"hc", hc_json(hc)}});
        }
        timer.stop();

        timer.start("fit_hier");
        PosteriorSample posterior = fit_hier_one(cfg, ds, cont);
        timer.stop();
        const std::string post_name = "posterior_" + cont + ".csv";
        const std::string diag_name = "diagnostics_" + cont + ".json";
        write_posterior_csv(posterior, out_path(cfg, post_name));
        write_diagnostics_json(posterior, out_path(cfg, diag_name));
        files.push_back(post_name);
        files.push_back(diag_name);
        report["hierarchical"] = hier_summary_json(posterior);

        SimulateResult sim = simulate_posterior(cfg, posterior, timer, report);
        for (const auto& f : sim.files) files.push_back(f);

        const std::string report_name = "report_" + cont + ".json";
        const std::string timings_name = "timings_" + cont + ".json";
        timer.write(out_path(cfg, timings_name));
        files.push_back(report_name);
        files.push_back(timings_name);
        write_report(cfg, report, files, report_name);

        std::cout << "report: " << cont << " -> " << cfg.out_dir << "/" << report_name << '\n';
        all_files.insert(all_files.end(), files.begin(), files.end());
    }
    return all_files;
}

} // namespace hssd
