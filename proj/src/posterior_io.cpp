#include "hssd/posterior_io.hpp"

#include "hssd/csv.hpp"
#include "hssd/errors.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <map>

namespace hssd {

using nlohmann::json;

void write_posterior_csv(const PosteriorSample& sample, const std::string& path) {
    csv::Writer w(path);
    w.field(std::string("chain"));
    w.field(std::string("iter"));
    for (const auto& c : sample.columns) w.field(c);
    w.end_row();
    for (std::size_t c = 0; c < sample.chains.size(); ++c) {
        const auto& m = sample.chains[c];
        for (std::size_t r = 0; r < m.rows; ++r) {
            w.field(static_cast<long>(c));
            w.field(sample.iterations[r]);
            for (std::size_t k = 0; k < m.cols; ++k) w.field(m.at(r, k));
            w.end_row();
        }
    }
}

void write_diagnostics_json(const PosteriorSample& sample, const std::string& path) {
    json j;
    j["seed"] = sample.config.seed;
    j["config"] = {{"n_iter", sample.config.n_iter},
                   {"thin", sample.config.thin},
                   {"n_chains", sample.config.n_chains},
                   {"burn_in_fraction", sample.config.burn_in_fraction},
                   {"adapt_window", sample.config.adapt_window}};
    j["contaminant"] = sample.contaminant_id;
    j["species_ids"] = sample.species_ids;
    j["concentration_range"] = {{"min", sample.data_c_min}, {"max", sample.data_c_max}};
    j["priors"] = {{"mu_logb_mean", sample.priors.mu_logb_mean},
                   {"mu_logb_sd", sample.priors.mu_logb_sd},
                   {"sigma_logb_scale", sample.priors.sigma_logb_scale},
                   {"mu_loge_mean", sample.priors.mu_loge_mean},
                   {"mu_loge_sd", sample.priors.mu_loge_sd},
                   {"sigma_loge_max", sample.priors.sigma_loge_max},
                   {"sigma_err_max", sample.priors.sigma_err_max}};
    j["gelman_rubin"] = json::object();
    for (const auto& [name, r] : sample.gelman_rubin_stat) {
        if (std::isnan(r)) {
            j["gelman_rubin"][name] = nullptr;
        } else {
            j["gelman_rubin"][name] = r;
        }
    }
    j["acceptance"] = json::array();
    for (std::size_t c = 0; c < sample.block_stats.size(); ++c) {
        json chain = json::object();
        chain["chain"] = c;
        chain["blocks"] = json::array();
        for (const auto& b : sample.block_stats[c]) {
            chain["blocks"].push_back(
                {{"name", b.name}, {"acceptance_rate", b.acceptance_rate}, {"scale", b.scale}});
        }
        j["acceptance"].push_back(std::move(chain));
    }
    j["warnings"] = sample.warnings;

    std::ofstream out(path);
    if (!out) throw Error("cannot open file for writing: " + path);
    out << j.dump(2) << '\n';
}

PosteriorSample load_posterior(const std::string& csv_path, const std::string& diagnostics_path) {
    std::ifstream in(diagnostics_path);
    if (!in) throw Error("cannot open diagnostics file: " + diagnostics_path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ParseError("diagnostics JSON parse failure in " + diagnostics_path + ": " + e.what());
    }

    PosteriorSample sample;
    try {
        sample.config.seed = j.at("seed").get<std::uint64_t>();
        sample.config.n_iter = j.at("config").at("n_iter").get<long>();
        sample.config.thin = j.at("config").at("thin").get<int>();
        sample.config.n_chains = j.at("config").at("n_chains").get<int>();
        sample.config.burn_in_fraction = j.at("config").at("burn_in_fraction").get<double>();
        sample.contaminant_id = j.at("contaminant").get<std::string>();
        sample.species_ids = j.at("species_ids").get<std::vector<std::string>>();
        sample.data_c_min = j.at("concentration_range").at("min").get<double>();
        sample.data_c_max = j.at("concentration_range").at("max").get<double>();
        const auto& p = j.at("priors");
        sample.priors.mu_logb_mean = p.at("mu_logb_mean").get<double>();
        sample.priors.mu_logb_sd = p.at("mu_logb_sd").get<double>();
        sample.priors.sigma_logb_scale = p.at("sigma_logb_scale").get<double>();
        sample.priors.mu_loge_mean = p.at("mu_loge_mean").get<double>();
        sample.priors.mu_loge_sd = p.at("mu_loge_sd").get<double>();
        sample.priors.sigma_loge_max = p.at("sigma_loge_max").get<double>();
        sample.priors.sigma_err_max = p.at("sigma_err_max").get<double>();
        for (const auto& [name, val] : j.at("gelman_rubin").items()) {
            sample.gelman_rubin_stat[name] =
                val.is_null() ? std::numeric_limits<double>::quiet_NaN() : val.get<double>();
        }
        if (j.contains("warnings")) {
            sample.warnings = j.at("warnings").get<std::vector<std::string>>();
        }
    } catch (const json::exception& e) {
        throw SchemaError("diagnostics JSON missing required field in " + diagnostics_path + ": " +
                          e.what());
    }

    const csv::Table table = csv::read_file(csv_path);
    if (table.header.size() < 8 || table.header[0] != "chain" || table.header[1] != "iter") {
        throw SchemaError("posterior CSV must start with 'chain,iter' columns: " + csv_path);
    }
    sample.columns.assign(table.header.begin() + 2, table.header.end());
    const std::size_t expected_cols = 6 + 2 * sample.species_ids.size();
    if (sample.columns.size() != expected_cols) {
        throw SchemaError("posterior/diagnostics mismatch: CSV has " +
                          std::to_string(sample.columns.size()) + " parameter columns, sidecar " +
                          "announces " + std::to_string(expected_cols));
    }
    for (std::size_t s = 0; s < sample.species_ids.size(); ++s) {
        if (sample.columns[6 + 2 * s] != "logb_" + sample.species_ids[s] ||
            sample.columns[7 + 2 * s] != "loge_" + sample.species_ids[s]) {
            throw SchemaError("posterior/diagnostics mismatch: species columns disagree with "
                              "sidecar species_ids");
        }
    }

    std::map<long, std::vector<std::vector<double>>> by_chain;
    std::vector<long> iterations;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = table.line_numbers[r];
        if (row.size() != table.header.size()) {
            throw ParseError("line " + std::to_string(line) + ": wrong field count");
        }
        const long chain = csv::parse_long(row[0], line, "chain");
        std::vector<double> vals(expected_cols);
        for (std::size_t k = 0; k < expected_cols; ++k) {
            vals[k] = csv::parse_double(row[k + 2], line, sample.columns[k]);
        }
        if (chain == 0) iterations.push_back(csv::parse_long(row[1], line, "iter"));
        by_chain[chain].push_back(std::move(vals));
    }
    if (by_chain.empty()) throw SchemaError("posterior CSV has no draws: " + csv_path);
    sample.iterations = std::move(iterations);
    for (auto& [chain, rows] : by_chain) {
        DrawMatrix m;
        m.resize(rows.size(), expected_cols);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            for (std::size_t k = 0; k < expected_cols; ++k) m.at(r, k) = rows[r][k];
        }
        sample.chains.push_back(std::move(m));
    }
    return sample;
}

} // namespace hssd
