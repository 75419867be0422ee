#include "hssd/dataset.hpp"

#include "hssd/csv.hpp"
#include "hssd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace hssd {

std::vector<std::string> BioassayDataset::species_ids() const {
    std::set<std::string> s;
    for (const auto& o : observations) s.insert(o.species_id);
    return {s.begin(), s.end()};
}

std::vector<std::string> BioassayDataset::contaminant_ids() const {
    std::set<std::string> s;
    for (const auto& o : observations) s.insert(o.contaminant_id);
    return {s.begin(), s.end()};
}

std::size_t BioassayDataset::control_count() const {
    std::size_t n = 0;
    for (const auto& o : observations) {
        if (o.is_control()) ++n;
    }
    return n;
}

BioassayDataset load_dataset(const std::string& path, const ColumnMapping& mapping) {
    const csv::Table table = csv::read_file(path, mapping.delimiter);

    const std::vector<std::pair<std::string, const std::string*>> required = {
        {"species", &mapping.species},          {"contaminant", &mapping.contaminant},
        {"concentration", &mapping.concentration}, {"replicate", &mapping.replicate},
        {"fluo_initial", &mapping.fluo_initial},   {"fluo_final", &mapping.fluo_final},
    };
    for (const auto& [role, name] : required) {
        if (table.column(*name) < 0) {
            throw SchemaError("missing required column '" + *name + "' (" + role + ") in " + path);
        }
    }
    const int c_species = table.column(mapping.species);
    const int c_cont = table.column(mapping.contaminant);
    const int c_conc = table.column(mapping.concentration);
    const int c_rep = table.column(mapping.replicate);
    const int c_fi = table.column(mapping.fluo_initial);
    const int c_ff = table.column(mapping.fluo_final);
    int c_label = -1;
    if (!mapping.control_label_column.empty()) {
        c_label = table.column(mapping.control_label_column);
        if (c_label < 0) {
            throw SchemaError("control label column '" + mapping.control_label_column +
                              "' not found in " + path);
        }
    }

    BioassayDataset ds;
    std::vector<std::string> problems;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const std::size_t line = table.line_numbers[r];
        if (row.size() != table.header.size()) {
            problems.push_back("line " + std::to_string(line) + ": expected " +
                               std::to_string(table.header.size()) + " fields, got " +
                               std::to_string(row.size()));
            continue;
        }
        try {
            Observation o;
            o.species_id = row[static_cast<std::size_t>(c_species)];
            o.contaminant_id = row[static_cast<std::size_t>(c_cont)];
            o.concentration =
                csv::parse_double(row[static_cast<std::size_t>(c_conc)], line, mapping.concentration);
            o.replicate = static_cast<int>(
                csv::parse_long(row[static_cast<std::size_t>(c_rep)], line, mapping.replicate));
            o.fluo_initial =
                csv::parse_double(row[static_cast<std::size_t>(c_fi)], line, mapping.fluo_initial);
            o.fluo_final =
                csv::parse_double(row[static_cast<std::size_t>(c_ff)], line, mapping.fluo_final);
            if (c_label >= 0 &&
                row[static_cast<std::size_t>(c_label)] == mapping.control_label_value) {
                o.concentration = 0.0;
            }
            if (!std::isfinite(o.concentration) || o.concentration < 0.0) {
                throw ValidationError("line " + std::to_string(line) +
                                      ": concentration must be finite and >= 0");
            }
            if (!(o.fluo_initial > 0.0) || !std::isfinite(o.fluo_initial)) {
                throw ValidationError("line " + std::to_string(line) + ": " + mapping.fluo_initial +
                                      " must be > 0");
            }
            if (!(o.fluo_final > 0.0) || !std::isfinite(o.fluo_final)) {
                throw ValidationError("line " + std::to_string(line) + ": " + mapping.fluo_final +
                                      " must be > 0");
            }
            ds.observations.push_back(std::move(o));
        } catch (const Error& e) {
            problems.push_back(e.what());
        }
    }
    if (!problems.empty()) {
        std::ostringstream msg;
        msg << path << ": " << problems.size() << " malformed row(s):";
        for (const auto& p : problems) msg << "\n  " << p;
        throw ValidationError(msg.str());
    }
    if (ds.observations.empty()) {
        ds.warnings.push_back(path + ": file contains a header but no observations");
    }
    return ds;
}

void save_dataset(const BioassayDataset& ds, const std::string& path,
                  const ColumnMapping& mapping) {
    csv::Writer w(path, mapping.delimiter);
    w.field(mapping.species);
    w.field(mapping.contaminant);
    w.field(mapping.concentration);
    w.field(mapping.replicate);
    w.field(mapping.fluo_initial);
    w.field(mapping.fluo_final);
    w.end_row();
    for (const auto& o : ds.observations) {
        w.field(o.species_id);
        w.field(o.contaminant_id);
        w.field(o.concentration);
        w.field(o.replicate);
        w.field(o.fluo_initial);
        w.field(o.fluo_final);
        w.end_row();
    }
}

std::vector<ResponsePoint> make_responses(const BioassayDataset& ds) {
    std::vector<ResponsePoint> points;
    points.reserve(ds.observations.size());
    for (const auto& o : ds.observations) {
        if (o.is_control()) continue; // controls feed estimate_control only
        ResponsePoint p;
        p.species_id = o.species_id;
        p.contaminant_id = o.contaminant_id;
        p.concentration = o.concentration;
        p.y = std::log(o.fluo_final / o.fluo_initial);
        points.push_back(std::move(p));
    }
    std::stable_sort(points.begin(), points.end(), [](const ResponsePoint& a, const ResponsePoint& b) {
        if (a.species_id != b.species_id) return a.species_id < b.species_id;
        if (a.contaminant_id != b.contaminant_id) return a.contaminant_id < b.contaminant_id;
        return a.concentration < b.concentration;
    });
    return points;
}

ControlSummary estimate_control(const BioassayDataset& ds, const std::string& species_id,
                                ControlPooling pooling, const std::string& contaminant_id) {
    double sum = 0.0;
    int n = 0;
    for (const auto& o : ds.observations) {
        if (!o.is_control() || o.species_id != species_id) continue;
        if (pooling == ControlPooling::per_species_contaminant &&
            o.contaminant_id != contaminant_id) {
            continue;
        }
        sum += o.response();
        ++n;
    }
    if (n == 0) {
        throw NoControlError("no control observations for species '" + species_id + "'" +
                             (pooling == ControlPooling::per_species_contaminant
                                  ? " and contaminant '" + contaminant_id + "'"
                                  : ""));
    }
    return ControlSummary{species_id, sum / n, n};
}

} // namespace hssd
