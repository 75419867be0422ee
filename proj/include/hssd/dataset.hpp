#ifndef HSSD_DATASET_HPP
#define HSSD_DATASET_HPP

#include <string>
#include <vector>

namespace hssd {

// One raw bioassay measurement. concentration == 0 marks a control.
struct Observation {
    std::string species_id;
    std::string contaminant_id;
    double concentration = 0.0; // ug/L
    int replicate = 0;
    double fluo_initial = 0.0;
    double fluo_final = 0.0;

    bool is_control() const { return concentration == 0.0; }
    // Response ratio R = final / initial fluorescence.
    double response() const { return fluo_final / fluo_initial; }
};

// Log response y = ln(R) at a positive test concentration.
struct ResponsePoint {
    std::string species_id;
    std::string contaminant_id;
    double concentration = 0.0;
    double y = 0.0;
};

// Control level d for one species: mean response ratio over its controls.
struct ControlSummary {
    std::string species_id;
    double d = 0.0;
    int n_controls = 0;
};

// How controls are pooled when estimating d. The default pools one d per
// species over every contaminant; the alternative keeps contaminants apart
// for designs where control batches differ.
enum class ControlPooling { per_species, per_species_contaminant };

// Column names of the input file, remappable for foreign layouts. When
// control_label_column is non-empty, rows whose cell there equals
// control_label_value are treated as controls (concentration forced to 0)
// instead of relying on concentration == 0.
struct ColumnMapping {
    std::string species = "species";
    std::string contaminant = "contaminant";
    std::string concentration = "concentration";
    std::string replicate = "replicate";
    std::string fluo_initial = "fluo_initial";
    std::string fluo_final = "fluo_final";
    char delimiter = ',';
    std::string control_label_column;
    std::string control_label_value;
};

struct BioassayDataset {
    std::vector<Observation> observations;
    std::vector<std::string> warnings;

    std::vector<std::string> species_ids() const;     // sorted, unique
    std::vector<std::string> contaminant_ids() const; // sorted, unique
    std::size_t control_count() const;
};

// Reads a delimiter-separated file (header row required, UTF-8, '.' decimal
// point). Every malformed row is collected and reported with its line
// number in a single error.
BioassayDataset load_dataset(const std::string& path, const ColumnMapping& mapping = {});

void save_dataset(const BioassayDataset& ds, const std::string& path,
                  const ColumnMapping& mapping = {});

// One ResponsePoint per non-control observation, y = ln(final/initial),
// replicates kept as separate points, output sorted by
// (species, contaminant, concentration).
std::vector<ResponsePoint> make_responses(const BioassayDataset& ds);

// Mean control response ratio for one species. With per_species pooling the
// contaminant argument is ignored.
ControlSummary estimate_control(const BioassayDataset& ds, const std::string& species_id,
                                ControlPooling pooling = ControlPooling::per_species,
                                const std::string& contaminant_id = {});

} // namespace hssd

#endif // HSSD_DATASET_HPP
