#include "hssd/dataset.hpp"
#include "hssd/errors.hpp"

#include <cmath>
#include <cstdio>
#include <doctest.h>
#include <filesystem>
#include <fstream>
#include <string>

using namespace hssd;
namespace fs = std::filesystem;

namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const auto path = fs::temp_directory_path() / name;
    std::ofstream out(path);
    out << content;
    return path.string();
}

const char* kHeader = "species,contaminant,concentration,replicate,fluo_initial,fluo_final\n";

} // namespace

TEST_CASE("load_dataset maps fields directly") {
    const auto path = write_temp("hssd_ds_basic.csv",
                                 std::string(kHeader) + "Nitzschia,diuron,10,1,250.0,900.0\n");
    const auto ds = load_dataset(path);
    REQUIRE(ds.observations.size() == 1);
    const auto& o = ds.observations.front();
    CHECK(o.species_id == "Nitzschia");
    CHECK(o.contaminant_id == "diuron");
    CHECK(o.concentration == 10.0);
    CHECK(o.replicate == 1);
    CHECK(o.fluo_initial == 250.0);
    CHECK(o.fluo_final == 900.0);
    CHECK_FALSE(o.is_control());
}

TEST_CASE("empty file with header only loads with a warning") {
    const auto path = write_temp("hssd_ds_empty.csv", kHeader);
    const auto ds = load_dataset(path);
    CHECK(ds.observations.empty());
    REQUIRE(ds.warnings.size() == 1);
}

TEST_CASE("zero fluorescence is a validation error citing the line") {
    const auto path = write_temp("hssd_ds_zero.csv",
                                 std::string(kHeader) + "a,z,10,1,100,200\na,z,20,1,100,0\n");
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("line 3"), ValidationError);
}

TEST_CASE("missing column is a schema error naming the column") {
    const auto path = write_temp("hssd_ds_nocol.csv",
                                 "species,contaminant,concentration,replicate,fluo_initial\n");
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("fluo_final"), SchemaError);
}

TEST_CASE("non-numeric concentration is a parse error with the line number") {
    const auto path =
        write_temp("hssd_ds_nan.csv", std::string(kHeader) + "a,z,abc,1,100,200\n");
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("line 2"), ValidationError);
}

TEST_CASE("column remapping and alternate delimiter") {
    ColumnMapping m;
    m.species = "taxon";
    m.fluo_initial = "f0";
    m.fluo_final = "f4";
    m.delimiter = ';';
    const auto path = write_temp("hssd_ds_remap.csv",
                                 "taxon;contaminant;concentration;replicate;f0;f4\n"
                                 "a;z;5;1;100;150\n");
    const auto ds = load_dataset(path, m);
    REQUIRE(ds.observations.size() == 1);
    CHECK(ds.observations[0].fluo_final == 150.0);
}

TEST_CASE("control label column marks controls") {
    ColumnMapping m;
    m.control_label_column = "role";
    m.control_label_value = "control";
    const auto path = write_temp("hssd_ds_label.csv",
                                 "species,contaminant,concentration,replicate,fluo_initial,"
                                 "fluo_final,role\n"
                                 "a,z,999,1,100,200,control\n"
                                 "a,z,10,1,100,150,test\n");
    const auto ds = load_dataset(path, m);
    REQUIRE(ds.observations.size() == 2);
    CHECK(ds.observations[0].is_control());
    CHECK_FALSE(ds.observations[1].is_control());
}

TEST_CASE("round-trip save/load is element-wise identical") {
    const auto path = write_temp("hssd_ds_round.csv",
                                 std::string(kHeader) + "a,z,0,1,100,250\n"
                                                        "a,z,10.5,1,103.25,92.125\n"
                                                        "b,z,0.0625,2,97,130.5\n");
    const auto ds = load_dataset(path);
    const auto out = (fs::temp_directory_path() / "hssd_ds_round_out.csv").string();
    save_dataset(ds, out);
    const auto ds2 = load_dataset(out);
    REQUIRE(ds2.observations.size() == ds.observations.size());
    for (std::size_t i = 0; i < ds.observations.size(); ++i) {
        const auto& a = ds.observations[i];
        const auto& b = ds2.observations[i];
        CHECK(a.species_id == b.species_id);
        CHECK(a.contaminant_id == b.contaminant_id);
        CHECK(a.concentration == b.concentration);
        CHECK(a.replicate == b.replicate);
        CHECK(a.fluo_initial == b.fluo_initial);
        CHECK(a.fluo_final == b.fluo_final);
    }
}

TEST_CASE("make_responses computes y = ln(final/initial) and drops controls") {
    BioassayDataset ds;
    ds.observations = {
        {"a", "z", 5.0, 1, 100.0, 100.0},
        {"a", "z", 5.0, 2, 100.0, std::exp(1.0) * 100.0},
        {"a", "z", 0.0, 1, 100.0, 300.0}, // control: excluded
    };
    const auto pts = make_responses(ds);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].y == doctest::Approx(0.0));
    CHECK(pts[1].y == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("response count equals observations minus controls") {
    BioassayDataset ds;
    for (int i = 0; i < 10; ++i) {
        ds.observations.push_back({"s", "z", i < 3 ? 0.0 : double(i), 1, 100.0, 150.0});
    }
    CHECK(make_responses(ds).size() == ds.observations.size() - ds.control_count());
}

TEST_CASE("estimate_control pools across contaminants and averages R") {
    BioassayDataset ds;
    ds.observations = {
        {"a", "z1", 0.0, 1, 100.0, 200.0}, // R = 2
        {"a", "z2", 0.0, 1, 100.0, 400.0}, // R = 4
        {"b", "z1", 0.0, 1, 100.0, 550.0},
        {"a", "z1", 10.0, 1, 100.0, 120.0},
    };
    const auto ctrl = estimate_control(ds, "a");
    CHECK(ctrl.d == doctest::Approx(3.0));
    CHECK(ctrl.n_controls == 2);

    const auto single = estimate_control(ds, "b");
    CHECK(single.d == doctest::Approx(5.5));
    CHECK(single.n_controls == 1);

    const auto per_pair =
        estimate_control(ds, "a", ControlPooling::per_species_contaminant, "z2");
    CHECK(per_pair.d == doctest::Approx(4.0));
}

TEST_CASE("estimate_control without controls throws") {
    BioassayDataset ds;
    ds.observations = {{"a", "z", 10.0, 1, 100.0, 120.0}};
    CHECK_THROWS_AS(estimate_control(ds, "a"), NoControlError);
}

TEST_CASE("estimate_control is order invariant") {
    BioassayDataset ds;
    ds.observations = {
        {"a", "z", 0.0, 1, 100.0, 130.0},
        {"a", "z", 0.0, 2, 50.0, 140.0},
        {"a", "z", 0.0, 3, 200.0, 500.0},
    };
    const double d1 = estimate_control(ds, "a").d;
    std::reverse(ds.observations.begin(), ds.observations.end());
    const double d2 = estimate_control(ds, "a").d;
    CHECK(d1 == doctest::Approx(d2).epsilon(1e-15));
}
