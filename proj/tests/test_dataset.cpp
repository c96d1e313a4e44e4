#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "agrignn/dataset.hpp"
#include "agrignn/errors.hpp"
#include "agrignn/preprocess.hpp"
#include "agrignn/synthetic.hpp"
#include "agrignn/vegindex.hpp"
#include "doctest.h"

using namespace agrignn;

namespace {

std::string temp_file(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

std::string write_file(const std::string& name, const std::string& content) {
  const std::string path = temp_file(name);
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

const char* kSmallCsv =
    "plot_id,latitude,longitude,population,field_no,timepoint,yield,moisture_pct,Ca,400,650,1000\n"
    "p1,42.0,-93.6,A,1,T3,70.5,12.0,20.1,0.05,0.08,0.55\n"
    "p2,42.001,-93.6,A,1,T3,68.0,14.5,19.7,0.06,0.09,0.52\n"
    "p3,42.002,-93.6,B,1,T3,72.25,10.0,,0.04,0.07,0.58\n";

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("load_plots_csv parses records, bands and soil columns") {
  const std::string path = write_file("agrignn_small.csv", kSmallCsv);
  const Dataset ds = load_plots_csv(path);
  REQUIRE(ds.size() == 3);
  CHECK(ds.records[0].plot_id == "p1");
  CHECK(ds.records[0].population == "A");
  CHECK(ds.records[0].spectrum.size() == 3);
  CHECK(ds.records[0].spectrum.reflectance_at(650) == doctest::Approx(0.08));
  CHECK(*ds.records[2].yield_raw == doctest::Approx(72.25));
  const int ca = ds.numeric_column("Ca");
  REQUIRE(ca >= 0);
  CHECK(std::isnan(ds.numeric[ca][2]));  // empty cell = missing
  CHECK(ds.categorical_column("population") >= 0);
}

TEST_CASE("load_plots_csv schema and cell errors") {
  const std::string no_pop = write_file(
      "agrignn_nopop.csv", "plot_id,latitude,longitude,yield\np1,42.0,-93.6,70\n");
  CHECK_THROWS_WITH_AS(load_plots_csv(no_pop), doctest::Contains("population"), input_error);

  const std::string bad_cell = write_file(
      "agrignn_badcell.csv",
      "plot_id,latitude,longitude,population,yield\np1,42.0,-93.6,A,not_a_number\n");
  CHECK_THROWS_WITH_AS(load_plots_csv(bad_cell), doctest::Contains("row 1"), input_error);

  const std::string bad_lat = write_file(
      "agrignn_badlat.csv", "plot_id,latitude,longitude,population,yield\np1,95.0,-93.6,A,70\n");
  CHECK_THROWS_AS(load_plots_csv(bad_lat), input_error);
}

TEST_CASE("band below 400 is kept at load and removed by filter_bands") {
  const std::string path = write_file(
      "agrignn_350.csv",
      "plot_id,latitude,longitude,population,yield,350,450\np1,42.0,-93.6,A,70,0.1,0.2\n");
  Dataset ds = load_plots_csv(path);
  REQUIRE(ds.records[0].spectrum.size() == 2);  // retained at load

  PreprocessReport report;
  ds = filter_bands(std::move(ds), &report);
  REQUIRE(ds.records[0].spectrum.size() == 1);
  CHECK(ds.records[0].spectrum.samples()[0].wavelength_nm == 450.0);
  CHECK(report.bands_removed == 1);
}

TEST_CASE("filter_bands identity and emptied-spectrum accounting") {
  Dataset ds;
  PlotRecord keep;
  keep.plot_id = "a";
  keep.spectrum = BandSpectrum({{450, 0.2}, {900, 0.5}});
  PlotRecord emptied;
  emptied.plot_id = "b";
  emptied.spectrum = BandSpectrum({{350, 0.1}, {380, 0.2}});
  ds.records = {keep, emptied};

  PreprocessReport report;
  const Dataset out = filter_bands(ds, &report);
  CHECK(out.records[0].spectrum.size() == 2);  // all in range: unchanged
  CHECK(out.records[1].spectrum.empty());
  CHECK(report.spectra_emptied == 1);
  CHECK(report.bands_removed == 2);
}

TEST_CASE("drop_invalid removes negative reflectance and negative yield rows") {
  Dataset ds;
  PlotRecord neg_refl;
  neg_refl.plot_id = "r";
  neg_refl.spectrum = BandSpectrum({{500, -0.01}, {600, 0.2}});
  neg_refl.yield_raw = 50.0;
  PlotRecord neg_yield;
  neg_yield.plot_id = "y";
  neg_yield.spectrum = BandSpectrum({{500, 0.1}});
  neg_yield.yield_raw = -3.0;
  PlotRecord ok;
  ok.plot_id = "ok";
  ok.spectrum = BandSpectrum({{500, 0.1}});
  ok.yield_raw = 60.0;
  ds.records = {neg_refl, neg_yield, ok};

  PreprocessReport report;
  const Dataset out = drop_invalid(ds, &report);
  REQUIRE(out.size() == 1);
  CHECK(out.records[0].plot_id == "ok");
  CHECK(report.rows_dropped_negative_reflectance == 1);
  CHECK(report.rows_dropped_negative_yield == 1);

  PreprocessReport r2;
  const Dataset unchanged = drop_invalid(out, &r2);
  CHECK(unchanged.size() == 1);
  CHECK(r2.rows_dropped_negative_reflectance + r2.rows_dropped_negative_yield == 0);
}

TEST_CASE("normalize_yield dry-matter correction") {
  CHECK(normalize_yield(100.0, 13.0) == doctest::Approx(100.0).epsilon(1e-15));
  // hand value: 100 * (100-10) / (100-13) = 9000 / 87
  CHECK(normalize_yield(100.0, 10.0) == doctest::Approx(103.44827586206897).epsilon(1e-14));
  CHECK(normalize_yield(0.0, 20.0) == 0.0);
  CHECK_THROWS_AS(normalize_yield(100.0, 100.0), input_error);
  CHECK_THROWS_AS(normalize_yield(100.0, -1.0), input_error);
}

TEST_CASE("impute_missing fills column means and reports counts") {
  Dataset ds;
  ds.records.resize(3);
  ds.add_numeric_column("a", {1.0, std::nan(""), 3.0});
  ds.add_numeric_column("b", {5.0, 6.0, 7.0});
  PreprocessReport report;
  Dataset out = impute_missing(ds, &report);
  CHECK(out.numeric[0][1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(report.cells_imputed == 1);

  // Column mean after imputation equals the observed mean exactly.
  double mean = (out.numeric[0][0] + out.numeric[0][1] + out.numeric[0][2]) / 3.0;
  CHECK(std::fabs(mean - 2.0) < 1e-12);

  // Idempotent: a second pass changes nothing.
  PreprocessReport r2;
  const Dataset again = impute_missing(out, &r2);
  CHECK(r2.cells_imputed == 0);
  CHECK(again.numeric == out.numeric);

  Dataset all_missing;
  all_missing.records.resize(2);
  all_missing.add_numeric_column("bad", {std::nan(""), std::nan("")});
  CHECK_THROWS_WITH_AS(impute_missing(all_missing, nullptr), doctest::Contains("bad"), input_error);
}

TEST_CASE("one_hot encodes lexicographic levels with unit row sums") {
  Dataset ds;
  ds.records.resize(3);
  ds.add_categorical_column("population", {"B", "A", "B"});
  Dataset out = one_hot(ds, "population");
  const int a = out.numeric_column("population=A");
  const int b = out.numeric_column("population=B");
  REQUIRE(a >= 0);
  REQUIRE(b >= 0);
  CHECK(a < b);  // lexicographic level order
  CHECK(out.numeric[a] == std::vector<double>{0, 1, 0});
  CHECK(out.numeric[b] == std::vector<double>{1, 0, 1});
  CHECK(out.categorical_names.empty());

  Dataset single;
  single.records.resize(2);
  single.add_categorical_column("timepoint", {"T3", "T3"});
  const Dataset sout = one_hot(single, "timepoint");
  CHECK(sout.numeric[0] == std::vector<double>{1, 1});

  Dataset missing;
  missing.records.resize(2);
  missing.add_categorical_column("population", {"", "X"});
  const Dataset mout = one_hot(missing, "population");
  CHECK(mout.numeric_column("population=UNKNOWN") >= 0);

  CHECK_THROWS_AS(one_hot(sout, "nope"), input_error);
}

TEST_CASE("one_hot row sums equal one for many levels") {
  Rng rng(3);
  Dataset ds;
  ds.records.resize(40);
  std::vector<std::string> labels;
  for (int i = 0; i < 40; ++i) labels.push_back("L" + std::to_string(rng.uniform_int(4)));
  ds.add_categorical_column("population", labels);
  const Dataset out = one_hot(ds, "population");
  REQUIRE(out.numeric.size() == 4);
  for (int i = 0; i < 40; ++i) {
    double sum = 0;
    for (const auto& col : out.numeric) sum += col[i];
    CHECK(sum == 1.0);
  }
}

TEST_CASE("smooth_soil_grid moving mean with in-bounds borders") {
  Grid constant{2, 3, {7, 7, 7, 7, 7, 7}};
  const Grid smoothed = smooth_soil_grid(constant);
  for (double v : smoothed.values) CHECK(v == doctest::Approx(7.0).epsilon(1e-15));

  Grid grid{3, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9}};
  const Grid out = smooth_soil_grid(grid);
  CHECK(out.at(1, 1) == doctest::Approx(5.0).epsilon(1e-15));  // 45 / 9
  CHECK(out.at(0, 0) == doctest::Approx((1 + 2 + 4 + 5) / 4.0).epsilon(1e-15));

  Grid single{1, 1, {4}};
  CHECK(smooth_soil_grid(single).at(0, 0) == 4.0);

  Grid bad{2, 2, {1, 2, 3}};
  CHECK_THROWS_AS(smooth_soil_grid(bad), input_error);
}

TEST_CASE("generator determinism and record counts") {
  GeneratorConfig cfg;
  cfg.plots_per_field = {40, 30};
  cfg.populations_per_field = 5;
  const Dataset a = generate_synthetic_trial(cfg, 1);
  const Dataset b = generate_synthetic_trial(cfg, 1);
  REQUIRE(a.size() == 70);
  for (int i = 0; i < a.size(); ++i) {
    CHECK(a.records[i].plot_id == b.records[i].plot_id);
    CHECK(a.records[i].latitude == b.records[i].latitude);
    CHECK(*a.records[i].yield_raw == *b.records[i].yield_raw);
    CHECK(a.records[i].spectrum.samples()[10].reflectance ==
          b.records[i].spectrum.samples()[10].reflectance);
  }
  CHECK(a.numeric == b.numeric);

  const Dataset c = generate_synthetic_trial(cfg, 2);
  CHECK(*c.records[0].yield_raw != *a.records[0].yield_raw);

  GeneratorConfig deflt;
  CHECK(generate_synthetic_trial(deflt, 9).size() == 3161);  // 770+912+800+679

  GeneratorConfig bad;
  bad.plots_per_field = {0};
  CHECK_THROWS_AS(generate_synthetic_trial(bad, 1), config_error);
}

TEST_CASE("noise-free generator couples NDVI with yield") {
  GeneratorConfig cfg;
  cfg.plots_per_field = {150, 150};
  cfg.populations_per_field = 6;
  cfg.noise_level = 0.0;
  Dataset ds = fill_targets(generate_synthetic_trial(cfg, 4));
  std::vector<double> ndvi, yield_norm;
  for (int i = 0; i < ds.size(); ++i) {
    ndvi.push_back(compute_index("NDVI1", ds.records[i].spectrum));
    yield_norm.push_back(ds.target[i]);
  }
  CHECK(pearson(ndvi, yield_norm) > 0.9);
}

TEST_CASE("plots CSV round-trips through save and load") {
  GeneratorConfig cfg;
  cfg.plots_per_field = {12};
  cfg.populations_per_field = 3;
  cfg.band_step_nm = 50;
  const Dataset ds = generate_synthetic_trial(cfg, 11);
  const std::string path = temp_file("agrignn_roundtrip.csv");
  save_plots_csv(path, ds);
  const Dataset back = load_plots_csv(path);
  REQUIRE(back.size() == ds.size());
  for (int i = 0; i < ds.size(); ++i) {
    CHECK(back.records[i].plot_id == ds.records[i].plot_id);
    CHECK(back.records[i].latitude == ds.records[i].latitude);    // shortest round-trip format
    CHECK(back.records[i].population == ds.records[i].population);
    CHECK(*back.records[i].yield_raw == *ds.records[i].yield_raw);
    REQUIRE(back.records[i].spectrum.size() == ds.records[i].spectrum.size());
    CHECK(back.records[i].spectrum.samples()[3].reflectance ==
          ds.records[i].spectrum.samples()[3].reflectance);
  }
}

TEST_CASE("split_train_test sizes, determinism and coverage") {
  GeneratorConfig cfg;
  cfg.plots_per_field = {10};
  cfg.populations_per_field = 2;
  Dataset ds = fill_targets(generate_synthetic_trial(cfg, 5));

  const SplitAssignment s = split_train_test(ds, 0.8, 3);
  CHECK(s.train_indices.size() == 8);
  CHECK(s.test_indices.size() == 2);

  const SplitAssignment s2 = split_train_test(ds, 0.8, 3);
  CHECK(s.train_indices == s2.train_indices);
  CHECK(s.test_indices == s2.test_indices);

  std::vector<bool> seen(ds.size(), false);
  for (int i : s.train_indices) seen[i] = true;
  for (int i : s.test_indices) {
    CHECK(!seen[i]);  // disjoint
    seen[i] = true;
  }
  for (bool s_i : seen) CHECK(s_i);  // full coverage

  // round(0.8 * 3161) = 2529
  GeneratorConfig big;
  big.plots_per_field = {3161};
  big.populations_per_field = 10;
  big.band_step_nm = 300;
  Dataset bds = fill_targets(generate_synthetic_trial(big, 6));
  CHECK(split_train_test(bds, 0.8, 1).train_indices.size() == 2529);

  Dataset tiny;
  tiny.records.resize(1);
  tiny.target = {1.0};
  CHECK_THROWS_AS(split_train_test(tiny, 0.8, 1), input_error);
}

TEST_CASE("preprocessing chain is idempotent") {
  GeneratorConfig cfg;
  cfg.plots_per_field = {25};
  cfg.populations_per_field = 4;
  cfg.band_step_nm = 20;
  Dataset ds = generate_synthetic_trial(cfg, 13);
  // Poke in an out-of-range band and a negative-yield row.
  auto samples = ds.records[0].spectrum.samples();
  samples.push_back({390.0, 0.4});
  ds.records[0].spectrum = BandSpectrum(samples);
  ds.records[3].yield_raw = -1.0;

  PreprocessReport r1;
  Dataset once = drop_invalid(filter_bands(ds, &r1), &r1);
  PreprocessReport r2;
  Dataset twice = drop_invalid(filter_bands(once, &r2), &r2);
  CHECK(once.size() == twice.size());
  CHECK(r2.bands_removed == 0);
  CHECK(r2.rows_dropped_negative_yield == 0);
  CHECK(once.numeric == twice.numeric);
}
