#include <algorithm>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "fedsim/csv.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/idx.hpp"
#include "fedsim/manifest.hpp"
#include "fedsim/svg.hpp"

using namespace fedsim;

namespace {

const char* kMinimalManifest = R"json({
  "dataset": {
    "train_images": "data/train-images-idx3-ubyte.gz",
    "train_labels": "data/train-labels-idx1-ubyte.gz",
    "test_images": "data/t10k-images-idx3-ubyte.gz",
    "test_labels": "data/t10k-labels-idx1-ubyte.gz"
  }
})json";

// Naive XML well-formedness check: every opened tag is closed in order.
bool well_formed_xml(const std::string& text) {
  std::vector<std::string> stack;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != '<') {
      ++i;
      continue;
    }
    const std::size_t end = text.find('>', i);
    if (end == std::string::npos) return false;
    std::string tag = text.substr(i + 1, end - i - 1);
    i = end + 1;
    if (tag.empty()) return false;
    if (tag[0] == '?' || tag[0] == '!') continue;
    if (tag.back() == '/') continue;  // self-closing
    if (tag[0] == '/') {
      const std::string name = tag.substr(1);
      if (stack.empty() || stack.back() != name) return false;
      stack.pop_back();
      continue;
    }
    const std::size_t space = tag.find_first_of(" \t\n");
    stack.push_back(space == std::string::npos ? tag : tag.substr(0, space));
  }
  return stack.empty();
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("minimal manifest expands to the full default grid") {
  const ExperimentManifest manifest =
      parse_manifest_text(kMinimalManifest, "minimal");
  CHECK(manifest.attacks.size() == 4);
  CHECK(manifest.attacks[0].name == "none");
  CHECK(manifest.attacks[1].name == "faulty10");
  CHECK(manifest.attacks[1].faulty == 10);
  CHECK(manifest.attacks[3].faulty == 5);
  CHECK(manifest.attacks[3].malicious == 5);
  CHECK(manifest.heterogeneity.size() == 3);
  CHECK(manifest.heterogeneity[0].name == "iid");
  CHECK(manifest.heterogeneity[1].alpha == 0.5);
  CHECK(manifest.aggregators.size() == 7);
  CHECK(manifest.base.rounds == 30);
  CHECK(manifest.base.local.learning_rate == 0.05);
  CHECK(manifest.base.distill_set_size == 10000);
  CHECK(manifest.base.seeds == std::vector<std::uint64_t>{1, 2, 3, 4, 5});
  // Table-1-shaped grid over the in-scope aggregators.
  CHECK(manifest.attacks.size() * manifest.heterogeneity.size() *
            manifest.aggregators.size() ==
        4 * 3 * 7);
}

TEST_CASE("manifest rejects unknown keys by name") {
  const char* misspelled = R"json({
    "dataset": {
      "train_images": "a", "train_labels": "b",
      "test_images": "c", "test_labels": "d"
    },
    "config": {"lerning_rate": 0.05}
  })json";
  CHECK_THROWS_WITH_AS(parse_manifest_text(misspelled, "typo"),
                       doctest::Contains("lerning_rate"), FormatError);

  const char* stray_top = R"json({
    "dataset": {
      "train_images": "a", "train_labels": "b",
      "test_images": "c", "test_labels": "d"
    },
    "outputs": "nope"
  })json";
  CHECK_THROWS_WITH_AS(parse_manifest_text(stray_top, "stray"),
                       doctest::Contains("outputs"), FormatError);
}

TEST_CASE("manifest syntax errors carry a line number") {
  const char* broken = "{\n  \"dataset\": {\n  this is not json\n}\n}";
  try {
    parse_manifest_text(broken, "broken.json");
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("broken.json:3") != std::string::npos);
  }
}

TEST_CASE("manifest validation catches impossible grids early") {
  const char* too_many_attackers = R"json({
    "dataset": {
      "train_images": "a", "train_labels": "b",
      "test_images": "c", "test_labels": "d"
    },
    "attacks": [{"faulty": 10}],
    "config": {"num_clients": 5}
  })json";
  CHECK_THROWS_AS(parse_manifest_text(too_many_attackers, "bad"),
                  ConfigError);

  const char* unknown_aggregator = R"json({
    "dataset": {
      "train_images": "a", "train_labels": "b",
      "test_images": "c", "test_labels": "d"
    },
    "aggregators": ["fedavg", "fedbe"]
  })json";
  CHECK_THROWS_WITH_AS(parse_manifest_text(unknown_aggregator, "bad"),
                       doctest::Contains("fedbe"), ConfigError);
}

TEST_CASE("normalized manifest round-trips to an identical config") {
  const char* custom = R"json({
    "dataset": {
      "train_images": "a", "train_labels": "b",
      "test_images": "c", "test_labels": "d"
    },
    "output_dir": "out",
    "attacks": [{"name": "solo", "faulty": 1}],
    "heterogeneity": ["iid", 0.25],
    "aggregators": ["fedavg", "fedrad"],
    "config": {
      "num_clients": 6, "rounds": 2, "seeds": [4, 5],
      "hidden_dims": [10], "distill_set_size": 50,
      "median_convention": "upper", "mkrum_f": 1
    }
  })json";
  const ExperimentManifest manifest = parse_manifest_text(custom, "custom");
  const std::string normalized = normalized_manifest(manifest);
  const ExperimentManifest reparsed =
      parse_manifest_text(normalized, "normalized");
  CHECK(manifests_equal(manifest, reparsed));
  CHECK(normalized_manifest(reparsed) == normalized);

  const SimulationConfig cell = cell_config(
      manifest, manifest.attacks[0], manifest.heterogeneity[1], "fedrad");
  CHECK(cell.num_clients == 6);
  CHECK(cell.partition.alpha == 0.25);
  CHECK(cell.attack.faulty_count == 1);
  CHECK(cell.median_convention == MedianConvention::upper);
  CHECK(cell.aggregator.id == AggregatorId::fedrad);
}

TEST_CASE("round trace CSV carries the pinned header and baseline row") {
  ExperimentTrace trace;
  trace.baseline_error = 0.9;
  RoundRecord r1;
  r1.round_index = 1;
  r1.test_error = 0.25;
  trace.rounds.push_back(r1);
  const std::string csv = round_trace_csv(trace);
  CHECK(csv ==
        "round,error_rate\n"
        "0,0.900000\n"
        "1,0.250000\n");
}

TEST_CASE("summary CSV header and bold flags") {
  std::vector<SummaryRow> rows(3);
  rows[0] = {"none", "iid", "fedavg", 0.052, 0.001, false, false, false, ""};
  rows[1] = {"none", "iid", "fedrad", 0.054, 0.002, false, false, false, ""};
  rows[2] = {"none", "iid", "comed", 0.093, 0.001, false, false, false, ""};
  std::vector<std::vector<double>> finals = {
      {0.051, 0.052, 0.053},
      {0.052, 0.054, 0.056},
      {0.092, 0.093, 0.094},
  };
  apply_bold_flags(rows, finals);
  CHECK(rows[0].bold);        // best is always bolded
  CHECK(rows[1].bold);        // statistically indistinguishable from best
  CHECK_FALSE(rows[2].bold);  // clearly worse

  const std::string csv = summary_csv(rows);
  CHECK(csv.rfind("attack,heterogeneity,aggregator,mean_error,std_error,bold\n",
                  0) == 0);
  CHECK(csv.find("none,iid,fedavg,0.052000,0.001000,1") != std::string::npos);
  CHECK(csv.find("none,iid,comed,0.093000,0.001000,0") != std::string::npos);
}

TEST_CASE("SVG output is well-formed, deterministic, and puts a flat 0.9 "
          "trace on the 0.9 gridline") {
  CurveSeries flat;
  flat.label = "comed";
  flat.values.assign(30, 0.9);
  const std::string svg = render_curve_svg({flat});
  CHECK(well_formed_xml(svg));
  CHECK(svg == render_curve_svg({flat}));

  // The 0.9 gridline sits at y = 460 - 420*0.9 = 82.00; every polyline
  // point of the flat trace must use exactly that y.
  CHECK(svg.find("polyline") != std::string::npos);
  const std::size_t poly = svg.find("<polyline");
  const std::size_t end = svg.find("/>", poly);
  const std::string points = svg.substr(poly, end - poly);
  std::size_t count = 0;
  for (std::size_t pos = points.find(",82.00"); pos != std::string::npos;
       pos = points.find(",82.00", pos + 1)) {
    ++count;
  }
  CHECK(count == 30);

  CurveSeries single;
  single.label = "dot";
  single.values = {0.5};
  CHECK(well_formed_xml(render_curve_svg({single})));
  CHECK_THROWS_AS(render_curve_svg({}), ValidationError);
}

TEST_CASE("run_matrix on a micro grid: rows, artifacts, determinism") {
  const std::filesystem::path out_a =
      std::filesystem::temp_directory_path() / "fedrad_matrix_a";
  const std::filesystem::path out_b =
      std::filesystem::temp_directory_path() / "fedrad_matrix_b";
  std::filesystem::remove_all(out_a);
  std::filesystem::remove_all(out_b);

  const std::string manifest_text = R"json({
    "dataset": {
      "train_images": "unused", "train_labels": "unused",
      "test_images": "unused", "test_labels": "unused"
    },
    "output_dir": ")json" + out_a.string() + R"json(",
    "attacks": [{"name": "none"}, {"name": "noisy", "faulty": 2}],
    "heterogeneity": ["iid", 0.5],
    "aggregators": ["fedavg", "comed", "fedrad"],
    "config": {
      "num_clients": 6, "rounds": 2, "seeds": [1, 2],
      "local_epochs": 1, "local_batch_size": 16,
      "hidden_dims": [10], "distill_set_size": 40,
      "distill_epochs": 1, "distill_batch_size": 32
    }
  })json";
  ExperimentManifest manifest = parse_manifest_text(manifest_text, "micro");

  ExperimentData data;
  data.train = synthetic_gaussian_blobs(4, 150, 8, 300);
  data.test = synthetic_gaussian_blobs(4, 30, 8, 301);

  const ResultsTable table = run_matrix_with_data(manifest, data);
  CHECK(table.rows.size() == 2 * 2 * 3);  // no silent cell omission
  CHECK_FALSE(table.any_failed());

  CHECK(std::filesystem::exists(out_a / "summary.csv"));
  CHECK(std::filesystem::exists(out_a / "manifest.normalized.json"));
  CHECK(std::filesystem::exists(out_a / "none" / "iid" / "fedavg" /
                                "trace_seed1.csv"));
  CHECK(std::filesystem::exists(out_a / "none" / "iid" / "fedavg" /
                                "curve.svg"));
  CHECK(std::filesystem::exists(out_a / "none" / "iid" / "curves.svg"));
  // Scoring aggregators also emit per-round histograms.
  CHECK(std::filesystem::exists(out_a / "noisy" / "alpha0.5" / "fedrad" /
                                "histograms" / "seed1_round2.csv"));
  CHECK_FALSE(std::filesystem::exists(out_a / "none" / "iid" / "fedavg" /
                                      "histograms"));

  const std::string hist = read_file(out_a / "noisy" / "alpha0.5" / "fedrad" /
                                     "histograms" / "seed1_round2.csv");
  CHECK(hist.rfind("client_id,role,median_count\n", 0) == 0);
  CHECK(hist.find("faulty") != std::string::npos);

  // Every curve SVG parses as XML.
  CHECK(well_formed_xml(read_file(out_a / "none" / "iid" / "curves.svg")));

  // Per-group bolding marks at least the best cell.
  std::size_t bold_count = 0;
  for (const SummaryRow& row : table.rows) {
    if (row.bold) ++bold_count;
  }
  CHECK(bold_count >= 4);  // one per (attack, heterogeneity) group

  // Re-running into a second directory reproduces the summary byte for byte.
  manifest.output_dir = out_b.string();
  const ResultsTable second = run_matrix_with_data(manifest, data);
  CHECK(read_file(out_a / "summary.csv") == read_file(out_b / "summary.csv"));
  CHECK(second.rows.size() == table.rows.size());

  std::filesystem::remove_all(out_a);
  std::filesystem::remove_all(out_b);
}

TEST_CASE("partial participation still exports aligned histograms") {
  const std::filesystem::path out =
      std::filesystem::temp_directory_path() / "fedrad_matrix_partial";
  std::filesystem::remove_all(out);

  const std::string manifest_text = R"json({
    "dataset": {
      "train_images": "unused", "train_labels": "unused",
      "test_images": "unused", "test_labels": "unused"
    },
    "output_dir": ")json" + out.string() + R"json(",
    "attacks": [{"name": "none"}],
    "heterogeneity": ["iid"],
    "aggregators": ["fedrad"],
    "config": {
      "num_clients": 6, "rounds": 1, "seeds": [1],
      "client_fraction": 0.5,
      "local_epochs": 1, "hidden_dims": [8], "distill_set_size": 30
    }
  })json";
  const ExperimentManifest manifest = parse_manifest_text(manifest_text, "p");

  ExperimentData data;
  data.train = synthetic_gaussian_blobs(3, 80, 6, 600);
  data.test = synthetic_gaussian_blobs(3, 20, 6, 601);

  const ResultsTable table = run_matrix_with_data(manifest, data);
  REQUIRE_FALSE(table.any_failed());
  const std::filesystem::path hist_path =
      out / "none" / "iid" / "fedrad" / "histograms" / "seed1_round1.csv";
  REQUIRE(std::filesystem::exists(hist_path));
  const std::string hist = read_file(hist_path);
  // ceil(0.5 * 6) = 3 selected clients -> header + 3 rows.
  CHECK(std::count(hist.begin(), hist.end(), '\n') == 4);
  std::filesystem::remove_all(out);
}

TEST_CASE("run_matrix loads IDX files end to end") {
  const std::filesystem::path dir =
      std::filesystem::temp_directory_path() / "fedrad_idx_e2e";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);

  save_idx(synthetic_gaussian_blobs(4, 60, 8, 500),
           (dir / "train-images.idx").string(),
           (dir / "train-labels.idx").string());
  save_idx(synthetic_gaussian_blobs(4, 15, 8, 501),
           (dir / "test-images.idx").string(),
           (dir / "test-labels.idx").string());

  const std::string manifest_text = R"json({
    "dataset": {
      "train_images": ")json" + (dir / "train-images.idx").string() + R"json(",
      "train_labels": ")json" + (dir / "train-labels.idx").string() + R"json(",
      "test_images": ")json" + (dir / "test-images.idx").string() + R"json(",
      "test_labels": ")json" + (dir / "test-labels.idx").string() + R"json("
    },
    "output_dir": ")json" + (dir / "out").string() + R"json(",
    "attacks": [{"name": "none"}],
    "heterogeneity": ["iid"],
    "aggregators": ["fedavg"],
    "config": {
      "num_clients": 4, "rounds": 1, "seeds": [1],
      "local_epochs": 1, "hidden_dims": [8], "distill_set_size": 20
    }
  })json";
  const ExperimentManifest manifest = parse_manifest_text(manifest_text, "e2e");
  const ResultsTable table = run_matrix(manifest);
  REQUIRE(table.rows.size() == 1);
  CHECK_FALSE(table.rows[0].failed);
  CHECK(std::filesystem::exists(dir / "out" / "summary.csv"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("run_matrix records failing cells and keeps going") {
  const std::filesystem::path out =
      std::filesystem::temp_directory_path() / "fedrad_matrix_fail";
  std::filesystem::remove_all(out);

  // mkrum with f=3 needs at least 6 clients; give it 5 so it fails at
  // aggregation time while fedavg succeeds.
  const std::string manifest_text = R"json({
    "dataset": {
      "train_images": "unused", "train_labels": "unused",
      "test_images": "unused", "test_labels": "unused"
    },
    "output_dir": ")json" + out.string() + R"json(",
    "attacks": [{"name": "none"}],
    "heterogeneity": ["iid"],
    "aggregators": ["fedavg", "mkrum"],
    "config": {
      "num_clients": 5, "rounds": 1, "seeds": [1],
      "local_epochs": 1, "hidden_dims": [8], "distill_set_size": 20,
      "mkrum_f": 3
    }
  })json";
  const ExperimentManifest manifest = parse_manifest_text(manifest_text, "m");

  ExperimentData data;
  data.train = synthetic_gaussian_blobs(3, 60, 6, 400);
  data.test = synthetic_gaussian_blobs(3, 20, 6, 401);

  const ResultsTable table = run_matrix_with_data(manifest, data);
  REQUIRE(table.rows.size() == 2);
  CHECK_FALSE(table.rows[0].failed);
  CHECK(table.rows[1].failed);
  CHECK(table.any_failed());
  const std::string summary = read_file(out / "summary.csv");
  CHECK(summary.find("mkrum,failed,failed,0") != std::string::npos);

  std::filesystem::remove_all(out);
}
