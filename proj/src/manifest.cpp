#include "fedsim/manifest.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>

#include "fedsim/errors.hpp"
#include "fedsim/idx.hpp"
#include "fedsim/stats.hpp"
#include "fedsim/svg.hpp"
#include "json.hpp"

namespace fedsim {

namespace {

using nlohmann::ordered_json;

std::size_t line_of_offset(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line;
  }
  return line;
}

void require_keys(const ordered_json& obj, const std::string& path,
                  const std::set<std::string>& known) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) {
      throw FormatError("manifest: unknown key \"" + key + "\" in " + path);
    }
  }
}

template <typename T>
T get_or(const ordered_json& obj, const std::string& key, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("manifest: bad value for \"" + key + "\": " + e.what());
  }
}

std::vector<AttackCell> default_attacks() {
  return {
      {"none", 0, 0, {}, {}},
      {"faulty10", 10, 0, {}, {}},
      {"malicious10", 0, 10, {}, {}},
      {"faulty5_malicious5", 5, 5, {}, {}},
  };
}

std::vector<HeterogeneityLevel> default_heterogeneity() {
  return {
      {"iid", std::nullopt},
      {"0.5", 0.5},
      {"0.1", 0.1},
  };
}

std::string alpha_name(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", alpha);
  return buf;
}

AttackCell parse_attack(const ordered_json& obj, const std::string& path) {
  if (!obj.is_object()) {
    throw FormatError("manifest: " + path + " must be an object");
  }
  require_keys(obj, path,
               {"name", "faulty", "malicious", "explicit_faulty",
                "explicit_malicious"});
  AttackCell cell;
  cell.faulty = get_or<std::size_t>(obj, "faulty", 0);
  cell.malicious = get_or<std::size_t>(obj, "malicious", 0);
  cell.explicit_faulty =
      get_or<std::vector<std::size_t>>(obj, "explicit_faulty", {});
  cell.explicit_malicious =
      get_or<std::vector<std::size_t>>(obj, "explicit_malicious", {});
  std::string fallback;
  if (cell.faulty == 0 && cell.malicious == 0) {
    fallback = "none";
  } else {
    if (cell.faulty > 0) fallback += "faulty" + std::to_string(cell.faulty);
    if (cell.malicious > 0) {
      if (!fallback.empty()) fallback += "_";
      fallback += "malicious" + std::to_string(cell.malicious);
    }
  }
  cell.name = get_or<std::string>(obj, "name", fallback);
  return cell;
}

HeterogeneityLevel parse_heterogeneity(const ordered_json& value,
                                       const std::string& path) {
  HeterogeneityLevel level;
  if (value.is_string()) {
    const std::string s = value.get<std::string>();
    if (s != "iid") {
      throw FormatError("manifest: " + path +
                        " must be \"iid\" or a positive number, got \"" + s +
                        "\"");
    }
    level.name = "iid";
    return level;
  }
  if (value.is_number()) {
    const double alpha = value.get<double>();
    if (!(alpha > 0.0)) {
      throw FormatError("manifest: " + path + " alpha must be positive");
    }
    level.alpha = alpha;
    level.name = alpha_name(alpha);
    return level;
  }
  throw FormatError("manifest: " + path + " must be \"iid\" or a number");
}

}  // namespace

ExperimentManifest parse_manifest_text(const std::string& text,
                                       const std::string& name) {
  ordered_json root;
  try {
    root = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(name + ":" + std::to_string(line_of_offset(text, e.byte)) +
                      ": " + e.what());
  }
  if (!root.is_object()) {
    throw FormatError(name + ": manifest must be a JSON object");
  }
  require_keys(root, "manifest",
               {"dataset", "output_dir", "attacks", "heterogeneity",
                "aggregators", "config"});

  ExperimentManifest manifest;
  if (!root.contains("dataset")) {
    throw FormatError("manifest: missing required \"dataset\" object");
  }
  const ordered_json& dataset = root.at("dataset");
  require_keys(dataset, "dataset",
               {"train_images", "train_labels", "test_images", "test_labels"});
  for (const char* key :
       {"train_images", "train_labels", "test_images", "test_labels"}) {
    if (!dataset.contains(key)) {
      throw FormatError("manifest: dataset is missing \"" + std::string(key) +
                        "\"");
    }
  }
  manifest.train_images = dataset.at("train_images").get<std::string>();
  manifest.train_labels = dataset.at("train_labels").get<std::string>();
  manifest.test_images = dataset.at("test_images").get<std::string>();
  manifest.test_labels = dataset.at("test_labels").get<std::string>();
  manifest.output_dir = get_or<std::string>(root, "output_dir", "results");

  if (root.contains("attacks")) {
    const ordered_json& attacks = root.at("attacks");
    if (!attacks.is_array() || attacks.empty()) {
      throw FormatError("manifest: attacks must be a nonempty array");
    }
    for (std::size_t i = 0; i < attacks.size(); ++i) {
      manifest.attacks.push_back(
          parse_attack(attacks[i], "attacks[" + std::to_string(i) + "]"));
    }
  } else {
    manifest.attacks = default_attacks();
  }

  if (root.contains("heterogeneity")) {
    const ordered_json& levels = root.at("heterogeneity");
    if (!levels.is_array() || levels.empty()) {
      throw FormatError("manifest: heterogeneity must be a nonempty array");
    }
    for (std::size_t i = 0; i < levels.size(); ++i) {
      manifest.heterogeneity.push_back(parse_heterogeneity(
          levels[i], "heterogeneity[" + std::to_string(i) + "]"));
    }
  } else {
    manifest.heterogeneity = default_heterogeneity();
  }

  if (root.contains("aggregators")) {
    const ordered_json& aggs = root.at("aggregators");
    if (!aggs.is_array() || aggs.empty()) {
      throw FormatError("manifest: aggregators must be a nonempty array");
    }
    for (const auto& a : aggs) {
      const std::string agg_name = a.get<std::string>();
      parse_aggregator(agg_name);  // rejects unknown names
      manifest.aggregators.push_back(agg_name);
    }
  } else {
    manifest.aggregators = aggregator_names();
  }

  SimulationConfig& base = manifest.base;
  if (root.contains("config")) {
    const ordered_json& cfg = root.at("config");
    require_keys(
        cfg, "config",
        {"num_clients", "rounds", "client_fraction", "local_epochs",
         "local_learning_rate", "local_batch_size", "distill_epochs",
         "distill_learning_rate", "distill_batch_size", "distill_temperature",
         "distill_set_size", "seeds", "hidden_dims", "noise_variance",
         "variance_is_sigma", "flip_target_label", "faulty_noise_only",
         "iid_size_jitter", "median_convention", "mkrum_f", "mkrum_m",
         "mkrum_size_weighted", "role_assignment", "max_threads"});
    base.num_clients = get_or<std::size_t>(cfg, "num_clients", 30);
    base.rounds = get_or<std::size_t>(cfg, "rounds", 30);
    base.client_fraction = get_or<double>(cfg, "client_fraction", 1.0);
    base.local.epochs = get_or<std::size_t>(cfg, "local_epochs", 5);
    base.local.learning_rate = get_or<double>(cfg, "local_learning_rate", 0.05);
    base.local.batch_size = get_or<std::size_t>(cfg, "local_batch_size", 64);
    base.distill.epochs = get_or<std::size_t>(cfg, "distill_epochs", 2);
    base.distill.learning_rate =
        get_or<double>(cfg, "distill_learning_rate", 0.01);
    base.distill.batch_size =
        get_or<std::size_t>(cfg, "distill_batch_size", 128);
    base.distill.temperature =
        get_or<double>(cfg, "distill_temperature", 1.0);
    base.distill_set_size = get_or<std::size_t>(cfg, "distill_set_size", 10000);
    base.seeds = get_or<std::vector<std::uint64_t>>(cfg, "seeds",
                                                    {1, 2, 3, 4, 5});
    if (base.seeds.empty()) {
      throw FormatError("manifest: config.seeds must be nonempty");
    }
    base.hidden_dims =
        get_or<std::vector<std::size_t>>(cfg, "hidden_dims", {256, 128});
    base.attack.noise_variance = get_or<double>(cfg, "noise_variance", 20.0);
    base.attack.variance_is_sigma =
        get_or<bool>(cfg, "variance_is_sigma", false);
    base.attack.flip_target_label = get_or<int>(cfg, "flip_target_label", 0);
    base.attack.noise_only = get_or<bool>(cfg, "faulty_noise_only", false);
    base.partition.iid_size_jitter =
        get_or<double>(cfg, "iid_size_jitter", 0.1);
    const std::string convention =
        get_or<std::string>(cfg, "median_convention", "lower");
    if (convention == "lower") {
      base.median_convention = MedianConvention::lower;
    } else if (convention == "upper") {
      base.median_convention = MedianConvention::upper;
    } else {
      throw FormatError(
          "manifest: median_convention must be \"lower\" or \"upper\"");
    }
    if (cfg.contains("mkrum_f")) {
      manifest.mkrum_f = cfg.at("mkrum_f").get<std::size_t>();
    }
    if (cfg.contains("mkrum_m")) {
      manifest.mkrum_m = cfg.at("mkrum_m").get<std::size_t>();
    }
    manifest.mkrum_size_weighted =
        get_or<bool>(cfg, "mkrum_size_weighted", true);
    const std::string assignment =
        get_or<std::string>(cfg, "role_assignment", "fixed_pattern");
    if (assignment == "fixed_pattern") {
      manifest.role_assignment = RoleAssignment::fixed_pattern;
    } else if (assignment == "seeded_random") {
      manifest.role_assignment = RoleAssignment::seeded_random;
    } else {
      throw FormatError(
          "manifest: role_assignment must be \"fixed_pattern\" or "
          "\"seeded_random\"");
    }
    base.max_threads = get_or<std::size_t>(cfg, "max_threads", 0);
  }

  // Fail now if any grid cell cannot resolve to a valid config.
  for (const AttackCell& attack : manifest.attacks) {
    for (const HeterogeneityLevel& level : manifest.heterogeneity) {
      for (const std::string& agg : manifest.aggregators) {
        cell_config(manifest, attack, level, agg).validate();
      }
    }
  }
  return manifest;
}

ExperimentManifest parse_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw FormatError("manifest: cannot open " + path);
  }
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_manifest_text(text, path);
}

std::string normalized_manifest(const ExperimentManifest& manifest) {
  ordered_json root;
  root["dataset"] = {{"train_images", manifest.train_images},
                     {"train_labels", manifest.train_labels},
                     {"test_images", manifest.test_images},
                     {"test_labels", manifest.test_labels}};
  root["output_dir"] = manifest.output_dir;
  root["attacks"] = ordered_json::array();
  for (const AttackCell& cell : manifest.attacks) {
    ordered_json a;
    a["name"] = cell.name;
    a["faulty"] = cell.faulty;
    a["malicious"] = cell.malicious;
    if (!cell.explicit_faulty.empty()) {
      a["explicit_faulty"] = cell.explicit_faulty;
    }
    if (!cell.explicit_malicious.empty()) {
      a["explicit_malicious"] = cell.explicit_malicious;
    }
    root["attacks"].push_back(a);
  }
  root["heterogeneity"] = ordered_json::array();
  for (const HeterogeneityLevel& level : manifest.heterogeneity) {
    if (level.alpha.has_value()) {
      root["heterogeneity"].push_back(*level.alpha);
    } else {
      root["heterogeneity"].push_back("iid");
    }
  }
  root["aggregators"] = manifest.aggregators;

  ordered_json cfg;
  cfg["num_clients"] = manifest.base.num_clients;
  cfg["rounds"] = manifest.base.rounds;
  cfg["client_fraction"] = manifest.base.client_fraction;
  cfg["local_epochs"] = manifest.base.local.epochs;
  cfg["local_learning_rate"] = manifest.base.local.learning_rate;
  cfg["local_batch_size"] = manifest.base.local.batch_size;
  cfg["distill_epochs"] = manifest.base.distill.epochs;
  cfg["distill_learning_rate"] = manifest.base.distill.learning_rate;
  cfg["distill_batch_size"] = manifest.base.distill.batch_size;
  cfg["distill_temperature"] = manifest.base.distill.temperature;
  cfg["distill_set_size"] = manifest.base.distill_set_size;
  cfg["seeds"] = manifest.base.seeds;
  cfg["hidden_dims"] = manifest.base.hidden_dims;
  cfg["noise_variance"] = manifest.base.attack.noise_variance;
  cfg["variance_is_sigma"] = manifest.base.attack.variance_is_sigma;
  cfg["flip_target_label"] = manifest.base.attack.flip_target_label;
  cfg["faulty_noise_only"] = manifest.base.attack.noise_only;
  cfg["iid_size_jitter"] = manifest.base.partition.iid_size_jitter;
  cfg["median_convention"] =
      manifest.base.median_convention == MedianConvention::lower ? "lower"
                                                                 : "upper";
  if (manifest.mkrum_f.has_value()) cfg["mkrum_f"] = *manifest.mkrum_f;
  if (manifest.mkrum_m.has_value()) cfg["mkrum_m"] = *manifest.mkrum_m;
  cfg["mkrum_size_weighted"] = manifest.mkrum_size_weighted;
  cfg["role_assignment"] =
      manifest.role_assignment == RoleAssignment::fixed_pattern
          ? "fixed_pattern"
          : "seeded_random";
  cfg["max_threads"] = manifest.base.max_threads;
  root["config"] = cfg;
  return root.dump(2) + "\n";
}

bool manifests_equal(const ExperimentManifest& a, const ExperimentManifest& b) {
  return normalized_manifest(a) == normalized_manifest(b);
}

SimulationConfig cell_config(const ExperimentManifest& manifest,
                             const AttackCell& attack,
                             const HeterogeneityLevel& level,
                             const std::string& aggregator) {
  SimulationConfig config = manifest.base;
  config.attack.faulty_count = attack.faulty;
  config.attack.malicious_count = attack.malicious;
  config.attack.assignment = manifest.role_assignment;
  if (!attack.explicit_faulty.empty() || !attack.explicit_malicious.empty()) {
    config.attack.assignment = RoleAssignment::explicit_list;
    config.attack.explicit_faulty = attack.explicit_faulty;
    config.attack.explicit_malicious = attack.explicit_malicious;
  }
  config.partition.alpha = level.alpha;
  config.partition.num_clients = config.num_clients;
  config.aggregator.id = parse_aggregator(aggregator);
  config.aggregator.mkrum.f = manifest.mkrum_f;
  config.aggregator.mkrum.m = manifest.mkrum_m;
  config.aggregator.mkrum.size_weighted = manifest.mkrum_size_weighted;
  return config;
}

bool ResultsTable::any_failed() const {
  return std::any_of(rows.begin(), rows.end(),
                     [](const SummaryRow& row) { return row.failed; });
}

void apply_bold_flags(std::vector<SummaryRow>& rows,
                      const std::vector<std::vector<double>>& final_errors) {
  if (rows.size() != final_errors.size()) {
    throw ValidationError("apply_bold_flags: rows and errors disagree");
  }
  // Group rows by (attack, heterogeneity).
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string key = rows[i].attack + "\x1f" + rows[i].heterogeneity;
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.push_back({key, {i}});
    } else {
      it->second.push_back(i);
    }
  }
  constexpr std::size_t npos = static_cast<std::size_t>(-1);
  for (const auto& [key, members] : groups) {
    std::size_t best = npos;
    for (std::size_t i : members) {
      if (rows[i].failed) continue;
      if (best == npos || rows[i].mean_error < rows[best].mean_error) {
        best = i;
      }
    }
    if (best == npos) continue;  // whole group failed
    for (std::size_t i : members) {
      if (rows[i].failed) {
        rows[i].bold = false;
        continue;
      }
      if (i == best) {
        rows[i].bold = true;
        continue;
      }
      bool bold = false;
      try {
        const WelchResult w =
            welch_t_test(final_errors[i], final_errors[best]);
        bold = w.p >= 0.05;
      } catch (const ValidationError&) {
        // Degenerate variance or single-seed runs: bold only exact matches.
        bold = rows[i].mean_error == rows[best].mean_error;
      }
      rows[i].bold = bold;
    }
  }
}

namespace {

std::string cell_dir_name(const HeterogeneityLevel& level) {
  if (!level.alpha.has_value()) return "iid";
  return "alpha" + level.name;
}

void write_cell_artifacts(const std::filesystem::path& dir,
                          const ExperimentResult& result,
                          const SimulationConfig& config,
                          const std::string& aggregator) {
  std::filesystem::create_directories(dir);
  std::vector<double> mean_curve;
  for (const ExperimentTrace& trace : result.traces) {
    write_text_file((dir / ("trace_seed" + std::to_string(trace.seed) + ".csv"))
                        .string(),
                    round_trace_csv(trace));
    if (mean_curve.empty()) mean_curve.resize(trace.rounds.size(), 0.0);
    for (std::size_t r = 0; r < trace.rounds.size(); ++r) {
      mean_curve[r] += trace.rounds[r].test_error /
                       static_cast<double>(result.traces.size());
    }
    bool any_hist = false;
    for (const RoundRecord& record : trace.rounds) {
      if (record.histogram.has_value()) {
        any_hist = true;
        break;
      }
    }
    if (any_hist) {
      // Roles are re-derived exactly as the run derived them for this seed.
      const std::vector<ClientRole> roles = assign_roles(
          config.num_clients, config.attack, mix_seed(trace.seed, "roles"));
      std::filesystem::create_directories(dir / "histograms");
      for (const RoundRecord& record : trace.rounds) {
        if (!record.histogram.has_value()) continue;
        std::vector<ClientRole> selected_roles;
        selected_roles.reserve(record.selected_clients.size());
        for (std::size_t k : record.selected_clients) {
          selected_roles.push_back(roles[k]);
        }
        write_text_file(
            (dir / "histograms" /
             ("seed" + std::to_string(trace.seed) + "_round" +
              std::to_string(record.round_index) + ".csv"))
                .string(),
            export_histogram(*record.histogram, selected_roles,
                             record.selected_clients));
      }
    }
  }
  if (!mean_curve.empty()) {
    emit_curve_svg({{aggregator, mean_curve}}, (dir / "curve.svg").string());
  }
}

}  // namespace

ResultsTable run_matrix_with_data(const ExperimentManifest& manifest,
                                  const ExperimentData& data) {
  const std::filesystem::path out_dir(manifest.output_dir);
  std::filesystem::create_directories(out_dir);
  write_text_file((out_dir / "manifest.normalized.json").string(),
                  normalized_manifest(manifest));

  ResultsTable table;
  std::vector<std::vector<double>> final_errors;

  for (const AttackCell& attack : manifest.attacks) {
    for (const HeterogeneityLevel& level : manifest.heterogeneity) {
      std::vector<CurveSeries> group_curves;
      for (const std::string& aggregator : manifest.aggregators) {
        SummaryRow row;
        row.attack = attack.name;
        row.heterogeneity = level.name;
        row.aggregator = aggregator;
        std::vector<double> finals;
        try {
          const SimulationConfig config =
              cell_config(manifest, attack, level, aggregator);
          const ExperimentResult result = run_seeds(config, data);
          row.mean_error = result.final_error_mean;
          row.std_error = result.final_error_std;
          for (const ExperimentTrace& trace : result.traces) {
            if (trace.collapsed) row.collapsed = true;
          }
          if (row.collapsed) row.message = "collapsed to constant prediction";
          if (result.single_seed) {
            row.message += row.message.empty() ? "" : "; ";
            row.message += "single seed, std is degenerate";
          }
          finals = result.final_errors();

          const std::filesystem::path cell_dir =
              out_dir / attack.name / cell_dir_name(level) / aggregator;
          write_cell_artifacts(cell_dir, result, config, aggregator);

          CurveSeries series;
          series.label = aggregator;
          for (const ExperimentTrace& trace : result.traces) {
            if (series.values.empty()) {
              series.values.resize(trace.rounds.size(), 0.0);
            }
            for (std::size_t r = 0; r < trace.rounds.size(); ++r) {
              series.values[r] += trace.rounds[r].test_error /
                                  static_cast<double>(result.traces.size());
            }
          }
          if (!series.values.empty()) group_curves.push_back(series);
        } catch (const std::exception& e) {
          row.failed = true;
          row.message = e.what();
          std::fprintf(stderr, "cell %s/%s/%s failed: %s\n",
                       attack.name.c_str(), level.name.c_str(),
                       aggregator.c_str(), e.what());
        }
        table.rows.push_back(row);
        final_errors.push_back(std::move(finals));
      }
      if (!group_curves.empty()) {
        emit_curve_svg(group_curves,
                       (out_dir / attack.name / cell_dir_name(level) /
                        "curves.svg")
                           .string());
      }
    }
  }

  apply_bold_flags(table.rows, final_errors);
  write_text_file((out_dir / "summary.csv").string(), summary_csv(table.rows));
  return table;
}

ResultsTable run_matrix(const ExperimentManifest& manifest) {
  ExperimentData data;
  data.train = load_idx(manifest.train_images, manifest.train_labels);
  data.test = load_idx(manifest.test_images, manifest.test_labels);
  return run_matrix_with_data(manifest, data);
}

}  // namespace fedsim
