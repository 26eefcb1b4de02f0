#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fedsim/csv.hpp"
#include "fedsim/simulator.hpp"

namespace fedsim {

struct AttackCell {
  std::string name;
  std::size_t faulty = 0;
  std::size_t malicious = 0;
  std::vector<std::size_t> explicit_faulty;    // optional explicit placement
  std::vector<std::size_t> explicit_malicious;
};

struct HeterogeneityLevel {
  std::string name;             // "iid" or the alpha value as text
  std::optional<double> alpha;  // empty => IID
};

// A declarative experiment matrix: every (attack x heterogeneity x
// aggregator) cell resolves to one SimulationConfig. Unknown keys are
// rejected at parse time, naming the offending key.
struct ExperimentManifest {
  std::string train_images;
  std::string train_labels;
  std::string test_images;
  std::string test_labels;
  std::string output_dir = "results";
  std::vector<AttackCell> attacks;
  std::vector<HeterogeneityLevel> heterogeneity;
  std::vector<std::string> aggregators;
  SimulationConfig base;
  std::optional<std::size_t> mkrum_f;
  std::optional<std::size_t> mkrum_m;
  bool mkrum_size_weighted = true;
  RoleAssignment role_assignment = RoleAssignment::fixed_pattern;
};

ExperimentManifest parse_manifest(const std::string& path);

// Same parser over in-memory text; `name` labels error messages.
ExperimentManifest parse_manifest_text(const std::string& text,
                                       const std::string& name);

// Canonical JSON with every default materialized; re-parsing it yields an
// identical manifest.
std::string normalized_manifest(const ExperimentManifest& manifest);

bool manifests_equal(const ExperimentManifest& a, const ExperimentManifest& b);

// The resolved per-cell simulation config.
SimulationConfig cell_config(const ExperimentManifest& manifest,
                             const AttackCell& attack,
                             const HeterogeneityLevel& level,
                             const std::string& aggregator);

struct ResultsTable {
  std::vector<SummaryRow> rows;

  bool any_failed() const;
};

// Within each (attack, heterogeneity) group, bolds the best row plus every
// row not significantly different from it (Welch, p >= 0.05).
void apply_bold_flags(std::vector<SummaryRow>& rows,
                      const std::vector<std::vector<double>>& final_errors);

// Runs every cell, writes per-cell traces/histograms/curves and the summary
// CSV under manifest.output_dir. Cell failures are recorded in the table and
// the matrix continues.
ResultsTable run_matrix(const ExperimentManifest& manifest);
ResultsTable run_matrix_with_data(const ExperimentManifest& manifest,
                                  const ExperimentData& data);

}  // namespace fedsim
