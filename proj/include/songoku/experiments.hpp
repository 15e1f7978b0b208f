#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "songoku/config.hpp"
#include "songoku/planted.hpp"
#include "songoku/run_record.hpp"

namespace songoku {

class UnknownExperiment : public std::invalid_argument {
 public:
  explicit UnknownExperiment(const std::string& name);
};

const std::vector<std::string>& experiment_names();

/// Runs the named driver, writes its CSV files and summary.json under
/// cfg.out, and returns the summary text.
std::string run_experiment(const AppConfig& cfg);

PlantedSpec planted_spec(const AppConfig& cfg);

/// Fraction of consecutive annealed windows whose class partition changed.
double partition_instability(const RunRecord& rec, double tau_star);

/// Fraction of annealed windows whose graph equals `population`.
double window_recovery_rate(const RunRecord& rec, const ConflictGraph& population,
                            double tau_star);

/// Steps at or after `from` whose active set holds an edge of the population
/// graph live at that step.
std::size_t stale_edge_violations(const RunRecord& rec, const PlantedOracle& oracle, double tau,
                                  std::size_t from);

struct SingleStepAblation {
  double instability_full = 0.0;
  double instability_single = 0.0;
  double recovery_full = 0.0;
  double recovery_single = 0.0;
  std::size_t runs = 0;
  std::vector<RunRecord> records;
};

/// Paired runs on the planted suite: EMA with cfg.beta against beta = 0.
SingleStepAblation ablation_singlestep(const AppConfig& cfg, std::size_t runs);

struct StaticAblation {
  std::size_t violations_static = 0;
  std::size_t violations_dynamic = 0;
  std::size_t switch_step = 0;
  std::size_t counted_from = 0;
  std::vector<RunRecord> records;
};

/// The suite regroups half-way through; one run keeps its first annealed
/// coloring, the other recolors at every refresh. Violations are counted from
/// two refresh periods after the switch.
StaticAblation ablation_static(const AppConfig& cfg);

}  // namespace songoku
