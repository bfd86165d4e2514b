// Scenario comparison and report rendering.
//
// A report is a set of text tables plus a flat list of metrics. text() gives
// the human-readable form headed by the energy model's calibration; machine()
// gives one JSON object per metric line (name, value, unit, provenance).
#pragma once

#include "dte/energy.hpp"

#include <string>
#include <vector>

namespace dte::metrics {

struct Scenario {
   std::string name;
   std::string config;    // everything held fixed, e.g. "curve=secp256r1 scalars=16 seed=bench"
   std::string variable;  // what is being contrasted, e.g. "ecsm method"
   std::string value;     // this scenario's setting of the variable
   OpCounters counters;   // totals over all runs
   uint64_t runs = 1;
};

struct Metric {
   std::string name;
   double value = 0;
   std::string unit;
   std::string provenance;
};

struct Table {
   std::string title;
   std::vector<std::string> columns;
   std::vector<std::vector<std::string>> rows;

   std::string render() const;
};

struct Comparison {
   double point_op_ratio = 0;   // (point_add + point_double), baseline over candidate; 0 if either has none
   double field_mul_ratio = 0;  // multiplier iterations
   double energy_ratio = 0;
   double baseline_joules = 0;  // per run
   double candidate_joules = 0;
   Table table;
   std::vector<Metric> metrics;
};

/// Per-run energy of a scenario.
EnergyEstimate scenario_energy(const Scenario& s, const EnergyModel& model);

/// Ratios baseline/candidate. Throws UsageError unless both share config and
/// variable and have at least one run.
Comparison compare_report(const Scenario& baseline, const Scenario& candidate, const EnergyModel& model,
                          const std::string& metric_prefix);

std::string format_joules(double j);

class Report {
 public:
   Report(std::string title, const EnergyModel& model);

   void add(Table t) { m_tables.push_back(std::move(t)); }
   void add(Metric m) { m_metrics.push_back(std::move(m)); }
   void add(const Comparison& c);
   /// Weight table: every kind with its joules, category and provenance.
   void add_weight_table();

   const std::vector<Metric>& metrics() const { return m_metrics; }
   std::string text() const;
   std::string machine() const;

 private:
   std::string m_title;
   const EnergyModel& m_model;
   std::vector<Table> m_tables;
   std::vector<Metric> m_metrics;
};

}  // namespace dte::metrics
