#include "dte/report.hpp"

#include "dte/errors.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

namespace dte::metrics {

namespace {

std::string num(double v, const char* fmt = "%.4g") {
   char buf[64];
   std::snprintf(buf, sizeof(buf), fmt, v);
   return buf;
}

double ratio(double a, double b) { return (a > 0 && b > 0) ? a / b : 0; }

uint64_t point_ops(const OpCounters& c) { return c[Op::PointAdd] + c[Op::PointDouble]; }

}  // namespace

std::string format_joules(double j) {
   if(j == 0) {
      return "0 J";
   }
   if(j >= 1e-3) {
      return num(j * 1e3, "%.3f") + " mJ";
   }
   if(j >= 1e-6) {
      return num(j * 1e6, "%.3f") + " uJ";
   }
   if(j >= 1e-9) {
      return num(j * 1e9, "%.3f") + " nJ";
   }
   return num(j * 1e12, "%.3f") + " pJ";
}

std::string Table::render() const {
   std::vector<size_t> width(columns.size());
   for(size_t i = 0; i < columns.size(); ++i) {
      width[i] = columns[i].size();
   }
   for(const auto& r : rows) {
      for(size_t i = 0; i < r.size() && i < width.size(); ++i) {
         width[i] = std::max(width[i], r[i].size());
      }
   }
   auto line = [&](const std::vector<std::string>& cells) {
      std::string s;
      for(size_t i = 0; i < width.size(); ++i) {
         std::string c = i < cells.size() ? cells[i] : "";
         // labels left-aligned, numbers right-aligned
         const bool numeric = i > 0 && !c.empty() && (std::isdigit(static_cast<unsigned char>(c[0])) || c == "-");
         s += numeric ? std::string(width[i] - c.size(), ' ') + c : c + std::string(width[i] - c.size(), ' ');
         s += i + 1 < width.size() ? "  " : "";
      }
      return s + "\n";
   };
   std::string out = title.empty() ? "" : title + "\n";
   out += line(columns);
   size_t total = 0;
   for(size_t w : width) {
      total += w + 2;
   }
   out += std::string(total > 2 ? total - 2 : 0, '-') + "\n";
   for(const auto& r : rows) {
      out += line(r);
   }
   return out;
}

EnergyEstimate scenario_energy(const Scenario& s, const EnergyModel& model) {
   if(s.runs == 0) {
      throw UsageError("scenario " + s.name + " has no runs");
   }
   EnergyEstimate e = energy_estimate(s.counters, model);
   const double n = double(s.runs);
   e.total /= n;
   for(auto& v : e.by_category) {
      v /= n;
   }
   for(auto& v : e.by_op) {
      v /= n;
   }
   return e;
}

Comparison compare_report(const Scenario& a, const Scenario& b, const EnergyModel& model,
                          const std::string& prefix) {
   if(a.config != b.config || a.variable != b.variable) {
      throw UsageError("scenarios differ in more than the contrasted variable: '" + a.config + "' vs '" + b.config +
                       "'");
   }
   const auto ea = scenario_energy(a, model);
   const auto eb = scenario_energy(b, model);
   const double na = double(a.runs), nb = double(b.runs);
   Comparison c;
   c.point_op_ratio = ratio(double(point_ops(a.counters)) / na, double(point_ops(b.counters)) / nb);
   c.field_mul_ratio = ratio(double(a.counters[Op::MulIteration]) / na, double(b.counters[Op::MulIteration]) / nb);
   c.energy_ratio = ratio(ea.total, eb.total);
   c.baseline_joules = ea.total;
   c.candidate_joules = eb.total;

   c.table.title = a.variable + ": " + a.value + " vs " + b.value + "  [" + a.config + "]";
   c.table.columns = {"per run", a.value, b.value, "ratio"};
   auto row = [&](const std::string& label, double x, double y, bool joules) {
      c.table.rows.push_back({label, joules ? format_joules(x) : num(x, "%.1f"), joules ? format_joules(y) : num(y, "%.1f"),
                              ratio(x, y) > 0 ? num(ratio(x, y), "%.3f") : "-"});
   };
   row("point add + double", double(point_ops(a.counters)) / na, double(point_ops(b.counters)) / nb, false);
   row("mod mul", double(a.counters[Op::ModMul]) / na, double(b.counters[Op::ModMul]) / nb, false);
   row("multiplier iterations", double(a.counters[Op::MulIteration]) / na, double(b.counters[Op::MulIteration]) / nb,
       false);
   row("mod add/sub", double(a.counters[Op::ModAdd] + a.counters[Op::ModSub]) / na,
       double(b.counters[Op::ModAdd] + b.counters[Op::ModSub]) / nb, false);
   row("euclid inversions", double(a.counters[Op::ModInvEuclid]) / na, double(b.counters[Op::ModInvEuclid]) / nb,
       false);
   row("fermat inversions", double(a.counters[Op::ModInvFermat]) / na, double(b.counters[Op::ModInvFermat]) / nb,
       false);
   row("ecdsa verify", double(a.counters[Op::EcdsaVerify]) / na, double(b.counters[Op::EcdsaVerify]) / nb, false);
   row("aes + ghash blocks", double(a.counters[Op::AesBlock] + a.counters[Op::GhashBlock]) / na,
       double(b.counters[Op::AesBlock] + b.counters[Op::GhashBlock]) / nb, false);
   row("sha compressions", double(a.counters[Op::ShaCompress]) / na, double(b.counters[Op::ShaCompress]) / nb, false);
   row("modeled energy", ea.total, eb.total, true);
   row("  ecc", ea.of(Category::Ecc), eb.of(Category::Ecc), true);
   row("  symmetric", ea.of(Category::Symmetric), eb.of(Category::Symmetric), true);

   const std::string src = "modeled: " + a.value + " / " + b.value + " [" + a.config + "]";
   c.metrics.push_back({prefix + ".energy.baseline", ea.total, "J", "modeled"});
   c.metrics.push_back({prefix + ".energy.candidate", eb.total, "J", "modeled"});
   c.metrics.push_back({prefix + ".energy_ratio", c.energy_ratio, "x", src});
   c.metrics.push_back({prefix + ".field_mul_ratio", c.field_mul_ratio, "x", "counted"});
   if(c.point_op_ratio > 0) {
      c.metrics.push_back({prefix + ".point_op_ratio", c.point_op_ratio, "x", "counted"});
   }
   return c;
}

Report::Report(std::string title, const EnergyModel& model) : m_title(std::move(title)), m_model(model) {}

void Report::add(const Comparison& c) {
   m_tables.push_back(c.table);
   m_metrics.insert(m_metrics.end(), c.metrics.begin(), c.metrics.end());
}

void Report::add_weight_table() {
   Table t{"energy weights", {"kind", "weight", "category", "provenance"}, {}};
   for(size_t i = 0; i < kOpCount; ++i) {
      const Op op = static_cast<Op>(i);
      const Weight& w = m_model.weight(op);
      t.rows.push_back({std::string(op_name(op)), w.joules ? format_joules(*w.joules) : "unpriced",
                        std::string(category_name(w.category)), w.provenance});
   }
   m_tables.push_back(std::move(t));
}

std::string Report::text() const {
   std::string out = "== " + m_title + " ==\n" + m_model.describe() + "\n";
   for(const auto& t : m_tables) {
      out += t.render() + "\n";
   }
   return out;
}

std::string Report::machine() const {
   std::string out;
   for(const auto& m : m_metrics) {
      nlohmann::ordered_json j;
      j["name"] = m.name;
      j["value"] = m.value;
      j["unit"] = m.unit;
      j["provenance"] = m.provenance;
      out += j.dump() + "\n";
   }
   return out;
}

}  // namespace dte::metrics
