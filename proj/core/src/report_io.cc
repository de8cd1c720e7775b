#include "reachsdp/report_io.h"

#include <fstream>
#include <stdexcept>

#include <json.hpp>

namespace reachsdp {

using nlohmann::ordered_json;

namespace {

ordered_json ReportEntry(const CertReport& r) {
  ordered_json e;
  e["problem"] = r.problem;
  e["order"] = r.order;
  e["horizon"] = r.horizon;
  e["u_zero"] = r.u_zero;
  e["status"] = r.status;
  if (!r.solved()) {
    e["error"] = r.error;
    e["residuals"] = {{"primal", r.residuals.primal},
                      {"dual", r.residuals.dual},
                      {"gap", r.residuals.gap}};
    if (r.runtime_seconds) e["runtime_seconds"] = *r.runtime_seconds;
    return e;
  }
  e["iterations"] = r.iterations;
  e["u"] = r.u;
  e["u_validated"] = r.u_validated();
  e["objective"] = r.objective;
  e["residuals"] = {{"primal", r.residuals.primal},
                    {"dual", r.residuals.dual},
                    {"gap", r.residuals.gap}};
  if (r.reconstruction) e["reconstruction_residual"] = *r.reconstruction;
  e["containment"] = {{"points", r.containment.points},
                      {"violations", r.containment.violations},
                      {"worst_margin", r.containment.worst_margin},
                      {"passed", r.containment.passed()}};
  e["excursions"] = r.excursions;
  e["divergent"] = r.divergent;
  e["volume"] = {{"estimate", r.volume.estimate},
                 {"ci95_half_width", r.volume.half_width},
                 {"samples", r.volume.samples}};
  if (r.runtime_seconds) e["runtime_seconds"] = *r.runtime_seconds;
  return e;
}

}  // namespace

std::string ReportToJson(const std::vector<CertReport>& reports, std::optional<bool> monotone) {
  ordered_json doc;
  doc["format"] = "reach-sos-report";
  doc["version"] = 1;
  doc["reports"] = ordered_json::array();
  for (const auto& r : reports) doc["reports"].push_back(ReportEntry(r));
  if (monotone) doc["objective_non_increasing"] = *monotone;
  return doc.dump(2) + "\n";
}

void SaveReport(const std::filesystem::path& path, const std::vector<CertReport>& reports,
                std::optional<bool> monotone) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << ReportToJson(reports, monotone);
}

}  // namespace reachsdp
