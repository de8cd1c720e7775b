#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "reachsdp/certify.h"

namespace reachsdp {

/// JSON report with one entry per CertReport. Output depends only on the
/// report contents; runtimes appear only when recorded.
std::string ReportToJson(const std::vector<CertReport>& reports,
                         std::optional<bool> monotone = std::nullopt);

void SaveReport(const std::filesystem::path& path, const std::vector<CertReport>& reports,
                std::optional<bool> monotone = std::nullopt);

}  // namespace reachsdp
