#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "reachsdp/relaxation.h"

namespace reachsdp {

/// JSON rendering: variables, order 2r, horizon, u_zero, u, objective,
/// problem hash, state bounding box, and v, w as monomial/coefficient
/// lists. Doubles use the shortest round-trip form.
std::string CertificateToJson(const Certificate& cert);

/// Inverse of CertificateToJson. Gram data is not stored, so the result
/// has no memberships. Throws std::invalid_argument on malformed input.
Certificate CertificateFromJson(std::string_view text);

void SaveCertificate(const std::filesystem::path& path, const Certificate& cert);
Certificate LoadCertificate(const std::filesystem::path& path);

}  // namespace reachsdp
