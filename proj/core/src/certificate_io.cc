#include "reachsdp/certificate_io.h"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace reachsdp {

using nlohmann::json;

namespace {

constexpr const char* kFormat = "reach-sos-certificate";

json TermsToJson(const Polynomial& p) {
  json out = json::array();
  for (const auto& [m, c] : p.terms()) {
    out.push_back({{"monomial", std::vector<int>(m.exponents().begin(), m.exponents().end())},
                   {"coefficient", c}});
  }
  return out;
}

Polynomial TermsFromJson(const json& terms, int n, const char* name) {
  if (!terms.is_array()) throw std::invalid_argument(std::string(name) + ": expected an array");
  Polynomial p(n);
  for (const auto& t : terms) {
    const auto exps = t.at("monomial").get<std::vector<int>>();
    if (static_cast<int>(exps.size()) != n) {
      throw std::invalid_argument(std::string(name) + ": monomial has wrong arity");
    }
    for (int e : exps) {
      if (e < 0) throw std::invalid_argument(std::string(name) + ": negative exponent");
    }
    p.AddTerm(Monomial(exps), t.at("coefficient").get<double>());
  }
  return p;
}

std::vector<double> ToStd(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

}  // namespace

std::string CertificateToJson(const Certificate& cert) {
  json doc = {
      {"format", kFormat},
      {"version", 1},
      {"variables", cert.variables},
      {"order", 2 * cert.r},
      {"horizon", cert.horizon},
      {"u_zero", cert.u_zero},
      {"u", cert.u},
      {"objective", cert.objective},
      {"problem_hash", cert.problem_hash},
      {"state_box", {{"lower", ToStd(cert.state_box.lower)},
                     {"upper", ToStd(cert.state_box.upper)}}},
      {"v", TermsToJson(cert.v)},
      {"w", TermsToJson(cert.w)},
  };
  return doc.dump(2) + "\n";
}

Certificate CertificateFromJson(std::string_view text) {
  try {
    const json doc = json::parse(text);
    if (doc.at("format").get<std::string>() != kFormat) {
      throw std::invalid_argument("not a certificate file");
    }
    if (doc.at("version").get<int>() != 1) {
      throw std::invalid_argument("unsupported certificate version");
    }
    Certificate cert;
    cert.variables = doc.at("variables").get<std::vector<std::string>>();
    const int n = static_cast<int>(cert.variables.size());
    if (n == 0) throw std::invalid_argument("certificate has no variables");
    const int order = doc.at("order").get<int>();
    if (order < 2 || order % 2 != 0) throw std::invalid_argument("order must be even");
    cert.r = order / 2;
    cert.horizon = doc.at("horizon").get<int>();
    cert.u_zero = doc.at("u_zero").get<bool>();
    cert.u = doc.at("u").get<double>();
    cert.objective = doc.at("objective").get<double>();
    cert.problem_hash = doc.at("problem_hash").get<std::string>();
    const auto lo = doc.at("state_box").at("lower").get<std::vector<double>>();
    const auto hi = doc.at("state_box").at("upper").get<std::vector<double>>();
    if (static_cast<int>(lo.size()) != n || static_cast<int>(hi.size()) != n) {
      throw std::invalid_argument("state_box has wrong dimension");
    }
    cert.state_box.lower = Eigen::Map<const Eigen::VectorXd>(lo.data(), n);
    cert.state_box.upper = Eigen::Map<const Eigen::VectorXd>(hi.data(), n);
    cert.v = TermsFromJson(doc.at("v"), n, "v");
    cert.w = TermsFromJson(doc.at("w"), n, "w");
    cert.frame = AffineFrame::Identity(n);
    return cert;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("malformed certificate: ") + e.what());
  }
}

void SaveCertificate(const std::filesystem::path& path, const Certificate& cert) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << CertificateToJson(cert);
}

Certificate LoadCertificate(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open certificate file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return CertificateFromJson(ss.str());
}

}  // namespace reachsdp
