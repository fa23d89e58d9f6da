#pragma once
// Named numeric checks with tolerances, serializable to JSON.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace acbc {

struct ReportItem {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::string detail;
};

struct VerificationReport {
  std::vector<ReportItem> items;
  std::map<std::string, std::string> meta;

  /// Passes when value <= tolerance (and value is finite).
  ReportItem& check(const std::string& name, double value, double tol, std::string detail = {}) {
    items.push_back({name, value, tol, std::isfinite(value) && value <= tol, std::move(detail)});
    return items.back();
  }
  ReportItem& record(const std::string& name, double value, bool pass, std::string detail = {}) {
    items.push_back({name, value, 0.0, pass, std::move(detail)});
    return items.back();
  }
  void append(const VerificationReport& other, const std::string& prefix = {}) {
    for (auto it : other.items) {
      it.name = prefix + it.name;
      items.push_back(std::move(it));
    }
  }
  bool all_pass() const {
    for (const auto& i : items)
      if (!i.pass) return false;
    return true;
  }
  const ReportItem* find(const std::string& name) const {
    for (const auto& i : items)
      if (i.name == name) return &i;
    return nullptr;
  }
  double value(const std::string& name) const {
    const ReportItem* i = find(name);
    return i ? i->value : NAN;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["meta"] = meta;
    j["pass"] = all_pass();
    j["items"] = nlohmann::json::array();
    for (const auto& i : items) {
      nlohmann::json e{{"name", i.name}, {"tolerance", i.tolerance}, {"pass", i.pass}};
      if (std::isfinite(i.value)) e["value"] = i.value;
      else e["value"] = nullptr;
      if (!i.detail.empty()) e["detail"] = i.detail;
      j["items"].push_back(e);
    }
    return j;
  }
};

}  // namespace acbc
