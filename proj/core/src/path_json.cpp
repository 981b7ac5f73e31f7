#include "pathfbsde/path_json.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace pathfbsde {

using nlohmann::json;

std::string toJson(const DiscretePath& path, int indent) {
  json j;
  j["d"] = path.dim();
  json history = json::array();
  for (std::size_t k = 0; k < path.historySize(); ++k) {
    auto v = path.historyValue(k);
    history.push_back(json::array({path.historyTime(k), std::vector<double>(v.begin(), v.end())}));
  }
  j["history"] = std::move(history);
  auto times = path.nodeTimes();
  j["grid"] = std::vector<double>(times.begin(), times.end());
  json values = json::array();
  for (std::size_t i = 0; i < path.nodeCount(); ++i) {
    auto v = path.nodeValue(i);
    values.push_back(std::vector<double>(v.begin(), v.end()));
  }
  j["values"] = std::move(values);
  return j.dump(indent);
}

DiscretePath pathFromJson(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument(std::string("path JSON: ") + e.what());
  }
  try {
    const auto d = j.at("d").get<std::size_t>();
    std::vector<double> histT, histV, nodeT, nodeV;
    for (const auto& entry : j.value("history", json::array())) {
      if (!entry.is_array() || entry.size() != 2) {
        throw std::invalid_argument("path JSON: history entries must be [time, [values]]");
      }
      histT.push_back(entry[0].get<double>());
      auto v = entry[1].get<std::vector<double>>();
      if (v.size() != d) throw std::invalid_argument("path JSON: history value has wrong dimension");
      histV.insert(histV.end(), v.begin(), v.end());
    }
    nodeT = j.at("grid").get<std::vector<double>>();
    const auto& values = j.at("values");
    if (values.size() != nodeT.size()) {
      throw std::invalid_argument("path JSON: 'values' must have one entry per grid node");
    }
    for (const auto& v : values) {
      auto row = v.get<std::vector<double>>();
      if (row.size() != d) throw std::invalid_argument("path JSON: node value has wrong dimension");
      nodeV.insert(nodeV.end(), row.begin(), row.end());
    }
    return DiscretePath(d, std::move(histT), std::move(histV), std::move(nodeT), std::move(nodeV));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("path JSON: ") + e.what());
  }
}

DiscretePath loadPath(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw std::invalid_argument("cannot open path file '" + file + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return pathFromJson(buffer.str());
}

}  // namespace pathfbsde
