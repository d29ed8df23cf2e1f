#include "drsgk/yaml_util.hpp"

#include <algorithm>
#include <cstring>

namespace drsgk::yaml {

void require_known_keys(const YAML::Node& node, std::initializer_list<const char*> allowed,
                        const std::string& section) {
  if (!node || node.IsNull()) return;
  if (!node.IsMap()) throw ConfigError(section + ": expected a mapping");
  for (const auto& item : node) {
    const auto key = item.first.as<std::string>();
    const bool known = std::any_of(allowed.begin(), allowed.end(),
                                   [&](const char* a) { return key == a; });
    if (!known) throw ConfigError(section + ": unknown key '" + key + "'");
  }
}

std::vector<double> get_reals(const YAML::Node& node, const char* key,
                              const std::vector<double>& fallback, const std::string& section,
                              std::size_t expected_size) {
  std::vector<double> values = get_or(node, key, fallback, section);
  if (expected_size != 0 && values.size() != expected_size) {
    throw ConfigError(section + "." + key + ": expected " + std::to_string(expected_size) +
                      " values, got " + std::to_string(values.size()));
  }
  return values;
}

YAML::Node sequence(const double* begin, const double* end) {
  YAML::Node seq(YAML::NodeType::Sequence);
  for (auto it = begin; it != end; ++it) seq.push_back(*it);
  seq.SetStyle(YAML::EmitterStyle::Flow);
  return seq;
}

}  // namespace drsgk::yaml
