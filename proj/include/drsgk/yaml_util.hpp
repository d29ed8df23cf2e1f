#pragma once

#include <yaml-cpp/yaml.h>

#include <initializer_list>
#include <string>
#include <vector>

#include "drsgk/core.hpp"

namespace drsgk::yaml {

/// Throws ConfigError naming the first key of `node` not in `allowed`.
void require_known_keys(const YAML::Node& node, std::initializer_list<const char*> allowed,
                        const std::string& section);

template <class T>
T get_or(const YAML::Node& node, const char* key, const T& fallback,
         const std::string& section) {
  const YAML::Node value = node[key];
  if (!value || value.IsNull()) return fallback;
  try {
    return value.as<T>();
  } catch (const YAML::Exception& e) {
    throw ConfigError(section + "." + key + ": " + e.what());
  }
}

std::vector<double> get_reals(const YAML::Node& node, const char* key,
                              const std::vector<double>& fallback, const std::string& section,
                              std::size_t expected_size = 0);

YAML::Node sequence(const double* begin, const double* end);

}  // namespace drsgk::yaml
