#include "drsgk/scenarios/scenario.hpp"

namespace drsgk {

ScenarioRegistry& ScenarioRegistry::global() {
  static ScenarioRegistry registry;
  return registry;
}

void ScenarioRegistry::add(const std::string& name, Factory factory, Resolver resolver) {
  entries_[name] = Entry{std::move(factory), std::move(resolver)};
}

bool ScenarioRegistry::contains(const std::string& name) const {
  return entries_.count(name) > 0;
}

std::vector<std::string> ScenarioRegistry::names() const {
  std::vector<std::string> out;
  for (const auto& [name, entry] : entries_) out.push_back(name);
  return out;
}

const ScenarioRegistry::Entry& ScenarioRegistry::lookup(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw ConfigError("unknown scenario '" + name + "'");
  return it->second;
}

std::unique_ptr<Scenario> ScenarioRegistry::create(const std::string& name,
                                                   const YAML::Node& section,
                                                   std::uint64_t seed) const {
  return lookup(name).factory(section, seed);
}

YAML::Node ScenarioRegistry::resolve(const std::string& name, const YAML::Node& section) const {
  return lookup(name).resolver(section);
}

}  // namespace drsgk
