#include "json_config.hpp"

#include <nlohmann/json.hpp>

namespace textmarker::cli {

namespace {

std::string scalar(const nlohmann::json& v) {
  return v.is_string() ? v.get<std::string>() : v.dump();
}

void flatten(const nlohmann::json& object, std::vector<std::string>& parents,
             std::vector<CLI::ConfigItem>& out) {
  for (const auto& [key, value] : object.items()) {
    if (value.is_object()) {
      parents.push_back(key);
      flatten(value, parents, out);
      parents.pop_back();
      continue;
    }
    CLI::ConfigItem item;
    item.parents = parents;
    item.name = key;
    if (value.is_array()) {
      for (const auto& element : value) {
        if (element.is_structured()) {
          throw CLI::ConversionError(item.fullname() + ": nested arrays are not supported");
        }
        item.inputs.push_back(scalar(element));
      }
    } else if (!value.is_null()) {
      item.inputs.push_back(scalar(value));
    }
    out.push_back(std::move(item));
  }
}

nlohmann::json dump_app(const CLI::App* app, bool default_also) {
  nlohmann::json j = nlohmann::json::object();
  for (const CLI::Option* opt : app->get_options()) {
    if (opt->get_lnames().empty() || !opt->get_configurable()) continue;
    const std::string& name = opt->get_lnames().front();
    if (opt->count() > 0) {
      const auto& results = opt->results();
      j[name] = results.size() == 1 ? nlohmann::json(results.front()) : nlohmann::json(results);
    } else if (default_also && !opt->get_default_str().empty()) {
      j[name] = opt->get_default_str();
    }
  }
  for (const CLI::App* sub : app->get_subcommands({})) {
    if (sub->get_name().empty()) continue;
    auto nested = dump_app(sub, default_also);
    if (!nested.empty()) j[sub->get_name()] = std::move(nested);
  }
  return j;
}

}  // namespace

std::string JsonConfig::to_config(const CLI::App* app, bool default_also, bool,
                                  std::string) const {
  return dump_app(app, default_also).dump(2) + "\n";
}

std::vector<CLI::ConfigItem> JsonConfig::from_config(std::istream& input) const {
  nlohmann::json root;
  try {
    input >> root;
  } catch (const nlohmann::json::exception& e) {
    throw CLI::ConversionError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) throw CLI::ConversionError("config must be a JSON object");
  std::vector<CLI::ConfigItem> items;
  std::vector<std::string> parents;
  flatten(root, parents, items);
  return items;
}

}  // namespace textmarker::cli
