#pragma once

#include <istream>
#include <string>
#include <vector>

#include <CLI11.hpp>

namespace textmarker::cli {

/// Lets `--config` read JSON. Top-level keys set global options; an object
/// keyed by a verb name sets that verb's options:
///
///   {"seed": 7, "simulate": {"users": 100, "baselines": true}}
///
/// Arrays become repeated values, booleans become flags.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool write_description,
                        std::string prefix) const override;
  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override;
};

}  // namespace textmarker::cli
