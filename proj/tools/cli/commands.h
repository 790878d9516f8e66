#pragma once

#include <functional>
#include <vector>

#include <CLI11.hpp>

#include "run_context.h"

namespace socialmotion::cli {

struct Command {
  CLI::App* app = nullptr;
  std::function<void(RunContext&)> run;
};

void add_data_commands(CLI::App& app, std::vector<Command>& commands);
void add_model_commands(CLI::App& app, std::vector<Command>& commands);
void add_eval_commands(CLI::App& app, std::vector<Command>& commands);

// Fills `value` from config[key] unless the flag was given explicitly.
template <typename T>
void apply_config(const nlohmann::json& config, const char* key, const CLI::Option* flag, T& value) {
  if (flag->count() == 0 && config.contains(key)) {
    value = config.at(key).get<T>();
  }
}

} // namespace socialmotion::cli
