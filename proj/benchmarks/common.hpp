#pragma once

#include <filesystem>

#include "amiroar/app/scenario.hpp"

namespace bench {

inline amiroar::app::ScenarioConfig scenario(const char* name) {
  return amiroar::app::load_scenario(std::filesystem::path(AMIROAR_SOURCE_DIR) / "scenarios" /
                                     (std::string(name) + ".json"));
}

}  // namespace bench
