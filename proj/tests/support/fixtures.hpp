#pragma once

#include <filesystem>
#include <string>

#include "amiroar/app/scenario.hpp"
#include "amiroar/sim/inventory.hpp"

namespace fixtures {

std::filesystem::path source_dir();
std::filesystem::path test_data();
std::filesystem::path playbook_path(const std::string& stem);

amiroar::app::ScenarioConfig scenario(const std::string& name);

/// Fresh, empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

/// `count` household meters 10.0.0.1.. with areas spread over 70..130 m2,
/// polled every minute over [start, start + span).
amiroar::sim::SimConfig small_fleet(std::uint64_t seed, int count, amiroar::Duration span);

amiroar::TimePoint at(const char* iso);

}  // namespace fixtures
