#include "fixtures.hpp"

#include <atomic>
#include <unistd.h>

namespace fixtures {

namespace fs = std::filesystem;

fs::path source_dir() { return AMIROAR_SOURCE_DIR; }
fs::path test_data() { return AMIROAR_TEST_DATA; }
fs::path playbook_path(const std::string& stem) { return source_dir() / "playbooks" / (stem + ".json"); }

amiroar::app::ScenarioConfig scenario(const std::string& name) {
  return amiroar::app::load_scenario(source_dir() / "scenarios" / (name + ".json"));
}

fs::path temp_dir(const std::string& name) {
  static std::atomic<int> counter{0};
  auto p = fs::temp_directory_path() /
           ("amiroar-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

amiroar::TimePoint at(const char* iso) { return amiroar::parse_iso8601(iso); }

amiroar::sim::SimConfig small_fleet(std::uint64_t seed, int count, amiroar::Duration span) {
  amiroar::sim::SimConfig c;
  c.seed = seed;
  c.start = at("2023-07-15T11:00:00Z");
  c.end = c.start + span;
  for (int i = 0; i < count; ++i) {
    amiroar::sim::SmartMeter m;
    char id[16];
    std::snprintf(id, sizeof id, "sm-%03d", i + 1);
    m.meter_id = id;
    m.ip = amiroar::Ipv4Address::from_string("10.0.0." + std::to_string(i + 1));
    m.area_m2 = 70.0 + 60.0 * i / std::max(1, count - 1);
    m.firmware_version = c.clean_firmware;
    c.meters.push_back(m);
  }
  c.standby_headend = amiroar::sim::HostSpec{"headend-standby", amiroar::Ipv4Address::from_string("10.0.1.2")};
  return c;
}

}  // namespace fixtures
