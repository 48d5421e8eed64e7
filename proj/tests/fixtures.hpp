#pragma once

#include <memory>

#include "agemon/campaign.hpp"
#include "agemon/campaign_config.hpp"

namespace fixture {

inline agemon::CampaignConfig small_config() {
  agemon::CampaignConfig c;
  c.device_count = 2;
  c.temperatures_c = {20, 50, 80};
  c.search.runs_per_frequency = 20;
  c.sweep_step_hz = 2e6;
  return c;
}

inline agemon::SimulatedDevice default_device(std::size_t index = 0,
                                              const agemon::CampaignConfig& config = {}) {
  return agemon::build_device(config, index, agemon::campaign_flash_image(config));
}

}  // namespace fixture
