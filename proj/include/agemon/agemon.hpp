#pragma once

#include "agemon/analytics.hpp"
#include "agemon/campaign.hpp"
#include "agemon/campaign_config.hpp"
#include "agemon/controller.hpp"
#include "agemon/cpu_battery.hpp"
#include "agemon/device.hpp"
#include "agemon/errors.hpp"
#include "agemon/flash_image.hpp"
#include "agemon/matrix.hpp"
#include "agemon/md5.hpp"
#include "agemon/memory.hpp"
#include "agemon/payloads.hpp"
#include "agemon/physics.hpp"
#include "agemon/report.hpp"
#include "agemon/rng.hpp"
