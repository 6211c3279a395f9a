// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "mbfuzz/model.hpp"

namespace mbfuzz {

// Shipped candidate-state fixtures.
std::vector<std::string> mqtt_candidate_states();   // the 15 control packet types
std::vector<std::string> modbus_candidate_states(); // supported function codes

std::vector<std::string> builtin_candidates(const std::string& protocol); // throws ConfigError

// Seven-state MQTT demo model with weighted transitions and a DISCONNECT
// reconnect rule; used by `init` as a format example and all over the tests.
StateModel sample_mqtt_model();

} // namespace mbfuzz
