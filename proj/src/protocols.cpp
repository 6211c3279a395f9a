// SPDX-License-Identifier: Apache-2.0
#include "mbfuzz/protocols.hpp"

#include "mbfuzz/errors.hpp"

namespace mbfuzz {

std::vector<std::string> mqtt_candidate_states() {
    return {"CONNECT", "CONNACK",     "PUBLISH",  "PUBACK",   "PUBREC",
            "PUBREL",  "PUBCOMP",     "SUBSCRIBE", "SUBACK",  "UNSUBSCRIBE",
            "UNSUBACK", "PINGREQ",    "PINGRESP", "DISCONNECT", "AUTH"};
}

std::vector<std::string> modbus_candidate_states() {
    return {"READ_COILS",    "READ_HOLDING_REGISTERS", "WRITE_SINGLE_REGISTER",
            "WRITE_MULTIPLE_REGISTERS", "READ_FILE_RECORD", "DEVICE_IDENTIFICATION"};
}

std::vector<std::string> builtin_candidates(const std::string& protocol) {
    if (protocol == "MQTT") return mqtt_candidate_states();
    if (protocol == "MODBUS") return modbus_candidate_states();
    throw ConfigError("no built-in candidate states for protocol '" + protocol + "'");
}

StateModel sample_mqtt_model() {
    StateModel model;
    model.protocol = "MQTT";
    model.candidate_states = mqtt_candidate_states();
    model.selected_states = {"CONNECT",    "CONNACK", "PUBLISH", "SUBSCRIBE",
                             "DISCONNECT", "PINGREQ", "PUBACK"};
    model.initial_state = "CONNECT";
    model.transitions = {
        {"CONNECT", {{"CONNACK", 70}, {"SUBSCRIBE", 30}}},
        {"CONNACK", {{"PUBLISH", 50}, {"SUBSCRIBE", 30}, {"DISCONNECT", 20}}},
        {"PUBLISH", {{"PUBACK", 60}, {"SUBSCRIBE", 30}, {"DISCONNECT", 10}}},
        {"SUBSCRIBE", {{"PUBLISH", 40}, {"DISCONNECT", 30}, {"PINGREQ", 30}}},
        {"PINGREQ", {{"DISCONNECT", 70}, {"PUBACK", 30}}},
        {"PUBACK", {{"PUBLISH", 60}, {"DISCONNECT", 40}}},
    };
    model.stop_probability = 0.5;
    model.reconnect_rule = ReconnectRule{"DISCONNECT", 0.5};
    return model;
}

} // namespace mbfuzz
