// SPDX-License-Identifier: Apache-2.0
#include "mbfuzz/payload.hpp"

#include "mbfuzz/errors.hpp"
#include "mbfuzz/modbus.hpp"
#include "mbfuzz/mqtt.hpp"

namespace mbfuzz {

EncodedMessage encode_state(const std::string& protocol, const std::string& state, Rng& rng,
                            const PayloadOptions& options) {
    EncodedMessage msg;
    if (protocol == "MQTT") {
        auto type = mqtt_type_from_state(state);
        if (!type) throw CodecError("MQTT codec knows no state '" + state + "'");
        MqttPacketParams params;
        params.type = *type;
        msg = encode_mqtt(params, rng);
    } else if (protocol == "MODBUS") {
        auto fn = modbus_function_from_state(state);
        if (!fn) throw CodecError("Modbus codec knows no state '" + state + "'");
        ModbusParams params;
        params.truncate = rng.chance(options.modbus_truncate_probability);
        msg = encode_modbus(*fn, params, rng);
    } else {
        throw CodecError("no codec for protocol '" + protocol + "'");
    }
    if (options.mutation.enabled()) msg = mutate(std::move(msg), rng, options.mutation);
    return msg;
}

} // namespace mbfuzz
