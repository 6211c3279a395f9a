// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "mbfuzz/message.hpp"
#include "mbfuzz/rng.hpp"

namespace mbfuzz {

enum class ModbusFunction : std::uint8_t {
    ReadCoils = 0x01,
    ReadHoldingRegisters = 0x03,
    WriteSingleRegister = 0x06,
    WriteMultipleRegisters = 0x10,
    ReadFileRecord = 0x14,
    DeviceIdentification = 0x2b, // MEI type 0x0e
};

const char* to_string(ModbusFunction fn);
std::optional<ModbusFunction> modbus_function_from_state(std::string_view state);

// Minimum PDU body bytes (after the function code) a fixed-layout parse of the
// request needs. Truncate mode cuts bodies below this.
std::size_t modbus_min_body_size(ModbusFunction fn);

struct ModbusParams {
    std::optional<std::uint16_t> transaction_id;
    std::optional<std::uint8_t> unit_id;
    std::optional<std::uint16_t> address;
    std::optional<std::uint16_t> count;  // coils/registers; also single-register value
    bool truncate = false;               // emit a body shorter than the fixed layout
    std::optional<std::size_t> truncate_len; // body bytes to keep (< min body size)
};

// MBAP-framed Modbus/TCP request: transaction id, protocol id 0, length
// (1 + PDU bytes), unit id, function code, body. In truncate mode the length
// field stays consistent with the shortened PDU.
EncodedMessage encode_modbus(ModbusFunction fn, const ModbusParams& params, Rng& rng);

} // namespace mbfuzz
