// SPDX-License-Identifier: Apache-2.0
#include "mbfuzz/modbus.hpp"

#include "mbfuzz/errors.hpp"

namespace mbfuzz {

const char* to_string(ModbusFunction fn) {
    switch (fn) {
    case ModbusFunction::ReadCoils: return "READ_COILS";
    case ModbusFunction::ReadHoldingRegisters: return "READ_HOLDING_REGISTERS";
    case ModbusFunction::WriteSingleRegister: return "WRITE_SINGLE_REGISTER";
    case ModbusFunction::WriteMultipleRegisters: return "WRITE_MULTIPLE_REGISTERS";
    case ModbusFunction::ReadFileRecord: return "READ_FILE_RECORD";
    case ModbusFunction::DeviceIdentification: return "DEVICE_IDENTIFICATION";
    }
    return "?";
}

std::optional<ModbusFunction> modbus_function_from_state(std::string_view state) {
    if (state == "READ_COILS") return ModbusFunction::ReadCoils;
    if (state == "READ_HOLDING_REGISTERS") return ModbusFunction::ReadHoldingRegisters;
    if (state == "WRITE_SINGLE_REGISTER") return ModbusFunction::WriteSingleRegister;
    if (state == "WRITE_MULTIPLE_REGISTERS") return ModbusFunction::WriteMultipleRegisters;
    if (state == "READ_FILE_RECORD") return ModbusFunction::ReadFileRecord;
    if (state == "DEVICE_IDENTIFICATION") return ModbusFunction::DeviceIdentification;
    return std::nullopt;
}

std::size_t modbus_min_body_size(ModbusFunction fn) {
    switch (fn) {
    case ModbusFunction::ReadCoils: return 4;               // addr, count
    case ModbusFunction::ReadHoldingRegisters: return 4;    // addr, count
    case ModbusFunction::WriteSingleRegister: return 4;     // addr, value
    case ModbusFunction::WriteMultipleRegisters: return 5;  // addr, count, byte count
    case ModbusFunction::ReadFileRecord: return 8;          // byte count + one sub-request
    case ModbusFunction::DeviceIdentification: return 3;    // MEI type, id code, object id
    }
    throw CodecError("unsupported Modbus function code");
}

namespace {

void append_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

} // namespace

EncodedMessage encode_modbus(ModbusFunction fn, const ModbusParams& params, Rng& rng) {
    std::uint16_t address = params.address ? *params.address
                                           : static_cast<std::uint16_t>(rng.next_below(0x10000));
    std::vector<std::uint8_t> body;

    switch (fn) {
    case ModbusFunction::ReadCoils:
    case ModbusFunction::ReadHoldingRegisters: {
        std::uint16_t count =
            params.count ? *params.count : static_cast<std::uint16_t>(rng.next_between(1, 125));
        append_u16(body, address);
        append_u16(body, count);
        break;
    }
    case ModbusFunction::WriteSingleRegister: {
        std::uint16_t value =
            params.count ? *params.count : static_cast<std::uint16_t>(rng.next_below(0x10000));
        append_u16(body, address);
        append_u16(body, value);
        break;
    }
    case ModbusFunction::WriteMultipleRegisters: {
        std::uint16_t count =
            params.count ? *params.count : static_cast<std::uint16_t>(rng.next_between(1, 8));
        append_u16(body, address);
        append_u16(body, count);
        body.push_back(static_cast<std::uint8_t>(count * 2));
        for (std::uint16_t i = 0; i < count; ++i)
            append_u16(body, static_cast<std::uint16_t>(rng.next_below(0x10000)));
        break;
    }
    case ModbusFunction::ReadFileRecord: {
        body.push_back(7); // byte count: one sub-request
        body.push_back(6); // reference type
        append_u16(body, static_cast<std::uint16_t>(rng.next_between(1, 10)));  // file number
        append_u16(body, static_cast<std::uint16_t>(rng.next_below(10000)));    // record number
        append_u16(body, static_cast<std::uint16_t>(rng.next_between(1, 100))); // record length
        break;
    }
    case ModbusFunction::DeviceIdentification:
        body.push_back(0x0e); // MEI type
        body.push_back(static_cast<std::uint8_t>(rng.next_between(1, 4))); // read device id code
        body.push_back(static_cast<std::uint8_t>(rng.next_below(3)));      // object id
        break;
    default:
        throw CodecError("unsupported Modbus function code");
    }

    if (params.truncate) {
        std::size_t min_body = modbus_min_body_size(fn);
        std::size_t keep = params.truncate_len ? *params.truncate_len
                                               : static_cast<std::size_t>(rng.next_below(min_body));
        if (keep >= min_body)
            throw CodecError("truncate_len must be below the function's fixed layout size");
        if (keep < body.size()) body.resize(keep);
    }

    EncodedMessage msg;
    msg.state = to_string(fn);
    std::uint16_t tid = params.transaction_id
                            ? *params.transaction_id
                            : static_cast<std::uint16_t>(rng.next_below(0x10000));
    append_u16(msg.bytes, tid);
    append_u16(msg.bytes, 0x0000); // protocol id
    append_u16(msg.bytes, static_cast<std::uint16_t>(1 + 1 + body.size())); // unit + PDU
    msg.bytes.push_back(params.unit_id ? *params.unit_id
                                       : static_cast<std::uint8_t>(rng.next_between(0, 247)));
    msg.bytes.push_back(static_cast<std::uint8_t>(fn));
    msg.bytes.insert(msg.bytes.end(), body.begin(), body.end());
    return msg;
}

} // namespace mbfuzz
