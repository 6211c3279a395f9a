// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "mbfuzz/message.hpp"
#include "mbfuzz/mutate.hpp"
#include "mbfuzz/rng.hpp"

namespace mbfuzz {

struct PayloadOptions {
    MutationConfig mutation;
    double modbus_truncate_probability = 0.25;
};

// The payload-generator slot: renders an abstract state name to wire bytes for
// the given protocol, with unset fields randomized from rng, then applies the
// configured mutations. Throws CodecError on a state the protocol's codec
// does not know.
EncodedMessage encode_state(const std::string& protocol, const std::string& state, Rng& rng,
                            const PayloadOptions& options);

} // namespace mbfuzz
