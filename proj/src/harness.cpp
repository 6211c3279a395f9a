// SPDX-License-Identifier: Apache-2.0
#include "mbfuzz/harness.hpp"

#include <mutex>
#include <thread>

namespace mbfuzz {

const char* to_string(OutcomeClass cls) {
    switch (cls) {
    case OutcomeClass::ResponseReceived: return "ResponseReceived";
    case OutcomeClass::Timeout: return "Timeout";
    case OutcomeClass::ConnectionReset: return "ConnectionReset";
    case OutcomeClass::SendFailed: return "SendFailed";
    case OutcomeClass::TargetDown: return "TargetDown";
    }
    return "?";
}

bool is_failure(OutcomeClass cls) { return cls != OutcomeClass::ResponseReceived; }

bool probe_liveness(const Endpoint& endpoint, const TimeoutPolicy& policy) {
    int attempts = policy.probe_retries > 0 ? policy.probe_retries : 1;
    for (int i = 0; i < attempts; ++i) {
        if (i > 0)
            std::this_thread::sleep_for(std::chrono::milliseconds(policy.probe_backoff_ms));
        if (TcpStream::connect(endpoint, policy.probe_connect_timeout_ms)) return true;
    }
    return false;
}

SequenceOutcome run_sequence(const Endpoint& endpoint, std::uint64_t sequence_id,
                             std::span<const EncodedMessage> messages, const TimeoutPolicy& policy,
                             std::shared_mutex* traffic_mutex, bool probe_after) {
    SequenceOutcome result;
    result.sequence_id = sequence_id;

    {
        std::shared_lock<std::shared_mutex> traffic;
        if (traffic_mutex) traffic = std::shared_lock(*traffic_mutex);

        auto conn = TcpStream::connect(endpoint, policy.connect_timeout_ms);
        if (!conn) {
            if (!messages.empty())
                result.messages.push_back({messages[0].state, {OutcomeClass::TargetDown, {}, {}}});
        } else {
            for (const auto& msg : messages) {
                auto t0 = std::chrono::steady_clock::now();
                IoState sent = conn->send_all(msg.bytes);
                if (sent == IoState::Reset || sent == IoState::Closed) {
                    result.messages.push_back({msg.state, {OutcomeClass::ConnectionReset, {}, {}}});
                    break;
                }
                if (sent != IoState::Ok) {
                    result.messages.push_back({msg.state, {OutcomeClass::SendFailed, {}, {}}});
                    continue;
                }

                Outcome outcome;
                IoState got = conn->recv_some(outcome.response_bytes, policy.read_timeout_ms);
                outcome.latency = std::chrono::duration_cast<std::chrono::microseconds>(
                    std::chrono::steady_clock::now() - t0);
                bool stop = false;
                switch (got) {
                case IoState::Ok: outcome.cls = OutcomeClass::ResponseReceived; break;
                case IoState::Timeout:
                    outcome.cls = OutcomeClass::Timeout;
                    outcome.response_bytes.clear();
                    break;
                case IoState::Closed:
                case IoState::Reset:
                case IoState::Error:
                    outcome.cls = OutcomeClass::ConnectionReset;
                    outcome.response_bytes.clear();
                    stop = true;
                    break;
                }
                result.messages.push_back({msg.state, std::move(outcome)});
                if (stop) break;
            }
        }
    }

    result.aborted = result.messages.size() < messages.size();

    if (probe_after) {
        std::unique_lock<std::shared_mutex> probing;
        if (traffic_mutex) probing = std::unique_lock(*traffic_mutex);
        result.crashed = !probe_liveness(endpoint, policy);
    }
    return result;
}

} // namespace mbfuzz
