#pragma once

#include "pathosim/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace pathosim::protocol {

using model::NodeId;

// Wire layout, multi-byte fields big-endian:
//
//   0      magic   0xA5
//   1      version 0x01
//   2      kind
//   3..4   src
//   5..6   dst
//   7..8   seq
//   9..    payload (length fixed by kind)
//   last   XOR of all preceding bytes
//
// There is no length byte; the kind determines the payload size.

inline constexpr std::uint8_t kMagic = 0xA5;
inline constexpr std::uint8_t kVersion = 0x01;
inline constexpr std::size_t kHeaderSize = 9;
inline constexpr std::size_t kFrameOverhead = kHeaderSize + 1;
inline constexpr std::size_t kMaxPayload = 64;

enum class MessageKind : std::uint8_t {
    Awake = 0x01,
    HeatGaugeReq = 0x02,
    SampleReq = 0x03,
    SampleResp = 0x04,
    SleepReq = 0x05,
    SetPeriod = 0x06,
    Ack = 0x07,
    Err = 0x08,
};

enum class ErrorCode : std::uint8_t {
    GaugeNotHeated = 0x01,
    IllegalInPhase = 0x02,
    BadPeriod = 0x03,
};

std::string_view to_string(MessageKind kind);
std::string_view to_string(ErrorCode code);

/// Payload size in bytes that `kind` always carries.
std::size_t payload_size(MessageKind kind);

struct MessageFrame {
    MessageKind kind = MessageKind::Awake;
    NodeId src;
    NodeId dst;
    std::uint16_t seq = 0;
    std::vector<std::uint8_t> payload;

    std::size_t encoded_size() const { return kFrameOverhead + payload.size(); }

    friend bool operator==(const MessageFrame&, const MessageFrame&) = default;
};

struct SampleReading {
    model::SensorKind sensor = model::SensorKind::TemperatureCatheter;
    double value = 0.0;
    std::uint64_t sampled_ticks = 0;

    friend bool operator==(const SampleReading&, const SampleReading&) = default;
};

MessageFrame make_frame(MessageKind kind, NodeId src, NodeId dst, std::uint16_t seq);
MessageFrame make_sample_resp(NodeId src, NodeId dst, std::uint16_t seq, const SampleReading& reading);
MessageFrame make_set_period(NodeId src, NodeId dst, std::uint16_t seq, std::uint32_t period_s);
MessageFrame make_err(NodeId src, NodeId dst, std::uint16_t seq, ErrorCode code);

std::optional<SampleReading> sample_reading(const MessageFrame& frame);
std::optional<std::uint32_t> set_period_seconds(const MessageFrame& frame);
std::optional<ErrorCode> error_code(const MessageFrame& frame);

class PayloadLayoutMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class DecodeErrorCode { Truncated, ChecksumError, BadMagic, BadVersion, UnknownKind, LengthMismatch, BadPayload };

std::string_view to_string(DecodeErrorCode code);

class DecodeError : public std::runtime_error {
public:
    explicit DecodeError(DecodeErrorCode c);
    DecodeErrorCode code;
};

std::uint8_t xor_checksum(std::span<const std::uint8_t> bytes);

/// Throws PayloadLayoutMismatch if the payload does not fit the kind's layout.
std::vector<std::uint8_t> encode_frame(const MessageFrame& frame);

/// The checksum is verified before any field is interpreted, so every
/// single-bit corruption reports ChecksumError.
MessageFrame decode_frame(std::span<const std::uint8_t> bytes);

}  // namespace pathosim::protocol
