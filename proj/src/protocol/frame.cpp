#include "pathosim/protocol/frame.hpp"

#include <bit>
#include <cstring>

namespace pathosim::protocol {

std::string_view to_string(MessageKind kind) {
    switch (kind) {
    case MessageKind::Awake: return "AWAKE";
    case MessageKind::HeatGaugeReq: return "HEAT_GAUGE_REQ";
    case MessageKind::SampleReq: return "SAMPLE_REQ";
    case MessageKind::SampleResp: return "SAMPLE_RESP";
    case MessageKind::SleepReq: return "SLEEP_REQ";
    case MessageKind::SetPeriod: return "SET_PERIOD";
    case MessageKind::Ack: return "ACK";
    case MessageKind::Err: return "ERR";
    }
    return "?";
}

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::GaugeNotHeated: return "GaugeNotHeated";
    case ErrorCode::IllegalInPhase: return "IllegalInPhase";
    case ErrorCode::BadPeriod: return "BadPeriod";
    }
    return "?";
}

std::string_view to_string(DecodeErrorCode code) {
    switch (code) {
    case DecodeErrorCode::Truncated: return "Truncated";
    case DecodeErrorCode::ChecksumError: return "ChecksumError";
    case DecodeErrorCode::BadMagic: return "BadMagic";
    case DecodeErrorCode::BadVersion: return "BadVersion";
    case DecodeErrorCode::UnknownKind: return "UnknownKind";
    case DecodeErrorCode::LengthMismatch: return "LengthMismatch";
    case DecodeErrorCode::BadPayload: return "BadPayload";
    }
    return "?";
}

DecodeError::DecodeError(DecodeErrorCode c) : std::runtime_error(std::string(to_string(c))), code(c) {}

namespace {

bool known_kind(std::uint8_t k) { return k >= 0x01 && k <= 0x08; }

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8) {
        out.push_back(static_cast<std::uint8_t>(v >> shift));
    }
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8) {
        out.push_back(static_cast<std::uint8_t>(v >> shift));
    }
}

std::uint64_t get_be(std::span<const std::uint8_t> bytes) {
    std::uint64_t v = 0;
    for (std::uint8_t b : bytes) {
        v = (v << 8) | b;
    }
    return v;
}

bool valid_sensor_byte(std::uint8_t b) { return b >= 1 && b <= 3; }

}  // namespace

std::size_t payload_size(MessageKind kind) {
    switch (kind) {
    case MessageKind::SampleResp: return 1 + 8 + 8;
    case MessageKind::SetPeriod: return 4;
    case MessageKind::Err: return 1;
    default: return 0;
    }
}

MessageFrame make_frame(MessageKind kind, NodeId src, NodeId dst, std::uint16_t seq) {
    return MessageFrame{kind, src, dst, seq, {}};
}

MessageFrame make_sample_resp(NodeId src, NodeId dst, std::uint16_t seq, const SampleReading& reading) {
    MessageFrame f = make_frame(MessageKind::SampleResp, src, dst, seq);
    f.payload.push_back(static_cast<std::uint8_t>(reading.sensor));
    put_u64(f.payload, std::bit_cast<std::uint64_t>(reading.value));
    put_u64(f.payload, reading.sampled_ticks);
    return f;
}

MessageFrame make_set_period(NodeId src, NodeId dst, std::uint16_t seq, std::uint32_t period_s) {
    MessageFrame f = make_frame(MessageKind::SetPeriod, src, dst, seq);
    put_u32(f.payload, period_s);
    return f;
}

MessageFrame make_err(NodeId src, NodeId dst, std::uint16_t seq, ErrorCode code) {
    MessageFrame f = make_frame(MessageKind::Err, src, dst, seq);
    f.payload.push_back(static_cast<std::uint8_t>(code));
    return f;
}

std::optional<SampleReading> sample_reading(const MessageFrame& frame) {
    if (frame.kind != MessageKind::SampleResp || frame.payload.size() != payload_size(frame.kind) ||
        !valid_sensor_byte(frame.payload[0])) {
        return std::nullopt;
    }
    std::span<const std::uint8_t> p(frame.payload);
    return SampleReading{static_cast<model::SensorKind>(p[0]), std::bit_cast<double>(get_be(p.subspan(1, 8))),
                         get_be(p.subspan(9, 8))};
}

std::optional<std::uint32_t> set_period_seconds(const MessageFrame& frame) {
    if (frame.kind != MessageKind::SetPeriod || frame.payload.size() != 4) {
        return std::nullopt;
    }
    return static_cast<std::uint32_t>(get_be(frame.payload));
}

std::optional<ErrorCode> error_code(const MessageFrame& frame) {
    if (frame.kind != MessageKind::Err || frame.payload.size() != 1) {
        return std::nullopt;
    }
    return static_cast<ErrorCode>(frame.payload[0]);
}

std::uint8_t xor_checksum(std::span<const std::uint8_t> bytes) {
    std::uint8_t x = 0;
    for (std::uint8_t b : bytes) {
        x ^= b;
    }
    return x;
}

std::vector<std::uint8_t> encode_frame(const MessageFrame& frame) {
    if (!known_kind(static_cast<std::uint8_t>(frame.kind))) {
        throw PayloadLayoutMismatch("unknown message kind");
    }
    if (frame.payload.size() != payload_size(frame.kind)) {
        throw PayloadLayoutMismatch(std::string(to_string(frame.kind)) + " payload must be " +
                                    std::to_string(payload_size(frame.kind)) + " bytes, got " +
                                    std::to_string(frame.payload.size()));
    }
    if (frame.kind == MessageKind::SampleResp && !valid_sensor_byte(frame.payload[0])) {
        throw PayloadLayoutMismatch("SAMPLE_RESP sensor kind byte out of range");
    }
    std::vector<std::uint8_t> out;
    out.reserve(frame.encoded_size());
    out.push_back(kMagic);
    out.push_back(kVersion);
    out.push_back(static_cast<std::uint8_t>(frame.kind));
    put_u16(out, frame.src.value);
    put_u16(out, frame.dst.value);
    put_u16(out, frame.seq);
    out.insert(out.end(), frame.payload.begin(), frame.payload.end());
    out.push_back(xor_checksum(out));
    return out;
}

MessageFrame decode_frame(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < kFrameOverhead) {
        throw DecodeError(DecodeErrorCode::Truncated);
    }
    if (xor_checksum(bytes) != 0) {
        throw DecodeError(DecodeErrorCode::ChecksumError);
    }
    if (bytes[0] != kMagic) {
        throw DecodeError(DecodeErrorCode::BadMagic);
    }
    if (bytes[1] != kVersion) {
        throw DecodeError(DecodeErrorCode::BadVersion);
    }
    if (!known_kind(bytes[2])) {
        throw DecodeError(DecodeErrorCode::UnknownKind);
    }
    MessageFrame f;
    f.kind = static_cast<MessageKind>(bytes[2]);
    if (bytes.size() != kFrameOverhead + payload_size(f.kind)) {
        throw DecodeError(DecodeErrorCode::LengthMismatch);
    }
    f.src = NodeId{static_cast<std::uint16_t>(get_be(bytes.subspan(3, 2)))};
    f.dst = NodeId{static_cast<std::uint16_t>(get_be(bytes.subspan(5, 2)))};
    f.seq = static_cast<std::uint16_t>(get_be(bytes.subspan(7, 2)));
    f.payload.assign(bytes.begin() + kHeaderSize, bytes.end() - 1);
    if (f.kind == MessageKind::SampleResp && !valid_sensor_byte(f.payload[0])) {
        throw DecodeError(DecodeErrorCode::BadPayload);
    }
    return f;
}

}  // namespace pathosim::protocol
