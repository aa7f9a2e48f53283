#include "pathosim/protocol/coordinator.hpp"
#include "pathosim/protocol/end_device.hpp"
#include "pathosim/protocol/frame.hpp"
#include "pathosim/protocol/routing.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cstring>

using namespace pathosim;
using namespace pathosim::protocol;
using engine::RngStream;
using engine::seconds;
using model::NodeRole;

namespace {

const NodeId C{0};
const NodeId ED{3};

std::vector<MessageKind> kinds(const std::vector<MessageFrame>& frames) {
    std::vector<MessageKind> out;
    for (const auto& f : frames) {
        out.push_back(f.kind);
    }
    return out;
}

}  // namespace

TEST_CASE("AWAKE encodes to the documented bytes") {
    const auto bytes = encode_frame(make_frame(MessageKind::Awake, ED, C, 1));
    const std::vector<std::uint8_t> expected{0xA5, 0x01, 0x01, 0x00, 0x03, 0x00, 0x00, 0x00, 0x01, 0xA7};
    CHECK(bytes == expected);
    std::uint8_t x = 0;
    for (std::size_t i = 0; i + 1 < expected.size(); ++i) {
        x ^= expected[i];
    }
    CHECK(x == 0xA7);
}

TEST_CASE("payload layouts") {
    CHECK(payload_size(MessageKind::SampleResp) == 17);
    CHECK(payload_size(MessageKind::SetPeriod) == 4);
    CHECK(payload_size(MessageKind::Err) == 1);
    CHECK(payload_size(MessageKind::Awake) == 0);
    CHECK(payload_size(MessageKind::Ack) == 0);

    const auto sp = encode_frame(make_set_period(C, ED, 9, 3600));
    CHECK(sp.size() == 14);
    CHECK(sp[9] == 0x00);
    CHECK(sp[10] == 0x00);
    CHECK(sp[11] == 0x0E);
    CHECK(sp[12] == 0x10);

    const SampleReading r{model::SensorKind::Displacement, 1.5, 0x0102030405060708ULL};
    const auto f = make_sample_resp(ED, C, 4, r);
    const auto bytes = encode_frame(f);
    CHECK(bytes.size() == 27);
    CHECK(bytes[9] == 2);
    std::uint64_t bits = 0;
    std::memcpy(&bits, &r.value, sizeof bits);
    for (int i = 0; i < 8; ++i) {
        CHECK(bytes[10 + i] == static_cast<std::uint8_t>(bits >> (56 - 8 * i)));
        CHECK(bytes[18 + i] == i + 1);
    }
    CHECK(sample_reading(decode_frame(bytes)) == r);
    CHECK(error_code(make_err(ED, C, 1, ErrorCode::GaugeNotHeated)) == ErrorCode::GaugeNotHeated);

    MessageFrame bad = make_frame(MessageKind::Awake, ED, C, 1);
    bad.payload.push_back(1);
    CHECK_THROWS_AS(encode_frame(bad), PayloadLayoutMismatch);
}

TEST_CASE("decode errors") {
    auto bytes = encode_frame(make_frame(MessageKind::Ack, ED, C, 7));
    auto code_of = [](std::vector<std::uint8_t> b) {
        try {
            decode_frame(b);
        } catch (const DecodeError& e) {
            return e.code;
        }
        FAIL("decode accepted bad bytes");
        return DecodeErrorCode::Truncated;
    };
    auto reseal = [](std::vector<std::uint8_t> b) {
        b.back() = xor_checksum(std::span(b.data(), b.size() - 1));
        return b;
    };
    CHECK(code_of({0xA5, 0x01}) == DecodeErrorCode::Truncated);
    auto flipped = bytes;
    flipped[4] ^= 0x10;
    CHECK(code_of(flipped) == DecodeErrorCode::ChecksumError);
    auto magic = bytes;
    magic[0] = 0x5A;
    CHECK(code_of(reseal(magic)) == DecodeErrorCode::BadMagic);
    auto version = bytes;
    version[1] = 2;
    CHECK(code_of(reseal(version)) == DecodeErrorCode::BadVersion);
    auto kind = bytes;
    kind[2] = 0x42;
    CHECK(code_of(reseal(kind)) == DecodeErrorCode::UnknownKind);
    auto longer = bytes;
    longer.insert(longer.end() - 1, 0x00);
    CHECK(code_of(reseal(longer)) == DecodeErrorCode::LengthMismatch);
    auto sensor = encode_frame(make_sample_resp(ED, C, 1, SampleReading{}));
    sensor[9] = 0x09;
    CHECK(code_of(reseal(sensor)) == DecodeErrorCode::BadPayload);
}

TEST_CASE("parent table of the canned scenario") {
    const auto with = build_parent_table(testing::ward(true));
    CHECK(with.parent(NodeId{2}) == NodeId{1});
    CHECK(with.parent(NodeId{1}) == NodeId{0});
    CHECK(with.attachment(NodeId{2})->hops == 2);
    CHECK(with.unreachable().empty());
    CHECK(with.path_to_root(NodeId{2}) == std::vector<NodeId>{NodeId{2}, NodeId{1}, NodeId{0}});
    CHECK(with.next_hop(NodeId{0}, NodeId{2}) == NodeId{1});
    CHECK(with.next_hop(NodeId{1}, NodeId{2}) == NodeId{2});
    CHECK(with.next_hop(NodeId{2}, NodeId{0}) == NodeId{1});

    const auto without = build_parent_table(testing::ward(false));
    CHECK_FALSE(without.reachable(NodeId{2}));
    CHECK(without.unreachable() == std::vector<NodeId>{NodeId{2}});
    CHECK_FALSE(without.next_hop(NodeId{0}, NodeId{2}).has_value());
}

TEST_CASE("single in-range End Device attaches to the Coordinator") {
    const auto t = build_parent_table(testing::pair(120));
    CHECK(t.parent(NodeId{1}) == NodeId{0});
    CHECK(t.attachment(NodeId{1})->hops == 1);
}

TEST_CASE("End Devices never become parents") {
    model::ScenarioConfig cfg;
    cfg.nodes.push_back(testing::node(0, NodeRole::Coordinator, 0, 0));
    auto near = testing::node(1, NodeRole::EndDevice, 5, 0);
    near.sensors.push_back(testing::catheter());
    near.sample_period_s = 60;
    auto far = near;
    far.id = NodeId{2};
    far.position.x = 10;
    cfg.nodes.push_back(near);
    cfg.nodes.push_back(far);
    for (auto& n : cfg.nodes) {
        n.radio.sensitivity_dbm = -22.0;
    }
    const auto t = build_parent_table(cfg);
    CHECK(t.parent(NodeId{1}) == NodeId{0});
    CHECK_FALSE(t.reachable(NodeId{2}));
}

TEST_CASE("child buffer keeps the newest 16 frames") {
    ChildBuffer b;
    for (std::uint16_t i = 0; i < 16; ++i) {
        CHECK_FALSE(b.push(make_frame(MessageKind::SetPeriod, C, ED, i)).has_value());
    }
    const auto evicted = b.push(make_frame(MessageKind::SetPeriod, C, ED, 16));
    REQUIRE(evicted.has_value());
    CHECK(evicted->seq == 0);
    CHECK(b.size() == 16);
    const auto drained = b.drain();
    CHECK(drained.front().seq == 1);
    CHECK(drained.back().seq == 16);
    CHECK(b.empty());
}

namespace {

model::NodeSpec gauge_device() {
    auto ed = testing::node(3, NodeRole::EndDevice, 1, 1);
    ed.sensors.push_back(testing::strain_gauge(120));
    ed.sample_period_s = 1800;
    return ed;
}

}  // namespace

TEST_CASE("End Device walks a full round") {
    const auto spec = gauge_device();
    auto s = make_end_device_state(spec);
    RngStream rng(1);
    std::vector<MessageFrame> sent;
    auto feed = [&](const EndDeviceStimulus& st, double t) {
        auto step = end_device_step(s, st, seconds(t), spec.sensors, rng);
        sent.insert(sent.end(), step.frames.begin(), step.frames.end());
        return step;
    };

    CHECK(s.phase == EndDevicePhase::Sleeping);
    auto wake = feed(ExternalWakeStimulus{}, 1792);
    CHECK(wake.power == power::PowerState::AwakeIdle);
    CHECK(s.phase == EndDevicePhase::AwakeIdle);
    feed(make_frame(MessageKind::HeatGaugeReq, C, ED, 1), 1792.01);
    CHECK(s.phase == EndDevicePhase::Heating);
    feed(make_frame(MessageKind::SampleReq, C, ED, 2), 1912.01);
    CHECK(s.phase == EndDevicePhase::Sampling);
    auto sleep = feed(make_frame(MessageKind::SleepReq, C, ED, 3), 1912.02);
    CHECK(sleep.power == power::PowerState::Sleeping);
    CHECK(s.phase == EndDevicePhase::Sleeping);

    CHECK(kinds(sent) == std::vector<MessageKind>{MessageKind::Awake, MessageKind::Ack, MessageKind::SampleResp,
                                                  MessageKind::Ack});
    CHECK(sent[2].seq == 2);
    CHECK(sample_reading(sent[2])->sampled_ticks == seconds(1912.01).ticks);
}

TEST_CASE("SAMPLE_REQ before the gauge is warm is refused") {
    const auto spec = gauge_device();
    auto s = make_end_device_state(spec);
    RngStream rng(1);
    end_device_step(s, ExternalWakeStimulus{}, seconds(100), spec.sensors, rng);
    end_device_step(s, make_frame(MessageKind::HeatGaugeReq, C, ED, 1), seconds(100), spec.sensors, rng);
    const auto step = end_device_step(s, make_frame(MessageKind::SampleReq, C, ED, 2), seconds(160), spec.sensors, rng);
    REQUIRE(step.frames.size() == 1);
    CHECK(step.frames[0].kind == MessageKind::Err);
    CHECK(error_code(step.frames[0]) == ErrorCode::GaugeNotHeated);
    CHECK(s.phase == EndDevicePhase::Heating);
}

TEST_CASE("illegal stimuli are answered with ERR and leave the state alone") {
    const auto spec = gauge_device();
    auto s = make_end_device_state(spec);
    RngStream rng(1);
    const auto before = s;
    for (auto kind : {MessageKind::SampleReq, MessageKind::HeatGaugeReq, MessageKind::SleepReq}) {
        const auto step = end_device_step(s, make_frame(kind, C, ED, 5), seconds(10), spec.sensors, rng);
        REQUIRE(step.frames.size() == 1);
        CHECK(error_code(step.frames[0]) == ErrorCode::IllegalInPhase);
        CHECK(s == before);
    }
}

TEST_CASE("SET_PERIOD while sleeping applies at the end of the next round") {
    const auto spec = gauge_device();
    auto s = make_end_device_state(spec);
    RngStream rng(1);
    auto ack = end_device_step(s, make_set_period(C, ED, 7, 3600), seconds(28), spec.sensors, rng);
    REQUIRE(ack.frames.size() == 1);
    CHECK(ack.frames[0].kind == MessageKind::Ack);
    CHECK(ack.frames[0].seq == 7);
    CHECK_FALSE(ack.power.has_value());
    CHECK(s.pending_period_change == 3600u);
    CHECK(s.sample_period_s == 1800);

    end_device_step(s, ExternalWakeStimulus{}, seconds(1792), spec.sensors, rng);
    const auto done = end_device_step(s, make_frame(MessageKind::SleepReq, C, ED, 2), seconds(1793), spec.sensors, rng);
    CHECK(done.period_applied);
    CHECK(s.sample_period_s == 3600);
    CHECK(s.cyclic_sleep().effective_period_s == 3612);
    CHECK_FALSE(s.pending_period_change.has_value());

    const auto bad = end_device_step(s, make_set_period(C, ED, 8, 10), seconds(2000), spec.sensors, rng);
    CHECK(error_code(bad.frames.at(0)) == ErrorCode::BadPeriod);
}

TEST_CASE("awake guard puts the device back to sleep") {
    const auto spec = gauge_device();
    auto s = make_end_device_state(spec);
    RngStream rng(1);
    end_device_step(s, ExternalWakeStimulus{}, seconds(10), spec.sensors, rng);
    const auto step = end_device_step(s, AwakeGuardExpired{}, seconds(200), spec.sensors, rng);
    CHECK(step.power == power::PowerState::Sleeping);
    CHECK(step.frames.empty());
    CHECK(s.phase == EndDevicePhase::Sleeping);
}

namespace {

CoordinatorParams params() {
    CoordinatorParams p;
    p.warmup_delay = seconds(120);
    p.response_timeout = seconds(5);
    p.max_retries = 2;
    return p;
}

FrameReceived rx(MessageFrame f) { return FrameReceived{std::move(f), -30.0}; }

}  // namespace

TEST_CASE("nominal Coordinator round persists one record") {
    auto s = make_session(ED, false, 1);
    auto a = coordinator_step(s, rx(make_frame(MessageKind::Awake, ED, C, 1)), seconds(100), params());
    CHECK(kinds(a.frames) == std::vector<MessageKind>{MessageKind::SampleReq});
    REQUIRE(a.timers.size() == 1);
    CHECK(a.timers[0].kind == TimerKind::ResponseTimeout);
    CHECK(a.timers[0].at == seconds(105));

    const auto resp = make_sample_resp(ED, C, a.frames[0].seq, SampleReading{model::SensorKind::TemperatureCatheter,
                                                                             36.6, seconds(100.5).ticks});
    auto b = coordinator_step(s, rx(resp), seconds(101), params());
    REQUIRE(b.records.size() == 1);
    CHECK(b.records[0].value == 36.6);
    CHECK(b.records[0].sampled_at == seconds(100.5));
    CHECK(b.records[0].received_at == seconds(101));
    CHECK(kinds(b.frames) == std::vector<MessageKind>{MessageKind::SleepReq});
    CHECK(b.round_completed);
    CHECK(s.phase == SessionPhase::Done);

    // stale timeout of the finished round
    auto c = coordinator_step(s, ResponseTimeout{1, 1}, seconds(105), params());
    CHECK(c.frames.empty());
}

TEST_CASE("heated sensors get HEAT_GAUGE_REQ and a warmup timer") {
    auto s = make_session(ED, true, 1);
    auto a = coordinator_step(s, rx(make_frame(MessageKind::Awake, ED, C, 1)), seconds(100), params());
    CHECK(kinds(a.frames) == std::vector<MessageKind>{MessageKind::HeatGaugeReq});
    REQUIRE(a.timers.size() == 1);
    CHECK(a.timers[0].kind == TimerKind::Warmup);
    CHECK(a.timers[0].at == seconds(220));
    auto b = coordinator_step(s, WarmupDone{s.round}, seconds(220), params());
    CHECK(kinds(b.frames) == std::vector<MessageKind>{MessageKind::SampleReq});
}

TEST_CASE("retries then success") {
    auto s = make_session(ED, false, 1);
    coordinator_step(s, rx(make_frame(MessageKind::Awake, ED, C, 1)), seconds(0), params());
    auto t1 = coordinator_step(s, ResponseTimeout{1, 1}, seconds(5), params());
    CHECK(kinds(t1.frames) == std::vector<MessageKind>{MessageKind::SampleReq});
    auto t2 = coordinator_step(s, ResponseTimeout{1, 2}, seconds(10), params());
    CHECK(kinds(t2.frames) == std::vector<MessageKind>{MessageKind::SampleReq});
    auto ok = coordinator_step(s, rx(make_sample_resp(ED, C, t2.frames[0].seq, SampleReading{})), seconds(11),
                               params());
    CHECK(ok.records.size() == 1);
    CHECK(ok.round_completed);
}

TEST_CASE("retries exhausted abort the round with SLEEP_REQ") {
    auto s = make_session(ED, false, 1);
    coordinator_step(s, rx(make_frame(MessageKind::Awake, ED, C, 1)), seconds(0), params());
    coordinator_step(s, ResponseTimeout{1, 1}, seconds(5), params());
    coordinator_step(s, ResponseTimeout{1, 2}, seconds(10), params());
    auto last = coordinator_step(s, ResponseTimeout{1, 3}, seconds(15), params());
    CHECK(last.records.empty());
    CHECK(kinds(last.frames) == std::vector<MessageKind>{MessageKind::SleepReq});
    CHECK(last.round_aborted);
    CHECK(s.outcome == RoundOutcome::Aborted);
}

TEST_CASE("ERR from the device aborts the round") {
    auto s = make_session(ED, true, 1);
    coordinator_step(s, rx(make_frame(MessageKind::Awake, ED, C, 1)), seconds(0), params());
    coordinator_step(s, WarmupDone{1}, seconds(120), params());
    auto e = coordinator_step(s, rx(make_err(ED, C, s.last_request_seq, ErrorCode::GaugeNotHeated)), seconds(121),
                              params());
    CHECK(e.records.empty());
    CHECK(e.round_aborted);
    CHECK(kinds(e.frames) == std::vector<MessageKind>{MessageKind::SleepReq});
}

TEST_CASE("multi-sensor devices answer once per sensor") {
    auto s = make_session(ED, false, 2);
    coordinator_step(s, rx(make_frame(MessageKind::Awake, ED, C, 1)), seconds(0), params());
    auto first = coordinator_step(s, rx(make_sample_resp(ED, C, 1, SampleReading{})), seconds(1), params());
    CHECK(first.frames.empty());
    auto second = coordinator_step(s, rx(make_sample_resp(ED, C, 1, SampleReading{})), seconds(1), params());
    CHECK(second.round_completed);
    CHECK(s.received_samples == 2);
}
