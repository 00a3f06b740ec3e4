#pragma once

// Payload codec over the packet-length covert channel.
//
// A frame is one regulator horizon: a conforming schedule plus the contents of
// every packet. A schedule with total length L admits 2^L contents, so the
// number of distinct frames is exactly g_0(0), and the maximum-entropy flow is
// the uniform law over them. The codec is an arithmetic coder with exact
// intervals: frame indices in [0, g_0(0)) are laid out schedule-major, the
// block of schedule l having width 2^{sum l}, and within the block the index is
// the concatenated packet contents. Choosing l_k inside the block of the
// prefix l_0..l_{k-1} splits it in proportion to p*_k(l | u_k).
//
// A K-bit payload word M (K = floor(log2 g)) is placed at index
// ceil(M g / 2^K); the decoder recovers M = floor(index 2^K / g). In chained
// mode F frames are digits of one index in [0, g^F), which approaches the
// entropy bound as F grows.
//
// Message layout: a 16-bit big-endian payload length, the payload, then zero
// padding up to the coded capacity. The end of a horizon is an out-of-band
// frame boundary and carries no payload.
//
// Wire format (all integers big-endian):
//   u16 payload_bits
//   repeated, in slot order for every frame:
//     u16 packet_length_bits
//     ceil(packet_length_bits / 8) bytes, packet bits MSB first, zero padded

#include <cstddef>
#include <cstdint>
#include <algorithm>
#include <cmath>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "gtbr/entropy_dp.hpp"
#include "gtbr/errors.hpp"
#include "gtbr/regulator.hpp"
#include "gtbr/weights.hpp"

namespace gtbr {

using Bits = std::vector<bool>;

struct Frame {
  Schedule schedule;
  std::vector<Bits> packets;  // packets[k].size() == schedule.lengths[k]

  friend bool operator==(const Frame&, const Frame&) = default;
};

struct CodecFrame {
  Bits payload;  // payload bits carried, padding included
  Frame frame;
  std::size_t overt_bits = 0;   // sum of packet lengths
  std::size_t covert_bits = 0;  // payload bits carried by the length choices
  bool padded = false;
};

enum class CodecMode { single, chained };
enum class PadPolicy { zero_fill, strict };

inline BigUInt bits_to_int(const Bits& bits, std::size_t begin, std::size_t count) {
  BigUInt x = 0;
  for (std::size_t i = 0; i < count; ++i) {
    x <<= 1;
    if (begin + i < bits.size() && bits[begin + i]) x += 1;
  }
  return x;
}

inline Bits int_to_bits(const BigUInt& x, std::size_t count) {
  Bits out(count, false);
  for (std::size_t i = 0; i < count; ++i) out[count - 1 - i] = boost::multiprecision::bit_test(x, static_cast<unsigned>(i));
  return out;
}

class FrameCodec {
 public:
  explicit FrameCodec(EntropySolution<BigUInt> solution)
      : solution_(std::move(solution)),
        frames_(solution_.utility_weight()),
        capacity_(bit_floor_log2(frames_)) {}

  const EntropySolution<BigUInt>& solution() const noexcept { return solution_; }
  const RegulatorSpec& spec() const noexcept { return solution_.spec(); }

  // g_0(0): the number of distinct frames.
  const BigUInt& frame_count() const noexcept { return frames_; }

  // Payload bits per frame in single mode.
  std::size_t capacity_bits() const noexcept { return capacity_; }

  Frame unrank(BigUInt index) const {
    if (index >= frames_) throw StateOutOfRange("frame index out of range");
    const auto& spec = solution_.spec();
    std::vector<Tokens> lengths;
    lengths.reserve(spec.horizon());
    Tokens u = 0;
    std::size_t overt = 0;
    for (std::size_t k = 0; k < spec.horizon(); ++k) {
      const Tokens available = u + spec.increment(k);
      Tokens l = 0;
      for (;; ++l) {
        BigUInt block = solution_.weight(k + 1, spec.carry(k, available - l));
        block <<= static_cast<unsigned>(overt + static_cast<std::size_t>(l));
        if (index < block || l == available) break;
        index -= block;
      }
      lengths.push_back(l);
      overt += static_cast<std::size_t>(l);
      u = spec.carry(k, available - l);
    }
    Frame frame;
    frame.schedule = evolve(spec, lengths);
    const Bits contents = int_to_bits(index, overt);
    std::size_t pos = 0;
    for (Tokens l : lengths) {
      frame.packets.emplace_back(contents.begin() + static_cast<std::ptrdiff_t>(pos),
                                 contents.begin() + static_cast<std::ptrdiff_t>(pos + static_cast<std::size_t>(l)));
      pos += static_cast<std::size_t>(l);
    }
    return frame;
  }

  BigUInt rank(const Frame& frame) const { return schedule_base(frame) + contents_index(frame); }

  // Index of the first frame with this frame's schedule.
  BigUInt schedule_base(const Frame& frame) const {
    const auto& spec = solution_.spec();
    const Schedule schedule = evolve(spec, frame.schedule.lengths);
    check_packets(frame);
    BigUInt base = 0;
    std::size_t overt = 0;
    for (std::size_t k = 0; k < spec.horizon(); ++k) {
      const Tokens available = schedule.states[k] + spec.increment(k);
      for (Tokens l = 0; l < schedule.lengths[k]; ++l) {
        BigUInt block = solution_.weight(k + 1, spec.carry(k, available - l));
        block <<= static_cast<unsigned>(overt + static_cast<std::size_t>(l));
        base += block;
      }
      overt += static_cast<std::size_t>(schedule.lengths[k]);
    }
    return base;
  }

  // Single frame: carries the first capacity_bits() of the payload.
  CodecFrame encode(const Bits& payload, PadPolicy pad = PadPolicy::zero_fill) const {
    CodecFrame out;
    out.padded = payload.size() < capacity_;
    if (out.padded && pad == PadPolicy::strict)
      throw PayloadExhausted("payload has " + std::to_string(payload.size()) + " bits, frame carries " +
                             std::to_string(capacity_));
    out.payload = int_to_bits(bits_to_int(payload, 0, capacity_), capacity_);
    auto frames = encode_block(out.payload, 1);
    out.frame = std::move(frames.front());
    out.overt_bits = total_length(out.frame);
    out.covert_bits = capacity_ - out.overt_bits;
    return out;
  }

  // Inverse of encode(). A frame that encode() never emits decodes to the
  // nearest payload whose encoding has the same schedule.
  Bits decode(const Frame& frame) const { return decode_block({frame}); }

  // Bits carried by `frames` consecutive frames in chained mode.
  std::size_t block_capacity_bits(std::size_t frames) const {
    if (frames == 0) return 0;
    return bit_floor_log2(power(frames));
  }

  // Encodes exactly block_capacity_bits(F) payload bits into F frames.
  std::vector<Frame> encode_block(const Bits& payload, std::size_t frames) const {
    const std::size_t bits = block_capacity_bits(frames);
    if (payload.size() != bits)
      throw InvalidSpec("block of " + std::to_string(frames) + " frames carries " + std::to_string(bits) + " bits");
    const BigUInt space = power(frames);
    const BigUInt word = bits_to_int(payload, 0, bits);
    BigUInt index = (word * space + (BigUInt(1) << bits) - 1) >> bits;

    std::vector<Frame> out(frames);
    for (std::size_t f = frames; f-- > 0;) {
      out[f] = unrank(BigUInt(index % frames_));
      index /= frames_;
    }
    return out;
  }

  Bits decode_block(const std::vector<Frame>& frames) const {
    if (frames.empty()) return {};
    const std::size_t bits = block_capacity_bits(frames.size());
    BigUInt index = 0;
    for (const auto& f : frames) index = index * frames_ + rank(f);
    const BigUInt space = power(frames.size());
    BigUInt word = (index << bits) / space;
    if (frames.size() == 1) {
      const BigUInt base = schedule_base(frames.front());
      if (place(word, space, bits) < base) word += 1;
    }
    return int_to_bits(word, bits);
  }

 private:
  static std::size_t total_length(const Frame& frame) {
    std::size_t n = 0;
    for (Tokens l : frame.schedule.lengths) n += static_cast<std::size_t>(l);
    return n;
  }

  void check_packets(const Frame& frame) const {
    if (frame.packets.size() != frame.schedule.lengths.size())
      throw InvalidSpec("frame has " + std::to_string(frame.packets.size()) + " packets for " +
                        std::to_string(frame.schedule.lengths.size()) + " slots");
    for (std::size_t k = 0; k < frame.packets.size(); ++k)
      if (frame.packets[k].size() != static_cast<std::size_t>(frame.schedule.lengths[k]))
        throw InvalidSpec("packet " + std::to_string(k) + " content does not match its length");
  }

  BigUInt contents_index(const Frame& frame) const {
    BigUInt x = 0;
    for (const auto& packet : frame.packets)
      for (bool b : packet) {
        x <<= 1;
        if (b) x += 1;
      }
    return x;
  }

  static BigUInt place(const BigUInt& word, const BigUInt& space, std::size_t bits) {
    return (word * space + (BigUInt(1) << bits) - 1) >> bits;
  }

  BigUInt power(std::size_t frames) const {
    BigUInt out = 1;
    for (std::size_t i = 0; i < frames; ++i) out *= frames_;
    return out;
  }

  EntropySolution<BigUInt> solution_;
  BigUInt frames_;
  std::size_t capacity_;
};

struct EncodedMessage {
  std::uint16_t payload_bits = 0;
  std::vector<Frame> frames;
  std::size_t coded_bits = 0;  // header + payload + padding
  std::size_t overt_bits = 0;

  std::size_t covert_bits() const { return coded_bits - overt_bits; }
};

inline constexpr std::size_t kHeaderBits = 16;
inline constexpr std::size_t kMaxPayloadBits = 0xffff;

namespace detail {

inline Bits with_header(const Bits& payload) {
  Bits out = int_to_bits(BigUInt(payload.size()), kHeaderBits);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

inline std::size_t frames_length(const std::vector<Frame>& frames) {
  std::size_t n = 0;
  for (const auto& f : frames)
    for (Tokens l : f.schedule.lengths) n += static_cast<std::size_t>(l);
  return n;
}

}  // namespace detail

// Frames needed to chain `bits` coded bits.
inline std::size_t chained_frames_for(const FrameCodec& codec, std::size_t bits) {
  if (codec.capacity_bits() == 0) throw InvalidSpec("regulator admits a single frame and carries no payload");
  const double per_frame = log2_weight(codec.frame_count());
  auto frames = static_cast<std::size_t>(std::max(1.0, std::floor(static_cast<double>(bits) / per_frame)));
  while (frames > 1 && codec.block_capacity_bits(frames - 1) >= bits) --frames;
  while (codec.block_capacity_bits(frames) < bits) ++frames;
  return frames;
}

inline EncodedMessage encode_message(const FrameCodec& codec, const Bits& payload, CodecMode mode) {
  if (payload.size() > kMaxPayloadBits)
    throw InvalidSpec("payload exceeds " + std::to_string(kMaxPayloadBits) + " bits");
  if (codec.capacity_bits() == 0) throw InvalidSpec("regulator admits a single frame and carries no payload");
  Bits stream = detail::with_header(payload);

  EncodedMessage out;
  out.payload_bits = static_cast<std::uint16_t>(payload.size());
  if (mode == CodecMode::single) {
    const std::size_t k = codec.capacity_bits();
    const std::size_t frames = (stream.size() + k - 1) / k;
    stream.resize(frames * k, false);
    for (std::size_t f = 0; f < frames; ++f) {
      Bits word(stream.begin() + static_cast<std::ptrdiff_t>(f * k),
                stream.begin() + static_cast<std::ptrdiff_t>((f + 1) * k));
      out.frames.push_back(codec.encode_block(word, 1).front());
    }
  } else {
    const std::size_t frames = chained_frames_for(codec, stream.size());
    stream.resize(codec.block_capacity_bits(frames), false);
    out.frames = codec.encode_block(stream, frames);
  }
  out.coded_bits = stream.size();
  out.overt_bits = detail::frames_length(out.frames);
  return out;
}

inline Bits decode_message(const FrameCodec& codec, const std::vector<Frame>& frames, CodecMode mode,
                           std::optional<std::uint16_t> expected_payload_bits = std::nullopt) {
  Bits stream;
  if (mode == CodecMode::single) {
    for (const auto& f : frames) {
      const Bits word = codec.decode(f);
      stream.insert(stream.end(), word.begin(), word.end());
    }
  } else {
    stream = codec.decode_block(frames);
  }
  if (stream.size() < kHeaderBits) throw PayloadExhausted("message shorter than its header");
  const auto n = bits_to_int(stream, 0, kHeaderBits).convert_to<std::size_t>();
  if (expected_payload_bits && *expected_payload_bits != n)
    throw InvalidSpec("wire header says " + std::to_string(*expected_payload_bits) + " payload bits, channel says " +
                      std::to_string(n));
  if (kHeaderBits + n > stream.size())
    throw PayloadExhausted("header announces " + std::to_string(n) + " bits, frames carry " +
                           std::to_string(stream.size() - kHeaderBits));
  return Bits(stream.begin() + kHeaderBits, stream.begin() + static_cast<std::ptrdiff_t>(kHeaderBits + n));
}

namespace detail {

inline void put_u16(std::ostream& os, std::size_t v) {
  os.put(static_cast<char>((v >> 8) & 0xff));
  os.put(static_cast<char>(v & 0xff));
}

inline std::uint16_t get_u16(std::istream& is) {
  const int hi = is.get();
  const int lo = is.get();
  if (hi == std::char_traits<char>::eof() || lo == std::char_traits<char>::eof())
    throw InvalidSpec("truncated frame stream");
  return static_cast<std::uint16_t>((hi << 8) | lo);
}

}  // namespace detail

inline void write_wire(std::ostream& os, const EncodedMessage& message) {
  detail::put_u16(os, message.payload_bits);
  for (const auto& frame : message.frames)
    for (const auto& packet : frame.packets) {
      if (packet.size() > 0xffff) throw InvalidSpec("packet longer than 65535 bits");
      detail::put_u16(os, packet.size());
      for (std::size_t i = 0; i < packet.size(); i += 8) {
        unsigned byte = 0;
        for (std::size_t b = 0; b < 8; ++b) byte = (byte << 1) | (i + b < packet.size() && packet[i + b] ? 1u : 0u);
        os.put(static_cast<char>(byte));
      }
    }
}

struct WireMessage {
  std::uint16_t payload_bits = 0;
  std::vector<Frame> frames;
};

// Packets are grouped into frames of spec.horizon(); each frame must conform.
inline WireMessage read_wire(std::istream& is, const RegulatorSpec& spec) {
  WireMessage out;
  out.payload_bits = detail::get_u16(is);
  std::vector<Bits> packets;
  while (is.peek() != std::char_traits<char>::eof()) {
    const std::size_t length = detail::get_u16(is);
    Bits packet(length, false);
    for (std::size_t i = 0; i < length; i += 8) {
      const int byte = is.get();
      if (byte == std::char_traits<char>::eof()) throw InvalidSpec("truncated packet contents");
      for (std::size_t b = 0; b < 8 && i + b < length; ++b) packet[i + b] = (byte >> (7 - b)) & 1;
    }
    packets.push_back(std::move(packet));
  }
  if (packets.size() % spec.horizon() != 0)
    throw InvalidSpec(std::to_string(packets.size()) + " packets do not fill whole frames of " +
                      std::to_string(spec.horizon()));
  for (std::size_t f = 0; f < packets.size(); f += spec.horizon()) {
    Frame frame;
    std::vector<Tokens> lengths;
    for (std::size_t k = 0; k < spec.horizon(); ++k) {
      lengths.push_back(static_cast<Tokens>(packets[f + k].size()));
      frame.packets.push_back(std::move(packets[f + k]));
    }
    frame.schedule = evolve(spec, lengths);
    out.frames.push_back(std::move(frame));
  }
  return out;
}

}  // namespace gtbr
