#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace gtbr {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

// A packet requested more tokens than the bucket held at that slot.
class NonConforming : public Error {
 public:
  NonConforming(std::size_t slot, std::int64_t available, std::int64_t requested)
      : Error("non-conforming packet at slot " + std::to_string(slot) + ": requested " +
              std::to_string(requested) + " tokens, " + std::to_string(available) +
              " available"),
        slot_(slot),
        available_(available),
        requested_(requested) {}

  std::size_t slot() const noexcept { return slot_; }
  std::int64_t available() const noexcept { return available_; }
  std::int64_t requested() const noexcept { return requested_; }

 private:
  std::size_t slot_;
  std::int64_t available_;
  std::int64_t requested_;
};

class HorizonMismatch : public Error {
 public:
  HorizonMismatch(std::size_t lhs, std::size_t rhs)
      : Error("horizon mismatch: " + std::to_string(lhs) + " vs " + std::to_string(rhs)) {}
};

class ResourceLimit : public Error {
 public:
  using Error::Error;
};

class StateOutOfRange : public Error {
 public:
  using Error::Error;
};

class EnumerationTooLarge : public Error {
 public:
  using Error::Error;
};

class PayloadExhausted : public Error {
 public:
  using Error::Error;
};

// Raised by fixed-width weight types; callers retry with arbitrary precision.
class WeightOverflow : public Error {
 public:
  WeightOverflow() : Error("weight exceeds fixed-width range") {}
};

}  // namespace gtbr
