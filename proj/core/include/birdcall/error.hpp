#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace birdcall {

// Base of every error the library throws. `kind()` maps onto the CLI exit
// codes: user errors exit 1, data errors exit 2.
class Error : public std::runtime_error {
 public:
  enum class Kind { user, data };

  explicit Error(const std::string& what, Kind kind = Kind::data)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

class UnsupportedCodecError : public Error {
 public:
  UnsupportedCodecError(unsigned codec_tag, const std::string& what)
      : Error(what), codec_tag_(codec_tag) {}
  unsigned codec_tag() const noexcept { return codec_tag_; }

 private:
  unsigned codec_tag_;
};

class EmptySignalError : public Error {
 public:
  using Error::Error;
};

class TooShortError : public Error {
 public:
  TooShortError(std::size_t required, std::size_t actual, const std::string& what)
      : Error(what), required_(required), actual_(actual) {}
  std::size_t required() const noexcept { return required_; }
  std::size_t actual() const noexcept { return actual_; }

 private:
  std::size_t required_;
  std::size_t actual_;
};

class ShapeError : public Error {
 public:
  explicit ShapeError(const std::string& what) : Error(what, Kind::user) {}
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error(what, Kind::user) {}
};

class ChecksumError : public Error {
 public:
  using Error::Error;
};

class VersionError : public Error {
 public:
  using Error::Error;
};

class FeatureSetMismatch : public Error {
 public:
  explicit FeatureSetMismatch(const std::string& what) : Error(what, Kind::user) {}
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

// Raised when training produces a non-finite loss or gradient.
class TrainingDiverged : public Error {
 public:
  using Error::Error;
};

}  // namespace birdcall
