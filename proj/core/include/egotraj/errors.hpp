#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace egotraj {

/// Base class for all egotraj exceptions.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Input point set too small or rank-deficient for a rigid fit.
class DegenerateInput : public Error {
 public:
  using Error::Error;
};

/// Pairwise registration could not find enough overlap.
class RegistrationFailed : public Error {
 public:
  RegistrationFailed(int frame_index, const std::string& msg)
      : Error("registration failed at frame " + std::to_string(frame_index) + ": " + msg),
        frame_index(frame_index) {}
  int frame_index;
};

/// Matrix handed to a rotation routine is not orthonormal.
class NotARotation : public Error {
 public:
  using Error::Error;
};

/// rot6D vector has parallel or zero columns and cannot be orthonormalized.
class DegenerateRot6D : public Error {
 public:
  using Error::Error;
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class DimMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyDataset : public Error {
 public:
  using Error::Error;
};

class InvalidSpec : public Error {
 public:
  using Error::Error;
};

/// File-format errors carry the byte offset where the problem was detected.
class FormatError : public Error {
 public:
  FormatError(const std::string& msg, std::uint64_t offset)
      : Error(msg + " (offset " + std::to_string(offset) + ")"), offset(offset) {}
  std::uint64_t offset;
};

class BadMagic : public FormatError {
 public:
  using FormatError::FormatError;
};

class VersionUnsupported : public FormatError {
 public:
  using FormatError::FormatError;
};

class TruncatedFile : public FormatError {
 public:
  using FormatError::FormatError;
};

class ManifestCorrupt : public Error {
 public:
  using Error::Error;
};

class MissingStats : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace egotraj
