#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace poseflow {

// Base class for all library errors so callers can catch one type.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DegenerateInput : public Error {
public:
    explicit DegenerateInput(const std::string& msg) : Error(msg) {}
};

class BehindCamera : public Error {
public:
    BehindCamera(const std::string& msg, std::vector<std::size_t> indices)
        : Error(msg), offending(std::move(indices)) {}
    std::vector<std::size_t> offending;
};

class DimensionMismatch : public Error {
public:
    explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

class ChannelMismatch : public Error {
public:
    explicit ChannelMismatch(const std::string& msg) : Error(msg) {}
};

class EmptyRender : public Error {
public:
    explicit EmptyRender(const std::string& msg) : Error(msg) {}
};

class InsufficientViews : public Error {
public:
    explicit InsufficientViews(const std::string& msg) : Error(msg) {}
};

class LengthMismatch : public Error {
public:
    explicit LengthMismatch(const std::string& msg) : Error(msg) {}
};

class DivergedPose : public Error {
public:
    explicit DivergedPose(const std::string& msg) : Error(msg) {}
};

// File parse failure; byte_offset is -1 when the position is unknown.
class MalformedFile : public Error {
public:
    MalformedFile(const std::string& msg, long long offset = -1)
        : Error(offset >= 0 ? msg + " (byte " + std::to_string(offset) + ")" : msg),
          byte_offset(offset) {}
    long long byte_offset;
};

} // namespace poseflow
