#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace emu {

/// Root of every error raised by the platform.
class EmuError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// -----------------------------------------------------------------------------
// Context errors
// -----------------------------------------------------------------------------

/// Address or index outside a memory, port table or program.
class RangeError : public EmuError {
public:
    using EmuError::EmuError;
};

/// Value does not fit the declared cell or payload width.
class ValueError : public EmuError {
public:
    using EmuError::EmuError;
};

/// Host plug-in has no free attachment slot.
class CapacityError : public EmuError {
public:
    using EmuError::EmuError;
};

/// Structural change requested after the machine was built.
class WiringSealedError : public EmuError {
public:
    using EmuError::EmuError;
};

/// Write through a read-only context.
class AccessError : public EmuError {
public:
    using EmuError::EmuError;
};

/// A device could not satisfy a transfer (e.g. exhausted tape).
class DeviceError : public EmuError {
public:
    using EmuError::EmuError;
};

class NoCompiledProgram : public EmuError {
public:
    NoCompiledProgram() : EmuError("no program has been compiled successfully") {}
};

// -----------------------------------------------------------------------------
// Configuration errors
// -----------------------------------------------------------------------------

/// Malformed configuration document. Carries a 1-based position when known.
class ConfigSyntaxError : public EmuError {
public:
    ConfigSyntaxError(const std::string& what, std::size_t line, std::size_t column)
        : EmuError(what), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

class SchemaError : public EmuError {
public:
    using EmuError::EmuError;
};

class DuplicateIdError : public EmuError {
public:
    using EmuError::EmuError;
};

class NotFound : public EmuError {
public:
    using EmuError::EmuError;
};

class IoError : public EmuError {
public:
    using EmuError::EmuError;
};

// -----------------------------------------------------------------------------
// Machine errors
// -----------------------------------------------------------------------------

class UnknownPlugin : public EmuError {
public:
    explicit UnknownPlugin(const std::string& plugin_id)
        : EmuError("unknown plug-in '" + plugin_id + "'"), plugin_id_(plugin_id) {}

    const std::string& plugin_id() const noexcept { return plugin_id_; }

private:
    std::string plugin_id_;
};

class WiringError : public EmuError {
public:
    using EmuError::EmuError;
};

class SettingsError : public EmuError {
public:
    using EmuError::EmuError;
};

/// Control command not permitted in the current run state.
class IllegalCommand : public EmuError {
public:
    using EmuError::EmuError;
};

}  // namespace emu
