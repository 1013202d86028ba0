// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace pnmkit {

enum class Errc {
    IoError,
    EmptyFile,
    MissingColumn,
    ConfigInvalid,
    DegenerateFeature,
    MissingFeature,
    NoFeasibleParams,
    InsufficientOverlap,
    MismatchedDevices,
    NoMaintenanceTickets,
    NoTickets,
    MissingMtr,
    ZeroDuration,
};

const char* errc_name(Errc c);

/// Thrown for unrecoverable input problems. Per-row data issues are
/// reported as values (drop counts, violation lists), not exceptions.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

inline const char* errc_name(Errc c) {
    switch (c) {
    case Errc::IoError: return "IoError";
    case Errc::EmptyFile: return "EmptyFile";
    case Errc::MissingColumn: return "MissingColumn";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::DegenerateFeature: return "DegenerateFeature";
    case Errc::MissingFeature: return "MissingFeature";
    case Errc::NoFeasibleParams: return "NoFeasibleParams";
    case Errc::InsufficientOverlap: return "InsufficientOverlap";
    case Errc::MismatchedDevices: return "MismatchedDevices";
    case Errc::NoMaintenanceTickets: return "NoMaintenanceTickets";
    case Errc::NoTickets: return "NoTickets";
    case Errc::MissingMtr: return "MissingMtr";
    case Errc::ZeroDuration: return "ZeroDuration";
    }
    return "UnknownError";
}

} // namespace pnmkit
