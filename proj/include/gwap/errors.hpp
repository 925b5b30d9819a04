#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace gwap {

enum class ErrorCode {
    EmptyLabel,
    LabelTooLong,
    ConfigOutOfRange,
    InvalidTally,
    UnknownSnippet,
    InactiveSnippet,
    InvalidMoodRating,
    SessionAlreadyActive,
    AccountNotActivated,
    EmptyCorpus,
    SessionEnded,
    SnippetNotServed,
    UnknownSession,
    UnknownPlayer,
    EmailInUse,
    InfoSheetNotAcknowledged,
    InvalidEmail,
    WeakPassword,
    TokenInvalid,
    NotActivated,
    InvalidCredentials,
    Unauthenticated,
    Forbidden,
    ConflictRetry,
    StorageFailure,
    ParseError,
    DuplicateId,
    WrongModalityPayload,
    NegativeInput,
    InvalidProfile,
    InvalidModality,
    InvalidArgument,
    MalformedRequest,
    NotFound,
    Internal,
};

/// Stable machine-readable code used on the wire, e.g. "EMPTY_LABEL".
[[nodiscard]] std::string_view wire_code(ErrorCode code) noexcept;

/// HTTP status the api layer reports for this code.
[[nodiscard]] int http_status(ErrorCode code) noexcept;

/// Every code, in declaration order. Used to check the wire mapping is total.
[[nodiscard]] std::span<const ErrorCode> all_error_codes() noexcept;

class Error : public std::runtime_error
{
public:
    Error(ErrorCode code, const std::string& message) : std::runtime_error(message), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace gwap
