#include "gwap/errors.hpp"

#include <array>

namespace gwap {

namespace {

struct WireMapping
{
    ErrorCode code;
    std::string_view wire;
    int status;
};

constexpr std::array kMappings{
    WireMapping{ErrorCode::EmptyLabel, "EMPTY_LABEL", 422},
    WireMapping{ErrorCode::LabelTooLong, "LABEL_TOO_LONG", 422},
    WireMapping{ErrorCode::ConfigOutOfRange, "CONFIG_OUT_OF_RANGE", 400},
    WireMapping{ErrorCode::InvalidTally, "INVALID_TALLY", 500},
    WireMapping{ErrorCode::UnknownSnippet, "UNKNOWN_SNIPPET", 404},
    WireMapping{ErrorCode::InactiveSnippet, "INACTIVE_SNIPPET", 409},
    WireMapping{ErrorCode::InvalidMoodRating, "INVALID_MOOD_RATING", 422},
    WireMapping{ErrorCode::SessionAlreadyActive, "SESSION_ALREADY_ACTIVE", 409},
    WireMapping{ErrorCode::AccountNotActivated, "ACCOUNT_NOT_ACTIVATED", 403},
    WireMapping{ErrorCode::EmptyCorpus, "EMPTY_CORPUS", 409},
    WireMapping{ErrorCode::SessionEnded, "SESSION_ENDED", 409},
    WireMapping{ErrorCode::SnippetNotServed, "SNIPPET_NOT_SERVED", 409},
    WireMapping{ErrorCode::UnknownSession, "UNKNOWN_SESSION", 404},
    WireMapping{ErrorCode::UnknownPlayer, "UNKNOWN_PLAYER", 404},
    WireMapping{ErrorCode::EmailInUse, "EMAIL_IN_USE", 409},
    WireMapping{ErrorCode::InfoSheetNotAcknowledged, "INFO_SHEET_NOT_ACKNOWLEDGED", 422},
    WireMapping{ErrorCode::InvalidEmail, "INVALID_EMAIL", 422},
    WireMapping{ErrorCode::WeakPassword, "WEAK_PASSWORD", 422},
    WireMapping{ErrorCode::TokenInvalid, "TOKEN_INVALID", 401},
    WireMapping{ErrorCode::NotActivated, "NOT_ACTIVATED", 403},
    WireMapping{ErrorCode::InvalidCredentials, "INVALID_CREDENTIALS", 401},
    WireMapping{ErrorCode::Unauthenticated, "UNAUTHENTICATED", 401},
    WireMapping{ErrorCode::Forbidden, "FORBIDDEN", 403},
    WireMapping{ErrorCode::ConflictRetry, "CONFLICT_RETRY", 409},
    WireMapping{ErrorCode::StorageFailure, "STORAGE_FAILURE", 503},
    WireMapping{ErrorCode::ParseError, "PARSE_ERROR", 400},
    WireMapping{ErrorCode::DuplicateId, "DUPLICATE_ID", 409},
    WireMapping{ErrorCode::WrongModalityPayload, "WRONG_MODALITY_PAYLOAD", 422},
    WireMapping{ErrorCode::NegativeInput, "NEGATIVE_INPUT", 422},
    WireMapping{ErrorCode::InvalidProfile, "INVALID_PROFILE", 422},
    WireMapping{ErrorCode::InvalidModality, "INVALID_MODALITY", 422},
    WireMapping{ErrorCode::InvalidArgument, "INVALID_ARGUMENT", 400},
    WireMapping{ErrorCode::MalformedRequest, "MALFORMED_REQUEST", 400},
    WireMapping{ErrorCode::NotFound, "NOT_FOUND", 404},
    WireMapping{ErrorCode::Internal, "INTERNAL", 500},
};

constexpr std::array<ErrorCode, kMappings.size()> make_codes()
{
    std::array<ErrorCode, kMappings.size()> out{};
    for (std::size_t i = 0; i < kMappings.size(); ++i)
        out[i] = kMappings[i].code;
    return out;
}

constexpr auto kCodes = make_codes();

const WireMapping& lookup(ErrorCode code) noexcept
{
    for (const auto& m : kMappings)
        if (m.code == code)
            return m;
    return kMappings.back();
}

} // namespace

std::string_view wire_code(ErrorCode code) noexcept { return lookup(code).wire; }

int http_status(ErrorCode code) noexcept { return lookup(code).status; }

std::span<const ErrorCode> all_error_codes() noexcept { return kCodes; }

} // namespace gwap
