#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace itc {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value failed validation. `field()` names the offending field, using a
/// dotted path for nested config values (e.g. "strategies[2].k").
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Network or HTTP failure that survived the retry budget.
class TransportError : public Error {
public:
    using Error::Error;
};

/// The endpoint answered, but the body was not a chat-completion response.
class ProtocolError : public Error {
public:
    using Error::Error;
};

/// Scripted backend has no fixture for the requested digest.
class FixtureMissingError : public Error {
public:
    explicit FixtureMissingError(std::string digest)
        : Error("no fixture for request digest " + digest), digest_(std::move(digest)) {}

    const std::string& digest() const noexcept { return digest_; }

private:
    std::string digest_;
};

class NotReasoningResponseError : public Error {
public:
    NotReasoningResponseError() : Error("response has no reasoning segment") {}
};

class ScoreMissingError : public Error {
public:
    using Error::Error;
};

class ScoreOutOfRangeError : public Error {
public:
    explicit ScoreOutOfRangeError(long long value)
        : Error("judge score " + std::to_string(value) + " outside [-100, 100]"), value_(value) {}

    long long value() const noexcept { return value_; }

private:
    long long value_;
};

class JudgingFailedError : public Error {
public:
    using Error::Error;
};

/// No sample produced an extractable answer.
class NoAnswerError : public Error {
public:
    NoAnswerError() : Error("no extractable answer among samples") {}
};

/// An aggregate analysis had nothing left to aggregate.
class EmptyResultError : public Error {
public:
    using Error::Error;
};

class DegenerateLabelsError : public Error {
public:
    DegenerateLabelsError() : Error("training set contains a single label") {}
};

/// Ingest failure; carries every offending line so they can all be reported.
class IngestError : public Error {
public:
    struct LineError {
        std::size_t line = 0;
        std::string message;
    };

    explicit IngestError(std::vector<LineError> lines);

    const std::vector<LineError>& lines() const noexcept { return lines_; }

private:
    std::vector<LineError> lines_;
};

} // namespace itc
