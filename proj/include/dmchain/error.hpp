#pragma once

#include <stdexcept>
#include <string>

namespace dmchain {

/// Base of every error thrown by the library. The CLI maps subclasses onto
/// distinct exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside an operation's mathematical domain.
class DomainError : public Error { using Error::Error; };
class LoadError : public Error { using Error::Error; };
class PreprocessError : public Error { using Error::Error; };
class EncodingError : public Error { using Error::Error; };
class SplitError : public Error { using Error::Error; };
class ConfigError : public Error { using Error::Error; };
class StateError : public Error { using Error::Error; };
class SelectionError : public Error { using Error::Error; };
class CvError : public Error { using Error::Error; };
class TrainError : public Error { using Error::Error; };
class WorkflowError : public Error { using Error::Error; };

// ledger
class RegistrationError : public Error { using Error::Error; };
class AuthError : public Error { using Error::Error; };
class PolicyError : public Error { using Error::Error; };
class NotFoundError : public Error { using Error::Error; };

} // namespace dmchain
