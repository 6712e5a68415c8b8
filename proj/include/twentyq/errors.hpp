#pragma once

#include <stdexcept>
#include <string>

namespace twentyq {

/// Bad input data: corpus files, manifests, persisted indexes.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Caller violated an operation's precondition (bad argument or parameter).
class UsageError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// A named thing (entity, session, passage id) does not exist.
class NotFoundError : public std::out_of_range {
  public:
    using std::out_of_range::out_of_range;
};

/// Operation not permitted in the object's current state.
class StateError : public std::logic_error {
  public:
    using std::logic_error::logic_error;
};

}  // namespace twentyq
