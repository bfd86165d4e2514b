// Exception types shared by every module.
#pragma once

#include <stdexcept>
#include <string>

namespace dte {

class Error : public std::runtime_error {
 public:
   using std::runtime_error::runtime_error;
};

/// Caller violated a documented precondition (range, mismatched moduli, bad state).
class UsageError : public Error {
 public:
   using Error::Error;
};

class NotInvertible : public Error {
 public:
   NotInvertible() : Error("element is not invertible") {}
};

/// Structurally invalid encoded input (DER, wire records, hex, config text).
class MalformedInput : public Error {
 public:
   using Error::Error;
};

class UnsupportedAlgorithm : public Error {
 public:
   using Error::Error;
};

class UnsupportedCurve : public Error {
 public:
   using Error::Error;
};

/// A received public value failed on-curve/order checks.
class ValidationError : public Error {
 public:
   using Error::Error;
};

class AuthenticationFailure : public Error {
 public:
   AuthenticationFailure() : Error("authentication tag mismatch") {}
   using Error::Error;
};

class ReseedRequired : public Error {
 public:
   ReseedRequired() : Error("DRBG reseed required") {}
   using Error::Error;
};

/// Broken internal invariant, e.g. a cache returning a table for the wrong base.
class InternalError : public Error {
 public:
   using Error::Error;
};

class SessionFailure : public Error {
 public:
   using Error::Error;
};

class IoError : public Error {
 public:
   using Error::Error;
};

}  // namespace dte
