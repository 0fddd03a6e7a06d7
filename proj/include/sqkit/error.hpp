// Copyright 2026 The sqkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace sqkit {

// Error categories mirror the exit-code scheme of the command line tool and
// the status codes of the C API.
enum class ErrorKind {
  kInput = 2,      // unreadable or malformed input
  kAlgorithm = 3,  // the computation itself cannot proceed
  kContract = 4,   // caller violated a documented precondition
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InputError : public Error {
 public:
  explicit InputError(const std::string& what)
      : Error(ErrorKind::kInput, what) {}
};

class AlgorithmError : public Error {
 public:
  explicit AlgorithmError(const std::string& what)
      : Error(ErrorKind::kAlgorithm, what) {}
};

class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what)
      : Error(ErrorKind::kContract, what) {}
};

}  // namespace sqkit
