// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the hdrsel Project.

#pragma once

#include <stdexcept>
#include <string>

namespace hdrsel {

/// Argument outside an operation's domain (bad range, bad dimensions, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A fitting routine could not produce a model from its samples.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// No pixel value satisfies the requested capture bounds, or no pixel of the
/// stack can be classified as accurately captured.
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace hdrsel
