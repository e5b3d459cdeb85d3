/*
 * Copyright (c) 2026, choicerbm contributors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <iostream>
#include <stdexcept>
#include <string>

namespace choicerbm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A required column is missing or the table layout is wrong.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// A cell could not be read as a number.
class ParseError : public Error {
public:
    using Error::Error;
};

/// A value lies outside its admissible domain (choice index, fraction, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Matrix or vector shapes disagree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Training produced a non-finite parameter.
class DivergedTraining : public Error {
public:
    DivergedTraining(int epoch, const std::string& what)
        : Error(what), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

/// Model file could not be read or is inconsistent.
class ModelFileError : public Error {
public:
    using Error::Error;
};

// Non-fatal diagnostics go to stderr; there is no logging framework here.
inline void warn(const std::string& msg) { std::cerr << "warning: " << msg << '\n'; }

}  // namespace choicerbm
