// SPDX-License-Identifier: Apache-2.0
//
// dband-gbsm: stochastic channel synthesis and distribution fitting for D-band MIMO links
// Copyright (C) 2026 The dband-gbsm authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef GBSM_ERRORS_HPP
#define GBSM_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gbsm
{
    // Invalid distribution or synthesis parameters (non-positive scale, bad shape count, ...)
    class ParameterError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Caller violated a precondition that is not about parameter values (empty input, missing argument)
    class UsageError : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Input outside the mathematical domain of an operation
    class DomainError : public std::domain_error
    {
    public:
        using std::domain_error::domain_error;
    };

    // Maximum-likelihood fit could not be computed (degenerate data, no convergence)
    class FitError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Unknown catalog key
    class LookupError : public std::out_of_range
    {
    public:
        using std::out_of_range::out_of_range;
    };

    // Quantity exists as a concept but has no value (missing table entry, no surviving paths)
    class NotAvailableError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    class EmptyChannelError : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Malformed input document. `where` is a JSON path ("$.locations[2].name") or "line N".
    class ParseError : public std::runtime_error
    {
    public:
        ParseError(const std::string &where, const std::string &what)
            : std::runtime_error(where + ": " + what), where_(where) {}

        const std::string &where() const noexcept { return where_; }

    private:
        std::string where_;
    };

    // Malformed CSV row; carries the 1-based line number of the offending row.
    class CsvError : public ParseError
    {
    public:
        CsvError(std::size_t line, const std::string &what)
            : ParseError("line " + std::to_string(line), what), line_(line) {}

        std::size_t line() const noexcept { return line_; }

    private:
        std::size_t line_;
    };
}

#endif
