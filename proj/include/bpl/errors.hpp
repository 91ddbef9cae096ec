#pragma once

#include <stdexcept>
#include <string>

namespace bpl {

// Error categories map 1:1 onto CLI exit codes:
//   usage/schema -> 1, data format -> 2, runtime -> 3.
// Library code throws these; only the CLI layer turns them into codes.

class error : public std::runtime_error {
public:
    explicit error(const std::string& msg) : std::runtime_error(msg) {}
};

// bad arguments, invalid configs, violated preconditions
class schema_error : public error {
public:
    explicit schema_error(const std::string& msg) : error(msg) {}
};

// unreadable/corrupt input files
class format_error : public error {
public:
    explicit format_error(const std::string& msg) : error(msg) {}
};

// everything that can only be detected while running (I/O, numeric failures)
class runtime_fault : public error {
public:
    explicit runtime_fault(const std::string& msg) : error(msg) {}
};

inline int exit_code_for(const error& e) {
    if (dynamic_cast<const schema_error*>(&e)) return 1;
    if (dynamic_cast<const format_error*>(&e)) return 2;
    return 3;
}

}  // namespace bpl
