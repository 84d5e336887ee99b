#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace foa {

// Thrown when a message violates the wire protocol (duplicate ids, round
// mismatches, malformed deltas).
class ProtocolError : public std::runtime_error {
public:
    explicit ProtocolError(const std::string& what) : std::runtime_error(what) {}
};

// Assignment instance with at least one uncoverable subtask.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, std::vector<std::string> uncovered)
        : std::runtime_error(what), uncovered_subtasks(std::move(uncovered)) {}

    std::vector<std::string> uncovered_subtasks;
};

// Registration with an agent_id that already exists.
class ConflictError : public std::runtime_error {
public:
    explicit ConflictError(const std::string& what) : std::runtime_error(what) {}
};

// Mutation that changes nothing; version bumps require a real change.
class NoChangeError : public std::runtime_error {
public:
    explicit NoChangeError(const std::string& what) : std::runtime_error(what) {}
};

// Simulated per-call timeout raised by fault-injection agents.
class AgentTimeout : public std::runtime_error {
public:
    explicit AgentTimeout(const std::string& what) : std::runtime_error(what) {}
};

class ConsensusFailed : public std::runtime_error {
public:
    explicit ConsensusFailed(const std::string& what) : std::runtime_error(what) {}
};

class EmptyDecomposition : public std::runtime_error {
public:
    explicit EmptyDecomposition(const std::string& what) : std::runtime_error(what) {}
};

class Unavailable : public std::runtime_error {
public:
    explicit Unavailable(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace foa
