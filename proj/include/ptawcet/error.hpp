#ifndef PTAWCET_ERROR_HPP
#define PTAWCET_ERROR_HPP

#include <stdexcept>
#include <string>

namespace ptawcet {

// Failure of an analysis, as opposed to a malformed input file.
class AnalysisError : public std::runtime_error {
public:
    enum class Kind {
        UnboundedDelay,            // a zone left CLK without a finite upper bound
        WcetUnbounded,             // UnboundedDelay attributed to a location by the engine
        NonConvergingCycle,        // cycle with sigma >= 1: expected delay diverges
        NoExitEdge,                // cycle with no edge leaving it
        AccelerationInconsistent,  // extrapolated zone was empty (internal; triggers fallback)
        Usage,                     // API misuse such as dimension mismatch or resetting CLK
    };

    AnalysisError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

// Syntax error in a model file; line and column are 1-based.
class ParseError : public std::runtime_error {
public:
    ParseError(int line, int column, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ", column " +
                             std::to_string(column) + ": " + what),
          line_(line),
          column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

}  // namespace ptawcet

#endif
