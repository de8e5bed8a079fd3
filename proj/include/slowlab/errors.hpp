#pragma once

#include <stdexcept>
#include <string>

namespace slowlab {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class InvalidArgument : public Error {
public:
    explicit InvalidArgument(const std::string& what) : Error(what) {}
};

class NotPositiveDefinite : public Error {
public:
    explicit NotPositiveDefinite(const std::string& what) : Error(what) {}
};

class SingularMatrix : public Error {
public:
    explicit SingularMatrix(const std::string& what) : Error(what) {}
};

/// A map produced a non-finite value; carries the offending stencil point.
class EvaluationError : public Error {
public:
    EvaluationError(const std::string& what, std::string point_desc)
        : Error(what + " at " + point_desc), point(std::move(point_desc)) {}
    std::string point;
};

class InsufficientData : public Error {
public:
    explicit InsufficientData(const std::string& what) : Error(what) {}
};

/// Evaluation requested outside a model's declared domain.
class DomainExit : public Error {
public:
    DomainExit(const std::string& what, double x0, double x1, double x2)
        : Error(what), where{x0, x1, x2} {}
    double where[3];
};

class DegenerateField : public Error {
public:
    explicit DegenerateField(const std::string& what) : Error(what) {}
};

/// E0.B0 != 0 or |B0|^2 - |E0|^2 <= 0; carries both Lorentz scalars.
class MagnetizationViolation : public Error {
public:
    MagnetizationViolation(const std::string& what, double eb, double bb_ee)
        : Error(what + " (E.B=" + std::to_string(eb) +
                ", B^2-E^2=" + std::to_string(bb_ee) + ")"),
          s_eb(eb), s_bb_ee(bb_ee) {}
    double s_eb;
    double s_bb_ee;
};

class DegenerateKernel : public Error {
public:
    explicit DegenerateKernel(const std::string& what) : Error(what) {}
};

class InvalidSetup : public Error {
public:
    explicit InvalidSetup(const std::string& what) : Error(what) {}
};

class SingularJacobian : public Error {
public:
    explicit SingularJacobian(const std::string& what) : Error(what) {}
};

/// Configuration file problems; the CLI maps this to exit code 2.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

} // namespace slowlab
