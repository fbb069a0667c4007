#pragma once

#include <stdexcept>
#include <string>

namespace martinet {

/// An iterative method ran out of budget before meeting its tolerance.
/// `residual` carries the last measured defect (endpoint mismatch, sup-norm
/// change, ...), in the units of the method that raised it.
class NonConvergence : public std::runtime_error {
public:
    NonConvergence(const std::string& what, double residual, long iterations)
        : std::runtime_error(what), residual_(residual), iterations_(iterations) {}

    double residual() const { return residual_; }
    long iterations() const { return iterations_; }

private:
    double residual_;
    long iterations_;
};

/// A lattice sample was requested outside the lattice hull.
class OutOfHull : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

}  // namespace martinet
