#pragma once

#include <complex>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nsd {

// Base of everything the library throws on bad input or numerical trouble.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
public:
    ValidationError(const std::string& field, const std::string& what);
    const std::string& field() const { return field_; }

private:
    std::string field_;
};

class GridTooNarrow : public Error {
public:
    explicit GridTooNarrow(double edge_magnitude);
    double edge_magnitude() const { return edge_; }

private:
    double edge_;
};

class ScatteringOverflow : public Error {
public:
    using Error::Error;
};

class SpectrumCountMismatch : public Error {
public:
    SpectrumCountMismatch(std::size_t expected, std::vector<std::complex<double>> found);
    std::size_t expected() const { return expected_; }
    const std::vector<std::complex<double>>& found() const { return found_; }

private:
    std::size_t expected_;
    std::vector<std::complex<double>> found_;
};

class RootRefinementFailed : public Error {
public:
    explicit RootRefinementFailed(std::complex<double> last_iterate);
    std::complex<double> last_iterate() const { return last_; }

private:
    std::complex<double> last_;
};

class BlowUp : public Error {
public:
    explicit BlowUp(long step);
    long step() const { return step_; }

private:
    long step_;
};

class EigenvalueCountChanged : public Error {
public:
    EigenvalueCountChanged(std::size_t before, std::size_t after);
};

class SolitonCollapse : public Error {
public:
    explicit SolitonCollapse(double z);
    double z() const { return z_; }

private:
    double z_;
};

// Non-fatal diagnostics. Default sink writes to stderr; tests silence it.
using WarningSink = std::function<void(const std::string&)>;
void set_warning_sink(WarningSink sink);
void warn(const std::string& msg);

}  // namespace nsd
