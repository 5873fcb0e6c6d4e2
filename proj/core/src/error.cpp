#include "nsd/error.hpp"

#include <iostream>
#include <mutex>
#include <sstream>

namespace nsd {

namespace {
std::string fmt_complex(std::complex<double> z) {
    std::ostringstream os;
    os.precision(12);
    os << z.real() << (z.imag() < 0 ? "-" : "+") << std::abs(z.imag()) << "j";
    return os.str();
}

std::mutex sink_mutex;
WarningSink& sink() {
    static WarningSink s = [](const std::string& m) { std::cerr << "warning: " << m << "\n"; };
    return s;
}
}  // namespace

ValidationError::ValidationError(const std::string& field, const std::string& what)
    : Error("invalid " + field + ": " + what), field_(field) {}

GridTooNarrow::GridTooNarrow(double edge_magnitude)
    : Error("grid too narrow: edge magnitude " + std::to_string(edge_magnitude)), edge_(edge_magnitude) {}

SpectrumCountMismatch::SpectrumCountMismatch(std::size_t expected, std::vector<std::complex<double>> found)
    : Error([&] {
          std::ostringstream os;
          os << "spectrum count mismatch: expected " << expected << ", found " << found.size();
          for (auto z : found) os << " " << fmt_complex(z);
          return os.str();
      }()),
      expected_(expected),
      found_(std::move(found)) {}

RootRefinementFailed::RootRefinementFailed(std::complex<double> last_iterate)
    : Error("root refinement failed, last iterate " + fmt_complex(last_iterate)), last_(last_iterate) {}

BlowUp::BlowUp(long step) : Error("blow-up: non-finite field at step " + std::to_string(step)), step_(step) {}

EigenvalueCountChanged::EigenvalueCountChanged(std::size_t before, std::size_t after)
    : Error("eigenvalue lost/created: " + std::to_string(before) + " in, " + std::to_string(after) + " out") {}

SolitonCollapse::SolitonCollapse(double z)
    : Error("soliton collapse in SDE at z = " + std::to_string(z)), z_(z) {}

void set_warning_sink(WarningSink s) {
    std::lock_guard<std::mutex> lock(sink_mutex);
    sink() = s ? std::move(s) : WarningSink([](const std::string&) {});
}

void warn(const std::string& msg) {
    std::lock_guard<std::mutex> lock(sink_mutex);
    sink()(msg);
}

}  // namespace nsd
