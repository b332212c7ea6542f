#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace surfchaos {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid parameters or input outside an operation's domain.
struct DomainError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct StepUnderflow : Error {
    double t;
    StepUnderflow(const std::string& what, double t_) : Error(what), t(t_) {}
};

struct QuadratureError : Error {
    double estimate;
    double error_estimate;
    QuadratureError(const std::string& what, double est, double err)
        : Error(what), estimate(est), error_estimate(err) {}
};

struct NonContraction : Error {
    std::vector<double> ratios;
    NonContraction(const std::string& what, std::vector<double> r)
        : Error(what), ratios(std::move(r)) {}
};

struct SignalBelowNoise : Error {
    double amplitude;
    double noise;
    SignalBelowNoise(const std::string& what, double amp, double n)
        : Error(what), amplitude(amp), noise(n) {}
};

struct CoverageGap : Error {
    using Error::Error;
};

struct RootCountError : Error {
    std::vector<double> roots;
    RootCountError(const std::string& what, std::vector<double> r)
        : Error(what), roots(std::move(r)) {}
};

struct ExtrapolationError : Error {
    using Error::Error;
};

struct LeftDomain : Error {
    using Error::Error;
};

struct ExcursionEscape : Error {
    using Error::Error;
};

struct SearchExhausted : Error {
    std::vector<int> prefix;  // deepest symbol prefix realised
    SearchExhausted(const std::string& what, std::vector<int> p) : Error(what), prefix(std::move(p)) {}
};

struct StripOverlap : Error {
    int first, second;
    StripOverlap(const std::string& what, int a, int b) : Error(what), first(a), second(b) {}
};

}  // namespace surfchaos
