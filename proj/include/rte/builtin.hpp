#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "rte/scenario_io.hpp"
#include "rte/simulation.hpp"

namespace rte::builtin {

inline constexpr Copula gumbel_hougaard_5{CopulaFamily::gumbel_hougaard, 5.0};
inline constexpr Copula clayton_minus_0_6{CopulaFamily::clayton, -0.6};

/// Exp(2) against a 50/50 Exp(3)/Exp(lambda) mixture, tau = 1, no censoring.
Scenario exp_mixture(const Copula& copula, double lambda, std::size_t n = 100);

/// Gompertz(0.6, b) against Exp(3), tau = 0.6, no censoring.
Scenario gompertz_exp(const Copula& copula, double b, std::size_t n = 100);

/// Uniform censoring bounds per level, light to strong.
std::vector<CensoringLevel> exp_mixture_censoring();
std::vector<CensoringLevel> gompertz_censoring();

/// The four null calibrations: {gh, clayton} x {exp_mix_lambda, gompertz_b}.
std::vector<CalibrationSpec> null_calibrations(std::uint64_t seed, std::size_t N, unsigned threads = 0);

}  // namespace rte::builtin
