#pragma once

#include <string>

#include "wat/attack.hpp"
#include "wat/dataset.hpp"
#include "wat/model.hpp"

namespace wat {

struct AccSummary {
    Vec per_class;       // fractions in [0,1]
    double average = 0;  // fraction correct over the whole set
    double worst = 0;
    int worst_class = 0;  // lowest index on ties
    std::string kind;     // "natural", "robust(pgd)", "robust(exact)"
};

// Natural accuracy when attack is null. With an attack, an example counts as
// robust-correct only if both the clean and the attacked predictions are
// correct (x itself lies in the ball, so a clean error is a robust error).
AccSummary class_accuracies(const ModelParams& params, const Dataset& test,
                            const AttackConfig* attack, uint64_t seed);

// Closed-form l-inf adversary for linear models: robust-correct iff the exact
// worst-case margin is positive.
AccSummary class_accuracies_exact(const ModelParams& params, const Dataset& test, double epsilon);

// (treated.worst - base.worst)/base.worst - (base.average - treated.average)/base.average
double rho(const AccSummary& base, const AccSummary& treated);

// Same arithmetic on bare accuracy values (any common scale).
double rho_values(double base_avg, double base_worst, double treated_avg, double treated_worst);

// Population variance of the per-class accuracies.
double cv(const Vec& per_class);

}  // namespace wat
