#pragma once

#include <string>
#include <vector>

namespace wat {

// One published accuracy table cell pair: a method's (average, worst) against
// the baseline's, plus the rho value printed next to them.
struct GoldenRow {
    const char* table;
    const char* method;
    const char* column;  // natural / pgd / cw / aa
    double base_avg, base_worst;
    double treated_avg, treated_worst;
    double printed_rho;
};

struct GoldenCheck {
    GoldenRow row;
    double recomputed = 0.0;
    bool matches = false;  // |recomputed - printed| <= tolerance
};

const std::vector<GoldenRow>& golden_rho_rows();

std::vector<GoldenCheck> recompute_golden_rho(double tolerance = 0.001);

// Human-readable diff table for the CLI.
std::string render_golden_rho_report(const std::vector<GoldenCheck>& checks);

}  // namespace wat
