#include "wat/golden.hpp"

#include <cmath>
#include <cstdio>

#include "wat/metrics.hpp"

namespace wat {

namespace {

// Published accuracy/rho tables: ResNet-18 on CIFAR-10 and CIFAR-100,
// WRN-34-10 on CIFAR-10, and the eta sweep. Accuracies in percent, as printed.
// Baselines (TRADES row) per column:
//   cifar10:  nat 82.11/64.6  pgd 51.69/25.2  cw 50.38/24.1  aa 48.64/21.7
//   cifar100: nat 54.57/19.0  pgd 27.39/3.0   cw 24.87/1.0   aa 23.57/1.0
//   wrn:      nat 84.51/64.7  pgd 53.68/23.3  cw 53.18/22.8  aa 51.22/20.9
std::vector<GoldenRow> build_rows() {
    std::vector<GoldenRow> rows;
    struct Block {
        const char* table;
        double base[4][2];  // nat, pgd, cw, aa baselines: {avg, worst}
        struct Method {
            const char* name;
            double acc[4][2];
            double rho[4];
        };
        std::vector<Method> methods;
    };
    const char* cols[4] = {"natural", "pgd", "cw", "aa"};

    std::vector<Block> blocks = {
        {"table1-cifar10",
         {{82.11, 64.6}, {51.69, 25.2}, {50.38, 24.1}, {48.64, 21.7}},
         {
             {"FRL-RW",
              {{81.75, 69.2}, {49.02, 30.8}, {47.80, 27.8}, {46.08, 25.4}},
              {0.067, 0.171, 0.102, 0.118}},
             {"FRL-RWRM",
              {{80.69, 71.4}, {49.16, 32.0}, {47.45, 28.1}, {45.94, 26.1}},
              {0.088, 0.221, 0.108, 0.147}},
             {"CSL",
              {{76.29, 67.1}, {43.30, 33.8}, {41.60, 31.3}, {40.32, 29.2}},
              {-0.032, 0.179, 0.124, 0.175}},
             {"Ours",
              {{80.98, 69.5}, {49.13, 36.6}, {47.57, 33.3}, {46.04, 30.1}},
              {0.062, 0.403, 0.326, 0.334}},
         }},
        {"table1-cifar100",
         {{54.57, 19.00}, {27.39, 3.00}, {24.87, 1.00}, {23.57, 1.00}},
         {
             {"FRL-RW",
              {{53.08, 24.00}, {25.76, 3.00}, {22.39, 2.00}, {21.09, 1.00}},
              {0.236, -0.060, 0.900, -0.105}},
             {"FRL-RWRM",
              {{52.55, 22.00}, {26.04, 4.00}, {22.33, 2.00}, {21.11, 2.00}},
              {0.121, 0.284, 0.898, 0.896}},
             {"CSL",
              {{53.83, 21.00}, {26.19, 4.00}, {22.35, 2.00}, {22.25, 2.00}},
              {0.092, 0.290, 0.899, 0.944}},
             {"Ours",
              {{53.99, 19.00}, {26.91, 5.00}, {24.26, 3.00}, {22.89, 3.00}},
              {-0.020, 0.643, 1.945, 1.971}},
         }},
        {"table2-wrn",
         {{84.51, 64.7}, {53.68, 23.3}, {53.18, 22.8}, {51.22, 20.9}},
         {
             {"FRL-RW",
              {{83.93, 74.5}, {50.59, 30.0}, {50.58, 29.1}, {48.36, 27.1}},
              {0.145, 0.230, 0.227, 0.241}},
             {"FRL-RWRM",
              {{83.86, 72.1}, {51.25, 32.9}, {51.08, 32.2}, {48.98, 28.6}},
              {0.107, 0.367, 0.373, 0.325}},
             {"CSL",
              {{79.78, 75.1}, {45.70, 32.2}, {44.74, 30.8}, {43.10, 29.4}},
              {0.105, 0.233, 0.192, 0.248}},
             {"Ours",
              {{83.71, 74.0}, {51.53, 34.9}, {50.89, 33.4}, {49.12, 30.7}},
              {0.062, 0.458, 0.422, 0.428}},
         }},
        {"table3-eta",
         {{82.11, 64.6}, {51.69, 25.2}, {50.38, 24.1}, {48.64, 21.7}},
         {
             {"eta=0.01",
              {{81.54, 68.0}, {50.50, 26.6}, {49.86, 25.0}, {47.65, 22.6}},
              {0.046, 0.033, 0.027, 0.021}},
             {"eta=0.05",
              {{81.76, 69.3}, {50.06, 34.2}, {49.53, 31.7}, {47.05, 28.1}},
              {0.068, 0.326, 0.298, 0.262}},
             {"eta=0.1",
              {{80.98, 69.5}, {49.13, 36.6}, {47.57, 33.3}, {46.04, 30.1}},
              {0.062, 0.403, 0.326, 0.334}},
             {"eta=0.5",
              {{79.30, 67.3}, {48.09, 37.5}, {45.42, 32.5}, {43.98, 31.1}},
              {0.008, 0.418, 0.250, 0.337}},
         }},
    };

    for (const Block& b : blocks)
        for (const auto& m : b.methods)
            for (int c = 0; c < 4; ++c)
                rows.push_back({b.table, m.name, cols[c], b.base[c][0], b.base[c][1],
                                m.acc[c][0], m.acc[c][1], m.rho[c]});
    return rows;
}

}  // namespace

const std::vector<GoldenRow>& golden_rho_rows() {
    static const std::vector<GoldenRow> rows = build_rows();
    return rows;
}

std::vector<GoldenCheck> recompute_golden_rho(double tolerance) {
    std::vector<GoldenCheck> out;
    for (const GoldenRow& r : golden_rho_rows()) {
        GoldenCheck c;
        c.row = r;
        c.recomputed = rho_values(r.base_avg, r.base_worst, r.treated_avg, r.treated_worst);
        c.matches = std::fabs(c.recomputed - r.printed_rho) <= tolerance;
        out.push_back(c);
    }
    return out;
}

std::string render_golden_rho_report(const std::vector<GoldenCheck>& checks) {
    std::string out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-16s %-10s %-8s %9s %9s %7s  %s\n", "table", "method",
                  "column", "printed", "computed", "diff", "status");
    out += line;
    int mismatches = 0;
    for (const auto& c : checks) {
        double diff = c.recomputed - c.row.printed_rho;
        if (!c.matches) ++mismatches;
        std::snprintf(line, sizeof(line), "%-16s %-10s %-8s %9.3f %9.4f %+7.4f  %s\n", c.row.table,
                      c.row.method, c.row.column, c.row.printed_rho, c.recomputed, diff,
                      c.matches ? "ok" : "MISMATCH");
        out += line;
    }
    std::snprintf(line, sizeof(line), "%zu entries, %d mismatch(es) at tolerance 0.001\n",
                  checks.size(), mismatches);
    out += line;
    return out;
}

}  // namespace wat
