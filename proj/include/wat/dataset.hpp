#pragma once

#include <string>
#include <vector>

#include "wat/linalg.hpp"
#include "wat/rng.hpp"

namespace wat {

struct Dataset {
    Matrix inputs;                               // n x d
    std::vector<int> labels;                     // values in [0, K-1], contiguous classes
    std::vector<std::vector<int>> class_index;   // class_index[k] lists rows of class k
    int num_classes = 0;
    std::string provenance;

    int size() const { return inputs.rows; }
    int dim() const { return inputs.cols; }

    // Rebuilds class_index from labels and checks the invariants.
    void finalize();
};

// Synthetic class-conditional isotropic Gaussian mixture, clamped to a box so
// pixel-style perturbation radii stay meaningful.
struct MixtureSpec {
    int num_classes = 0;
    int dim = 0;
    std::vector<Vec> means;     // K x d
    Vec stds;                   // K, all > 0
    std::vector<int> counts;    // K, all >= 1
    double box_lo = 0.0;
    double box_hi = 1.0;
    uint64_t seed = 0;

    void validate() const;
};

Dataset gaussian_mixture(const MixtureSpec& spec);

// Exactly per_class_val members of each class go to the validation set
// (the tail of each class index list); the rest stay in train. Row order of
// the originals is preserved within each output.
std::pair<Dataset, Dataset> stratified_split(const Dataset& data, int per_class_val);

// CSV contract: header "label,x0,...,x{d-1}", base-10 integer labels,
// decimal floating point features at 17 significant digits.
void save_csv_dataset(const Dataset& data, const std::string& path);
Dataset load_csv_dataset(const std::string& path);

}  // namespace wat
