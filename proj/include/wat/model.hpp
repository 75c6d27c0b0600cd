#pragma once

#include <optional>
#include <span>
#include <string>

#include "wat/linalg.hpp"
#include "wat/rng.hpp"

namespace wat {

enum class ModelKind { Linear, Mlp };

// Parameters of a K-class scorer: either a K x d linear map (row k scores
// class k) or a two-layer ReLU MLP.
struct ModelParams {
    ModelKind kind = ModelKind::Linear;
    int num_classes = 0;
    int input_dim = 0;
    int hidden = 0;  // Mlp only

    Matrix linear;  // K x d

    Matrix layer1;  // h x d
    Vec bias1;      // h
    Matrix layer2;  // K x h
    Vec bias2;      // K

    static ModelParams make_linear(int num_classes, int input_dim);
    static ModelParams make_mlp(int num_classes, int input_dim, int hidden);
    static ModelParams random_init(ModelKind kind, int num_classes, int input_dim, int hidden,
                                   double scale, Rng& rng);

    // Zero-filled gradient container of the same shape.
    ModelParams zeros_like() const;

    size_t param_count() const;
    Vec flatten() const;
    void set_from_flat(std::span<const double> flat);

    void validate() const;

    bool operator==(const ModelParams&) const = default;
};

enum class LossKind { CrossEntropy, Kl, Trades, RampMargin };

struct LossSpec {
    LossKind kind = LossKind::Trades;
    double beta = 6.0;   // TRADES trade-off, >= 0
    double gamma = 1.0;  // ramp margin, > 0

    void validate() const;
};

struct LabeledBatch {
    Matrix inputs;                      // n x d
    std::vector<int> labels;            // values in [0, K-1]
    std::optional<Matrix> adversarial;  // n x d, same rows as inputs

    int size() const { return inputs.rows; }
};

Vec softmax(std::span<const double> scores);
Vec log_softmax(std::span<const double> scores);
double cross_entropy(std::span<const double> scores, int label);
double kl_divergence(std::span<const double> scores_p, std::span<const double> scores_q);
double trades_loss(const ModelParams& params, std::span<const double> x,
                   std::span<const double> x_adv, int label, double beta);

// scores[y] - max_{y' != y} scores[y'] (ties among competitors take the lowest index)
double margin(std::span<const double> scores, int label);
double ramp_loss(double t, double gamma);

// Argmax with lowest-index tie-break.
int predict(std::span<const double> scores);

Vec forward(const ModelParams& params, std::span<const double> x);

// Gradient of <cotangent, f(x)> with respect to x.
Vec input_grad(const ModelParams& params, std::span<const double> x,
               std::span<const double> cotangent);

// grad += coeff * d<cotangent, f(x)>/dparams
void accumulate_param_grad(const ModelParams& params, std::span<const double> x,
                           std::span<const double> cotangent, double coeff, ModelParams& grad);

// Per-example loss plus the cotangents of the clean and adversarial score
// vectors (the pullbacks through forward() give the parameter gradient).
struct LossCotangents {
    double loss = 0.0;
    Vec clean;  // K
    Vec adv;    // K, all-zero when the loss ignores x_adv
    bool uses_adv = false;
};
LossCotangents example_loss(const ModelParams& params, std::span<const double> x,
                            std::span<const double> x_adv, int label, const LossSpec& spec);

struct LossGrad {
    double loss = 0.0;
    ModelParams grad;
};

// Class-weighted batch objective: sum_{k=0..K} w_k L_k where L_0 averages over
// the whole batch and L_k over class-k members (absent classes contribute 0).
LossGrad loss_and_grad(const ModelParams& params, const LabeledBatch& batch, const LossSpec& spec,
                       const Vec& class_weights);

}  // namespace wat
