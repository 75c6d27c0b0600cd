#include "wat/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace wat {

ModelParams ModelParams::make_linear(int num_classes, int input_dim) {
    ModelParams p;
    p.kind = ModelKind::Linear;
    p.num_classes = num_classes;
    p.input_dim = input_dim;
    p.linear = Matrix(num_classes, input_dim);
    p.validate();
    return p;
}

ModelParams ModelParams::make_mlp(int num_classes, int input_dim, int hidden) {
    ModelParams p;
    p.kind = ModelKind::Mlp;
    p.num_classes = num_classes;
    p.input_dim = input_dim;
    p.hidden = hidden;
    p.layer1 = Matrix(hidden, input_dim);
    p.bias1 = Vec(hidden, 0.0);
    p.layer2 = Matrix(num_classes, hidden);
    p.bias2 = Vec(num_classes, 0.0);
    p.validate();
    return p;
}

ModelParams ModelParams::random_init(ModelKind kind, int num_classes, int input_dim, int hidden,
                                     double scale, Rng& rng) {
    ModelParams p = (kind == ModelKind::Linear) ? make_linear(num_classes, input_dim)
                                                : make_mlp(num_classes, input_dim, hidden);
    Vec flat = p.flatten();
    for (double& v : flat) v = scale * rng.normal();
    p.set_from_flat(flat);
    return p;
}

ModelParams ModelParams::zeros_like() const {
    ModelParams g = *this;
    std::fill(g.linear.data.begin(), g.linear.data.end(), 0.0);
    std::fill(g.layer1.data.begin(), g.layer1.data.end(), 0.0);
    std::fill(g.bias1.begin(), g.bias1.end(), 0.0);
    std::fill(g.layer2.data.begin(), g.layer2.data.end(), 0.0);
    std::fill(g.bias2.begin(), g.bias2.end(), 0.0);
    return g;
}

size_t ModelParams::param_count() const {
    if (kind == ModelKind::Linear) return linear.data.size();
    return layer1.data.size() + bias1.size() + layer2.data.size() + bias2.size();
}

Vec ModelParams::flatten() const {
    Vec out;
    out.reserve(param_count());
    if (kind == ModelKind::Linear) {
        out.insert(out.end(), linear.data.begin(), linear.data.end());
    } else {
        out.insert(out.end(), layer1.data.begin(), layer1.data.end());
        out.insert(out.end(), bias1.begin(), bias1.end());
        out.insert(out.end(), layer2.data.begin(), layer2.data.end());
        out.insert(out.end(), bias2.begin(), bias2.end());
    }
    return out;
}

void ModelParams::set_from_flat(std::span<const double> flat) {
    if (flat.size() != param_count()) throw std::invalid_argument("set_from_flat: size mismatch");
    size_t off = 0;
    auto take = [&](std::vector<double>& dst) {
        std::copy(flat.begin() + off, flat.begin() + off + dst.size(), dst.begin());
        off += dst.size();
    };
    if (kind == ModelKind::Linear) {
        take(linear.data);
    } else {
        take(layer1.data);
        take(bias1);
        take(layer2.data);
        take(bias2);
    }
}

void ModelParams::validate() const {
    if (num_classes < 2) throw std::invalid_argument("ModelParams: need at least 2 classes");
    if (input_dim < 1) throw std::invalid_argument("ModelParams: input_dim must be >= 1");
    if (kind == ModelKind::Mlp && hidden < 1)
        throw std::invalid_argument("ModelParams: hidden width must be >= 1");
    if (!all_finite(flatten())) throw std::invalid_argument("ModelParams: non-finite entry");
}

void LossSpec::validate() const {
    if (beta < 0.0) throw std::invalid_argument("LossSpec: beta must be >= 0");
    if (gamma <= 0.0) throw std::invalid_argument("LossSpec: gamma must be > 0");
}

namespace {

void require_finite(std::span<const double> v, const char* what) {
    if (!all_finite(v)) throw std::invalid_argument(std::string(what) + ": non-finite input");
}

double log_sum_exp(std::span<const double> v) {
    double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

}  // namespace

Vec softmax(std::span<const double> scores) {
    require_finite(scores, "softmax");
    double m = *std::max_element(scores.begin(), scores.end());
    Vec out(scores.size());
    double z = 0.0;
    for (size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::exp(scores[i] - m);
        z += out[i];
    }
    for (double& v : out) v /= z;
    return out;
}

Vec log_softmax(std::span<const double> scores) {
    require_finite(scores, "log_softmax");
    double lse = log_sum_exp(scores);
    Vec out(scores.size());
    for (size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] - lse;
    return out;
}

double cross_entropy(std::span<const double> scores, int label) {
    require_finite(scores, "cross_entropy");
    if (label < 0 || label >= static_cast<int>(scores.size()))
        throw std::invalid_argument("cross_entropy: label out of range");
    return log_sum_exp(scores) - scores[label];
}

double kl_divergence(std::span<const double> scores_p, std::span<const double> scores_q) {
    require_finite(scores_p, "kl_divergence");
    require_finite(scores_q, "kl_divergence");
    if (scores_p.size() != scores_q.size())
        throw std::invalid_argument("kl_divergence: size mismatch");
    Vec lp = log_softmax(scores_p);
    Vec lq = log_softmax(scores_q);
    double kl = 0.0;
    for (size_t i = 0; i < lp.size(); ++i) kl += std::exp(lp[i]) * (lp[i] - lq[i]);
    return std::max(kl, 0.0);
}

double trades_loss(const ModelParams& params, std::span<const double> x,
                   std::span<const double> x_adv, int label, double beta) {
    Vec s = forward(params, x);
    Vec s_adv = forward(params, x_adv);
    return cross_entropy(s, label) + beta * kl_divergence(s, s_adv);
}

double margin(std::span<const double> scores, int label) {
    if (scores.size() < 2) throw std::invalid_argument("margin: need at least 2 classes");
    if (label < 0 || label >= static_cast<int>(scores.size()))
        throw std::invalid_argument("margin: label out of range");
    double best = -std::numeric_limits<double>::infinity();
    for (size_t i = 0; i < scores.size(); ++i) {
        if (static_cast<int>(i) == label) continue;
        if (scores[i] > best) best = scores[i];
    }
    return scores[label] - best;
}

double ramp_loss(double t, double gamma) {
    if (gamma <= 0.0) throw std::invalid_argument("ramp_loss: gamma must be > 0");
    if (t <= 0.0) return 1.0;
    if (t >= gamma) return 0.0;
    return 1.0 - t / gamma;
}

int predict(std::span<const double> scores) {
    int best = 0;
    for (size_t i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = static_cast<int>(i);
    return best;
}

Vec forward(const ModelParams& params, std::span<const double> x) {
    if (static_cast<int>(x.size()) != params.input_dim)
        throw std::invalid_argument("forward: input dimension mismatch");
    if (params.kind == ModelKind::Linear) return matvec(params.linear, x);
    Vec h = matvec(params.layer1, x);
    for (int i = 0; i < params.hidden; ++i) h[i] = std::max(h[i] + params.bias1[i], 0.0);
    Vec s = matvec(params.layer2, h);
    for (int i = 0; i < params.num_classes; ++i) s[i] += params.bias2[i];
    return s;
}

Vec input_grad(const ModelParams& params, std::span<const double> x,
               std::span<const double> cotangent) {
    if (params.kind == ModelKind::Linear) return matvec_t(params.linear, cotangent);
    Vec pre = matvec(params.layer1, x);
    for (int i = 0; i < params.hidden; ++i) pre[i] += params.bias1[i];
    Vec u = matvec_t(params.layer2, cotangent);
    // ReLU subgradient: 0 at exactly 0
    for (int i = 0; i < params.hidden; ++i)
        if (pre[i] <= 0.0) u[i] = 0.0;
    return matvec_t(params.layer1, u);
}

void accumulate_param_grad(const ModelParams& params, std::span<const double> x,
                           std::span<const double> cotangent, double coeff, ModelParams& grad) {
    if (params.kind == ModelKind::Linear) {
        add_outer(grad.linear, coeff, cotangent, x);
        return;
    }
    Vec pre = matvec(params.layer1, x);
    Vec h(params.hidden);
    for (int i = 0; i < params.hidden; ++i) {
        pre[i] += params.bias1[i];
        h[i] = std::max(pre[i], 0.0);
    }
    add_outer(grad.layer2, coeff, cotangent, h);
    for (int i = 0; i < params.num_classes; ++i) grad.bias2[i] += coeff * cotangent[i];
    Vec u = matvec_t(params.layer2, cotangent);
    for (int i = 0; i < params.hidden; ++i)
        if (pre[i] <= 0.0) u[i] = 0.0;
    add_outer(grad.layer1, coeff, u, x);
    for (int i = 0; i < params.hidden; ++i) grad.bias1[i] += coeff * u[i];
}

LossCotangents example_loss(const ModelParams& params, std::span<const double> x,
                            std::span<const double> x_adv, int label, const LossSpec& spec) {
    spec.validate();
    const int K = params.num_classes;
    if (label < 0 || label >= K) throw std::invalid_argument("example_loss: label out of range");
    LossCotangents out;
    out.clean = Vec(K, 0.0);
    out.adv = Vec(K, 0.0);
    Vec s = forward(params, x);

    switch (spec.kind) {
        case LossKind::CrossEntropy: {
            out.loss = cross_entropy(s, label);
            Vec p = softmax(s);
            for (int i = 0; i < K; ++i) out.clean[i] = p[i];
            out.clean[label] -= 1.0;
            break;
        }
        case LossKind::Kl:
        case LossKind::Trades: {
            Vec s_adv = forward(params, x_adv);
            Vec lp = log_softmax(s);
            Vec lq = log_softmax(s_adv);
            double kl = 0.0;
            for (int i = 0; i < K; ++i) kl += std::exp(lp[i]) * (lp[i] - lq[i]);
            kl = std::max(kl, 0.0);
            double beta = (spec.kind == LossKind::Kl) ? 1.0 : spec.beta;
            // d KL / d s_j = p_j ((lp_j - lq_j) - KL);  d KL / d s'_j = q_j - p_j
            for (int i = 0; i < K; ++i) {
                double p = std::exp(lp[i]);
                double q = std::exp(lq[i]);
                out.clean[i] += beta * p * (lp[i] - lq[i] - kl);
                out.adv[i] += beta * (q - p);
            }
            out.uses_adv = true;
            if (spec.kind == LossKind::Kl) {
                out.loss = kl;
            } else {
                out.loss = cross_entropy(s, label) + spec.beta * kl;
                Vec p = softmax(s);
                for (int i = 0; i < K; ++i) out.clean[i] += p[i];
                out.clean[label] -= 1.0;
            }
            break;
        }
        case LossKind::RampMargin: {
            double m = margin(s, label);
            out.loss = ramp_loss(m, spec.gamma);
            if (m > 0.0 && m < spec.gamma) {
                int runner = -1;
                for (int i = 0; i < K; ++i) {
                    if (i == label) continue;
                    if (runner < 0 || s[i] > s[runner]) runner = i;
                }
                out.clean[label] = -1.0 / spec.gamma;
                out.clean[runner] = 1.0 / spec.gamma;
            }
            break;
        }
    }
    if (!std::isfinite(out.loss)) throw std::runtime_error("example_loss: non-finite loss");
    return out;
}

LossGrad loss_and_grad(const ModelParams& params, const LabeledBatch& batch, const LossSpec& spec,
                       const Vec& class_weights) {
    const int n = batch.size();
    const int K = params.num_classes;
    if (n == 0) throw std::invalid_argument("loss_and_grad: empty batch");
    if (static_cast<int>(class_weights.size()) != K + 1)
        throw std::invalid_argument("loss_and_grad: weights must have K+1 entries");
    double wsum = 0.0;
    for (double w : class_weights) {
        if (w < 0.0) throw std::invalid_argument("loss_and_grad: negative class weight");
        wsum += w;
    }
    if (std::fabs(wsum - 1.0) > 1e-9)
        throw std::invalid_argument("loss_and_grad: class weights must sum to 1");

    std::vector<int> class_count(K, 0);
    for (int i = 0; i < n; ++i) {
        int y = batch.labels[i];
        if (y < 0 || y >= K) throw std::invalid_argument("loss_and_grad: label out of range");
        ++class_count[y];
    }

    LossGrad out;
    out.grad = params.zeros_like();
    for (int i = 0; i < n; ++i) {
        int y = batch.labels[i];
        // example i appears in L_0 with weight 1/n and in L_y with weight 1/n_y
        double coeff = class_weights[0] / n + class_weights[y + 1] / class_count[y];
        auto x = batch.inputs.row(i);
        auto x_adv = batch.adversarial ? batch.adversarial->row(i) : x;
        LossCotangents lc = example_loss(params, x, x_adv, y, spec);
        out.loss += coeff * lc.loss;
        accumulate_param_grad(params, x, lc.clean, coeff, out.grad);
        if (lc.uses_adv) accumulate_param_grad(params, x_adv, lc.adv, coeff, out.grad);
    }
    return out;
}

}  // namespace wat
