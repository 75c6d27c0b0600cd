#include "wat/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wat {

void Dataset::finalize() {
    const int n = size();
    if (static_cast<int>(labels.size()) != n)
        throw std::invalid_argument("Dataset: labels/inputs size mismatch");
    if (num_classes < 1) throw std::invalid_argument("Dataset: num_classes must be >= 1");
    class_index.assign(num_classes, {});
    for (int i = 0; i < n; ++i) {
        int y = labels[i];
        if (y < 0 || y >= num_classes) throw std::invalid_argument("Dataset: label out of range");
        class_index[y].push_back(i);
    }
}

void MixtureSpec::validate() const {
    if (num_classes < 1 || dim < 1) throw std::invalid_argument("MixtureSpec: degenerate shape");
    if (static_cast<int>(means.size()) != num_classes ||
        static_cast<int>(stds.size()) != num_classes ||
        static_cast<int>(counts.size()) != num_classes)
        throw std::invalid_argument("MixtureSpec: per-class field length mismatch");
    for (const Vec& m : means)
        if (static_cast<int>(m.size()) != dim)
            throw std::invalid_argument("MixtureSpec: mean dimension mismatch");
    for (double s : stds)
        if (!(s > 0.0)) throw std::invalid_argument("MixtureSpec: std must be > 0");
    for (int c : counts)
        if (c < 1) throw std::invalid_argument("MixtureSpec: counts must be >= 1");
    if (!(box_lo < box_hi)) throw std::invalid_argument("MixtureSpec: empty domain box");
}

Dataset gaussian_mixture(const MixtureSpec& spec) {
    spec.validate();
    int n = 0;
    for (int c : spec.counts) n += c;
    Dataset out;
    out.inputs = Matrix(n, spec.dim);
    out.labels.resize(n);
    out.num_classes = spec.num_classes;
    int row = 0;
    for (int k = 0; k < spec.num_classes; ++k) {
        Rng rng = Rng::substream(spec.seed, {rngkey::kDataGen, static_cast<uint64_t>(k)});
        for (int i = 0; i < spec.counts[k]; ++i, ++row) {
            out.labels[row] = k;
            for (int j = 0; j < spec.dim; ++j) {
                double v = spec.means[k][j] + spec.stds[k] * rng.normal();
                out.inputs(row, j) = std::clamp(v, spec.box_lo, spec.box_hi);
            }
        }
    }
    out.provenance = "gaussian_mixture(seed=" + std::to_string(spec.seed) + ")";
    out.finalize();
    return out;
}

namespace {

Dataset subset(const Dataset& data, const std::vector<int>& rows, const std::string& tag) {
    Dataset out;
    out.inputs = Matrix(static_cast<int>(rows.size()), data.dim());
    out.labels.resize(rows.size());
    out.num_classes = data.num_classes;
    out.provenance = data.provenance + tag;
    for (size_t i = 0; i < rows.size(); ++i) {
        auto src = data.inputs.row(rows[i]);
        std::copy(src.begin(), src.end(), out.inputs.row(static_cast<int>(i)).begin());
        out.labels[i] = data.labels[rows[i]];
    }
    out.finalize();
    return out;
}

}  // namespace

std::pair<Dataset, Dataset> stratified_split(const Dataset& data, int per_class_val) {
    if (per_class_val < 0) throw std::invalid_argument("stratified_split: negative count");
    std::vector<int> train_rows, val_rows;
    for (int k = 0; k < data.num_classes; ++k) {
        const auto& idx = data.class_index[k];
        if (static_cast<int>(idx.size()) <= per_class_val && per_class_val > 0)
            throw std::invalid_argument("stratified_split: class " + std::to_string(k) +
                                        " has too few members");
        size_t cut = idx.size() - per_class_val;
        train_rows.insert(train_rows.end(), idx.begin(), idx.begin() + cut);
        val_rows.insert(val_rows.end(), idx.begin() + cut, idx.end());
    }
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(val_rows.begin(), val_rows.end());
    return {subset(data, train_rows, "/train"), subset(data, val_rows, "/val")};
}

void save_csv_dataset(const Dataset& data, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_csv_dataset: cannot open " + path);
    out << "label";
    for (int j = 0; j < data.dim(); ++j) out << ",x" << j;
    out << "\n";
    char buf[64];
    for (int i = 0; i < data.size(); ++i) {
        out << data.labels[i];
        for (int j = 0; j < data.dim(); ++j) {
            std::snprintf(buf, sizeof(buf), "%.17g", data.inputs(i, j));
            out << ',' << buf;
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("save_csv_dataset: write failed for " + path);
}

Dataset load_csv_dataset(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_csv_dataset: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("load_csv_dataset: empty file");

    auto fail = [&](int lineno, const std::string& what) {
        throw std::runtime_error("load_csv_dataset: " + path + ":" + std::to_string(lineno) +
                                 ": " + what);
    };

    // header fixes d
    int d = 0;
    {
        std::stringstream ss(line);
        std::string field;
        if (!std::getline(ss, field, ',') || field != "label") fail(1, "bad header");
        while (std::getline(ss, field, ',')) {
            if (field != "x" + std::to_string(d)) fail(1, "bad header column '" + field + "'");
            ++d;
        }
        if (d == 0) fail(1, "no feature columns");
    }

    std::vector<double> values;
    std::vector<int> labels;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        if (!std::getline(ss, field, ',')) fail(lineno, "missing label");
        int y = 0;
        auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), y);
        if (ec != std::errc() || p != field.data() + field.size() || y < 0)
            fail(lineno, "malformed label '" + field + "'");
        int got = 0;
        while (std::getline(ss, field, ',')) {
            try {
                size_t pos = 0;
                double v = std::stod(field, &pos);
                if (pos != field.size()) throw std::invalid_argument(field);
                values.push_back(v);
            } catch (const std::exception&) {
                fail(lineno, "malformed value '" + field + "'");
            }
            ++got;
        }
        if (got != d) fail(lineno, "expected " + std::to_string(d) + " features, got " +
                                       std::to_string(got));
        labels.push_back(y);
    }
    if (labels.empty()) throw std::runtime_error("load_csv_dataset: " + path + ": no data rows");

    int k_max = *std::max_element(labels.begin(), labels.end());
    std::vector<bool> seen(k_max + 1, false);
    for (int y : labels) seen[y] = true;
    for (int k = 0; k <= k_max; ++k)
        if (!seen[k])
            throw std::runtime_error("load_csv_dataset: " + path + ": labels not contiguous, class " +
                                     std::to_string(k) + " missing");

    Dataset out;
    out.num_classes = k_max + 1;
    out.labels = std::move(labels);
    out.inputs = Matrix(static_cast<int>(out.labels.size()), d);
    std::copy(values.begin(), values.end(), out.inputs.data.begin());
    out.provenance = path;
    out.finalize();
    return out;
}

}  // namespace wat
