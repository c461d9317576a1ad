#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "huf/errors.hpp"
#include "huf/model.hpp"
#include "huf/rng.hpp"
#include "huf/tensor.hpp"

namespace huf {

/// Destination for non-fatal warnings (nullptr silences them).
inline std::ostream*& warn_stream() {
    static std::ostream* s = &std::cerr;
    return s;
}

inline void warn(const std::string& msg) {
    if (warn_stream()) *warn_stream() << "warning: " << msg << "\n";
}

/// One continuous multi-axis recording of a single subject.
struct Recording {
    int subject_id = 0;
    Tensor signals;  // (6n, L)
    double sample_rate_hz = 0.0;
    std::vector<int> labels;  // per-sample, or a single recording-level label
    SensorLayout layout;

    std::size_t length() const { return signals.rank() == 2 ? signals.dim(1) : 0; }

    void validate() const {
        layout.validate();
        require(signals.rank() == 2 && signals.dim(0) == layout.total_channels(),
                "recording: signals must be (6n, L)");
        if (sample_rate_hz <= 0.0) throw DataError("recording: sample rate must be positive");
        if (labels.size() != 1 && labels.size() != length())
            throw DataError("recording: labels must be per-sample or a single value");
    }
};

/// Windowed segments ready for training.
struct SegmentBatch {
    Tensor windows;  // (N, 6n, W)
    std::vector<int> labels;
    std::vector<int> subject_ids;
    std::size_t window_size = 0;
    double overlap = 0.0;
    double sample_rate_hz = 0.0;
    SensorLayout layout;

    std::size_t count() const { return labels.size(); }

    Tensor window(std::size_t i) const {
        std::size_t c = windows.dim(1), w = windows.dim(2);
        Tensor out({c, w});
        const double* src = windows.data() + i * c * w;
        std::copy(src, src + c * w, out.data());
        return out;
    }
};

struct SplitPlan {
    std::vector<int> train_subjects;
    std::vector<int> test_subjects;
    double fraction = 0.7;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Resampling: linear interpolation by an integer factor.
// ---------------------------------------------------------------------------

inline Tensor resample(const Tensor& signals, double from_hz, double to_hz) {
    if (from_hz <= 0.0 || to_hz <= 0.0) throw ConfigError("resample: rates must be positive");
    double ratio = to_hz / from_hz;
    auto factor = static_cast<std::size_t>(std::llround(ratio));
    if (std::fabs(ratio - static_cast<double>(factor)) > 1e-9 || factor == 0) {
        throw ConfigError("resample: target rate must be an integer multiple of the source");
    }
    if (factor == 1) return signals;
    require(signals.rank() <= 2, "resample: expected (L) or (C, L)");
    std::size_t channels = signals.rank() == 2 ? signals.dim(0) : 1;
    std::size_t L = signals.rank() == 2 ? signals.dim(1) : signals.dim(0);
    if (L == 0) return signals;
    std::size_t L_out = (L - 1) * factor + 1;
    Tensor out(signals.rank() == 2 ? std::vector<std::size_t>{channels, L_out}
                                   : std::vector<std::size_t>{L_out});
    for (std::size_t c = 0; c < channels; ++c) {
        const double* x = signals.data() + c * L;
        double* y = out.data() + c * L_out;
        for (std::size_t i = 0; i + 1 < L; ++i) {
            y[i * factor] = x[i];
            for (std::size_t j = 1; j < factor; ++j) {
                double t = static_cast<double>(j) / static_cast<double>(factor);
                y[i * factor + j] = x[i] + t * (x[i + 1] - x[i]);
            }
        }
        y[(L - 1) * factor] = x[L - 1];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Sliding-window segmentation.
// ---------------------------------------------------------------------------

namespace detail {

// Majority label; ties break toward the label that appears earliest.
inline int majority_label(const std::vector<int>& labels, std::size_t first, std::size_t count) {
    std::map<int, std::size_t> tally;
    std::map<int, std::size_t> first_seen;
    for (std::size_t i = 0; i < count; ++i) {
        int lab = labels[first + i];
        ++tally[lab];
        if (!first_seen.count(lab)) first_seen[lab] = i;
    }
    int best = labels[first];
    std::size_t best_n = 0;
    for (const auto& [lab, n] : tally) {
        if (n > best_n || (n == best_n && first_seen[lab] < first_seen[best])) {
            best = lab;
            best_n = n;
        }
    }
    return best;
}

}  // namespace detail

inline SegmentBatch segment(const Recording& rec, std::size_t window_size, double overlap = 0.5) {
    rec.validate();
    if (window_size == 0) throw ConfigError("segment: window_size must be positive");
    if (overlap < 0.0 || overlap >= 1.0) throw ConfigError("segment: overlap must be in [0, 1)");

    SegmentBatch batch;
    batch.window_size = window_size;
    batch.overlap = overlap;
    batch.sample_rate_hz = rec.sample_rate_hz;
    batch.layout = rec.layout;

    std::size_t L = rec.length();
    std::size_t channels = rec.layout.total_channels();
    auto hop = static_cast<std::size_t>(std::llround(static_cast<double>(window_size) *
                                                     (1.0 - overlap)));
    if (hop == 0) hop = 1;
    if (L < window_size) {
        warn("recording shorter than window (" + std::to_string(L) + " < " +
             std::to_string(window_size) + "), produced no segments");
        batch.windows = Tensor::zeros({0, channels, window_size});
        return batch;
    }
    std::size_t n = (L - window_size) / hop + 1;
    batch.windows = Tensor({n, channels, window_size});
    for (std::size_t w = 0; w < n; ++w) {
        std::size_t start = w * hop;
        for (std::size_t c = 0; c < channels; ++c) {
            const double* src = rec.signals.data() + c * L + start;
            std::copy(src, src + window_size,
                      batch.windows.data() + (w * channels + c) * window_size);
        }
        int lab = rec.labels.size() == 1
                      ? rec.labels[0]
                      : detail::majority_label(rec.labels, start, window_size);
        batch.labels.push_back(lab);
        batch.subject_ids.push_back(rec.subject_id);
    }
    return batch;
}

inline SegmentBatch concat_batches(const std::vector<SegmentBatch>& batches) {
    if (batches.empty()) throw UsageError("concat_batches: nothing to concatenate");
    SegmentBatch out;
    out.window_size = batches.front().window_size;
    out.overlap = batches.front().overlap;
    out.sample_rate_hz = batches.front().sample_rate_hz;
    out.layout = batches.front().layout;
    std::size_t total = 0;
    for (const auto& b : batches) total += b.count();
    std::size_t channels = out.layout.total_channels();
    out.windows = Tensor({total, channels, out.window_size});
    std::size_t at = 0;
    for (const auto& b : batches) {
        require(b.window_size == out.window_size, "concat_batches: window size mismatch");
        std::copy(b.windows.data(), b.windows.data() + b.windows.size(),
                  out.windows.data() + at * channels * out.window_size);
        out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
        out.subject_ids.insert(out.subject_ids.end(), b.subject_ids.begin(),
                               b.subject_ids.end());
        at += b.count();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Subject-based hold-out split.
// ---------------------------------------------------------------------------

inline SplitPlan split_subjects(std::vector<int> subjects, double fraction, std::uint64_t seed) {
    std::sort(subjects.begin(), subjects.end());
    subjects.erase(std::unique(subjects.begin(), subjects.end()), subjects.end());
    if (subjects.size() < 2) throw DataError("split_subjects: need at least 2 subjects");
    if (fraction <= 0.0 || fraction >= 1.0)
        throw ConfigError("split_subjects: fraction must be in (0, 1)");

    Rng rng(seed);
    rng.shuffle(subjects);
    auto n_train = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(subjects.size())));
    n_train = std::max<std::size_t>(1, std::min(subjects.size() - 1, n_train));

    SplitPlan plan;
    plan.fraction = fraction;
    plan.seed = seed;
    plan.train_subjects.assign(subjects.begin(), subjects.begin() + n_train);
    plan.test_subjects.assign(subjects.begin() + n_train, subjects.end());
    std::sort(plan.train_subjects.begin(), plan.train_subjects.end());
    std::sort(plan.test_subjects.begin(), plan.test_subjects.end());
    return plan;
}

/// Subject-disjoint partitioning: train windows shuffled with the plan
/// seed, test windows kept in corpus order.
inline std::pair<SegmentBatch, SegmentBatch> apply_split(const SegmentBatch& batch,
                                                         const SplitPlan& plan) {
    std::set<int> train_set(plan.train_subjects.begin(), plan.train_subjects.end());
    std::set<int> test_set(plan.test_subjects.begin(), plan.test_subjects.end());
    std::vector<std::size_t> train_idx, test_idx;
    for (std::size_t i = 0; i < batch.count(); ++i) {
        if (train_set.count(batch.subject_ids[i])) {
            train_idx.push_back(i);
        } else if (test_set.count(batch.subject_ids[i])) {
            test_idx.push_back(i);
        } else {
            throw DataError("apply_split: subject " + std::to_string(batch.subject_ids[i]) +
                            " not covered by the split plan");
        }
    }
    Rng rng(Rng::derive(plan.seed, "train-shuffle"));
    rng.shuffle(train_idx);

    auto take = [&](const std::vector<std::size_t>& idx) {
        SegmentBatch out;
        out.window_size = batch.window_size;
        out.overlap = batch.overlap;
        out.sample_rate_hz = batch.sample_rate_hz;
        out.layout = batch.layout;
        std::size_t channels = batch.layout.total_channels();
        out.windows = Tensor({idx.size(), channels, batch.window_size});
        for (std::size_t i = 0; i < idx.size(); ++i) {
            const double* src = batch.windows.data() + idx[i] * channels * batch.window_size;
            std::copy(src, src + channels * batch.window_size,
                      out.windows.data() + i * channels * batch.window_size);
            out.labels.push_back(batch.labels[idx[i]]);
            out.subject_ids.push_back(batch.subject_ids[idx[i]]);
        }
        return out;
    };
    return {take(train_idx), take(test_idx)};
}

// ---------------------------------------------------------------------------
// Synthetic IMU corpus: each class is a distinct mixture of sinusoids.
// Discriminative units carry a class tone; the last unit (when there are
// at least two) carries only a class-independent tone, mimicking sensors
// whose contribution to an activity is negligible.
// ---------------------------------------------------------------------------

struct SyntheticConfig {
    std::size_t n_units = 4;
    std::size_t classes = 6;
    std::size_t windows_per_class = 200;
    std::size_t window_size = 512;
    double noise_std = 0.1;
    std::uint64_t seed = 42;
    std::size_t n_subjects = 10;
    double sample_rate_hz = 100.0;

    void validate() const {
        if (n_units == 0) throw ConfigError("synthetic: n_units must be positive");
        if (classes == 0) throw ConfigError("synthetic: classes must be positive");
        if (windows_per_class == 0) throw ConfigError("synthetic: windows_per_class must be positive");
        if (window_size == 0) throw ConfigError("synthetic: window_size must be positive");
        if (noise_std < 0.0) throw ConfigError("synthetic: noise_std must be nonnegative");
        if (n_subjects < 2) throw ConfigError("synthetic: need at least 2 subjects");
    }
};

/// Ground truth describing how the corpus was generated.
struct SyntheticSpec {
    std::vector<double> class_freqs;            // cycles per window
    std::vector<std::vector<double>> class_amp; // [class][unit]
    double common_freq = 4.0;
    std::vector<double> common_amp;             // [unit]
    std::vector<std::size_t> non_discriminative_units;
    SyntheticConfig config;
};

inline std::pair<SegmentBatch, SyntheticSpec> generate_synthetic(const SyntheticConfig& cfg) {
    cfg.validate();
    Rng rng(cfg.seed);
    constexpr double two_pi = 6.283185307179586476925286766559;

    SyntheticSpec spec;
    spec.config = cfg;
    // Class fundamentals at least 3 DFT bins apart.
    for (std::size_t c = 0; c < cfg.classes; ++c) {
        spec.class_freqs.push_back(6.0 + 3.0 * static_cast<double>(c));
    }
    spec.common_freq = 3.0;
    bool has_dead_unit = cfg.n_units >= 2;
    std::size_t dead = cfg.n_units - 1;
    if (has_dead_unit) spec.non_discriminative_units.push_back(dead);
    for (std::size_t u = 0; u < cfg.n_units; ++u) {
        spec.common_amp.push_back(0.6 + 0.1 * static_cast<double>(u % 3));
    }
    for (std::size_t c = 0; c < cfg.classes; ++c) {
        std::vector<double> amp(cfg.n_units, 0.0);
        for (std::size_t u = 0; u < cfg.n_units; ++u) {
            if (has_dead_unit && u == dead) continue;  // no class tone on the dead unit
            amp[u] = 0.8 + 0.2 * static_cast<double>((c + u) % 3);
        }
        spec.class_amp.push_back(amp);
    }

    std::size_t channels = cfg.n_units * SensorLayout::axes_per_unit;
    // Fixed phases per (class, channel) and (channel): same-class windows
    // are identical when noise_std is zero.
    std::vector<std::vector<double>> class_phase(cfg.classes, std::vector<double>(channels));
    std::vector<double> common_phase(channels);
    for (std::size_t c = 0; c < cfg.classes; ++c)
        for (std::size_t ch = 0; ch < channels; ++ch) class_phase[c][ch] = two_pi * rng.uniform();
    for (std::size_t ch = 0; ch < channels; ++ch) common_phase[ch] = two_pi * rng.uniform();

    SegmentBatch batch;
    batch.layout = SensorLayout::of(cfg.n_units);
    batch.window_size = cfg.window_size;
    batch.overlap = 0.0;
    batch.sample_rate_hz = cfg.sample_rate_hz;
    std::size_t total = cfg.classes * cfg.windows_per_class;
    batch.windows = Tensor({total, channels, cfg.window_size});

    std::size_t w_index = 0;
    for (std::size_t c = 0; c < cfg.classes; ++c) {
        for (std::size_t w = 0; w < cfg.windows_per_class; ++w, ++w_index) {
            batch.labels.push_back(static_cast<int>(c));
            batch.subject_ids.push_back(static_cast<int>(1 + w_index % cfg.n_subjects));
            for (std::size_t ch = 0; ch < channels; ++ch) {
                std::size_t u = ch / SensorLayout::axes_per_unit;
                double* y = batch.windows.data() + (w_index * channels + ch) * cfg.window_size;
                double a_cls = spec.class_amp[c][u];
                double a_common = spec.common_amp[u];
                double f_cls = spec.class_freqs[c];
                for (std::size_t t = 0; t < cfg.window_size; ++t) {
                    double phase = two_pi * static_cast<double>(t) /
                                   static_cast<double>(cfg.window_size);
                    double v = a_cls * std::sin(f_cls * phase + class_phase[c][ch]) +
                               a_common * std::sin(spec.common_freq * phase + common_phase[ch]);
                    if (cfg.noise_std > 0.0) v += cfg.noise_std * rng.normal();
                    y[t] = v;
                }
            }
        }
    }
    return {std::move(batch), std::move(spec)};
}

// ---------------------------------------------------------------------------
// CSV adapter. Schema: header `subject,label,<unit>_<axis>` with axis in
// {ax, ay, az, gx, gy, gz}; one row per time sample.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.push_back("");
    return out;
}

}  // namespace detail

inline void export_corpus_csv(const SegmentBatch& batch, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open for writing: " + path.string());
    out << "subject,label";
    for (std::size_t ch = 0; ch < batch.layout.total_channels(); ++ch)
        out << "," << batch.layout.channel_name(ch);
    out << "\n";
    out.precision(17);
    std::size_t channels = batch.layout.total_channels();
    for (std::size_t w = 0; w < batch.count(); ++w) {
        for (std::size_t t = 0; t < batch.window_size; ++t) {
            out << batch.subject_ids[w] << "," << batch.labels[w];
            for (std::size_t c = 0; c < channels; ++c) {
                out << "," << batch.windows(w, c, t);
            }
            out << "\n";
        }
    }
    if (!out) throw DataError("write failed: " + path.string());
}

/// Reads a CSV with the corpus schema. Rows with the same subject form
/// one continuous recording; the file yields one recording per maximal
/// run of consecutive equal-subject rows. Columns for inactive units may
/// be absent; their channels zero-fill.
inline std::vector<Recording> ingest_csv(const std::filesystem::path& path,
                                         const SensorLayout& layout, double sample_rate_hz) {
    layout.validate();
    std::ifstream in(path);
    if (!in) throw DataError("cannot open: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty csv: " + path.string());
    auto header = detail::split_csv_line(line);
    if (header.size() < 2 || header[0] != "subject" || header[1] != "label")
        throw DataError("csv: header must start with subject,label");

    std::size_t channels = layout.total_channels();
    std::vector<long> col_of_channel(channels, -1);
    for (std::size_t h = 2; h < header.size(); ++h) {
        bool known = false;
        for (std::size_t ch = 0; ch < channels; ++ch) {
            if (header[h] == layout.channel_name(ch)) {
                col_of_channel[ch] = static_cast<long>(h);
                known = true;
                break;
            }
        }
        if (!known) throw DataError("csv: unknown column '" + header[h] + "'");
    }
    for (std::size_t ch = 0; ch < channels; ++ch) {
        std::size_t unit = ch / SensorLayout::axes_per_unit;
        if (col_of_channel[ch] < 0 && layout.unit_active(unit)) {
            throw DataError("csv: missing column '" + layout.channel_name(ch) +
                            "' for active unit");
        }
    }

    std::vector<std::vector<double>> data(channels);
    std::vector<int> labels;
    std::vector<int> subjects;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto fields = detail::split_csv_line(line);
        if (fields.size() != header.size()) {
            throw DataError("csv: ragged row at line " + std::to_string(line_no));
        }
        try {
            subjects.push_back(std::stoi(fields[0]));
            labels.push_back(std::stoi(fields[1]));
            for (std::size_t ch = 0; ch < channels; ++ch) {
                data[ch].push_back(col_of_channel[ch] < 0
                                       ? 0.0
                                       : std::stod(fields[col_of_channel[ch]]));
            }
        } catch (const std::invalid_argument&) {
            throw DataError("csv: malformed value at line " + std::to_string(line_no));
        } catch (const std::out_of_range&) {
            throw DataError("csv: value out of range at line " + std::to_string(line_no));
        }
    }
    if (labels.empty()) throw DataError("csv: no data rows in " + path.string());

    std::vector<Recording> recordings;
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= subjects.size(); ++i) {
        if (i < subjects.size() && subjects[i] == subjects[run_start]) continue;
        Recording rec;
        rec.layout = layout;
        rec.sample_rate_hz = sample_rate_hz;
        rec.subject_id = subjects[run_start];
        std::size_t L = i - run_start;
        rec.signals = Tensor({channels, L});
        for (std::size_t ch = 0; ch < channels; ++ch) {
            std::copy(data[ch].begin() + run_start, data[ch].begin() + i,
                      rec.signals.data() + ch * L);
        }
        rec.labels.assign(labels.begin() + run_start, labels.begin() + i);
        recordings.push_back(std::move(rec));
        run_start = i;
    }
    return recordings;
}

// ---------------------------------------------------------------------------
// UCI-HAR raw inertial signals: 9 fixed-width text files per partition,
// one 128-sample half-overlapped window per row. We use body_acc and
// body_gyro (6 axes, 1 unit) and rebuild continuous-style per-subject
// recordings by de-overlapping consecutive rows.
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::vector<double>> read_signal_file(const std::filesystem::path& path,
                                                         std::size_t row_len) {
    std::ifstream in(path);
    if (!in) throw DataError("uci_har: missing file " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ss(line);
        std::vector<double> row;
        double v;
        while (ss >> v) row.push_back(v);
        if (row.size() != row_len) {
            throw DataError("uci_har: row " + std::to_string(rows.size() + 1) + " in " +
                            path.filename().string() + " has " + std::to_string(row.size()) +
                            " values, expected " + std::to_string(row_len));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<int> read_int_column(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("uci_har: missing file " + path.string());
    std::vector<int> out;
    int v;
    while (in >> v) out.push_back(v);
    return out;
}

}  // namespace detail

inline std::vector<Recording> ingest_uci_har_partition(const std::filesystem::path& root,
                                                       const std::string& part,
                                                       std::size_t row_len = 128) {
    namespace fs = std::filesystem;
    fs::path dir = root / part;
    fs::path sig = dir / "Inertial Signals";
    const char* channels[6] = {"body_acc_x", "body_acc_y", "body_acc_z",
                               "body_gyro_x", "body_gyro_y", "body_gyro_z"};
    std::vector<std::vector<std::vector<double>>> sigs;
    for (const char* ch : channels) {
        sigs.push_back(detail::read_signal_file(sig / (std::string(ch) + "_" + part + ".txt"),
                                                row_len));
    }
    std::vector<int> labels = detail::read_int_column(dir / ("y_" + part + ".txt"));
    std::vector<int> subjects = detail::read_int_column(dir / ("subject_" + part + ".txt"));

    std::size_t n_rows = sigs[0].size();
    for (const auto& s : sigs) {
        if (s.size() != n_rows) throw DataError("uci_har: signal files disagree on row count");
    }
    if (labels.size() != n_rows || subjects.size() != n_rows) {
        throw DataError("uci_har: label/subject row count does not match signals (" +
                        std::to_string(labels.size()) + "/" + std::to_string(subjects.size()) +
                        " vs " + std::to_string(n_rows) + ")");
    }
    for (int lab : labels) {
        if (lab < 1 || lab > 6) throw DataError("uci_har: label outside 1..6");
    }
    for (int s : subjects) {
        if (s < 1 || s > 30) throw DataError("uci_har: subject id outside 1..30");
    }

    // Rows overlap by half a window; keep the first half of every row in
    // a per-subject run and the full tail of the last one.
    std::vector<Recording> recordings;
    std::size_t half = row_len / 2;
    std::size_t run_start = 0;
    for (std::size_t i = 1; i <= n_rows; ++i) {
        if (i < n_rows && subjects[i] == subjects[run_start]) continue;
        std::size_t rows_in_run = i - run_start;
        std::size_t L = half * (rows_in_run - 1) + row_len;
        Recording rec;
        rec.layout = SensorLayout::of(1);
        rec.sample_rate_hz = 50.0;
        rec.subject_id = subjects[run_start];
        rec.signals = Tensor({6, L});
        rec.labels.assign(L, labels[run_start]);
        for (std::size_t ch = 0; ch < 6; ++ch) {
            double* dst = rec.signals.data() + ch * L;
            for (std::size_t r = run_start; r < i; ++r) {
                const auto& row = sigs[ch][r];
                std::size_t offset = (r - run_start) * half;
                std::size_t copy_len = (r + 1 == i) ? row_len : half;
                std::copy(row.begin(), row.begin() + copy_len, dst + offset);
            }
        }
        for (std::size_t r = run_start; r < i; ++r) {
            std::size_t offset = (r - run_start) * half;
            std::size_t span = (r + 1 == i) ? row_len : half;
            for (std::size_t t = 0; t < span; ++t) rec.labels[offset + t] = labels[r];
        }
        recordings.push_back(std::move(rec));
        run_start = i;
    }
    return recordings;
}

inline std::vector<Recording> ingest_uci_har(const std::filesystem::path& root) {
    auto train = ingest_uci_har_partition(root, "train");
    auto test = ingest_uci_har_partition(root, "test");
    train.insert(train.end(), std::make_move_iterator(test.begin()),
                 std::make_move_iterator(test.end()));
    return train;
}

}  // namespace huf
