#pragma once

#include <cstdint>
#include <cstring>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "huf/errors.hpp"
#include "huf/tensor.hpp"

namespace huf {

struct ParamEntry {
    std::string name;
    Tensor value;
    Tensor grad;
    bool frozen = false;
    // Optimizer state (Adam moment estimates; unused by SGD).
    Tensor adam_m;
    Tensor adam_v;
    std::int64_t steps = 0;
};

struct BufferEntry {
    std::string name;
    Tensor value;
};

/// Ordered set of named parameters with gradients, freeze flags and
/// optimizer state, plus non-trained buffers (batchnorm running stats,
/// normalization statistics). Buffers are serialized but never touched
/// by the optimizer or gradient checks.
class ParamStore {
public:
    std::size_t add(std::string name, Tensor init) {
        if (index_.count(name)) throw UsageError("duplicate parameter: " + name);
        ParamEntry e;
        e.name = std::move(name);
        e.grad = Tensor::zeros(init.shape());
        e.adam_m = Tensor::zeros(init.shape());
        e.adam_v = Tensor::zeros(init.shape());
        e.value = std::move(init);
        index_[e.name] = entries_.size();
        entries_.push_back(std::move(e));
        return entries_.size() - 1;
    }

    std::size_t add_buffer(std::string name, Tensor init) {
        if (buffer_index_.count(name)) throw UsageError("duplicate buffer: " + name);
        buffer_index_[name] = buffers_.size();
        buffers_.push_back(BufferEntry{std::move(name), std::move(init)});
        return buffers_.size() - 1;
    }

    bool has(const std::string& name) const { return index_.count(name) > 0; }
    bool has_buffer(const std::string& name) const { return buffer_index_.count(name) > 0; }

    ParamEntry& at(std::size_t h) { return entries_[h]; }
    const ParamEntry& at(std::size_t h) const { return entries_[h]; }

    ParamEntry& named(const std::string& name) {
        auto it = index_.find(name);
        if (it == index_.end()) throw UsageError("unknown parameter: " + name);
        return entries_[it->second];
    }
    const ParamEntry& named(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw UsageError("unknown parameter: " + name);
        return entries_[it->second];
    }

    Tensor& buffer(const std::string& name) {
        auto it = buffer_index_.find(name);
        if (it == buffer_index_.end()) throw UsageError("unknown buffer: " + name);
        return buffers_[it->second].value;
    }
    const Tensor& buffer(const std::string& name) const {
        auto it = buffer_index_.find(name);
        if (it == buffer_index_.end()) throw UsageError("unknown buffer: " + name);
        return buffers_[it->second].value;
    }

    std::vector<ParamEntry>& entries() { return entries_; }
    const std::vector<ParamEntry>& entries() const { return entries_; }
    std::vector<BufferEntry>& buffers() { return buffers_; }
    const std::vector<BufferEntry>& buffers() const { return buffers_; }

    std::size_t count() const { return entries_.size(); }

    std::size_t total_params() const {
        std::size_t n = 0;
        for (const auto& e : entries_) n += e.value.size();
        return n;
    }

    void zero_grads() {
        for (auto& e : entries_) e.grad.fill(0.0);
    }

    void set_frozen(const std::string& name, bool frozen) { named(name).frozen = frozen; }

    void freeze_all() {
        for (auto& e : entries_) e.frozen = true;
    }

    /// Zeroes every auxiliary optimizer tensor and step counter.
    void reset_optimizer_state() {
        for (auto& e : entries_) {
            e.adam_m.fill(0.0);
            e.adam_v.fill(0.0);
            e.steps = 0;
        }
    }

    /// Bitwise hash over parameter values (FNV-1a over the raw doubles).
    std::uint64_t fingerprint() const { return hash_entries(false); }

    /// Bitwise hash over frozen parameter values only.
    std::uint64_t frozen_fingerprint() const { return hash_entries(true); }

private:
    std::uint64_t hash_entries(bool frozen_only) const {
        std::uint64_t h = 1469598103934665603ull;
        for (const auto& e : entries_) {
            if (frozen_only && !e.frozen) continue;
            for (std::size_t i = 0; i < e.value.size(); ++i) {
                std::uint64_t bits;
                double v = e.value[i];
                std::memcpy(&bits, &v, sizeof bits);
                for (int b = 0; b < 8; ++b) {
                    h ^= (bits >> (8 * b)) & 0xffu;
                    h *= 1099511628211ull;
                }
            }
        }
        return h;
    }

    std::vector<ParamEntry> entries_;
    std::vector<BufferEntry> buffers_;
    std::unordered_map<std::string, std::size_t> index_;
    std::unordered_map<std::string, std::size_t> buffer_index_;
};

}  // namespace huf
