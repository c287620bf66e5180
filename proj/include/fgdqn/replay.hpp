#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <type_traits>
#include <unordered_map>
#include <vector>

namespace fgdqn {

template <class State>
struct Transition {
  State state{};
  int action = 0;
  double reward = 0.0;
  State next_state{};
  bool terminal = false;
};

/// Bounded ring store of transitions. For integral (discrete) states the
/// buffer also maintains a (state, action) -> positions index so that all
/// stored transitions sharing the current pair can be averaged over.
template <class State>
class ReplayBuffer {
 public:
  static constexpr bool kIndexed = std::is_integral_v<State>;

  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  }

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return store_.size(); }
  bool empty() const { return store_.empty(); }
  const Transition<State>& at(std::size_t i) const { return store_[i]; }

  void push(const Transition<State>& t) {
    if (store_.size() < capacity_) {
      store_.push_back(t);
      if constexpr (kIndexed) index_add(pair_key(t.state, t.action), store_.size() - 1);
    } else {
      const std::size_t pos = write_pos_;
      if constexpr (kIndexed)
        index_remove(pair_key(store_[pos].state, store_[pos].action), pos);
      store_[pos] = t;
      if constexpr (kIndexed) index_add(pair_key(t.state, t.action), pos);
      write_pos_ = (write_pos_ + 1) % capacity_;
    }
  }

  /// B uniform draws with replacement.
  template <class Rng>
  std::vector<Transition<State>> sample_minibatch(std::size_t batch, Rng& rng) const {
    if (store_.empty()) throw std::runtime_error("ReplayBuffer: sample from empty buffer");
    std::uniform_int_distribution<std::size_t> pick(0, store_.size() - 1);
    std::vector<Transition<State>> out;
    out.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i) out.push_back(store_[pick(rng)]);
    return out;
  }

  // ---- conditional access (discrete states only) ----------------------------

  bool has_key(State x, int u) const {
    static_assert(kIndexed, "conditional access requires a discrete state type");
    return index_.find(pair_key(x, u)) != index_.end();
  }

  std::size_t conditional_count(State x, int u) const {
    static_assert(kIndexed, "conditional access requires a discrete state type");
    auto it = index_.find(pair_key(x, u));
    return it == index_.end() ? 0 : it->second.size();
  }

  template <class Fn>
  void visit_conditional(State x, int u, Fn&& fn) const {
    static_assert(kIndexed, "conditional access requires a discrete state type");
    auto it = index_.find(pair_key(x, u));
    if (it == index_.end() || it->second.empty())
      throw std::runtime_error("ReplayBuffer: no stored transition for the requested (state, action)");
    for (std::uint32_t pos : it->second) fn(store_[pos]);
  }

  /// Every live transition whose (state, action) equals the key; order is
  /// unspecified.
  std::vector<Transition<State>> sample_conditional(State x, int u) const {
    std::vector<Transition<State>> out;
    visit_conditional(x, u, [&](const Transition<State>& t) { out.push_back(t); });
    return out;
  }

 private:
  static std::uint64_t pair_key(State x, int u) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(x)) << 32) |
           static_cast<std::uint32_t>(u);
  }

  void index_add(std::uint64_t key, std::size_t pos) {
    index_[key].push_back(static_cast<std::uint32_t>(pos));
  }

  void index_remove(std::uint64_t key, std::size_t pos) {
    auto it = index_.find(key);
    if (it == index_.end()) return;
    auto& v = it->second;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] == pos) {
        v[i] = v.back();
        v.pop_back();
        break;
      }
    }
    if (v.empty()) index_.erase(it);
  }

  std::size_t capacity_;
  std::size_t write_pos_ = 0;
  std::vector<Transition<State>> store_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> index_;
};

/// Arithmetic mean of target_fn over all stored transitions matching (x,u):
/// the empirical conditional expectation used by the averaged update.
template <class State, class Fn>
double conditional_target_average(const ReplayBuffer<State>& buf, State x, int u, Fn&& target_fn) {
  double sum = 0.0;
  std::size_t n = 0;
  buf.visit_conditional(x, u, [&](const Transition<State>& t) {
    sum += target_fn(t);
    ++n;
  });
  return sum / static_cast<double>(n);
}

}  // namespace fgdqn
