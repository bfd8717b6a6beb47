#pragma once

// Fixed-topology recurrent networks with explicit forward passes and
// Gaussian parameter mutation. No gradients anywhere; evolution is the only
// training signal.
//
// Parameter layout inside Genome::params, layer by layer (layer L of
// n_hidden+1 total, the last one being the output layer):
//   W  row-major [out_dim x in_dim]
//   U  row-major [out_dim x out_dim]   (recurrent hidden layer only)
//   b  [out_dim]
// This layout is also the checkpoint wire order for the flat array.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "evoimit/contract.hpp"
#include "evoimit/rng.hpp"

namespace evoimit {

struct NetTopology {
  std::uint32_t input_dim = 0;
  std::vector<std::uint32_t> hidden_dims;
  std::uint32_t output_dim = 0;
  std::uint32_t recurrent_layer = 0;  // index into hidden_dims

  std::size_t layer_count() const { return hidden_dims.size() + 1; }

  std::uint32_t in_dim(std::size_t layer) const {
    return layer == 0 ? input_dim : hidden_dims[layer - 1];
  }
  std::uint32_t out_dim(std::size_t layer) const {
    return layer == hidden_dims.size() ? output_dim : hidden_dims[layer];
  }

  void validate() const {
    contract(input_dim >= 1 && output_dim >= 1, "topology: dimensions must be >= 1");
    contract(!hidden_dims.empty(), "topology: requires exactly one recurrent hidden layer");
    for (std::uint32_t h : hidden_dims) {
      contract(h >= 1, "topology: dimensions must be >= 1");
    }
    contract(recurrent_layer < hidden_dims.size(),
             "topology: recurrent_layer must address a hidden layer");
  }

  std::uint32_t recurrent_dim() const { return hidden_dims[recurrent_layer]; }

  bool operator==(const NetTopology&) const = default;
};

// The engine's standard agent shape: (input, 50, 50, output), last hidden
// layer recurrent.
inline NetTopology standard_topology(std::uint32_t input_dim, std::uint32_t output_dim) {
  return NetTopology{input_dim, {50, 50}, output_dim, 1};
}

inline std::size_t param_count(const NetTopology& t) {
  t.validate();
  std::size_t total = 0;
  for (std::size_t layer = 0; layer < t.layer_count(); ++layer) {
    const std::size_t in = t.in_dim(layer);
    const std::size_t out = t.out_dim(layer);
    total += in * out + out;
    if (layer == t.recurrent_layer) total += out * out;
  }
  return total;
}

struct Genome {
  NetTopology topology;
  std::vector<double> params;
  std::uint64_t lineage_id = 0;
};

// Carrier of recurrence across timesteps. Entries are post-tanh, so always
// in (-1, 1); a reset state is exactly zero.
struct HiddenState {
  std::vector<double> values;
};

inline HiddenState make_reset_state(const NetTopology& t) {
  return HiddenState{std::vector<double>(t.recurrent_dim(), 0.0)};
}

namespace detail {
inline std::atomic<std::uint64_t>& lineage_counter() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}
}  // namespace detail

inline Genome zero_genome(const NetTopology& t, std::uint64_t lineage_id) {
  t.validate();
  return Genome{t, std::vector<double>(param_count(t), 0.0), lineage_id};
}

inline Genome zero_genome(const NetTopology& t) {
  return zero_genome(t, detail::lineage_counter().fetch_add(1));
}

// Per-evaluation scratch; reused across timesteps to keep rollouts
// allocation-free.
struct NetWorkspace {
  std::vector<double> a, b;
};

// One timestep. Dense hidden layers: ReLU(W x + b). Recurrent layer:
// tanh(W x + U h_prev + b), the result becoming the new hidden state.
// Output layer: ReLU(W x + b); clipping/argmax is the consumer's business.
inline void forward_into(const Genome& g, std::span<const double> input,
                         HiddenState& state, std::span<double> output,
                         NetWorkspace& ws) {
  const NetTopology& t = g.topology;
  contract(input.size() == t.input_dim, "forward: input dimension mismatch");
  contract(state.values.size() == t.recurrent_dim(), "forward: state dimension mismatch");
  contract(output.size() == t.output_dim, "forward: output dimension mismatch");
  for (double v : input) {
    contract(std::isfinite(v), "forward: non-finite input");
  }

  const std::size_t max_width = [&] {
    std::size_t m = t.input_dim;
    for (std::uint32_t h : t.hidden_dims) m = std::max<std::size_t>(m, h);
    return std::max<std::size_t>(m, t.output_dim);
  }();
  ws.a.resize(max_width);
  ws.b.resize(max_width);

  const double* p = g.params.data();
  std::copy(input.begin(), input.end(), ws.a.begin());
  const double* cur = ws.a.data();

  for (std::size_t layer = 0; layer < t.layer_count(); ++layer) {
    const std::size_t in = t.in_dim(layer);
    const std::size_t out = t.out_dim(layer);
    const bool recurrent = layer == t.recurrent_layer;
    const double* w = p;
    const double* u = w + in * out;
    const double* b = recurrent ? u + out * out : u;
    double* next = (cur == ws.a.data()) ? ws.b.data() : ws.a.data();

    for (std::size_t o = 0; o < out; ++o) {
      double acc = b[o];
      const double* wrow = w + o * in;
      for (std::size_t i = 0; i < in; ++i) acc += wrow[i] * cur[i];
      if (recurrent) {
        const double* urow = u + o * out;
        for (std::size_t i = 0; i < out; ++i) acc += urow[i] * state.values[i];
      }
      next[o] = recurrent ? std::tanh(acc) : (acc > 0.0 ? acc : 0.0);
    }
    if (recurrent) {
      std::copy(next, next + out, state.values.begin());
    }
    p = b + out;
    cur = next;
  }
  std::copy(cur, cur + t.output_dim, output.begin());
}

// Pure variant; the in-place version above is the hot path.
inline std::pair<std::vector<double>, HiddenState> forward(
    const Genome& g, std::span<const double> input, const HiddenState& state) {
  HiddenState next = state;
  std::vector<double> out(g.topology.output_dim);
  NetWorkspace ws;
  forward_into(g, input, next, out, ws);
  return {std::move(out), std::move(next)};
}

// Adds an independent N(0, sigma^2) draw to every parameter. Fully
// determined by (genome, seed, sigma); the input genome is untouched and
// keeps its lineage.
inline Genome mutate(const Genome& g, std::uint64_t seed, double sigma) {
  contract(sigma >= 0.0, "mutate: sigma must be >= 0");
  Genome out = g;
  Rng rng(seed);
  for (double& p : out.params) {
    p += sigma * rng.next_gaussian();
  }
  return out;
}

}  // namespace evoimit
