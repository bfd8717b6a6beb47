#pragma once

// Checkpoint: the complete reproducible run state in one little-endian
// binary payload, hashed into a .sha256 sidecar. The payload is a pure
// function of (config, run_seed, generation): it deliberately excludes
// out_dir (resume continues next to the checkpoint file) and anything about
// worker counts or wall time, so determinism audits reduce to comparing
// hashes. Files are written to a temp name and renamed into place.

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "evoimit/coevo.hpp"
#include "evoimit/config.hpp"
#include "evoimit/contract.hpp"
#include "evoimit/metrics.hpp"
#include "evoimit/sha256.hpp"

namespace evoimit {

class CheckpointError : public std::runtime_error {
 public:
  explicit CheckpointError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr std::uint32_t kCheckpointVersion = 1;
inline constexpr char kCheckpointMagic[8] = {'E', 'V', 'O', 'I', 'M', 'I', 'T', 'C'};

// Elite generator frozen at one of the trajectory capture generations,
// together with the standardizer it was evaluated under.
struct CapturedElite {
  std::uint32_t generation = 0;
  Genome genome;
  RunningStats stats;
};

struct Checkpoint {
  RunConfig config;  // out_dir is not persisted; loaded checkpoints keep the default
  EvoState state;
  std::vector<ScoreReport> history;
  std::vector<CapturedElite> captures;
};

namespace detail {

class WireWriter {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(static_cast<char>(v)); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
  }
  void f64(double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    u64(bits);
  }
  void raw(const char* data, std::size_t n) { bytes_.append(data, n); }

  std::string take() { return std::move(bytes_); }

 private:
  std::string bytes_;
};

class WireReader {
 public:
  explicit WireReader(const std::string& bytes) : bytes_(bytes) {}

  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(bytes_[pos_++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(byte()) << (8 * i);
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(byte()) << (8 * i);
    return v;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, sizeof v);
    return v;
  }
  void raw(char* out, std::size_t n) {
    need(n);
    std::memcpy(out, bytes_.data() + pos_, n);
    pos_ += n;
  }
  bool exhausted() const { return pos_ == bytes_.size(); }

 private:
  std::uint8_t byte() { return static_cast<std::uint8_t>(bytes_[pos_++]); }
  void need(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw CheckpointError("checkpoint truncated or corrupt");
  }

  const std::string& bytes_;
  std::size_t pos_ = 0;
};

inline void write_genome(WireWriter& w, const Genome& genome) {
  const NetTopology& t = genome.topology;
  w.u32(t.input_dim);
  w.u32(static_cast<std::uint32_t>(t.hidden_dims.size()));
  for (std::uint32_t d : t.hidden_dims) w.u32(d);
  w.u32(t.output_dim);
  w.u32(t.recurrent_layer);
  contract(genome.params.size() == param_count(t), "write_genome: param count mismatch");
  for (double p : genome.params) w.f64(p);
  w.u64(genome.lineage_id);
}

inline Genome read_genome(WireReader& r) {
  NetTopology t;
  t.input_dim = r.u32();
  const std::uint32_t hidden = r.u32();
  if (hidden > 1024) throw CheckpointError("checkpoint corrupt: implausible hidden layer count");
  t.hidden_dims.resize(hidden);
  for (std::uint32_t& d : t.hidden_dims) d = r.u32();
  t.output_dim = r.u32();
  t.recurrent_layer = r.u32();
  try {
    t.validate();
  } catch (const ContractError& e) {
    throw CheckpointError(std::string("checkpoint corrupt: ") + e.what());
  }
  Genome g;
  g.topology = t;
  g.params.resize(param_count(t));
  for (double& p : g.params) p = r.f64();
  g.lineage_id = r.u64();
  return g;
}

inline void write_stats(WireWriter& w, const RunningStats& stats) {
  w.u64(stats.count);
  w.u32(static_cast<std::uint32_t>(stats.dim()));
  for (double v : stats.mean) w.f64(v);
  for (double v : stats.m2) w.f64(v);
}

inline RunningStats read_stats(WireReader& r) {
  RunningStats stats;
  stats.count = r.u64();
  const std::uint32_t dim = r.u32();
  if (dim > 4096) throw CheckpointError("checkpoint corrupt: implausible stats dimension");
  stats.mean.resize(dim);
  stats.m2.resize(dim);
  for (double& v : stats.mean) v = r.f64();
  for (double& v : stats.m2) v = r.f64();
  return stats;
}

}  // namespace detail

inline std::string serialize_checkpoint(const Checkpoint& ckpt) {
  const RunConfig& c = ckpt.config;
  const EvoState& s = ckpt.state;
  contract(s.params.env == c.env && s.params.population_size == c.population_size &&
               s.params.sigma == c.sigma && s.params.run_seed == c.run_seed &&
               s.params.matches_per_agent == c.matches_per_agent &&
               s.params.elite_unmutated == c.elite_unmutated,
           "serialize_checkpoint: state and config disagree");

  detail::WireWriter w;
  w.raw(kCheckpointMagic, sizeof kCheckpointMagic);
  w.u32(kCheckpointVersion);

  w.u32(static_cast<std::uint32_t>(c.env));
  w.u32(c.population_size);
  w.u32(c.generations);
  w.f64(c.sigma);
  w.u64(c.run_seed);
  w.u32(c.holdout_seeds);
  w.u32(c.eval_every);
  w.u32(c.matches_per_agent);
  w.u8(c.elite_unmutated ? 1 : 0);
  w.u32(c.checkpoint_every);

  w.u32(s.generation);
  w.u64(s.next_lineage);
  w.u32(s.prev_elite_generator);
  w.u32(s.prev_elite_discriminator);

  for (const Population* pop : {&s.generators, &s.discriminators}) {
    w.u32(pop->size());
    for (const Genome& g : pop->members) detail::write_genome(w, g);
  }
  detail::write_stats(w, s.stats);

  w.u32(static_cast<std::uint32_t>(s.holdout_seeds.size()));
  for (std::uint64_t seed : s.holdout_seeds) w.u64(seed);
  w.u32(static_cast<std::uint32_t>(s.match_seeds.size()));
  for (std::uint64_t seed : s.match_seeds) w.u64(seed);

  w.u32(static_cast<std::uint32_t>(ckpt.history.size()));
  for (const ScoreReport& report : ckpt.history) {
    w.u32(report.generation);
    w.f64(report.elite_score);
    w.f64(report.population_mean_score);
    w.u32(static_cast<std::uint32_t>(report.member_scores.size()));
    for (double v : report.member_scores) w.f64(v);
    w.u32(static_cast<std::uint32_t>(report.holdout_seeds.size()));
    for (std::uint64_t seed : report.holdout_seeds) w.u64(seed);
  }

  w.u32(static_cast<std::uint32_t>(ckpt.captures.size()));
  for (const CapturedElite& cap : ckpt.captures) {
    w.u32(cap.generation);
    detail::write_genome(w, cap.genome);
    detail::write_stats(w, cap.stats);
  }
  return w.take();
}

inline Checkpoint parse_checkpoint(const std::string& bytes) {
  detail::WireReader r(bytes);
  char magic[sizeof kCheckpointMagic];
  r.raw(magic, sizeof magic);
  if (std::memcmp(magic, kCheckpointMagic, sizeof magic) != 0) {
    throw CheckpointError("not a checkpoint file (bad magic)");
  }
  const std::uint32_t version = r.u32();
  if (version != kCheckpointVersion) {
    throw CheckpointError("checkpoint format version " + std::to_string(version) +
                          ", this build reads version " + std::to_string(kCheckpointVersion));
  }

  Checkpoint ckpt;
  RunConfig& c = ckpt.config;
  const std::uint32_t env_raw = r.u32();
  if (env_raw > static_cast<std::uint32_t>(EnvId::Acrobot)) {
    throw CheckpointError("checkpoint corrupt: unknown environment id");
  }
  c.env = static_cast<EnvId>(env_raw);
  c.population_size = r.u32();
  c.generations = r.u32();
  c.sigma = r.f64();
  c.run_seed = r.u64();
  c.holdout_seeds = r.u32();
  c.eval_every = r.u32();
  c.matches_per_agent = r.u32();
  c.elite_unmutated = r.u8() != 0;
  c.checkpoint_every = r.u32();
  try {
    validate_config(c);
  } catch (const ConfigError& e) {
    throw CheckpointError(std::string("checkpoint corrupt: ") + e.what());
  }

  EvoState& s = ckpt.state;
  s.params.env = c.env;
  s.params.population_size = c.population_size;
  s.params.sigma = c.sigma;
  s.params.run_seed = c.run_seed;
  s.params.matches_per_agent = c.matches_per_agent;
  s.params.elite_unmutated = c.elite_unmutated;

  s.generation = r.u32();
  s.next_lineage = r.u64();
  s.prev_elite_generator = r.u32();
  s.prev_elite_discriminator = r.u32();

  s.generators.tag = PopTag::Generator;
  s.discriminators.tag = PopTag::Discriminator;
  for (Population* pop : {&s.generators, &s.discriminators}) {
    const std::uint32_t count = r.u32();
    if (count != c.population_size) {
      throw CheckpointError("checkpoint corrupt: population size mismatch");
    }
    pop->members.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) pop->members.push_back(detail::read_genome(r));
  }
  s.stats = detail::read_stats(r);

  const EnvSpec spec = make_env_spec(c.env);
  if (s.stats.dim() != spec.obs_dim) {
    throw CheckpointError("checkpoint corrupt: stats dimension mismatch");
  }
  for (const Genome& g : s.generators.members) {
    if (g.topology.input_dim != spec.obs_dim || g.topology.output_dim != spec.action.arity()) {
      throw CheckpointError("checkpoint corrupt: generator topology mismatch");
    }
  }
  for (const Genome& g : s.discriminators.members) {
    if (g.topology.input_dim != spec.obs_dim || g.topology.output_dim != 1) {
      throw CheckpointError("checkpoint corrupt: discriminator topology mismatch");
    }
  }

  std::uint32_t count = r.u32();
  if (count != c.holdout_seeds) {
    throw CheckpointError("checkpoint corrupt: holdout seed count mismatch");
  }
  s.holdout_seeds.resize(count);
  for (std::uint64_t& seed : s.holdout_seeds) seed = r.u64();

  count = r.u32();
  if (count != s.generation) {
    throw CheckpointError("checkpoint corrupt: match seed ledger length mismatch");
  }
  s.match_seeds.resize(count);
  for (std::uint64_t& seed : s.match_seeds) seed = r.u64();

  count = r.u32();
  if (count > c.generations) throw CheckpointError("checkpoint corrupt: oversized history");
  ckpt.history.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    ScoreReport report;
    report.generation = r.u32();
    report.elite_score = r.f64();
    report.population_mean_score = r.f64();
    std::uint32_t members = r.u32();
    if (members != c.population_size) {
      throw CheckpointError("checkpoint corrupt: report member count mismatch");
    }
    report.member_scores.resize(members);
    for (double& v : report.member_scores) v = r.f64();
    std::uint32_t seeds = r.u32();
    if (seeds != c.holdout_seeds) {
      throw CheckpointError("checkpoint corrupt: report seed count mismatch");
    }
    report.holdout_seeds.resize(seeds);
    for (std::uint64_t& seed : report.holdout_seeds) seed = r.u64();
    ckpt.history.push_back(std::move(report));
  }

  count = r.u32();
  if (count > 16) throw CheckpointError("checkpoint corrupt: oversized capture list");
  ckpt.captures.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    CapturedElite cap;
    cap.generation = r.u32();
    cap.genome = detail::read_genome(r);
    cap.stats = detail::read_stats(r);
    ckpt.captures.push_back(std::move(cap));
  }

  if (!r.exhausted()) throw CheckpointError("checkpoint corrupt: trailing bytes");
  return ckpt;
}

namespace detail {

inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw CheckpointError("write failed: " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace detail

// Payload plus "<path>.sha256" sidecar holding the payload's hex digest.
inline void write_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = serialize_checkpoint(ckpt);
  detail::write_file_atomic(path, bytes);
  detail::write_file_atomic(path.string() + ".sha256", sha256_hex(bytes) + "\n");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  const std::filesystem::path sidecar = path.string() + ".sha256";
  if (std::filesystem::exists(sidecar)) {
    std::ifstream side(sidecar, std::ios::binary);
    std::string recorded;
    side >> recorded;
    if (recorded != sha256_hex(bytes)) {
      throw CheckpointError("checkpoint corrupt: sha256 sidecar mismatch for " + path.string());
    }
  }
  return parse_checkpoint(bytes);
}

}  // namespace evoimit
