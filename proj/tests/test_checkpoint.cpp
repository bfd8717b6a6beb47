#include "evoimit/checkpoint.hpp"

#include <gtest/gtest.h>

#include <unistd.h>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "evoimit/coevo.hpp"
#include "evoimit/config.hpp"
#include "evoimit/metrics.hpp"
#include "evoimit/rng.hpp"
#include "evoimit/sha256.hpp"

namespace {

namespace fs = std::filesystem;

using evoimit::CapturedElite;
using evoimit::Checkpoint;
using evoimit::CheckpointError;
using evoimit::EnvId;
using evoimit::EvolveOptions;
using evoimit::EvoParams;
using evoimit::GenerationOutcome;
using evoimit::RunConfig;
using evoimit::SeedDomain;
using evoimit::derive_seed;
using evoimit::evolve_generation;
using evoimit::kCheckpointMagic;
using evoimit::load_checkpoint;
using evoimit::make_env_spec;
using evoimit::make_evo_state;
using evoimit::make_score_report;
using evoimit::parse_checkpoint;
using evoimit::serialize_checkpoint;
using evoimit::write_checkpoint;

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() /
                       ("evoimit_ckpt_" + tag + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// A structurally consistent checkpoint produced by actually running two
// generations of a small population.
Checkpoint make_test_checkpoint() {
  Checkpoint ckpt;
  RunConfig& config = ckpt.config;
  config.env = EnvId::CartPole;
  config.population_size = 4;
  config.generations = 3;
  config.sigma = 0.1;
  config.run_seed = 777;
  config.holdout_seeds = 2;
  config.eval_every = 1;
  config.checkpoint_every = 0;
  config.out_dir = "somewhere/else";

  EvoParams params;
  params.env = config.env;
  params.population_size = config.population_size;
  params.sigma = config.sigma;
  params.run_seed = config.run_seed;
  params.matches_per_agent = config.matches_per_agent;
  params.elite_unmutated = config.elite_unmutated;
  std::vector<std::uint64_t> holdout;
  for (std::uint64_t k = 0; k < config.holdout_seeds; ++k) {
    holdout.push_back(derive_seed(config.run_seed, SeedDomain::Holdout, {k}));
  }
  ckpt.state = make_evo_state(params, holdout);

  EvolveOptions opts;
  opts.capture_population = true;
  const auto spec = make_env_spec(config.env);
  for (int g = 0; g < 2; ++g) {
    const GenerationOutcome out = evolve_generation(ckpt.state, opts);
    ckpt.history.push_back(make_score_report(out.generation + 1, out.generators_snapshot,
                                             out.elite_generator, spec, ckpt.state.stats,
                                             holdout));
    if (g == 0) {
      ckpt.captures.push_back(
          CapturedElite{out.generation + 1, out.elite_generator_genome, ckpt.state.stats});
    }
  }
  return ckpt;
}

TEST(Checkpoint, SerializeIsDeterministic) {
  const Checkpoint ckpt = make_test_checkpoint();
  EXPECT_EQ(serialize_checkpoint(ckpt), serialize_checkpoint(ckpt));
}

TEST(Checkpoint, MagicAndVersionLeadTheFile) {
  const std::string bytes = serialize_checkpoint(make_test_checkpoint());
  ASSERT_GE(bytes.size(), 12u);
  EXPECT_EQ(bytes.compare(0, 8, kCheckpointMagic, 8), 0);
  // Version 1, little-endian u32 right after the magic.
  EXPECT_EQ(bytes[8], 1);
  EXPECT_EQ(bytes[9], 0);
  EXPECT_EQ(bytes[10], 0);
  EXPECT_EQ(bytes[11], 0);
}

TEST(Checkpoint, RoundTripPreservesEverything) {
  const Checkpoint ckpt = make_test_checkpoint();
  const Checkpoint back = parse_checkpoint(serialize_checkpoint(ckpt));

  // out_dir is not persisted: a loaded checkpoint carries the default.
  RunConfig expected_config = ckpt.config;
  expected_config.out_dir = RunConfig{}.out_dir;
  EXPECT_EQ(back.config, expected_config);

  EXPECT_EQ(back.state.generation, ckpt.state.generation);
  EXPECT_EQ(back.state.next_lineage, ckpt.state.next_lineage);
  EXPECT_EQ(back.state.prev_elite_generator, ckpt.state.prev_elite_generator);
  EXPECT_EQ(back.state.prev_elite_discriminator, ckpt.state.prev_elite_discriminator);
  EXPECT_EQ(back.state.holdout_seeds, ckpt.state.holdout_seeds);
  EXPECT_EQ(back.state.match_seeds, ckpt.state.match_seeds);
  EXPECT_EQ(back.state.stats.count, ckpt.state.stats.count);
  EXPECT_EQ(back.state.stats.mean, ckpt.state.stats.mean);
  EXPECT_EQ(back.state.stats.m2, ckpt.state.stats.m2);

  ASSERT_EQ(back.state.generators.size(), ckpt.state.generators.size());
  for (std::uint32_t i = 0; i < ckpt.state.generators.size(); ++i) {
    EXPECT_EQ(back.state.generators.members[i].topology,
              ckpt.state.generators.members[i].topology);
    EXPECT_EQ(back.state.generators.members[i].params,
              ckpt.state.generators.members[i].params);
    EXPECT_EQ(back.state.generators.members[i].lineage_id,
              ckpt.state.generators.members[i].lineage_id);
    EXPECT_EQ(back.state.discriminators.members[i].params,
              ckpt.state.discriminators.members[i].params);
  }

  ASSERT_EQ(back.history.size(), ckpt.history.size());
  for (std::size_t i = 0; i < ckpt.history.size(); ++i) {
    EXPECT_EQ(back.history[i].generation, ckpt.history[i].generation);
    EXPECT_EQ(back.history[i].elite_score, ckpt.history[i].elite_score);
    EXPECT_EQ(back.history[i].population_mean_score, ckpt.history[i].population_mean_score);
    EXPECT_EQ(back.history[i].member_scores, ckpt.history[i].member_scores);
    EXPECT_EQ(back.history[i].holdout_seeds, ckpt.history[i].holdout_seeds);
  }

  ASSERT_EQ(back.captures.size(), ckpt.captures.size());
  for (std::size_t i = 0; i < ckpt.captures.size(); ++i) {
    EXPECT_EQ(back.captures[i].generation, ckpt.captures[i].generation);
    EXPECT_EQ(back.captures[i].genome.params, ckpt.captures[i].genome.params);
    EXPECT_EQ(back.captures[i].genome.lineage_id, ckpt.captures[i].genome.lineage_id);
    EXPECT_EQ(back.captures[i].stats.count, ckpt.captures[i].stats.count);
    EXPECT_EQ(back.captures[i].stats.mean, ckpt.captures[i].stats.mean);
  }

  // Re-serializing the parsed checkpoint reproduces the exact bytes.
  EXPECT_EQ(serialize_checkpoint(back), serialize_checkpoint(ckpt));
}

TEST(Checkpoint, VersionMismatchNamesBothVersions) {
  std::string bytes = serialize_checkpoint(make_test_checkpoint());
  bytes[8] = 2;  // bump the version field
  try {
    (void)parse_checkpoint(bytes);
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("version 2"), std::string::npos) << msg;
    EXPECT_NE(msg.find("version 1"), std::string::npos) << msg;
  }
}

TEST(Checkpoint, BadMagicRejected) {
  std::string bytes = serialize_checkpoint(make_test_checkpoint());
  bytes[0] = 'X';
  EXPECT_THROW(parse_checkpoint(bytes), CheckpointError);
}

TEST(Checkpoint, TruncationRejectedEverywhere) {
  const std::string bytes = serialize_checkpoint(make_test_checkpoint());
  // Every strict prefix must fail loudly, never read out of bounds.
  for (std::size_t cut : {std::size_t{0}, std::size_t{4}, std::size_t{11}, std::size_t{40},
                          bytes.size() / 2, bytes.size() - 1}) {
    EXPECT_THROW((void)parse_checkpoint(bytes.substr(0, cut)), CheckpointError) << cut;
  }
}

TEST(Checkpoint, TrailingBytesRejected) {
  std::string bytes = serialize_checkpoint(make_test_checkpoint());
  bytes.push_back('\0');
  EXPECT_THROW(parse_checkpoint(bytes), CheckpointError);
}

TEST(Checkpoint, CorruptEnvIdRejected) {
  std::string bytes = serialize_checkpoint(make_test_checkpoint());
  bytes[12] = 9;  // env id field, first config word
  EXPECT_THROW(parse_checkpoint(bytes), CheckpointError);
}

TEST(Checkpoint, StateConfigDisagreementIsAContractViolation) {
  Checkpoint ckpt = make_test_checkpoint();
  ckpt.config.sigma = 0.5;  // state still says 0.1
  EXPECT_THROW((void)serialize_checkpoint(ckpt), evoimit::ContractError);
}

TEST(Checkpoint, DiskRoundTripWithSidecar) {
  const fs::path dir = fresh_dir("roundtrip");
  const fs::path file = dir / "checkpoint_final.bin";
  const Checkpoint ckpt = make_test_checkpoint();
  write_checkpoint(ckpt, file);

  ASSERT_TRUE(fs::exists(file));
  ASSERT_TRUE(fs::exists(file.string() + ".sha256"));
  // No leftover temp files from the atomic write.
  EXPECT_FALSE(fs::exists(file.string() + ".tmp"));

  std::ifstream payload(file, std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(payload)),
                          std::istreambuf_iterator<char>());
  EXPECT_EQ(bytes, serialize_checkpoint(ckpt));

  std::ifstream side(file.string() + ".sha256");
  std::string digest;
  side >> digest;
  EXPECT_EQ(digest, evoimit::sha256_hex(bytes));

  const Checkpoint back = load_checkpoint(file);
  EXPECT_EQ(serialize_checkpoint(back), bytes);
  fs::remove_all(dir);
}

TEST(Checkpoint, SidecarCatchesBitFlip) {
  const fs::path dir = fresh_dir("bitflip");
  const fs::path file = dir / "checkpoint_final.bin";
  write_checkpoint(make_test_checkpoint(), file);

  // Flip one bit deep in the payload, where the parser alone might not
  // notice (a perturbed parameter value still parses).
  std::string bytes;
  {
    std::ifstream in(file, std::ios::binary);
    bytes.assign((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  }
  bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x01);
  {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  }

  try {
    (void)load_checkpoint(file);
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("sha256"), std::string::npos) << e.what();
  }
  fs::remove_all(dir);
}

TEST(Checkpoint, MissingFileHasClearError) {
  try {
    (void)load_checkpoint("/nonexistent/evoimit/checkpoint.bin");
    FAIL() << "expected CheckpointError";
  } catch (const CheckpointError& e) {
    EXPECT_NE(std::string(e.what()).find("cannot open"), std::string::npos) << e.what();
  }
}

TEST(Sha256, KnownVectors) {
  EXPECT_EQ(evoimit::sha256_hex(std::string("")),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(evoimit::sha256_hex(std::string("abc")),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

}  // namespace
