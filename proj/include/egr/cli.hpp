#pragma once

// Command-line front end: configuration, resource loading and subcommands.

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "egr/classifiers.hpp"
#include "egr/detectors.hpp"
#include "egr/features.hpp"
#include "egr/synth_corpus.hpp"

namespace egr {

/// Process exit codes, one per error class.
enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,      // any other library error
  kExitUsage = 2,        // bad flags or configuration values
  kExitIo = 3,           // missing or unreadable file
  kExitSchema = 4,       // malformed or inconsistent input data
  kExitDegenerate = 5,   // training labels with a single class
};

inline constexpr const char* kConfigEnvVar = "EGR_CONFIG";

struct RunConfig {
  struct Paths {
    std::string embeddings;
    std::string lexicon;
    std::string not_trained;
    std::string human_request;
    std::string corpus;
    std::string labels;
    std::string test_corpus;
    std::string test_labels;
    std::string model;
    std::string output;

    friend bool operator==(const Paths&, const Paths&) = default;
  } paths;

  DetectorConfig detector;
  std::size_t min_turns = 2;
  TrainConfig train;
  std::size_t folds = 10;
  bool stratified = true;
  std::uint64_t seed = 0;
  FeatureGroup group = FeatureGroup::All;
  std::size_t jobs = 0;
  GeneratorConfig generator;

  /// Throws ConfigError for out-of-range values.
  void validate() const;
  /// Throws IoError when a configured input resource file is missing.
  void check_files() const;

  std::string to_json() const;
  /// Unknown keys are rejected; absent keys keep their defaults.
  static RunConfig from_json(std::string_view text);
  static RunConfig load_file(const std::string& path);

  friend bool operator==(const RunConfig& a, const RunConfig& b);
};

/// Resources named by the config; empty paths fall back to the synthetic
/// resources that match generated corpora.
Resources load_resources(const RunConfig& cfg);

/// Runs the CLI; returns the process exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace egr
