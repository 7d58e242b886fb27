#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "analytika/bytes.hpp"
#include "analytika/corpus.hpp"
#include "analytika/dex.hpp"
#include "analytika/manifest.hpp"
#include "analytika/report.hpp"

namespace analytika::testing {

struct ZipEntrySpec {
    std::string name;
    Bytes data;
    bool deflate = true;
};

// Single-disk ZIP with local headers, central directory and EOCD.
Bytes build_zip(const std::vector<ZipEntrySpec>& entries);

struct AxmlNode {
    std::string name;
    // Attributes other than `package` live in the android namespace and get
    // a resource-map entry when their id is known.
    std::vector<std::pair<std::string, AttrValue>> attributes;
    std::vector<AxmlNode> children;
};

// UTF-16 string pool, resource map, android namespace, element chunks.
Bytes encode_axml(const AxmlNode& root);
Bytes encode_manifest(const ManifestInfo& info);

struct FixtureApkSpec {
    ManifestInfo manifest;
    std::vector<FixtureDexSpec> dex;  // classes.dex, classes2.dex, ...
    std::vector<std::string> native_libs;
};

Bytes build_fixture_apk(const FixtureApkSpec& spec);

// Random spec: up to `max_classes` callers with up to `max_invokes` targets
// each, drawn from a mix of framework-like and app-like names.
std::vector<FixtureClass> random_fixture_classes(std::mt19937_64& rng, std::size_t max_classes, std::size_t max_invokes);

// (caller class, target) pairs the spec plants, sorted.
std::vector<std::pair<std::string, MethodRef>> planted_pairs(const std::vector<FixtureClass>& classes);
std::vector<std::pair<std::string, MethodRef>> parsed_pairs(const DexUnit& unit);

// `classes` class_defs aliasing one code item of 60000 nops and one invoke:
// cheap to store, expensive to walk.
FixtureDexSpec parse_bomb_spec(std::size_t classes);

// Package com.test.planted with one caller invoking exactly 3 KeyStore,
// 1 DRM, 1 Biometrics and 1 Protected Confirmation pattern methods plus 2
// non-pattern methods. An unreferenced pattern class name sits in the
// string pool.
FixtureApkSpec planted_tee_spec();

// Deterministic app `i`: package com.fixture.appN with a mix of inmain,
// inlib, shrinker-shaped and crypto calls, plus a native library for even N.
FixtureApkSpec varied_fixture_spec(std::size_t i);

// A structurally valid app whose DEX walk takes several seconds.
FixtureApkSpec slow_fixture_spec();

// Writes `bytes` to dir/name and returns the matching local corpus entry.
CorpusEntry write_fixture(const std::filesystem::path& dir, const std::string& name, ByteView bytes,
                          const std::string& expected_package);

struct SyntheticCorpus {
    std::vector<AppReport> reports;
    std::vector<CorpusEntry> metadata;  // may lack rows for some reports and name absent reports
};

// Up to `max_reports` reports with random statuses, TEE and crypto matches,
// locations, library packages and metadata around the filter thresholds.
SyntheticCorpus random_synthetic_corpus(std::mt19937_64& rng, std::size_t max_reports);

// Reports as <sha>.json under `report_dir`, metadata as a corpus CSV.
void write_synthetic_corpus(const SyntheticCorpus& c, const std::filesystem::path& report_dir,
                            const std::filesystem::path& corpus_csv);

// Runs a shell command, returning its exit status; stdout and stderr go to
// `output` when given.
int run_command(const std::string& cmd, std::string* output = nullptr);
std::string shell_quote(const std::string& s);

std::filesystem::path cli_path();
std::string python_path();

Bytes slurp(const std::filesystem::path& p);
void spit(const std::filesystem::path& p, ByteView bytes);

std::filesystem::path test_data_dir();
std::filesystem::path repo_data_dir();
std::filesystem::path oracle_dir();

// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& tag);

}  // namespace analytika::testing
