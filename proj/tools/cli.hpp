//
// Copyright 2026 The bspsort Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bspsort.hpp"

namespace bspsort::cli {

inline constexpr int kSchemaVersion = 1;

//! Environment variable naming a JSON preset catalog.
inline constexpr const char* kPresetEnv = "BSPSORT_PRESETS";

enum class Algo { dsr, dsq, rsr, rsq, ran_baseline };

Algo parse_algo(const std::string& name);
std::string algo_name(Algo a);
bool is_deterministic(Algo a);

struct RunSpec {
    Algo algo = Algo::dsq;
    DistributionSpec dist;
    std::optional<double> omega;
    //! Only ran-baseline takes its sequential sorter from here; the others
    //! are fixed by their name (..r radix, ..q quicksort).
    SeqSorter seq = SeqSorter::quick;
    unsigned reps = 4;
    bool verify = true;
    std::optional<MachinePreset> preset;
    bsp::RunOptions run;
};

SeqSorter sorter_of(const RunSpec& spec);

struct Verdicts {
    bool sorted = true;
    bool permutation = true;
    bool stability = true;
    //! Hard bound for the deterministic algorithms; unset for randomized ones.
    std::optional<bool> bound;
    bool checked = false;
    std::vector<std::string> messages;

    bool all() const { return sorted && permutation && stability && bound.value_or(true); }
};

struct RunReport {
    RunSpec spec;
    OversamplingConfig config;
    std::vector<double> rep_seconds;
    double mean_seconds = 0.0;
    PhaseReport phases;
    ImbalanceStats imbalance;
    std::size_t supersteps = 0;
    std::size_t barriers = 0;
    std::uint64_t words = 0;
    double charged = 0.0;
    std::size_t routing_step = 0;
    std::uint64_t routing_h = 0;
    std::uint64_t biased_keys = 0;
    std::optional<Prediction> prediction;
    Verdicts verdicts;
    unsigned hardware_threads = 0;
    bool oversubscribed = false;
    std::vector<std::string> notes;
};

//! Runs one algorithm on Key or Traced input.
template <SortElement T>
SortResult<T> run_algorithm(Algo algo, std::vector<std::vector<T>> input, const SortOptions& opt) {
    switch (algo) {
    case Algo::dsr:
    case Algo::dsq: return sort_det_bsp(std::move(input), opt);
    case Algo::rsr:
    case Algo::rsq: return sort_iran_bsp(std::move(input), opt);
    case Algo::ran_baseline: return sort_ran_bsp(std::move(input), opt);
    }
    throw ConfigError("unknown algorithm");
}

SortOptions sort_options(const RunSpec& spec);

/*!
 * Compares a sorted output with the stable sequential sort of the input.
 * Elements carry their origin, so one comparison covers sortedness,
 * permutation and stability.
 */
Verdicts check_against_oracle(const std::vector<std::vector<Traced>>& input,
                              const std::vector<std::vector<Traced>>& output);

//! Key-only comparison used by the verify command.
Verdicts check_keys(const std::vector<Key>& input, const std::vector<Key>& output);

//! Generates the input, runs verification (if enabled) and reps timed runs.
RunReport run_spec(const RunSpec& spec, std::vector<Key>* sorted_out = nullptr);

std::optional<Prediction> predict_for(Algo algo, std::uint64_t n, const bsp::BspParams& params,
                                      std::optional<double> omega);

nlohmann::json to_json(const RunReport& r);
nlohmann::json to_json(const Prediction& p);
std::string render_text(const RunReport& r);
std::string csv_header();
std::string csv_row(const RunReport& r);

//! Mean seconds per cell: rows are sizes, columns distributions, one
//! block per algorithm.
std::string render_table(const std::vector<RunReport>& reports, const std::string& format);
//! Ph1..Ph7 seconds and percent of total per (algo, dist, n, p).
std::string render_phases(const std::vector<RunReport>& reports, const std::string& format);
std::string render_predictions(const std::vector<Prediction>& rows,
                               const std::vector<std::string>& preset_names,
                               const std::string& format);

std::string size_label(std::uint64_t n);

std::vector<MachinePreset> load_presets(const std::string& path);
//! Built-in presets plus any from the file named by BSPSORT_PRESETS.
std::vector<MachinePreset> available_presets();

void write_keys(const std::string& path, const std::vector<Key>& keys);
std::vector<Key> read_keys(const std::string& path);

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace bspsort::cli
