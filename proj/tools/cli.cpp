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

#include "cli.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

namespace bspsort::cli {

using nlohmann::json;

Algo parse_algo(const std::string& name) {
    if (name == "dsr")
        return Algo::dsr;
    if (name == "dsq")
        return Algo::dsq;
    if (name == "rsr")
        return Algo::rsr;
    if (name == "rsq")
        return Algo::rsq;
    if (name == "ran-baseline" || name == "ran")
        return Algo::ran_baseline;
    throw ConfigError("unknown algorithm '" + name + "' (expected dsr, dsq, rsr, rsq, ran-baseline)");
}

std::string algo_name(Algo a) {
    switch (a) {
    case Algo::dsr: return "dsr";
    case Algo::dsq: return "dsq";
    case Algo::rsr: return "rsr";
    case Algo::rsq: return "rsq";
    case Algo::ran_baseline: return "ran-baseline";
    }
    return "?";
}

bool is_deterministic(Algo a) { return a == Algo::dsr || a == Algo::dsq; }

SeqSorter sorter_of(const RunSpec& spec) {
    switch (spec.algo) {
    case Algo::dsr:
    case Algo::rsr: return SeqSorter::radix;
    case Algo::dsq:
    case Algo::rsq: return SeqSorter::quick;
    case Algo::ran_baseline: return spec.seq;
    }
    return spec.seq;
}

SortOptions sort_options(const RunSpec& spec) {
    SortOptions opt;
    opt.seq = sorter_of(spec);
    opt.omega = spec.omega;
    opt.seed = spec.dist.seed;
    if (spec.preset) {
        opt.L = spec.preset->L_ops();
        opt.g = spec.preset->g_ops();
    } else {
        // Unit cost per word, free barriers.
        opt.L = 0.0;
        opt.g = 1.0;
    }
    opt.run = spec.run;
    return opt;
}

namespace {

std::string index_msg(const char* what, std::size_t i) {
    return std::string(what) + " at index " + std::to_string(i);
}

template <typename T>
std::vector<T> concat(const std::vector<std::vector<T>>& parts) {
    std::vector<T> out;
    out.reserve(detail::total_size(parts));
    for (const auto& x : parts)
        out.insert(out.end(), x.begin(), x.end());
    return out;
}

std::optional<std::size_t> first_unsorted(const auto& v) {
    for (std::size_t i = 1; i < v.size(); ++i)
        if (key_of(v[i]) < key_of(v[i - 1]))
            return i;
    return std::nullopt;
}

bool same_multiset(std::vector<Key> a, std::vector<Key> b) {
    if (a.size() != b.size())
        return false;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

std::vector<Key> keys_of(const std::vector<Traced>& v) {
    std::vector<Key> k(v.size());
    std::transform(v.begin(), v.end(), k.begin(), [](const Traced& t) { return t.key; });
    return k;
}

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(prec) << v;
    return os.str();
}

void validate_spec(const RunSpec& spec) {
    if (spec.reps == 0)
        throw ConfigError("--reps must be at least 1");
    if (spec.dist.p == 0)
        throw ConfigError("p must be positive");
    if (spec.algo != Algo::ran_baseline && !is_power_of_two(spec.dist.p))
        throw ConfigError("p must be a power of two for " + algo_name(spec.algo) + " (got " +
                          std::to_string(spec.dist.p) + ")");
}

} // namespace

Verdicts check_against_oracle(const std::vector<std::vector<Traced>>& input,
                              const std::vector<std::vector<Traced>>& output) {
    Verdicts v;
    v.checked = true;
    std::vector<Traced> oracle = concat(input);
    std::stable_sort(oracle.begin(), oracle.end(),
                     [](const Traced& a, const Traced& b) { return a.key < b.key; });
    const std::vector<Traced> got = concat(output);

    if (auto bad = first_unsorted(got)) {
        v.sorted = false;
        v.messages.push_back(index_msg("output not sorted", *bad));
    }
    if (!same_multiset(keys_of(oracle), keys_of(got))) {
        v.permutation = false;
        v.messages.push_back("output is not a permutation of the input");
    }
    if (v.sorted && v.permutation) {
        for (std::size_t i = 0; i < got.size(); ++i)
            if (got[i].origin != oracle[i].origin) {
                v.stability = false;
                v.messages.push_back(index_msg("equal keys out of origin order", i));
                break;
            }
    } else {
        v.stability = false;
    }
    return v;
}

Verdicts check_keys(const std::vector<Key>& input, const std::vector<Key>& output) {
    Verdicts v;
    v.checked = true;
    if (!same_multiset(input, output)) {
        v.permutation = false;
        v.messages.push_back("multiset mismatch: output holds " + std::to_string(output.size()) +
                             " keys, input " + std::to_string(input.size()) +
                             (input.size() == output.size() ? ", with different values" : ""));
    }
    if (auto bad = first_unsorted(output)) {
        v.sorted = false;
        v.messages.push_back(index_msg("not sorted", *bad));
    }
    return v;
}

std::optional<Prediction> predict_for(Algo algo, std::uint64_t n, const bsp::BspParams& params,
                                      std::optional<double> omega) {
    if (n < 2 || params.p > n)
        return std::nullopt;
    switch (algo) {
    case Algo::dsr:
    case Algo::dsq: return predict_det(n, params, omega);
    case Algo::rsr:
    case Algo::rsq: return predict_iran(n, params, omega);
    case Algo::ran_baseline: return predict_ran(n, params, omega);
    }
    return std::nullopt;
}

RunReport run_spec(const RunSpec& spec, std::vector<Key>* sorted_out) {
    validate_spec(spec);
    RunReport rep;
    rep.spec = spec;
    rep.hardware_threads = std::max(1u, std::thread::hardware_concurrency());
    rep.oversubscribed = spec.dist.p > rep.hardware_threads;
    if (rep.oversubscribed)
        rep.notes.push_back("p=" + std::to_string(spec.dist.p) + " exceeds " +
                            std::to_string(rep.hardware_threads) +
                            " hardware threads; timings are indicative only");
    if (!spec.preset)
        rep.notes.push_back("no preset: ledger charged with L=0, g=1 op per word");

    const auto input = gen(spec.dist);
    const SortOptions opt = sort_options(spec);
    const std::uint64_t n = spec.dist.n;

    std::vector<Key> oracle_keys;
    if (spec.verify) {
        std::vector<std::vector<Traced>> traced(input.size());
        for (std::size_t i = 0; i < input.size(); ++i)
            for (std::size_t j = 0; j < input[i].size(); ++j)
                traced[i].push_back({input[i][j], (std::uint64_t{i} << 32) | j});
        auto res = run_algorithm(spec.algo, traced, opt);
        rep.verdicts = check_against_oracle(traced, res.outputs);
        if (is_deterministic(spec.algo))
            rep.verdicts.bound = res.imbalance.within_bound;
        oracle_keys = concat(input);
        std::sort(oracle_keys.begin(), oracle_keys.end());
    }

    std::vector<double> phase_sum(7, 0.0);
    for (unsigned r = 0; r < spec.reps; ++r) {
        auto res = run_algorithm(spec.algo, input, opt);
        rep.rep_seconds.push_back(res.wall_seconds);
        for (std::size_t i = 0; i < 7; ++i)
            phase_sum[i] += res.phases.phases[i].seconds;
        if (r + 1 < spec.reps)
            continue;

        rep.config = res.config;
        rep.phases = res.phases;
        for (std::size_t i = 0; i < 7; ++i)
            rep.phases.phases[i].seconds = phase_sum[i] / spec.reps;
        rep.imbalance = res.imbalance;
        rep.supersteps = res.ledger.supersteps();
        rep.barriers = res.ledger.barriers();
        rep.words = res.ledger.total_words();
        rep.charged = res.ledger.total_charged();
        rep.routing_step = res.routing_step;
        rep.routing_h = spec.dist.p > 1 ? res.ledger.steps.at(res.routing_step).h : 0;
        rep.biased_keys = res.biased_keys;
        for (const auto& w : res.config.warnings)
            rep.notes.push_back(w);

        if (spec.verify || sorted_out) {
            auto keys = concat(res.outputs);
            if (spec.verify && keys != oracle_keys) {
                rep.verdicts.sorted = rep.verdicts.sorted && !first_unsorted(keys);
                rep.verdicts.permutation = false;
                rep.verdicts.messages.push_back("key-only run differs from the oracle");
            }
            if (sorted_out)
                *sorted_out = std::move(keys);
        }
    }
    double total = 0.0;
    for (double s : rep.rep_seconds)
        total += s;
    rep.mean_seconds = total / static_cast<double>(rep.rep_seconds.size());

    if (spec.preset) {
        auto params = spec.preset->params();
        params.p = spec.dist.p;
        rep.prediction = predict_for(spec.algo, n, params, rep.config.omega);
    }
    return rep;
}

json to_json(const Prediction& p) {
    json terms_comp = json::array(), terms_comm = json::array();
    for (const auto& t : p.comp_terms)
        terms_comp.push_back({{"term", t.name}, {"ops", t.ops}, {"leading", t.leading}});
    for (const auto& t : p.comm_terms)
        terms_comm.push_back({{"term", t.name}, {"ops", t.ops}, {"leading", t.leading}});
    return {
        {"algo", p.algo},
        {"n", p.n},
        {"p", p.p},
        {"omega", p.omega},
        {"L_ops", p.L},
        {"g_ops", p.g},
        {"comp_terms", terms_comp},
        {"comm_terms", terms_comm},
        {"pi", p.pi},
        {"mu", p.mu},
        {"efficiency", p.efficiency},
        {"speedup", p.speedup},
        {"pi_with_slack", p.pi_slack},
        {"mu_with_slack", p.mu_slack},
        {"efficiency_with_slack", p.efficiency_slack},
        {"pi_closed_form", p.pi_closed},
        {"mu_closed_form", p.mu_closed},
        {"violated_preconditions", p.violated_preconditions},
    };
}

json to_json(const RunReport& r) {
    const double total = r.phases.total_seconds();
    json phases = json::array();
    for (const auto& ph : r.phases.phases)
        phases.push_back({{"name", ph.name},
                          {"seconds", ph.seconds},
                          {"percent", total > 0 ? 100.0 * ph.seconds / total : 0.0},
                          {"ops", ph.ops},
                          {"supersteps", ph.supersteps}});
    json verdicts = {{"checked", r.verdicts.checked},
                     {"sorted", r.verdicts.sorted},
                     {"permutation", r.verdicts.permutation},
                     {"stability", r.verdicts.stability},
                     {"bound", r.verdicts.bound ? json(*r.verdicts.bound) : json(nullptr)},
                     {"messages", r.verdicts.messages},
                     {"pass", r.verdicts.all()}};
    return {
        {"schema_version", kSchemaVersion},
        {"spec",
         {{"algo", algo_name(r.spec.algo)},
          {"dist", dist_label(r.spec.dist)},
          {"dist_description", describe(r.spec.dist)},
          {"n", r.spec.dist.n},
          {"p", r.spec.dist.p},
          {"seed", r.spec.dist.seed},
          {"seq", std::string(to_string(sorter_of(r.spec)))},
          {"omega", r.config.omega},
          {"r", r.config.r},
          {"s", r.config.s},
          {"reps", r.spec.reps},
          {"preset", r.spec.preset ? json(r.spec.preset->name) : json(nullptr)}}},
        {"timing", {{"rep_seconds", r.rep_seconds}, {"mean_seconds", r.mean_seconds}}},
        {"phases", phases},
        {"imbalance",
         {{"n_max_observed", r.imbalance.n_max_observed},
          {"n_max_bound", r.imbalance.n_max_bound},
          {"bucket_expansion", r.imbalance.bucket_expansion},
          {"within_bound", r.imbalance.within_bound},
          {"received", r.imbalance.received}}},
        {"ledger",
         {{"supersteps", r.supersteps},
          {"barriers", r.barriers},
          {"words", r.words},
          {"charged_ops", r.charged},
          {"routing_step", r.routing_step},
          {"routing_h", r.routing_h},
          {"prefix", "count exchange"}}},
        {"prediction", r.prediction ? to_json(*r.prediction) : json(nullptr)},
        {"verdicts", verdicts},
        {"environment",
         {{"hardware_threads", r.hardware_threads}, {"oversubscribed", r.oversubscribed}}},
        {"biased_keys", r.biased_keys},
        {"notes", r.notes},
    };
}

std::string render_text(const RunReport& r) {
    std::ostringstream os;
    const auto& s = r.spec;
    os << "algo " << algo_name(s.algo) << "  dist " << dist_label(s.dist) << "  n " << s.dist.n
       << "  p " << s.dist.p << "  seed " << s.dist.seed << "  seq " << to_string(sorter_of(s))
       << "\n";
    os << "omega " << fmt(r.config.omega, 3) << "  r " << r.config.r << "  s " << r.config.s
       << "\n";
    os << "mean time " << fmt(r.mean_seconds, 6) << " s over " << r.rep_seconds.size()
       << " reps\n";
    const double total = r.phases.total_seconds();
    for (const auto& ph : r.phases.phases)
        os << "  " << std::left << std::setw(12) << ph.name << std::right << fmt(ph.seconds, 6)
           << " s  " << std::setw(6) << fmt(total > 0 ? 100.0 * ph.seconds / total : 0.0, 1)
           << " %  " << ph.supersteps << " supersteps\n";
    os << "n_max " << r.imbalance.n_max_observed << "  bound " << fmt(r.imbalance.n_max_bound, 1)
       << "  expansion " << fmt(r.imbalance.bucket_expansion, 4) << "\n";
    os << "supersteps " << r.supersteps << "  words " << r.words << "  charged "
       << fmt(r.charged, 1) << "  routing h " << r.routing_h << "\n";
    if (r.prediction)
        os << "predicted pi " << fmt(r.prediction->pi) << "  mu " << fmt(r.prediction->mu)
           << "  efficiency " << fmt(r.prediction->efficiency) << " (with slack "
           << fmt(r.prediction->efficiency_slack) << ")\n";
    if (r.verdicts.checked) {
        auto yn = [](bool b) { return b ? "ok" : "FAIL"; };
        os << "verify sorted " << yn(r.verdicts.sorted) << "  permutation "
           << yn(r.verdicts.permutation) << "  stability " << yn(r.verdicts.stability)
           << "  bound " << (r.verdicts.bound ? yn(*r.verdicts.bound) : "n/a") << "\n";
        for (const auto& m : r.verdicts.messages)
            os << "  " << m << "\n";
    } else {
        os << "verify skipped\n";
    }
    for (const auto& n : r.notes)
        os << "note: " << n << "\n";
    return os.str();
}

std::string csv_header() {
    return "algo,dist,n,p,seed,seq,omega,r,s,reps,mean_seconds,n_max,n_max_bound,"
           "bucket_expansion,supersteps,words,routing_h,sorted,permutation,stability,bound";
}

std::string csv_row(const RunReport& r) {
    std::ostringstream os;
    const auto& s = r.spec;
    auto b = [](bool v) { return v ? "1" : "0"; };
    os << algo_name(s.algo) << ',' << dist_label(s.dist) << ',' << s.dist.n << ',' << s.dist.p
       << ',' << s.dist.seed << ',' << to_string(sorter_of(s)) << ',' << fmt(r.config.omega, 4)
       << ',' << r.config.r << ',' << r.config.s << ',' << r.rep_seconds.size() << ','
       << fmt(r.mean_seconds, 6) << ',' << r.imbalance.n_max_observed << ','
       << fmt(r.imbalance.n_max_bound, 1) << ',' << fmt(r.imbalance.bucket_expansion, 6) << ','
       << r.supersteps << ',' << r.words << ',' << r.routing_h << ',' << b(r.verdicts.sorted)
       << ',' << b(r.verdicts.permutation) << ',' << b(r.verdicts.stability) << ','
       << (r.verdicts.bound ? b(*r.verdicts.bound) : "");
    return os.str();
}

std::string size_label(std::uint64_t n) {
    constexpr std::uint64_t kM = 1024 * 1024, kK = 1024;
    if (n >= kM && n % kM == 0)
        return std::to_string(n / kM) + "M";
    if (n >= kK && n % kK == 0)
        return std::to_string(n / kK) + "K";
    return std::to_string(n);
}

namespace {

// Text table with right-aligned columns.
std::string layout(const std::vector<std::vector<std::string>>& rows) {
    std::vector<std::size_t> width;
    for (const auto& row : rows)
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (width.size() <= c)
                width.push_back(0);
            width[c] = std::max(width[c], row[c].size());
        }
    std::ostringstream os;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            os << (c ? "  " : "") << std::setw(static_cast<int>(width[c])) << row[c];
        os << "\n";
    }
    return os.str();
}

std::string join_csv(const std::vector<std::vector<std::string>>& rows) {
    std::ostringstream os;
    for (const auto& row : rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            os << (c ? "," : "") << row[c];
        os << "\n";
    }
    return os.str();
}

template <typename T>
void push_unique(std::vector<T>& v, const T& x) {
    if (std::find(v.begin(), v.end(), x) == v.end())
        v.push_back(x);
}

void check_format(const std::string& format) {
    if (format != "text" && format != "csv" && format != "json")
        throw ConfigError("unknown format '" + format + "' (expected text, csv, json)");
}

} // namespace

std::string render_table(const std::vector<RunReport>& reports, const std::string& format) {
    check_format(format);
    if (reports.empty())
        throw ConfigError("table: no runs to tabulate");
    std::vector<std::string> algos, dists;
    std::vector<std::uint64_t> sizes;
    std::vector<std::size_t> procs;
    for (const auto& r : reports) {
        push_unique(algos, algo_name(r.spec.algo));
        push_unique(dists, dist_label(r.spec.dist));
        push_unique(sizes, r.spec.dist.n);
        push_unique(procs, r.spec.dist.p);
    }
    std::sort(sizes.begin(), sizes.end());
    std::sort(procs.begin(), procs.end());
    auto cell = [&](const std::string& a, std::size_t p, std::uint64_t n,
                    const std::string& d) -> const RunReport* {
        for (const auto& r : reports)
            if (algo_name(r.spec.algo) == a && r.spec.dist.p == p && r.spec.dist.n == n &&
                dist_label(r.spec.dist) == d)
                return &r;
        return nullptr;
    };

    if (format == "json") {
        json out = json::array();
        for (const auto& r : reports)
            out.push_back({{"algo", algo_name(r.spec.algo)},
                           {"p", r.spec.dist.p},
                           {"n", r.spec.dist.n},
                           {"dist", dist_label(r.spec.dist)},
                           {"mean_seconds", r.mean_seconds}});
        return out.dump(2) + "\n";
    }
    std::vector<std::vector<std::string>> rows;
    if (format == "csv") {
        std::vector<std::string> head = {"algo", "p", "size"};
        head.insert(head.end(), dists.begin(), dists.end());
        rows.push_back(head);
    }
    std::string text;
    for (const auto& a : algos)
        for (std::size_t p : procs) {
            if (format == "text") {
                rows.clear();
                std::vector<std::string> head = {"Size"};
                for (const auto& d : dists)
                    head.push_back("[" + d + "]");
                rows.push_back(head);
            }
            bool any = false;
            for (std::uint64_t n : sizes) {
                std::vector<std::string> row;
                if (format == "csv")
                    row = {a, std::to_string(p), size_label(n)};
                else
                    row = {size_label(n)};
                bool row_any = false;
                for (const auto& d : dists) {
                    const RunReport* r = cell(a, p, n, d);
                    row.push_back(r ? fmt(r->mean_seconds, 4) : "-");
                    row_any = row_any || r;
                }
                if (row_any) {
                    rows.push_back(row);
                    any = true;
                }
            }
            if (format == "text" && any)
                text += "[" + a + "] p=" + std::to_string(p) + ", mean seconds\n" + layout(rows) +
                        "\n";
        }
    return format == "csv" ? join_csv(rows) : text;
}

std::string render_phases(const std::vector<RunReport>& reports, const std::string& format) {
    check_format(format);
    if (reports.empty())
        throw ConfigError("phases: no runs to report");
    if (format == "json") {
        json out = json::array();
        for (const auto& r : reports)
            out.push_back(to_json(r)["phases"]);
        return out.dump(2) + "\n";
    }
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> head = {"algo", "dist", "n", "p"};
    for (const auto& name : kPhaseNames)
        head.push_back(std::string(name) + "_s");
    for (std::size_t i = 1; i <= kPhaseNames.size(); ++i)
        head.push_back("Ph" + std::to_string(i) + "%");
    head.push_back("total_s");
    rows.push_back(head);
    for (const auto& r : reports) {
        std::vector<std::string> row = {algo_name(r.spec.algo), dist_label(r.spec.dist),
                                        size_label(r.spec.dist.n), std::to_string(r.spec.dist.p)};
        const double total = r.phases.total_seconds();
        for (const auto& ph : r.phases.phases)
            row.push_back(fmt(ph.seconds, 6));
        for (const auto& ph : r.phases.phases)
            row.push_back(fmt(total > 0 ? 100.0 * ph.seconds / total : 0.0, 2));
        row.push_back(fmt(total, 6));
        rows.push_back(row);
    }
    return format == "csv" ? join_csv(rows) : layout(rows);
}

std::string render_predictions(const std::vector<Prediction>& preds,
                               const std::vector<std::string>& preset_names,
                               const std::string& format) {
    check_format(format);
    if (format == "json") {
        json out = json::array();
        for (std::size_t i = 0; i < preds.size(); ++i) {
            json j = to_json(preds[i]);
            j["preset"] = preset_names.at(i);
            out.push_back(j);
        }
        return out.dump(2) + "\n";
    }
    std::vector<std::vector<std::string>> rows = {{"preset", "algo", "n", "p", "omega", "L_ops",
                                                   "g_ops", "pi", "mu", "efficiency",
                                                   "eff_slack", "speedup", "preconditions"}};
    for (std::size_t i = 0; i < preds.size(); ++i) {
        const auto& p = preds[i];
        std::string viol;
        for (const auto& v : p.violated_preconditions)
            viol += (viol.empty() ? "violated: " : "; ") + v;
        rows.push_back({preset_names.at(i), p.algo, std::to_string(p.n), std::to_string(p.p),
                        fmt(p.omega, 3), fmt(p.L, 2), fmt(p.g, 3), fmt(p.pi), fmt(p.mu),
                        fmt(p.efficiency), fmt(p.efficiency_slack), fmt(p.speedup, 2),
                        viol.empty() ? "ok" : viol});
    }
    if (format == "csv") {
        for (auto& row : rows)
            std::replace(row.back().begin(), row.back().end(), ',', ';');
        return join_csv(rows);
    }
    return layout(rows);
}

std::vector<MachinePreset> load_presets(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open preset file '" + path + "'");
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("preset file '" + path + "': " + e.what());
    }
    const json& list = doc.is_object() ? doc.at("presets") : doc;
    std::vector<MachinePreset> out;
    try {
        for (const auto& e : list) {
            MachinePreset m;
            m.name = e.at("name").get<std::string>();
            m.p = e.at("p").get<std::size_t>();
            m.L_us = e.at("L_us").get<double>();
            m.g_us = e.at("g_us").get<double>();
            m.comparisons_per_us = e.value("comparisons_per_us", 7.0);
            out.push_back(m);
        }
    } catch (const json::exception& e) {
        throw ConfigError("preset file '" + path + "': " + e.what());
    }
    return out;
}

std::vector<MachinePreset> available_presets() {
    auto presets = builtin_presets();
    if (const char* path = std::getenv(kPresetEnv); path && *path)
        for (auto& m : load_presets(path)) {
            auto it = std::find_if(presets.begin(), presets.end(),
                                   [&](const MachinePreset& x) { return x.name == m.name; });
            if (it != presets.end())
                *it = m;
            else
                presets.push_back(m);
        }
    return presets;
}

void write_keys(const std::string& path, const std::vector<Key>& keys) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write '" + path + "'");
    for (Key k : keys) {
        auto u = static_cast<std::uint64_t>(k);
        if constexpr (std::endian::native == std::endian::big)
            u = __builtin_bswap64(u);
        out.write(reinterpret_cast<const char*>(&u), sizeof u);
    }
}

std::vector<Key> read_keys(const std::string& path) {
    std::ifstream in(path, std::ios::binary | std::ios::ate);
    if (!in)
        throw ConfigError("cannot read '" + path + "'");
    const auto bytes = static_cast<std::size_t>(in.tellg());
    if (bytes % 8 != 0)
        throw ConfigError("'" + path + "' is not a whole number of 64-bit keys");
    in.seekg(0);
    std::vector<Key> keys(bytes / 8);
    for (auto& k : keys) {
        std::uint64_t u = 0;
        in.read(reinterpret_cast<char*>(&u), sizeof u);
        if constexpr (std::endian::native == std::endian::big)
            u = __builtin_bswap64(u);
        k = static_cast<Key>(u);
    }
    return keys;
}

namespace {

struct CommonFlags {
    std::vector<std::string> algos = {"dsq"};
    std::vector<std::string> dists = {"u"};
    std::vector<std::uint64_t> sizes = {std::uint64_t{1} << 20};
    std::vector<std::size_t> procs = {4};
    std::optional<double> omega;
    std::uint64_t seed = 1;
    std::string seq = "quick";
    bool seq_given = false;
    unsigned reps = 4;
    std::string preset;
    std::string format = "text";
    bool no_verify = false;
    unsigned threads = 0;
    bool sequential = false;
};

void add_common(CLI::App* sub, CommonFlags& f, bool lists) {
    if (lists) {
        sub->add_option("--algo", f.algos, "dsr, dsq, rsr, rsq, ran-baseline")->delimiter(',');
        sub->add_option("--dist", f.dists, "u, g, b, gg:<g>, s, dd, wr")->delimiter(',');
        sub->add_option("--n", f.sizes, "total keys")->delimiter(',');
        sub->add_option("--p", f.procs, "processors")->delimiter(',');
    } else {
        sub->add_option("--algo", f.algos, "dsr, dsq, rsr, rsq, ran-baseline")->expected(1);
        sub->add_option("--dist", f.dists, "u, g, b, gg:<g>, s, dd, wr")->expected(1);
        sub->add_option("--n", f.sizes, "total keys")->expected(1);
        sub->add_option("--p", f.procs, "processors")->expected(1);
    }
    sub->add_option("--omega", f.omega, "imbalance control omega");
    sub->add_option("--seed", f.seed, "base seed (processor i uses 20 + seed + 1001 i)");
    sub->add_option("--seq", f.seq, "sequential sorter for ran-baseline: quick or radix")
        ->check(CLI::IsMember({"quick", "radix"}));
    sub->add_option("--reps", f.reps, "timed repetitions");
    sub->add_option("--preset", f.preset, "machine preset for charging and predictions");
    sub->add_option("--format", f.format, "text, csv or json")
        ->check(CLI::IsMember({"text", "csv", "json"}));
    sub->add_flag("--no-verify", f.no_verify, "skip the oracle comparison");
    sub->add_option("--threads", f.threads, "worker threads (0 = min(p, hardware))");
    sub->add_flag("--sequential", f.sequential, "run processors on the calling thread");
}

RunSpec make_spec(const CommonFlags& f, const std::string& algo, const std::string& dist,
                  std::uint64_t n, std::size_t p) {
    RunSpec s;
    s.algo = parse_algo(algo);
    s.dist = parse_dist(dist);
    s.dist.n = n;
    s.dist.p = p;
    s.dist.seed = f.seed;
    s.omega = f.omega;
    s.seq = f.seq == "radix" ? SeqSorter::radix : SeqSorter::quick;
    if (f.seq_given && s.algo != Algo::ran_baseline && sorter_of(s) != s.seq)
        throw ConfigError(algo_name(s.algo) + " always uses " +
                          std::string(to_string(sorter_of(s))) +
                          " sort; --seq applies to ran-baseline");
    s.reps = f.reps;
    s.verify = !f.no_verify;
    if (!f.preset.empty())
        s.preset = find_preset(available_presets(), f.preset);
    s.run.workers = f.threads;
    s.run.mode = f.sequential ? bsp::ExecMode::sequential : bsp::ExecMode::threaded;
    return s;
}

std::vector<RunReport> run_suite(const CommonFlags& f) {
    std::vector<RunReport> out;
    for (const auto& a : f.algos)
        for (const auto& d : f.dists)
            for (std::uint64_t n : f.sizes)
                for (std::size_t p : f.procs)
                    out.push_back(run_spec(make_spec(f, a, d, n, p)));
    return out;
}

bool all_pass(const std::vector<RunReport>& reports) {
    return std::all_of(reports.begin(), reports.end(),
                       [](const RunReport& r) { return r.verdicts.all(); });
}

// Empty supersteps followed by all-to-all h-relations of growing size.
bsp::BspResult<void> calibration_probe(std::size_t p, std::size_t words, unsigned rounds,
                                       const bsp::RunOptions& run) {
    auto program = [words, rounds](bsp::Context& ctx, int) -> Task<void> {
        for (unsigned i = 0; i < rounds; ++i)
            co_await ctx.sync();
        const std::size_t p = ctx.nprocs();
        for (unsigned k = 1; k <= rounds; ++k) {
            const std::size_t per = std::max<std::size_t>(1, k * words / p);
            for (std::size_t d = 0; d < p; ++d)
                ctx.send(d, std::vector<Word>(per, k));
            co_await ctx.sync();
        }
    };
    return bsp::run_bsp<void>(bsp::BspParams{p, 0.0, 1.0}, program, std::vector<int>(p, 0), run);
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bulk-synchronous parallel sorting by regular and random oversampling"};
    app.name("bspsort");
    app.require_subcommand(1);

    CommonFlags run_f;
    std::string dump;
    unsigned trials = 1;
    auto* run = app.add_subcommand("run", "run one algorithm and verify its output");
    add_common(run, run_f, false);
    run->add_option("--dump", dump, "write the sorted keys (little-endian int64)");
    run->add_option("--trials", trials, "repeat with seeds seed, seed+1, ...; summarizes imbalance");

    CommonFlags table_f;
    table_f.dists = {"u", "g", "gg:2", "b", "s", "dd", "wr"};
    auto* table = app.add_subcommand("table", "mean time per size and distribution");
    add_common(table, table_f, true);

    CommonFlags phase_f;
    auto* phases = app.add_subcommand("phases", "time and share of each phase");
    add_common(phases, phase_f, true);

    std::vector<std::string> pred_presets, pred_algos = {"dsq", "rsq", "ran-baseline"};
    std::uint64_t pred_n = std::uint64_t{1} << 23;
    std::optional<double> pred_omega, pred_L, pred_g;
    std::optional<std::size_t> pred_p;
    std::string pred_format = "text";
    auto* predict = app.add_subcommand("predict", "model predictions for machine presets");
    predict->add_option("--preset", pred_presets, "presets (default: all)")->delimiter(',');
    predict->add_option("--algo", pred_algos, "algorithms")->delimiter(',');
    predict->add_option("--n", pred_n, "total keys");
    predict->add_option("--omega", pred_omega, "omega (default per algorithm)");
    predict->add_option("--p", pred_p, "override the preset's p");
    predict->add_option("--L", pred_L, "override L (microseconds)");
    predict->add_option("--g", pred_g, "override g (microseconds per word)");
    predict->add_option("--format", pred_format)->check(CLI::IsMember({"text", "csv", "json"}));

    std::string verify_in, verify_out;
    auto* verify = app.add_subcommand("verify", "check a dumped output against the input");
    verify->add_option("input", verify_in, "input keys")->required();
    verify->add_option("output", verify_out, "output keys")->required();

    CommonFlags gen_f;
    std::string gen_path;
    auto* genc = app.add_subcommand("gen", "write a generated input (little-endian int64)");
    genc->add_option("--dist", gen_f.dists)->expected(1);
    genc->add_option("--n", gen_f.sizes)->expected(1);
    genc->add_option("--p", gen_f.procs)->expected(1);
    genc->add_option("--seed", gen_f.seed);
    genc->add_option("--dump", gen_path, "output path")->required();

    std::size_t cal_p = 4, cal_words = 4096;
    unsigned cal_rounds = 8;
    double cal_cpu = 7.0;
    std::string cal_preset;
    auto* calibrate = app.add_subcommand("calibrate", "fit L and g on this machine");
    calibrate->add_option("--p", cal_p, "processors");
    calibrate->add_option("--words", cal_words, "words per processor in the smallest h-relation");
    calibrate->add_option("--rounds", cal_rounds, "idle and communication supersteps");
    calibrate->add_option("--cpu", cal_cpu, "comparisons per microsecond");
    calibrate->add_option("--preset", cal_preset, "preset to report alongside");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (*run) {
            run_f.seq_given = run->count("--seq") > 0;
            if (trials == 0)
                throw ConfigError("--trials must be at least 1");
            std::vector<RunReport> reports;
            std::vector<Key> sorted;
            for (unsigned t = 0; t < trials; ++t) {
                RunSpec spec = make_spec(run_f, run_f.algos.at(0), run_f.dists.at(0),
                                         run_f.sizes.at(0), run_f.procs.at(0));
                spec.dist.seed += t;
                reports.push_back(run_spec(spec, dump.empty() || t ? nullptr : &sorted));
            }
            if (!dump.empty())
                write_keys(dump, sorted);
            if (run_f.format == "json") {
                json arr = json::array();
                for (const auto& r : reports)
                    arr.push_back(to_json(r));
                out << (trials == 1 ? arr[0] : arr).dump(2) << "\n";
            } else if (run_f.format == "csv") {
                out << csv_header() << "\n";
                for (const auto& r : reports)
                    out << csv_row(r) << "\n";
            } else {
                for (const auto& r : reports)
                    out << render_text(r);
            }
            if (trials > 1) {
                std::size_t within = 0;
                double worst = 0.0;
                for (const auto& r : reports) {
                    const double target = 1.0 + 1.0 / r.config.omega;
                    within += r.imbalance.bucket_expansion <= target;
                    worst = std::max(worst, r.imbalance.bucket_expansion);
                }
                (run_f.format == "text" ? out : err)
                    << "trials " << trials << ": expansion <= 1+1/omega in " << within
                    << ", max expansion " << fmt(worst, 4) << "\n";
            }
            return all_pass(reports) ? 0 : 1;
        }
        if (*table) {
            table_f.seq_given = table->count("--seq") > 0;
            const auto reports = run_suite(table_f);
            out << render_table(reports, table_f.format);
            return all_pass(reports) ? 0 : 1;
        }
        if (*phases) {
            phase_f.seq_given = phases->count("--seq") > 0;
            const auto reports = run_suite(phase_f);
            out << render_phases(reports, phase_f.format);
            return all_pass(reports) ? 0 : 1;
        }
        if (*predict) {
            const auto presets = available_presets();
            std::vector<MachinePreset> chosen;
            if (pred_presets.empty())
                chosen = presets;
            else
                for (const auto& name : pred_presets)
                    chosen.push_back(find_preset(presets, name));
            std::vector<Prediction> rows;
            std::vector<std::string> names;
            for (const auto& m : chosen)
                for (const auto& a : pred_algos) {
                    MachinePreset mm = m;
                    if (pred_p)
                        mm.p = *pred_p;
                    if (pred_L)
                        mm.L_us = *pred_L;
                    if (pred_g)
                        mm.g_us = *pred_g;
                    auto pr = predict_for(parse_algo(a), pred_n, mm.params(), pred_omega);
                    if (!pr)
                        throw ConfigError("prediction needs 1 <= p <= n");
                    pr->algo = a;
                    rows.push_back(*pr);
                    names.push_back(mm.name);
                }
            out << render_predictions(rows, names, pred_format);
            return 0;
        }
        if (*verify) {
            const auto in = read_keys(verify_in);
            const auto got = read_keys(verify_out);
            const Verdicts v = check_keys(in, got);
            if (v.all()) {
                out << "pass: " << got.size() << " keys sorted\n";
                return 0;
            }
            for (const auto& m : v.messages)
                out << "FAIL: " << m << "\n";
            return 1;
        }
        if (*genc) {
            DistributionSpec spec = parse_dist(gen_f.dists.at(0));
            spec.n = gen_f.sizes.at(0);
            spec.p = gen_f.procs.at(0);
            spec.seed = gen_f.seed;
            write_keys(gen_path, concat(gen(spec)));
            out << "wrote " << spec.n << " keys (" << describe(spec) << ") to " << gen_path << "\n";
            return 0;
        }
        if (*calibrate) {
            if (cal_rounds == 0)
                throw ConfigError("--rounds must be at least 1");
            auto probe = calibration_probe(cal_p, cal_words, cal_rounds, {});
            const Calibration c = empirical_calibrate(measured_samples(probe.ledger, cal_cpu));
            out << "p " << cal_p << "  L " << fmt(c.L / cal_cpu, 3) << " us (" << fmt(c.L, 1)
                << " ops)  g " << fmt(c.g / cal_cpu, 5) << " us/word (" << fmt(c.g, 4)
                << " ops)  from " << c.idle_samples << " idle and " << c.comm_samples
                << " communication supersteps\n";
            if (!cal_preset.empty()) {
                const auto m = find_preset(available_presets(), cal_preset);
                out << "preset " << m.name << "  p " << m.p << "  L " << fmt(m.L_us, 3)
                    << " us  g " << fmt(m.g_us, 5) << " us/word\n";
            }
            return 0;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

} // namespace bspsort::cli
