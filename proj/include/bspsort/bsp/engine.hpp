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

/*
 * Superstep execution engine.
 *
 * A BSP program is a coroutine run once per logical processor. Processors
 * stage messages with Context::send() and end a superstep with
 * `co_await ctx.sync()`. At the barrier the engine moves every staged message
 * to its destination inbox (ordered by sender rank, staging order preserved
 * per sender) and appends one record to the cost ledger, charging
 * max(L, x + g*h) where x is the largest operation count any processor
 * reported for the step and h the largest number of words any processor sent
 * or received.
 *
 * Processors run either on a pool of worker threads or multiplexed on the
 * calling thread. Both modes resume processors in the same per-step order
 * relative to the barrier, so outputs and ledgers (apart from wall times)
 * are identical.
 */

#pragma once

#include <algorithm>
#include <array>
#include <barrier>
#include <chrono>
#include <coroutine>
#include <cstdint>
#include <cstring>
#include <exception>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <utility>
#include <vector>

#include "bspsort/bsp/task.hpp"

namespace bspsort::bsp {

//! Communication unit; g is charged per word.
using Word = std::uint64_t;

class BspError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

//! Raised when processors disagree on the superstep sequence or a program
//! leaves messages that can never be delivered.
class ProtocolViolation : public BspError
{
public:
    using BspError::BspError;
};

//! Machine description in basic-operation units.
struct BspParams {
    std::size_t p = 1;
    double L = 0.0;
    double g = 0.0;

    void validate() const {
        if (p < 1)
            throw BspError("BspParams: p must be at least 1");
        if (!(L >= 0.0))
            throw BspError("BspParams: L must be non-negative");
        if (!(g >= 0.0))
            throw BspError("BspParams: g must be non-negative");
    }
};

//! Cost charged for a superstep with local work x and an h-relation.
inline double charge_superstep(double x, double h, const BspParams& params) {
    return std::max(params.L, x + params.g * h);
}

struct Message {
    std::size_t sender = 0;
    std::size_t dest = 0;
    //! Small header (segment id, write offset, ...). Not charged as payload.
    std::uint64_t tag = 0;
    std::vector<Word> payload;
};

struct SuperstepRecord {
    std::size_t step = 0;
    std::uint64_t x = 0;       // max ops reported by any processor
    std::uint64_t h = 0;       // max(words sent, words received) over processors
    std::uint64_t words = 0;   // total words moved at this barrier
    double charged = 0.0;
    double seconds = 0.0;      // wall time including the exchange
    double exchange_seconds = 0.0;
    int phase = 0;             // phase of rank 0 when the step ended
    bool barrier = true;       // false for the trailing step after the last sync
};

struct CostLedger {
    std::vector<SuperstepRecord> steps;

    std::size_t supersteps() const { return steps.size(); }

    std::size_t barriers() const {
        return static_cast<std::size_t>(
            std::count_if(steps.begin(), steps.end(), [](const auto& s) { return s.barrier; }));
    }

    std::uint64_t total_words() const {
        std::uint64_t w = 0;
        for (const auto& s : steps)
            w += s.words;
        return w;
    }

    double total_charged() const {
        double c = 0.0;
        for (const auto& s : steps)
            c += s.charged;
        return c;
    }

    std::uint64_t max_h() const {
        std::uint64_t h = 0;
        for (const auto& s : steps)
            h = std::max(h, s.h);
        return h;
    }
};

enum class ExecMode { threaded, sequential };

struct RunOptions {
    ExecMode mode = ExecMode::threaded;
    //! Protocol budget; exceeding it is reported as a violation.
    std::size_t max_supersteps = 1u << 16;
    //! Worker threads for threaded mode; 0 picks min(p, hardware threads).
    unsigned workers = 0;
};

inline constexpr std::size_t kMaxPhases = 8;

//! Per-processor phase accounting, indexed by phase id. Seconds are active
//! (running) time only.
struct PhaseClock {
    std::array<double, kMaxPhases> seconds{};
    std::array<std::uint64_t, kMaxPhases> ops{};
};

//! Copies a trivially copyable range into a word vector.
template <typename T>
std::vector<Word> pack_words(std::span<const T> values) {
    static_assert(std::is_trivially_copyable_v<T>);
    static_assert(sizeof(T) % sizeof(Word) == 0, "payload types must be word-sized");
    std::vector<Word> out(values.size() * (sizeof(T) / sizeof(Word)));
    if (!values.empty())
        std::memcpy(out.data(), values.data(), values.size_bytes());
    return out;
}

template <typename T>
std::size_t payload_count(std::span<const Word> words) {
    static_assert(sizeof(T) % sizeof(Word) == 0, "payload types must be word-sized");
    return words.size() / (sizeof(T) / sizeof(Word));
}

template <typename T>
void unpack_words(std::span<const Word> words, T* out) {
    static_assert(std::is_trivially_copyable_v<T>);
    if (!words.empty())
        std::memcpy(static_cast<void*>(out), words.data(), words.size_bytes());
}

template <typename T>
std::vector<T> unpack_words(std::span<const Word> words) {
    std::vector<T> out(payload_count<T>(words));
    unpack_words(words, out.data());
    return out;
}

template <typename Out>
struct BspResult {
    std::vector<Out> outputs;
    CostLedger ledger;
    std::vector<PhaseClock> clocks;
};

template <>
struct BspResult<void> {
    CostLedger ledger;
    std::vector<PhaseClock> clocks;
};

template <typename Out, typename In, typename Program>
BspResult<Out> run_bsp(const BspParams& params, Program program, std::vector<In> inputs,
                       const RunOptions& options = {});

//! A processor's view of the machine during a run.
class Context
{
    using Clock = std::chrono::steady_clock;

public:
    Context(std::size_t rank, const BspParams& params) : rank_(rank), params_(params) {}

    Context(const Context&) = delete;
    Context& operator=(const Context&) = delete;

    std::size_t rank() const noexcept { return rank_; }
    std::size_t nprocs() const noexcept { return params_.p; }
    const BspParams& params() const noexcept { return params_; }

    //! Index of the superstep currently executing.
    std::size_t superstep() const noexcept { return superstep_; }

    void send(std::size_t dest, std::vector<Word> payload, std::uint64_t tag = 0) {
        if (dest >= params_.p)
            throw BspError("send: destination " + std::to_string(dest) +
                           " out of range for p=" + std::to_string(params_.p));
        outbox_.push_back(Message{rank_, dest, tag, std::move(payload)});
    }

    template <typename T>
    void send_values(std::size_t dest, std::span<const T> values, std::uint64_t tag = 0) {
        send(dest, pack_words(values), tag);
    }

    //! Messages delivered at the most recent barrier, ordered by sender.
    std::span<const Message> inbox() const noexcept { return inbox_; }

    //! Takes ownership of the inbox, leaving it empty.
    std::vector<Message> take_inbox() noexcept { return std::move(inbox_); }

    //! Reports local basic operations for the current superstep.
    void charge(std::uint64_t ops) noexcept {
        step_ops_ += ops;
        clock_.ops[phase_] += ops;
    }

    //! Switches the phase that subsequent active time and ops are booked to.
    void enter_phase(int phase) {
        if (phase < 0 || static_cast<std::size_t>(phase) >= kMaxPhases)
            throw BspError("enter_phase: phase id out of range");
        book_active();
        phase_ = static_cast<std::size_t>(phase);
    }

    int phase() const noexcept { return static_cast<int>(phase_); }

    auto sync() noexcept {
        struct Awaiter {
            Context& ctx;
            bool await_ready() const noexcept { return false; }
            void await_suspend(std::coroutine_handle<> h) noexcept {
                ctx.resume_point_ = h;
                ctx.at_barrier_ = true;
            }
            void await_resume() const noexcept {}
        };
        return Awaiter{*this};
    }

private:
    template <typename Out, typename In, typename Program>
    friend BspResult<Out> run_bsp(const BspParams&, Program, std::vector<In>, const RunOptions&);

    // Active time runs from resume to suspension; time spent waiting at a
    // barrier or while other processors share the thread is not booked.
    void book_active() {
        const auto now = Clock::now();
        clock_.seconds[phase_] += std::chrono::duration<double>(now - active_since_).count();
        active_since_ = now;
    }

    void run_until_suspended() {
        at_barrier_ = false;
        active_since_ = Clock::now();
        resume_point_.resume();
        book_active();
    }

    std::size_t rank_;
    BspParams params_;
    std::size_t superstep_ = 0;
    std::vector<Message> inbox_;
    std::vector<Message> outbox_;
    std::uint64_t step_ops_ = 0;
    std::coroutine_handle<> resume_point_;
    bool at_barrier_ = false;

    PhaseClock clock_;
    std::size_t phase_ = 0;
    Clock::time_point active_since_;
};

namespace detail {

//! Resumes a set of processors once per superstep on a fixed set of threads.
class WorkerPool
{
public:
    WorkerPool(unsigned workers, std::function<void(unsigned)> work)
        : start_(workers + 1), done_(workers + 1), work_(std::move(work)) {
        threads_.reserve(workers);
        for (unsigned w = 0; w < workers; ++w)
            threads_.emplace_back([this, w] { loop(w); });
    }

    WorkerPool(const WorkerPool&) = delete;
    WorkerPool& operator=(const WorkerPool&) = delete;

    ~WorkerPool() {
        stop_ = true;
        start_.arrive_and_wait();
        for (auto& t : threads_)
            t.join();
    }

    void run_step() {
        start_.arrive_and_wait();
        done_.arrive_and_wait();
    }

private:
    void loop(unsigned w) {
        for (;;) {
            start_.arrive_and_wait();
            if (stop_)
                return;
            work_(w);
            done_.arrive_and_wait();
        }
    }

    std::barrier<> start_;
    std::barrier<> done_;
    std::function<void(unsigned)> work_;
    std::vector<std::thread> threads_;
    bool stop_ = false;
};

} // namespace detail

/*!
 * Runs `program(ctx, input)` on p logical processors.
 *
 * `program` must return Task<Out>. Every processor has to execute the same
 * number of barriers; a processor finishing while others still wait at a
 * barrier is a protocol violation, as is exceeding options.max_supersteps or
 * finishing with undelivered messages. The first exception thrown by any
 * processor (lowest rank first) is rethrown after the step it occurred in.
 */
template <typename Out, typename In, typename Program>
BspResult<Out> run_bsp(const BspParams& params, Program program, std::vector<In> inputs,
                       const RunOptions& options) {
    params.validate();
    const std::size_t p = params.p;
    if (inputs.size() != p)
        throw BspError("run_bsp: expected " + std::to_string(p) + " inputs, got " +
                       std::to_string(inputs.size()));

    std::vector<std::unique_ptr<Context>> ctx;
    ctx.reserve(p);
    for (std::size_t r = 0; r < p; ++r)
        ctx.push_back(std::make_unique<Context>(r, params));

    std::vector<Task<Out>> roots;
    roots.reserve(p);
    for (std::size_t r = 0; r < p; ++r) {
        roots.push_back(program(*ctx[r], std::move(inputs[r])));
        ctx[r]->resume_point_ = roots.back().handle();
    }

    auto resume = [&](std::size_t r) {
        if (!roots[r].done())
            ctx[r]->run_until_suspended();
    };

    unsigned workers = 1;
    std::unique_ptr<detail::WorkerPool> pool;
    if (options.mode == ExecMode::threaded && p > 1) {
        workers = options.workers != 0 ? options.workers
                                       : std::max(1u, std::thread::hardware_concurrency());
        workers = static_cast<unsigned>(std::min<std::size_t>(workers, p));
        pool = std::make_unique<detail::WorkerPool>(workers, [&](unsigned w) {
            for (std::size_t r = w; r < p; r += workers)
                resume(r);
        });
    }

    BspResult<Out> result;
    std::vector<std::uint64_t> sent(p), received(p);

    for (std::size_t step = 0;; ++step) {
        if (step >= options.max_supersteps)
            throw ProtocolViolation("run_bsp: superstep budget of " +
                                    std::to_string(options.max_supersteps) + " exceeded");
        const auto t0 = std::chrono::steady_clock::now();
        for (auto& c : ctx)
            c->superstep_ = step;

        if (pool)
            pool->run_step();
        else
            for (std::size_t r = 0; r < p; ++r)
                resume(r);

        for (std::size_t r = 0; r < p; ++r)
            if (roots[r].done() && roots[r].handle().promise().error)
                std::rethrow_exception(roots[r].handle().promise().error);

        std::size_t finished = 0;
        for (std::size_t r = 0; r < p; ++r) {
            if (roots[r].done())
                ++finished;
            else if (!ctx[r]->at_barrier_)
                throw ProtocolViolation("run_bsp: processor " + std::to_string(r) +
                                        " suspended outside a barrier");
        }
        if (finished != 0 && finished != p)
            throw ProtocolViolation("run_bsp: processors disagree on the superstep count (" +
                                    std::to_string(finished) + " of " + std::to_string(p) +
                                    " finished at step " + std::to_string(step) + ")");
        const bool last = finished == p;

        // Exchange. Inboxes are rebuilt in sender order.
        const auto t_exchange = std::chrono::steady_clock::now();
        std::fill(sent.begin(), sent.end(), 0);
        std::fill(received.begin(), received.end(), 0);
        std::vector<std::vector<Message>> next_inbox(p);
        std::uint64_t words = 0, x = 0;
        for (std::size_t r = 0; r < p; ++r) {
            Context& c = *ctx[r];
            x = std::max(x, c.step_ops_);
            c.step_ops_ = 0;
            for (auto& m : c.outbox_) {
                sent[r] += m.payload.size();
                received[m.dest] += m.payload.size();
                words += m.payload.size();
                next_inbox[m.dest].push_back(std::move(m));
            }
            c.outbox_.clear();
        }
        if (last && words != 0)
            throw ProtocolViolation("run_bsp: messages staged after the final barrier");
        for (std::size_t r = 0; r < p; ++r)
            ctx[r]->inbox_ = std::move(next_inbox[r]);

        std::uint64_t h = 0;
        for (std::size_t r = 0; r < p; ++r)
            h = std::max({h, sent[r], received[r]});

        SuperstepRecord rec;
        rec.step = step;
        rec.x = x;
        rec.h = h;
        rec.words = words;
        rec.charged = charge_superstep(static_cast<double>(x), static_cast<double>(h), params);
        rec.phase = ctx[0]->phase();
        rec.barrier = !last;
        const auto t1 = std::chrono::steady_clock::now();
        rec.seconds = std::chrono::duration<double>(t1 - t0).count();
        rec.exchange_seconds = std::chrono::duration<double>(t1 - t_exchange).count();
        result.ledger.steps.push_back(rec);

        if (last)
            break;
    }
    pool.reset();

    for (auto& c : ctx)
        result.clocks.push_back(c->clock_);
    if constexpr (!std::is_void_v<Out>) {
        result.outputs.reserve(p);
        for (auto& t : roots)
            result.outputs.push_back(t.result());
    }
    return result;
}

} // namespace bspsort::bsp
