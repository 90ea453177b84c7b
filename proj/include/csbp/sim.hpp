#pragma once

#include "csbp/joint.hpp"
#include "csbp/random.hpp"
#include "csbp/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <iosfwd>
#include <limits>
#include <memory>
#include <string>
#include <thread>
#include <vector>

namespace csbp {

double poisson_kernel(double x, std::int64_t l, double lam);
std::int64_t sample_poisson(double mean, Stream& s);

enum class EventTag {
    DiffusionStep,
    MassJump,
    SkeletonBranch, // k extra individuals, no mass
    SkeletonDeath,
    MassBirth,
    Graft, // mass y and k extra individuals
    Explosion,
    Killed
};

std::string to_string(EventTag tag);

// count > 1 marks an aggregated batch of identical-tag events; k is then the batch total.
struct PathEvent {
    double t;
    double x;
    std::int64_t l;
    EventTag tag;
    std::int64_t k = 0;
    std::int64_t count = 1;
};

enum class PathStatus { AliveAtT, Exploded, Extinct };

std::string to_string(PathStatus s);

struct TwoTypePath {
    std::vector<PathEvent> events;
    PathStatus status = PathStatus::AliveAtT;
    double status_time = 0.0;
    bool killed = false;
    double x0 = 0.0;
    std::int64_t l0 = 0;
    double x_T = 0.0;
    std::int64_t l_T = 0;
    // First cap-crossing times; infinite if not crossed.
    double t_cap_x = std::numeric_limits<double>::infinity();
    double t_cap_l = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;

    bool in_cemetery() const { return status == PathStatus::Exploded; }
};

struct SimConfig {
    double h = 1e-3;
    double delta = 1e-4;
    double x_max = 1e12;
    double l_max = 1e9;
    bool small_jump_diffusion = true;
    bool record_events = false;
    bool record_steps = false;
    // Expected events per step above which a step is leapt in aggregate.
    double batch_threshold = 256.0;
    // Steps simulated past the first cap crossing to time the other coordinate.
    int cap_window_steps = 20;

    void validate() const;
};

struct SkeletonPath {
    std::vector<std::pair<double, std::int64_t>> events;
    PathStatus status = PathStatus::AliveAtT;
    double status_time = 0.0;
    std::int64_t l_T = 0;
};

struct Engine;

// Immutable, shareable across threads; each run owns its stream.
class CsbpSimulator {
public:
    CsbpSimulator(const BranchingMechanism& m, const SimConfig& cfg);
    TwoTypePath run(double x0, double T, Stream& s) const;

private:
    std::shared_ptr<const Engine> engine_;
};

class TwoTypeSimulator {
public:
    TwoTypeSimulator(const JointMechanism& j, const SimConfig& cfg);
    TwoTypePath run(double x0, std::int64_t l0, double T, Stream& s) const;
    // Requires regime AtOrAbove.
    SkeletonPath run_skeleton(std::int64_t l0, double T, Stream& s) const;
    const JointMechanism& joint() const { return j_; }
    const SimConfig& config() const { return cfg_; }

private:
    JointMechanism j_;
    SimConfig cfg_;
    std::shared_ptr<const Engine> engine_;
};

TwoTypePath sample_csbp_path(const BranchingMechanism& m, double x0, double T, const SimConfig& cfg,
                             Stream& s);
TwoTypePath sample_two_type_path(const JointMechanism& j, double x0, std::int64_t l0, double T,
                                 const SimConfig& cfg, Stream& s);
SkeletonPath sample_skeleton_gw(const JointMechanism& j, std::int64_t l0, double T,
                                const SimConfig& cfg, Stream& s);

// Columns t,x,l,event_tag; tags with an offspring count print as name(k), batches as name*count.
void write_path_csv(std::ostream& os, const TwoTypePath& path);

// Runs f(i) for i in [0, n) on up to `threads` workers (0 means hardware
// concurrency); results are returned in index order.
template <class F>
auto run_replicates(std::size_t n, unsigned threads, F&& f) -> std::vector<decltype(f(std::size_t{}))>
{
    using R = decltype(f(std::size_t{}));
    std::vector<R> out(n);
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i)
            out[i] = f(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n || failed.load())
                return;
            try {
                out[i] = f(i);
            } catch (...) {
                if (!failed.exchange(true))
                    err = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back(work);
    for (auto& th : pool)
        th.join();
    if (err)
        std::rethrow_exception(err);
    return out;
}

} // namespace csbp
