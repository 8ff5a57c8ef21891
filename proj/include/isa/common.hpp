#ifndef ISA_COMMON_HPP
#define ISA_COMMON_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <ranges>
#include <thread>
#include <vector>

namespace isa {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class ErrorCode {
    Io,
    BadCsv,
    MissingOutcome,
    DuplicateId,
    NonNumericCell,
    NoRows,
    MalformedJson,
    MissingField,
    UnsortableTimestep,
    UnknownCategory,
    EmptyTimeline,
    TooFewPoints,
    MalformedPoint,
    AllMissing,
    NothingLeft,
    AllIdentical,
    InvalidArgument,
    TooFewPerClass,
    DimensionMismatch,
    OptimizerDiverged,
    TooManyFeatures,
    DegenerateHull,
    NotSimple,
    DegenerateBoundary,
    ClassTooSmall,
    OneClass,
    NonFiniteInput,
    PoolTooSmall,
    UnknownFeature,
};

inline std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::Io: return "Io";
    case ErrorCode::BadCsv: return "BadCsv";
    case ErrorCode::MissingOutcome: return "MissingOutcome";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::NonNumericCell: return "NonNumericCell";
    case ErrorCode::NoRows: return "NoRows";
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::MissingField: return "MissingField";
    case ErrorCode::UnsortableTimestep: return "UnsortableTimestep";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::EmptyTimeline: return "EmptyTimeline";
    case ErrorCode::TooFewPoints: return "TooFewPoints";
    case ErrorCode::MalformedPoint: return "MalformedPoint";
    case ErrorCode::AllMissing: return "AllMissing";
    case ErrorCode::NothingLeft: return "NothingLeft";
    case ErrorCode::AllIdentical: return "AllIdentical";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TooFewPerClass: return "TooFewPerClass";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::OptimizerDiverged: return "OptimizerDiverged";
    case ErrorCode::TooManyFeatures: return "TooManyFeatures";
    case ErrorCode::DegenerateHull: return "DegenerateHull";
    case ErrorCode::NotSimple: return "NotSimple";
    case ErrorCode::DegenerateBoundary: return "DegenerateBoundary";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::OneClass: return "OneClass";
    case ErrorCode::NonFiniteInput: return "NonFiniteInput";
    case ErrorCode::PoolTooSmall: return "PoolTooSmall";
    case ErrorCode::UnknownFeature: return "UnknownFeature";
    }
    return "Unknown";
}

/// All recoverable failures in the library are reported with this type.
/// The code is stable and meant for programmatic checks; the message names
/// the offending file, row or value when one exists.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Binary scenario outcome. Unsafe is the positive class (numeric 1).
enum class Outcome : std::uint8_t { Safe = 0, Unsafe = 1 };

inline int to_int(Outcome o) { return o == Outcome::Unsafe ? 1 : 0; }
inline Outcome outcome_from_int(int v) { return v != 0 ? Outcome::Unsafe : Outcome::Safe; }

// splitmix64 finalizer; used to derive independent RNG streams from a master seed.
inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return mix64(mix64(seed) ^ mix64(stream + 0x632be59bd9b4e019ULL));
}

template <std::ranges::range Range>
std::uint64_t derive_seed(std::uint64_t seed, const Range& values) {
    std::uint64_t h = mix64(seed);
    for (auto v : values) h = mix64(h ^ static_cast<std::uint64_t>(v));
    return h;
}

namespace detail {
inline std::atomic<unsigned>& worker_setting() {
    static std::atomic<unsigned> workers{0};
    return workers;
}
} // namespace detail

/// Number of threads used by parallel stages. 0 means hardware concurrency.
inline void set_worker_count(unsigned n) { detail::worker_setting() = n; }

inline unsigned worker_count() {
    unsigned w = detail::worker_setting();
    if (w == 0) w = std::max(1u, std::thread::hardware_concurrency());
    return w;
}

/// Runs fn(i) for i in [0, n). Every index is processed exactly once; callers
/// write results into per-index slots so the output is schedule independent.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(worker_count(), n));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= n) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    next = n;
                    return;
                }
            }
        });
    }
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

} // namespace isa

#endif // ISA_COMMON_HPP
