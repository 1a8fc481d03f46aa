#pragma once

#include <cstdint>

namespace subpass {

// Per-stream instrumentation. Every sampler charges its work to the stream it
// draws from, so resetting the counters around a call measures that call.
struct WorkCounters {
    std::uint64_t uniforms = 0;
    std::uint64_t rejections = 0;    // iterations of accept-reject and outer loops
    std::uint64_t newton = 0;        // Newton / Householder steps
    std::uint64_t bisections = 0;    // bracketing steps before Newton
    std::uint64_t quad_calls = 0;    // adaptive integrals computed
    std::uint64_t quad_evals = 0;    // integrand evaluations inside them
    std::uint64_t lc_steps = 0;      // log-concave sampler preprocessing steps

    // Scalar work measure used for complexity trends: each adaptive integral
    // counts once, as does every loop iteration, root-finding step and draw.
    double total() const
    {
        return static_cast<double>(uniforms + rejections + newton + bisections + quad_calls +
                                   lc_steps);
    }

    WorkCounters& operator+=(const WorkCounters& o)
    {
        uniforms += o.uniforms;
        rejections += o.rejections;
        newton += o.newton;
        bisections += o.bisections;
        quad_calls += o.quad_calls;
        quad_evals += o.quad_evals;
        lc_steps += o.lc_steps;
        return *this;
    }
};

inline std::uint64_t mix64(std::uint64_t z)
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Counter-based SplitMix64: draw i of stream (seed, id) is mix64(key + (i+1)*gamma)
// with key derived from both. Streams with different ids are keyed apart.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0)
        : seed_(seed), id_(stream_id), key_(mix64(seed ^ mix64(stream_id + kGamma)) ^ stream_id)
    {
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return id_; }
    std::uint64_t draws() const { return counter_; }

    std::uint64_t next_u64()
    {
        ++counter_;
        return mix64(key_ + counter_ * kGamma);
    }

    // Uniform on the open interval (0,1): 53-bit mantissa, offset by half a step.
    double uniform()
    {
        ++work.uniforms;
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    // Independent child stream; children of distinct ids never share keys.
    RngStream split(std::uint64_t child) const
    {
        return RngStream(mix64(key_ ^ 0x5851F42D4C957F2DULL), child);
    }

    WorkCounters work;

private:
    static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;
    std::uint64_t seed_;
    std::uint64_t id_;
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

}  // namespace subpass
