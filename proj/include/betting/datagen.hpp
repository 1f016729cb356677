#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "betting/random.hpp"
#include "betting/types.hpp"

namespace betting {

struct Uniform {
  double a = 0.0;
  double b = 1.0;
};

/// Normal(mu, sigma) truncated to [lo, hi].
struct TruncNormal {
  double mu = 0.5;
  double sigma = 0.15;
  double lo = 0.0;
  double hi = 1.0;
};

struct Bernoulli {
  double p = 0.5;
};

using DistributionSpec = std::variant<Uniform, TruncNormal, Bernoulli>;

void validate(const DistributionSpec& d);
/// "uniform:a,b", "truncnormal:mu,sigma", "bernoulli:p".
DistributionSpec parse_distribution(std::string_view text);
std::string to_string(const DistributionSpec& d);

/// One draw in [0,1]. Every draw consumes exactly one uniform from `rng`.
double sample(const DistributionSpec& d, Rng& rng);

enum class Hypothesis { H0, H1 };

std::string to_string(Hypothesis h);

inline constexpr std::size_t kDefaultCalibrationLength = 500;

struct StreamSpec {
  Scenario scenario;
  Hypothesis hypothesis = Hypothesis::H1;
  DistributionSpec distX = Uniform{};
  std::optional<DistributionSpec> distY;  // difference-in-means only
  std::size_t calibrationLength = kDefaultCalibrationLength;

  void validate() const;
};

/// Independent draws from distX (and distY); payoffs built lazily.
std::unique_ptr<PayoffStream> make_h1_stream(const StreamSpec& spec, std::uint64_t seed);

/// Difference-in-means: y is shifted by mean(x) - mean(y) over the first
/// calibrationLength pairs so both calibration means agree. Shifted values
/// outside [0,1] raise ConfigError naming the round. One-sided: draws from
/// distX directly.
std::unique_ptr<PayoffStream> make_h0_stream(const StreamSpec& spec, std::uint64_t seed);

std::unique_ptr<PayoffStream> make_stream(const StreamSpec& spec, std::uint64_t seed);

/// Replays a pre-materialized sequence.
class VectorStream final : public PayoffStream {
public:
  explicit VectorStream(std::vector<Observation> rows) : rows_(std::move(rows)) {}
  std::optional<Observation> next() override;

private:
  std::vector<Observation> rows_;
  std::size_t pos_ = 0;
};

std::vector<Observation> materialize(PayoffStream& stream, std::size_t n);

enum class StreamFormat { Csv, Jsonl };

StreamFormat parse_stream_format(std::string_view name);

/// Reads rows (x) or (x, y) lazily from `in`, which must outlive the stream.
/// Malformed or out-of-range rows raise DataError with the line number.
std::unique_ptr<PayoffStream> read_stream(std::istream& in, StreamFormat format,
                                          const Scenario& scenario);
/// Opens `path` ("-" for stdin) and reads it as above.
std::unique_ptr<PayoffStream> open_stream(const std::string& path, StreamFormat format,
                                          const Scenario& scenario);

}  // namespace betting
