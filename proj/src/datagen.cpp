#include "betting/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include <boost/math/distributions/normal.hpp>
#include <nlohmann/json.hpp>

#include "betting/engine.hpp"
#include "betting/error.hpp"

namespace betting {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::optional<double> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::vector<double> parse_params(std::string_view text, std::string_view what) {
  std::vector<double> out;
  while (true) {
    const auto comma = text.find(',');
    const auto v = parse_number(text.substr(0, comma));
    if (!v) throw ConfigError("bad parameter list in '" + std::string(what) + "'");
    out.push_back(*v);
    if (comma == std::string_view::npos) break;
    text.remove_prefix(comma + 1);
  }
  return out;
}

double truncnormal_quantile(const TruncNormal& d, double u) {
  const boost::math::normal_distribution<double> n(d.mu, d.sigma);
  const double plo = boost::math::cdf(n, d.lo);
  const double phi = boost::math::cdf(n, d.hi);
  const double p = plo + u * (phi - plo);
  if (!(p > 0.0)) return d.lo;
  if (!(p < 1.0)) return d.hi;
  return std::clamp(boost::math::quantile(n, p), d.lo, d.hi);
}

class IidStream final : public PayoffStream {
public:
  IidStream(const StreamSpec& spec, std::uint64_t seed) : spec_(spec), rng_(seed) {}

  std::optional<Observation> next() override {
    const double x = sample(spec_.distX, rng_);
    if (spec_.scenario.one_sided()) return make_observation(spec_.scenario, x);
    const double y = sample(*spec_.distY, rng_);
    return make_observation(spec_.scenario, x, y);
  }

private:
  StreamSpec spec_;
  Rng rng_;
};

class ShiftedStream final : public PayoffStream {
public:
  ShiftedStream(const StreamSpec& spec, std::uint64_t seed) : spec_(spec), rng_(seed) {
    const std::size_t n = spec_.calibrationLength;
    calibration_.reserve(n);
    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = sample(spec_.distX, rng_);
      const double y = sample(*spec_.distY, rng_);
      calibration_.emplace_back(x, y);
      sx += x;
      sy += y;
    }
    shift_ = (sx - sy) / static_cast<double>(n);
  }

  std::optional<Observation> next() override {
    double x, y;
    if (index_ < calibration_.size()) {
      std::tie(x, y) = calibration_[index_];
    } else {
      x = sample(spec_.distX, rng_);
      y = sample(*spec_.distY, rng_);
    }
    ++index_;
    const double shifted = y + shift_;
    if (!(shifted >= 0.0 && shifted <= 1.0)) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "H0 shift moves y out of [0,1] at round " << index_ << ": " << y << " + " << shift_
          << " = " << shifted;
      throw ConfigError(msg.str());
    }
    return make_observation(spec_.scenario, x, shifted);
  }

  double shift() const { return shift_; }

private:
  StreamSpec spec_;
  Rng rng_;
  std::vector<std::pair<double, double>> calibration_;
  double shift_ = 0.0;
  std::size_t index_ = 0;
};

class TextStream final : public PayoffStream {
public:
  TextStream(std::istream& in, StreamFormat format, const Scenario& scenario)
      : in_(in), format_(format), scenario_(scenario) {}

  std::optional<Observation> next() override {
    std::string line;
    while (std::getline(in_, line)) {
      ++lineNo_;
      const std::string_view body = trim(line);
      if (body.empty() || body.front() == '#') continue;
      if (format_ == StreamFormat::Csv && !sawRow_ && is_header(body)) {
        sawRow_ = true;
        continue;
      }
      sawRow_ = true;
      return parse_row(body);
    }
    return std::nullopt;
  }

private:
  static bool is_header(std::string_view body) { return body == "x" || body == "x,y"; }

  [[noreturn]] void fail(const std::string& what) const {
    throw DataError("line " + std::to_string(lineNo_) + ": " + what);
  }

  Observation build(double x, std::optional<double> y) {
    if (!scenario_.one_sided() && !y) fail("difference-in-means rows need x and y");
    try {
      return make_observation(scenario_, x, y.value_or(0.0));
    } catch (const DataError& e) {
      fail(e.what());
    }
  }

  Observation parse_row(std::string_view body) {
    if (format_ == StreamFormat::Csv) {
      const auto comma = body.find(',');
      const auto x = parse_number(body.substr(0, comma));
      if (!x) fail("malformed row '" + std::string(body) + "'");
      std::optional<double> y;
      if (comma != std::string_view::npos) {
        y = parse_number(body.substr(comma + 1));
        if (!y) fail("malformed row '" + std::string(body) + "'");
      }
      return build(*x, y);
    }
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception&) {
      fail("malformed json row '" + std::string(body) + "'");
    }
    if (!j.is_object() || !j.contains("x") || !j["x"].is_number()) {
      fail("json row needs a numeric 'x'");
    }
    std::optional<double> y;
    if (j.contains("y")) {
      if (!j["y"].is_number()) fail("json 'y' must be numeric");
      y = j["y"].get<double>();
    }
    return build(j["x"].get<double>(), y);
  }

  std::istream& in_;
  StreamFormat format_;
  Scenario scenario_;
  std::size_t lineNo_ = 0;
  bool sawRow_ = false;
};

class FileStream final : public PayoffStream {
public:
  FileStream(const std::string& path, StreamFormat format, const Scenario& scenario)
      : file_(path), inner_(file_, format, scenario) {
    if (!file_) throw IoError("cannot open input '" + path + "'");
  }
  std::optional<Observation> next() override { return inner_.next(); }

private:
  std::ifstream file_;
  TextStream inner_;
};

}  // namespace

void validate(const DistributionSpec& d) {
  std::visit(Overloaded{
                 [](const Uniform& u) {
                   if (!(0.0 <= u.a && u.a < u.b && u.b <= 1.0)) {
                     throw ConfigError("uniform needs 0 <= a < b <= 1");
                   }
                 },
                 [](const TruncNormal& t) {
                   if (!(t.sigma > 0.0) || !std::isfinite(t.mu)) {
                     throw ConfigError("truncnormal needs sigma > 0");
                   }
                   if (!(0.0 <= t.lo && t.lo < t.hi && t.hi <= 1.0)) {
                     throw ConfigError("truncnormal bounds must satisfy 0 <= lo < hi <= 1");
                   }
                 },
                 [](const Bernoulli& b) {
                   if (!(b.p >= 0.0 && b.p <= 1.0)) throw ConfigError("bernoulli needs p in [0,1]");
                 },
             },
             d);
}

DistributionSpec parse_distribution(std::string_view text) {
  const auto colon = text.find(':');
  if (colon == std::string_view::npos) {
    throw ConfigError("distribution '" + std::string(text) + "' must look like name:params");
  }
  const std::string_view name = trim(text.substr(0, colon));
  const auto p = parse_params(text.substr(colon + 1), text);
  DistributionSpec d;
  if (name == "uniform" && p.size() == 2) {
    d = Uniform{p[0], p[1]};
  } else if ((name == "truncnormal" || name == "truncnorm") && (p.size() == 2 || p.size() == 4)) {
    d = p.size() == 2 ? TruncNormal{p[0], p[1]} : TruncNormal{p[0], p[1], p[2], p[3]};
  } else if (name == "bernoulli" && p.size() == 1) {
    d = Bernoulli{p[0]};
  } else {
    throw ConfigError("unknown distribution '" + std::string(text) + "'");
  }
  validate(d);
  return d;
}

std::string to_string(const DistributionSpec& d) {
  std::ostringstream s;
  s.precision(17);
  std::visit(Overloaded{
                 [&](const Uniform& u) { s << "uniform:" << u.a << ',' << u.b; },
                 [&](const TruncNormal& t) {
                   s << "truncnormal:" << t.mu << ',' << t.sigma;
                   if (t.lo != 0.0 || t.hi != 1.0) s << ',' << t.lo << ',' << t.hi;
                 },
                 [&](const Bernoulli& b) { s << "bernoulli:" << b.p; },
             },
             d);
  return s.str();
}

double sample(const DistributionSpec& d, Rng& rng) {
  const double u = rng.uniform();
  return std::visit(Overloaded{
                        [u](const Uniform& v) { return std::min(v.a + (v.b - v.a) * u, v.b); },
                        [u](const TruncNormal& v) { return truncnormal_quantile(v, u); },
                        [u](const Bernoulli& v) { return u < v.p ? 1.0 : 0.0; },
                    },
                    d);
}

std::string to_string(Hypothesis h) { return h == Hypothesis::H0 ? "H0" : "H1"; }

void StreamSpec::validate() const {
  betting::validate(distX);
  if (scenario.one_sided()) {
    if (!(scenario.mu0 >= 0.0 && scenario.mu0 <= 1.0)) throw ConfigError("mu0 outside [0,1]");
  } else {
    if (!distY) throw ConfigError("difference-in-means streams need a y distribution");
    betting::validate(*distY);
    if (hypothesis == Hypothesis::H0 && calibrationLength == 0) {
      throw ConfigError("calibration length must be positive");
    }
  }
}

std::unique_ptr<PayoffStream> make_h1_stream(const StreamSpec& spec, std::uint64_t seed) {
  spec.validate();
  return std::make_unique<IidStream>(spec, seed);
}

std::unique_ptr<PayoffStream> make_h0_stream(const StreamSpec& spec, std::uint64_t seed) {
  spec.validate();
  if (spec.scenario.one_sided()) return std::make_unique<IidStream>(spec, seed);
  return std::make_unique<ShiftedStream>(spec, seed);
}

std::unique_ptr<PayoffStream> make_stream(const StreamSpec& spec, std::uint64_t seed) {
  return spec.hypothesis == Hypothesis::H0 ? make_h0_stream(spec, seed)
                                           : make_h1_stream(spec, seed);
}

std::optional<Observation> VectorStream::next() {
  if (pos_ >= rows_.size()) return std::nullopt;
  return rows_[pos_++];
}

std::vector<Observation> materialize(PayoffStream& stream, std::size_t n) {
  std::vector<Observation> rows;
  rows.reserve(n);
  while (rows.size() < n) {
    auto obs = stream.next();
    if (!obs) break;
    rows.push_back(*obs);
  }
  return rows;
}

StreamFormat parse_stream_format(std::string_view name) {
  if (name == "csv") return StreamFormat::Csv;
  if (name == "jsonl") return StreamFormat::Jsonl;
  throw ConfigError("unknown input format '" + std::string(name) + "'");
}

std::unique_ptr<PayoffStream> read_stream(std::istream& in, StreamFormat format,
                                          const Scenario& scenario) {
  return std::make_unique<TextStream>(in, format, scenario);
}

std::unique_ptr<PayoffStream> open_stream(const std::string& path, StreamFormat format,
                                          const Scenario& scenario) {
  if (path == "-") return read_stream(std::cin, format, scenario);
  return std::make_unique<FileStream>(path, format, scenario);
}

}  // namespace betting
