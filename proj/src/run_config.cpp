#include "vexrec/run_config.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>

namespace vexrec {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double x = std::stod(v, &used);
    if (used == v.size()) return x;
  } catch (const std::exception&) {
  }
  throw ConfigError(key + ": expected a number, got '" + v + "'");
}

std::uint64_t to_count(const std::string& key, const std::string& v) {
  std::uint64_t x = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), x);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  }
  return x;
}

std::filesystem::path to_path(const std::string& v, const std::filesystem::path& base) {
  std::filesystem::path p(v);
  if (p.is_relative() && !base.empty()) p = base / p;
  return p;
}

const char* const kKeys[] = {
    "variant",        "learning_rate", "delta",       "lambda",
    "epochs",         "seed",          "embed",       "hidden",
    "word_dim",       "batch_size",    "init",        "init_scale",
    "split_fraction", "min_count",     "context_dim", "top_n",
    "max_review_length", "f1_mode",    "interactions", "reviews",
    "features",       "labels",        "checkpoint",  "output_dir",
};

}  // namespace

std::vector<std::string> run_config_keys() { return {std::begin(kKeys), std::end(kKeys)}; }

void RunConfig::set(const std::string& key, const std::string& value,
                    const std::filesystem::path& base) {
  TrainConfig& t = train;
  if (key == "variant") {
    const auto v = parse_variant(value);
    if (!v) throw ConfigError("variant: expected vecf, re-cf or re-vecf, got '" + value + "'");
    t.variant = *v;
  } else if (key == "learning_rate") {
    t.learning_rate = to_real(key, value);
  } else if (key == "delta") {
    t.delta = to_real(key, value);
  } else if (key == "lambda") {
    t.lambda = to_real(key, value);
  } else if (key == "epochs") {
    t.epochs = to_count(key, value);
  } else if (key == "seed") {
    t.seed = to_count(key, value);
  } else if (key == "embed") {
    t.embed = to_count(key, value);
  } else if (key == "hidden") {
    t.hidden = to_count(key, value);
  } else if (key == "word_dim") {
    t.word_dim = to_count(key, value);
  } else if (key == "batch_size") {
    t.batch_size = to_count(key, value);
  } else if (key == "init") {
    const auto s = parse_init_scheme(value);
    if (!s) throw ConfigError("init: expected uniform01 or scaled, got '" + value + "'");
    t.init = *s;
  } else if (key == "init_scale") {
    t.init_scale = to_real(key, value);
  } else if (key == "split_fraction") {
    split_fraction = to_real(key, value);
  } else if (key == "min_count") {
    min_count = to_count(key, value);
  } else if (key == "context_dim") {
    context_dim = to_count(key, value);
  } else if (key == "top_n") {
    top_n = to_count(key, value);
  } else if (key == "max_review_length") {
    max_review_length = to_count(key, value);
  } else if (key == "f1_mode") {
    if (value == "of-averages") {
      f1_mode = F1Mode::OfAverages;
    } else if (value == "average-of-f1") {
      f1_mode = F1Mode::AverageOfF1;
    } else {
      throw ConfigError("f1_mode: expected of-averages or average-of-f1, got '" + value + "'");
    }
  } else if (key == "interactions") {
    interactions = to_path(value, base);
  } else if (key == "reviews") {
    reviews = to_path(value, base);
  } else if (key == "features") {
    features = to_path(value, base);
  } else if (key == "labels") {
    labels = to_path(value, base);
  } else if (key == "checkpoint") {
    checkpoint = to_path(value, base);
  } else if (key == "output_dir") {
    output_dir = to_path(value, base);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

RunConfig RunConfig::parse(std::istream& in, const std::filesystem::path& base) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(body.substr(0, eq));
    const std::string value = trim(body.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ConfigError("line " + std::to_string(number) + ": repeated key '" + key + "'");
    }
    try {
      cfg.set(key, value, base);
    } catch (const ConfigError& e) {
      throw ConfigError("line " + std::to_string(number) + ": " + e.what());
    }
  }
  return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  return parse(in, path.parent_path());
}

std::filesystem::path RunConfig::checkpoint_path() const {
  if (!checkpoint.empty()) return checkpoint;
  if (!output_dir.empty()) return output_dir / "model.vxcp";
  return "model.vxcp";
}

namespace {

// Shortest text that parses back to the same double.
std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace

void RunConfig::write(std::ostream& out) const {
  const TrainConfig& t = train;
  out << "variant = " << variant_name(t.variant) << '\n'
      << "learning_rate = " << shortest(t.learning_rate) << '\n'
      << "delta = " << shortest(t.delta) << '\n'
      << "lambda = " << shortest(t.lambda) << '\n'
      << "epochs = " << t.epochs << '\n'
      << "seed = " << t.seed << '\n'
      << "embed = " << t.embed << '\n'
      << "hidden = " << t.hidden << '\n'
      << "word_dim = " << t.word_dim << '\n'
      << "batch_size = " << t.batch_size << '\n'
      << "init = " << (t.init == InitScheme::Uniform01 ? "uniform01" : "scaled") << '\n'
      << "init_scale = " << shortest(t.init_scale) << '\n'
      << "split_fraction = " << shortest(split_fraction) << '\n'
      << "min_count = " << min_count << '\n'
      << "context_dim = " << context_dim << '\n'
      << "top_n = " << top_n << '\n'
      << "max_review_length = " << max_review_length << '\n'
      << "f1_mode = " << (f1_mode == F1Mode::OfAverages ? "of-averages" : "average-of-f1") << '\n';
  auto path = [&](const char* key, const std::filesystem::path& p) {
    if (!p.empty()) out << key << " = " << p.string() << '\n';
  };
  path("interactions", interactions);
  path("reviews", reviews);
  path("features", features);
  path("labels", labels);
  path("checkpoint", checkpoint);
  path("output_dir", output_dir);
}

}  // namespace vexrec
