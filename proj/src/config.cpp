#include "pssa/config.hpp"

#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "pssa/dataset.hpp"
#include "pssa/training.hpp"

namespace pssa {
namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  const auto* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError(fmt::format("invalid value '{}' for {}", value, key));
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError(fmt::format("invalid value '{}' for {} (expected true/false)", value, key));
}

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Baseline: return "baseline";
    case RunMode::AwAs: return "aw-as";
    case RunMode::PgAs: return "pg-as";
    case RunMode::RandomMask: return "random-mask";
    case RunMode::ActiveOnly: return "as_a-only";
    case RunMode::MisleadingOnly: return "as_m-only";
  }
  return "?";
}

RunMode parse_run_mode(std::string_view text) {
  for (auto m : {RunMode::Baseline, RunMode::AwAs, RunMode::PgAs, RunMode::RandomMask,
                 RunMode::ActiveOnly, RunMode::MisleadingOnly}) {
    if (text == to_string(m)) return m;
  }
  throw ConfigError(fmt::format(
      "unknown mode '{}' (baseline, aw-as, pg-as, random-mask, as_a-only, as_m-only)", text));
}

double RunConfig::effective_gamma() const {
  return gamma.value_or(default_gamma(std::filesystem::path(dataset).filename().string()));
}

SaliencyMode RunConfig::effective_saliency() const {
  switch (mode) {
    case RunMode::AwAs: return SaliencyMode::AttentionWeight;
    case RunMode::PgAs: return SaliencyMode::PartialGradient;
    default: return saliency;
  }
}

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = {
      "dataset", "embeddings", "mode", "k", "epsilon", "gamma", "noise_n", "noise_sigma",
      "lr", "dropout", "epochs", "batch", "seed", "out", "dim", "patience", "mine_epochs",
      "saliency", "warm_start", "train_embeddings", "regularize_with_dropout", "bootstrap_n",
      "val_fraction", "synthetic_seed", "synthetic_train", "synthetic_test"};
  return keys;
}

void set_config_value(RunConfig& c, std::string_view key, std::string_view raw) {
  const auto v = trim(raw);
  if (key == "dataset") c.dataset = std::string(v);
  else if (key == "embeddings") c.embeddings = std::string(v);
  else if (key == "mode") c.mode = parse_run_mode(v);
  else if (key == "k") c.k = parse_number<int>(key, v);
  else if (key == "epsilon") c.epsilon = parse_number<double>(key, v);
  else if (key == "gamma") c.gamma = parse_number<double>(key, v);
  else if (key == "noise_n") c.noise_n = parse_number<int>(key, v);
  else if (key == "noise_sigma") c.noise_sigma = parse_number<double>(key, v);
  else if (key == "lr") c.lr = parse_number<double>(key, v);
  else if (key == "dropout") c.dropout = parse_number<double>(key, v);
  else if (key == "epochs") c.epochs = parse_number<int>(key, v);
  else if (key == "batch") c.batch = parse_number<std::size_t>(key, v);
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "out") c.out = std::string(v);
  else if (key == "dim") c.dim = parse_number<std::size_t>(key, v);
  else if (key == "patience") c.patience = parse_number<int>(key, v);
  else if (key == "mine_epochs") c.mine_epochs = parse_number<int>(key, v);
  else if (key == "saliency") {
    try {
      c.saliency = parse_saliency_mode(v);
    } catch (const std::exception&) {
      throw ConfigError(fmt::format("invalid value '{}' for saliency (aw or pg)", v));
    }
  }
  else if (key == "warm_start") c.warm_start = parse_bool(key, v);
  else if (key == "train_embeddings") c.train_embeddings = parse_bool(key, v);
  else if (key == "regularize_with_dropout") c.regularize_with_dropout = parse_bool(key, v);
  else if (key == "bootstrap_n") c.bootstrap_n = parse_number<int>(key, v);
  else if (key == "val_fraction") c.val_fraction = parse_number<double>(key, v);
  else if (key == "synthetic_seed") c.synthetic_seed = parse_number<std::uint64_t>(key, v);
  else if (key == "synthetic_train") c.synthetic_train = parse_number<std::size_t>(key, v);
  else if (key == "synthetic_test") c.synthetic_test = parse_number<std::size_t>(key, v);
  else throw ConfigError(fmt::format("unknown config key '{}'", key));
}

void apply_config_text(RunConfig& config, std::string_view text, std::string_view origin) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("{}:{}: expected key = value", origin, line_no));
    }
    try {
      set_config_value(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(fmt::format("{}:{}: {}", origin, line_no, e.what()));
    }
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  apply_config_text(config, text, path.string());
}

void validate(const RunConfig& c) {
  auto fail = [](std::string msg) { throw ConfigError(std::move(msg)); };
  if (c.dataset.empty()) fail("dataset is required");
  if (c.k < 1) fail("k must be >= 1");
  if (c.epsilon && *c.epsilon < 0.0) fail("epsilon must be >= 0");
  if (c.gamma && *c.gamma < 0.0) fail("gamma must be >= 0");
  if (c.noise_n < 1) fail("noise_n must be >= 1");
  if (c.noise_sigma < 0.0) fail("noise_sigma must be >= 0");
  if (!(c.lr > 0.0)) fail("lr must be > 0");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) fail("dropout must be in [0, 1)");
  if (c.epochs < 1) fail("epochs must be >= 1");
  if (c.batch < 1) fail("batch must be >= 1");
  if (c.dim < 1) fail("dim must be >= 1");
  if (c.patience < 0) fail("patience must be >= 0");
  if (c.mine_epochs < 0) fail("mine_epochs must be >= 0");
  if (c.bootstrap_n < 1) fail("bootstrap_n must be >= 1");
  if (!(c.val_fraction > 0.0 && c.val_fraction < 1.0)) fail("val_fraction must be in (0, 1)");
}

std::string config_snapshot(const RunConfig& c) {
  std::ostringstream out;
  out << "# effective configuration; entropy is measured in nats (natural log)\n";
  out << "dataset = " << c.dataset << '\n';
  out << "embeddings = " << c.embeddings << '\n';
  out << "mode = " << to_string(c.mode) << '\n';
  out << "k = " << c.k << '\n';
  out << "epsilon = " << fmt_double(c.effective_epsilon()) << '\n';
  out << "gamma = " << fmt_double(c.effective_gamma()) << '\n';
  out << "noise_n = " << c.noise_n << '\n';
  out << "noise_sigma = " << fmt_double(c.noise_sigma) << '\n';
  out << "lr = " << fmt_double(c.lr) << '\n';
  out << "dropout = " << fmt_double(c.dropout) << '\n';
  out << "epochs = " << c.epochs << '\n';
  out << "batch = " << c.batch << '\n';
  out << "seed = " << c.seed << '\n';
  out << "out = " << c.out << '\n';
  out << "dim = " << c.dim << '\n';
  out << "patience = " << c.patience << '\n';
  out << "mine_epochs = " << c.mine_epochs << '\n';
  out << "saliency = " << to_string(c.effective_saliency()) << '\n';
  out << "warm_start = " << (c.warm_start ? "true" : "false") << '\n';
  out << "train_embeddings = " << (c.train_embeddings ? "true" : "false") << '\n';
  out << "regularize_with_dropout = " << (c.regularize_with_dropout ? "true" : "false") << '\n';
  out << "bootstrap_n = " << c.bootstrap_n << '\n';
  out << "val_fraction = " << fmt_double(c.val_fraction) << '\n';
  out << "synthetic_seed = " << c.synthetic_seed << '\n';
  out << "synthetic_train = " << c.synthetic_train << '\n';
  out << "synthetic_test = " << c.synthetic_test << '\n';
  return out.str();
}

std::filesystem::path output_directory(const RunConfig& c) {
  if (!c.out.empty()) return c.out;
  const char* root = std::getenv("PSSA_OUT_ROOT");
  std::filesystem::path base = root && *root ? root : "runs";
  auto stem = std::filesystem::path(c.dataset).filename().string();
  if (stem.empty()) stem = std::filesystem::path(c.dataset).parent_path().filename().string();
  return base / fmt::format("{}-{}-s{}", stem, to_string(c.mode), c.seed);
}

}  // namespace pssa
