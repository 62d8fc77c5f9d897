#include "jobrec/config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "jobrec/tsv.hpp"

namespace jobrec {
namespace {

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T number(std::string_view key, std::string_view value) {
  auto v = tsv::parse_number<T>(value);
  if (!v) throw Error("bad value '" + std::string(value) + "' for " + std::string(key));
  return *v;
}

std::vector<std::pair<int, double>> parse_blend(std::string_view value) {
  std::vector<std::pair<int, double>> out;
  std::vector<std::string_view> parts;
  tsv::split(value, ',', parts);
  for (auto p : parts) {
    p = trim(p);
    if (p.empty()) continue;
    const auto slash = p.find('/');
    if (slash == std::string_view::npos) throw Error("blend entries take the form depth/min_child_weight");
    out.emplace_back(number<int>("blend", p.substr(0, slash)), number<double>("blend", p.substr(slash + 1)));
  }
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  if (candidates.cap == 0) throw Error("cap must be positive");
  if (candidates.cap > 65535) throw Error("cap must fit a 16-bit rank");
  if (candidates.neighbors == 0) throw Error("neighbors must be positive");
  if (holdout_weeks < 1) throw Error("holdout_weeks must be at least 1");
  for (const auto& cfg : model_configs()) cfg.validate();
}

void PipelineConfig::set(std::string_view key, std::string_view value) {
  value = trim(value);
  if (key == "data") data_dir = value;
  else if (key == "work") work_dir = value;
  else if (key == "cap") candidates.cap = number<std::size_t>(key, value);
  else if (key == "neighbors") candidates.neighbors = number<std::size_t>(key, value);
  else if (key == "max_depth") train.max_depth = number<int>(key, value);
  else if (key == "min_child_weight") train.min_child_weight = number<double>(key, value);
  else if (key == "eta") train.eta = number<double>(key, value);
  else if (key == "gamma") train.gamma = number<double>(key, value);
  else if (key == "lambda") train.lambda = number<double>(key, value);
  else if (key == "num_round") train.num_round = number<int>(key, value);
  else if (key == "early_stopping_rounds") {
    if (value.empty() || value == "none") train.early_stopping_rounds.reset();
    else train.early_stopping_rounds = number<int>(key, value);
  } else if (key == "blend") blend = parse_blend(value);
  else if (key == "sampling") sampling = parse_sampling_mode(value);
  else if (key == "recall") recall = parse_recall_mode(value);
  else if (key == "seed") seed = number<std::uint64_t>(key, value);
  else if (key == "threads") threads = number<std::size_t>(key, value);
  else if (key == "holdout_weeks") holdout_weeks = number<int>(key, value);
  else throw Error("unknown config key '" + std::string(key) + "'");
}

std::vector<std::string> PipelineConfig::to_lines() const {
  std::map<std::string, std::string> kv;
  kv["cap"] = std::to_string(candidates.cap);
  kv["neighbors"] = std::to_string(candidates.neighbors);
  kv["max_depth"] = std::to_string(train.max_depth);
  kv["min_child_weight"] = tsv::format_double(train.min_child_weight);
  kv["eta"] = tsv::format_double(train.eta);
  kv["gamma"] = tsv::format_double(train.gamma);
  kv["lambda"] = tsv::format_double(train.lambda);
  kv["num_round"] = std::to_string(train.num_round);
  kv["early_stopping_rounds"] =
      train.early_stopping_rounds ? std::to_string(*train.early_stopping_rounds) : std::string("none");
  std::string b;
  for (const auto& [d, w] : blend) b += (b.empty() ? "" : ",") + std::to_string(d) + "/" + tsv::format_double(w);
  kv["blend"] = b;
  kv["sampling"] = to_string(sampling);
  kv["recall"] = to_string(recall);
  kv["seed"] = std::to_string(seed);
  kv["holdout_weeks"] = std::to_string(holdout_weeks);
  std::vector<std::string> out;
  for (const auto& [k, v] : kv) out.push_back(k + "=" + v);
  return out;
}

// Paths and thread count are left out: outputs do not depend on them.
std::string PipelineConfig::hash() const {
  std::uint64_t h = fnv1a("");
  for (const auto& line : to_lines()) h = fnv1a(line + "\n", h);
  return hex(h);
}

std::size_t PipelineConfig::thread_count() const { return threads ? threads : default_thread_count(); }

std::vector<gbdt::TrainConfig> PipelineConfig::model_configs() const {
  std::vector<gbdt::TrainConfig> out{train};
  for (const auto& [depth, mcw] : blend) {
    auto cfg = train;
    cfg.max_depth = depth;
    cfg.min_child_weight = mcw;
    out.push_back(cfg);
  }
  return out;
}

PipelineConfig read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  PipelineConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto s = trim(line);
    if (s.empty() || s.front() == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) throw Error(path + ":" + std::to_string(line_no) + ": expected key=value");
    try {
      cfg.set(trim(s.substr(0, eq)), s.substr(eq + 1));
    } catch (const Error& e) {
      throw Error(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return cfg;
}

std::vector<std::string> Provenance::lines() const {
  std::vector<std::string> out;
  out.push_back("jobrec stage=" + stage + " root=" + root + " seed=" + std::to_string(seed) +
                " config=" + config_hash + (anchor ? " anchor=" + std::to_string(*anchor) : std::string()));
  for (const auto& c : config) out.push_back("config " + c);
  return out;
}

std::optional<Provenance> Provenance::parse(const std::vector<std::string>& lines) {
  for (const auto& line : lines) {
    if (!line.starts_with("jobrec ")) continue;
    Provenance p;
    std::istringstream in(line.substr(7));
    std::string field;
    while (in >> field) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) continue;
      const auto key = field.substr(0, eq);
      const auto value = field.substr(eq + 1);
      if (key == "stage") p.stage = value;
      else if (key == "root") p.root = value;
      else if (key == "seed") p.seed = number<std::uint64_t>(key, value);
      else if (key == "config") p.config_hash = value;
      else if (key == "anchor") p.anchor = number<Timestamp>(key, value);
    }
    for (const auto& l : lines) {
      if (l.starts_with("config ")) p.config.push_back(l.substr(7));
    }
    return p;
  }
  return std::nullopt;
}

Provenance make_provenance(std::string stage, std::string root, const PipelineConfig& config) {
  return {std::move(stage), std::move(root), config.seed, config.hash(), config.to_lines(), std::nullopt};
}

std::vector<std::string> read_comment_header(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line) && !line.empty() && line[0] == '#') {
    std::string_view body(line);
    body.remove_prefix(1);
    if (!body.empty() && body[0] == ' ') body.remove_prefix(1);
    out.emplace_back(trim(body));
  }
  return out;
}

std::optional<Timestamp> dataset_anchor(const DatasetPaths& paths) {
  auto p = Provenance::parse(read_comment_header(paths.interactions));
  return p ? p->anchor : std::nullopt;
}

std::string dataset_root(const DatasetPaths& paths) {
  if (auto p = Provenance::parse(read_comment_header(paths.interactions)); p && !p->root.empty()) return p->root;
  std::uint64_t h = fnv1a("");
  for (const auto* file : {&paths.users, &paths.items, &paths.interactions, &paths.impressions, &paths.target_users}) {
    std::ifstream in(*file, std::ios::binary);
    if (!in) throw Error("cannot open " + *file);
    std::ostringstream buf;
    buf << in.rdbuf();
    h = fnv1a(buf.str(), h);
  }
  return hex(h);
}

}  // namespace jobrec
