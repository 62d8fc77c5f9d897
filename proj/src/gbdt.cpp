#include "jobrec/gbdt.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace jobrec::gbdt {
namespace {

using json = nlohmann::json;

constexpr double kBaseMarginClamp = 10.0;
constexpr double kPredictMarginClamp = 35.0;

void check_schema(const FeatureSchema& expected, const FeatureSchema& actual, std::string_view what) {
  if (!(expected == actual)) throw Error(std::string(what) + ": feature schema mismatch");
}

// Column-major copy of the features with per-feature row orderings.
struct ColumnStore {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;                    // [col * rows + row]
  std::vector<std::vector<std::uint32_t>> order;  // rows sorted by value, per column

  explicit ColumnStore(const FeatureMatrix& m) : rows(m.rows()), cols(m.cols()) {
    values.resize(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) values[c * rows + r] = m.at(r, c);
    }
    order.resize(cols);
    for (std::size_t c = 0; c < cols; ++c) {
      auto& o = order[c];
      o.resize(rows);
      std::iota(o.begin(), o.end(), 0u);
      const double* col = values.data() + c * rows;
      std::stable_sort(o.begin(), o.end(), [col](std::uint32_t a, std::uint32_t b) { return col[a] < col[b]; });
    }
  }

  double at(std::size_t r, std::size_t c) const { return values[c * rows + r]; }
};

struct SplitCandidate {
  double gain = 0;
  int feature = -1;
  double threshold = 0;
  double grad_left = 0;
  double hess_left = 0;
};

double leaf_weight(double grad, double hess, double lambda) {
  const double denom = hess + lambda;
  return denom > 0 ? -grad / denom : 0.0;
}

double score_term(double grad, double hess, double lambda) {
  const double denom = hess + lambda;
  return denom > 0 ? grad * grad / denom : 0.0;
}

RegressionTree grow_tree(const ColumnStore& data, std::span<const GradientPair> gp, const TrainConfig& cfg) {
  const std::size_t n = data.rows;
  std::vector<TreeNode> nodes(1);
  for (std::size_t r = 0; r < n; ++r) {
    nodes[0].grad_sum += gp[r].grad;
    nodes[0].hess_sum += gp[r].hess;
  }
  std::vector<int> position(n, 0);
  std::vector<int> frontier = {0};

  struct Running {
    double grad = 0;
    double hess = 0;
    double prev = 0;
    bool started = false;
  };

  for (int depth = 0; depth < cfg.max_depth && !frontier.empty(); ++depth) {
    std::vector<int> slot(nodes.size(), -1);
    for (std::size_t s = 0; s < frontier.size(); ++s) slot[static_cast<std::size_t>(frontier[s])] = static_cast<int>(s);
    std::vector<SplitCandidate> best(frontier.size());
    std::vector<Running> run(frontier.size());

    for (std::size_t f = 0; f < data.cols; ++f) {
      std::fill(run.begin(), run.end(), Running{});
      const double* col = data.values.data() + f * n;
      for (auto r : data.order[f]) {
        const int s = slot[static_cast<std::size_t>(position[r])];
        if (s < 0) continue;
        auto& st = run[static_cast<std::size_t>(s)];
        const double v = col[r];
        if (st.started && v != st.prev) {
          const auto& node = nodes[static_cast<std::size_t>(frontier[static_cast<std::size_t>(s)])];
          const double grad_right = node.grad_sum - st.grad;
          const double hess_right = node.hess_sum - st.hess;
          if (st.hess >= cfg.min_child_weight && hess_right >= cfg.min_child_weight) {
            const double gain = 0.5 * (score_term(st.grad, st.hess, cfg.lambda) +
                                       score_term(grad_right, hess_right, cfg.lambda) -
                                       score_term(node.grad_sum, node.hess_sum, cfg.lambda)) -
                                cfg.gamma;
            auto& b = best[static_cast<std::size_t>(s)];
            if (gain > b.gain) b = {gain, static_cast<int>(f), v, st.grad, st.hess};
          }
        }
        st.grad += gp[r].grad;
        st.hess += gp[r].hess;
        st.prev = v;
        st.started = true;
      }
    }

    std::vector<int> next;
    for (std::size_t s = 0; s < frontier.size(); ++s) {
      const auto& b = best[s];
      if (b.feature < 0) continue;
      const auto id = static_cast<std::size_t>(frontier[s]);
      TreeNode left, right;
      left.grad_sum = b.grad_left;
      left.hess_sum = b.hess_left;
      right.grad_sum = nodes[id].grad_sum - b.grad_left;
      right.hess_sum = nodes[id].hess_sum - b.hess_left;
      nodes[id].feature = b.feature;
      nodes[id].threshold = b.threshold;
      nodes[id].gain = b.gain;
      nodes[id].left = static_cast<int>(nodes.size());
      nodes.push_back(left);
      nodes[id].right = static_cast<int>(nodes.size());
      nodes.push_back(right);
      next.push_back(nodes[id].left);
      next.push_back(nodes[id].right);
    }
    if (next.empty()) break;
    for (std::size_t r = 0; r < n; ++r) {
      const auto& node = nodes[static_cast<std::size_t>(position[r])];
      if (node.is_leaf()) continue;
      position[r] = data.at(r, static_cast<std::size_t>(node.feature)) < node.threshold ? node.left : node.right;
    }
    frontier = std::move(next);
  }

  for (auto& node : nodes) {
    if (node.is_leaf()) node.value = cfg.eta * leaf_weight(node.grad_sum, node.hess_sum, cfg.lambda);
  }
  return RegressionTree(std::move(nodes));
}

json config_to_json(const TrainConfig& c) {
  json j = {{"max_depth", c.max_depth}, {"min_child_weight", c.min_child_weight},
            {"eta", c.eta},             {"gamma", c.gamma},
            {"num_round", c.num_round}, {"lambda", c.lambda},
            {"seed", c.seed}};
  j["early_stopping_rounds"] = c.early_stopping_rounds ? json(*c.early_stopping_rounds) : json(nullptr);
  j["base_margin"] = c.base_margin ? json(*c.base_margin) : json(nullptr);
  return j;
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.max_depth = j.at("max_depth").get<int>();
  c.min_child_weight = j.at("min_child_weight").get<double>();
  c.eta = j.at("eta").get<double>();
  c.gamma = j.at("gamma").get<double>();
  c.num_round = j.at("num_round").get<int>();
  c.lambda = j.at("lambda").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  if (!j.at("early_stopping_rounds").is_null()) c.early_stopping_rounds = j.at("early_stopping_rounds").get<int>();
  if (!j.at("base_margin").is_null()) c.base_margin = j.at("base_margin").get<double>();
  return c;
}

}  // namespace

void TrainConfig::validate() const {
  if (max_depth < 1) throw Error("max_depth must be at least 1");
  if (!(eta > 0.0 && eta <= 1.0)) throw Error("eta must lie in (0, 1]");
  if (!(gamma >= 0.0)) throw Error("gamma must be non-negative");
  if (!(lambda >= 0.0)) throw Error("lambda must be non-negative");
  if (num_round < 0) throw Error("num_round must be non-negative");
  if (!(min_child_weight >= 0.0)) throw Error("min_child_weight must be non-negative");
  if (early_stopping_rounds && *early_stopping_rounds < 1) throw Error("early_stopping_rounds must be positive");
}

double sigmoid(double margin) {
  margin = std::clamp(margin, -kPredictMarginClamp, kPredictMarginClamp);
  return 1.0 / (1.0 + std::exp(-margin));
}

double logloss(double margin, int label) {
  // log(1 + e^m) - y m, evaluated without overflow
  const double softplus = std::max(margin, 0.0) + std::log1p(std::exp(-std::abs(margin)));
  return softplus - (label ? margin : 0.0);
}

GradientPair logloss_gradient(double margin, int label) {
  const double p = sigmoid(margin);
  return {p - (label ? 1.0 : 0.0), p * (1.0 - p)};
}

double mean_logloss(std::span<const double> margins, std::span<const std::uint8_t> labels) {
  if (margins.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t k = 0; k < margins.size(); ++k) total += logloss(margins[k], labels[k]);
  return total / static_cast<double>(margins.size());
}

double RegressionTree::predict(std::span<const double> row) const {
  std::size_t k = 0;
  while (!nodes_[k].is_leaf()) {
    const auto& node = nodes_[k];
    k = static_cast<std::size_t>(row[static_cast<std::size_t>(node.feature)] < node.threshold ? node.left : node.right);
  }
  return nodes_[k].value;
}

int RegressionTree::depth() const {
  if (nodes_.empty()) return 0;
  std::vector<int> d(nodes_.size(), 0);
  int best = 0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    best = std::max(best, d[k]);
    if (!nodes_[k].is_leaf()) {
      d[static_cast<std::size_t>(nodes_[k].left)] = d[k] + 1;
      d[static_cast<std::size_t>(nodes_[k].right)] = d[k] + 1;
    }
  }
  return best;
}

std::size_t RegressionTree::leaf_count() const {
  return static_cast<std::size_t>(std::count_if(nodes_.begin(), nodes_.end(), [](const auto& n) { return n.is_leaf(); }));
}

GbdtModel::GbdtModel(FeatureSchema schema, TrainConfig config, double base_margin, std::vector<RegressionTree> trees)
    : schema_(std::move(schema)), config_(config), base_margin_(base_margin), trees_(std::move(trees)) {}

double GbdtModel::margin(std::span<const double> row) const {
  if (row.size() != schema_.size()) throw Error("row width does not match the model schema");
  double m = base_margin_;
  for (const auto& t : trees_) m += t.predict(row);
  return m;
}

std::vector<double> GbdtModel::predict_proba(const FeatureMatrix& matrix) const {
  check_schema(schema_, matrix.schema, "predict");
  std::vector<double> out(matrix.rows());
  for (std::size_t r = 0; r < matrix.rows(); ++r) out[r] = predict(matrix.row(r));
  return out;
}

std::vector<std::size_t> GbdtModel::feature_importance() const {
  std::vector<std::size_t> counts(schema_.size(), 0);
  for (const auto& t : trees_) {
    for (const auto& n : t.nodes()) {
      if (!n.is_leaf()) ++counts[static_cast<std::size_t>(n.feature)];
    }
  }
  return counts;
}

GbdtModel train(const FeatureMatrix& train_set, const FeatureMatrix* valid_set, const TrainConfig& cfg) {
  cfg.validate();
  if (train_set.rows() == 0) throw Error("training matrix is empty");
  if (!train_set.labeled()) throw Error("training matrix has no labels");
  if (valid_set) {
    check_schema(train_set.schema, valid_set->schema, "validation");
    if (valid_set->rows() > 0 && !valid_set->labeled()) throw Error("validation matrix has no labels");
  }

  const std::size_t n = train_set.rows();
  const double positives = std::accumulate(train_set.labels.begin(), train_set.labels.end(), 0.0);
  const double rate = positives / static_cast<double>(n);
  double base = cfg.base_margin.value_or(
      rate <= 0.0 ? -kBaseMarginClamp
                  : rate >= 1.0 ? kBaseMarginClamp : std::clamp(std::log(rate / (1.0 - rate)), -kBaseMarginClamp, kBaseMarginClamp));

  ColumnStore data(train_set);
  std::vector<double> margins(n, base);
  const bool validating = valid_set && valid_set->rows() > 0;
  std::vector<double> valid_margins(validating ? valid_set->rows() : 0, base);
  std::vector<GradientPair> gp(n);
  std::vector<RegressionTree> trees;
  std::vector<double> train_loss, valid_loss;
  int best_round = -1;
  double best_loss = std::numeric_limits<double>::infinity();

  for (int round = 0; round < cfg.num_round; ++round) {
    for (std::size_t r = 0; r < n; ++r) gp[r] = logloss_gradient(margins[r], train_set.labels[r]);
    auto tree = grow_tree(data, gp, cfg);
    for (std::size_t r = 0; r < n; ++r) margins[r] += tree.predict(train_set.row(r));
    train_loss.push_back(mean_logloss(margins, train_set.labels));
    if (validating) {
      for (std::size_t r = 0; r < valid_margins.size(); ++r) valid_margins[r] += tree.predict(valid_set->row(r));
      valid_loss.push_back(mean_logloss(valid_margins, valid_set->labels));
      if (valid_loss.back() < best_loss) {
        best_loss = valid_loss.back();
        best_round = round;
      }
    }
    trees.push_back(std::move(tree));
    if (validating && cfg.early_stopping_rounds && round - best_round >= *cfg.early_stopping_rounds) break;
  }
  if (validating && cfg.early_stopping_rounds && best_round >= 0) {
    trees.resize(static_cast<std::size_t>(best_round) + 1);
  }

  GbdtModel model(train_set.schema, cfg, base, std::move(trees));
  model.train_logloss = std::move(train_loss);
  model.valid_logloss = std::move(valid_loss);
  model.best_round = best_round;
  return model;
}

std::string serialize_model(const GbdtModel& model, const std::vector<std::string>& provenance) {
  json j;
  j["format"] = "jobrec-gbdt";
  j["version"] = kModelFormatVersion;
  j["provenance"] = provenance;
  j["config"] = config_to_json(model.config());
  j["base_margin"] = model.base_margin();
  json schema = json::array();
  for (const auto& f : model.schema().features()) {
    schema.push_back({{"name", f.name}, {"group", f.group}, {"subgroup", f.subgroup}, {"sentinel", f.sentinel}});
  }
  j["schema"] = std::move(schema);
  json trees = json::array();
  for (const auto& t : model.trees()) {
    json nodes = json::array();
    for (const auto& n : t.nodes()) {
      nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.grad_sum, n.hess_sum, n.gain});
    }
    trees.push_back(std::move(nodes));
  }
  j["trees"] = std::move(trees);
  j["train_logloss"] = model.train_logloss;
  j["valid_logloss"] = model.valid_logloss;
  j["best_round"] = model.best_round;
  return j.dump(1) + "\n";
}

GbdtModel deserialize_model(const std::string& text, std::vector<std::string>* provenance) {
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "jobrec-gbdt") throw Error("not a jobrec model file");
    const int version = j.at("version").get<int>();
    if (version != kModelFormatVersion) throw Error("unsupported model version " + std::to_string(version));
    std::vector<FeatureSpec> specs;
    for (const auto& f : j.at("schema")) {
      specs.push_back({f.at("name").get<std::string>(), f.at("group").get<std::string>(),
                       f.at("subgroup").get<std::string>(), f.at("sentinel").get<double>()});
    }
    FeatureSchema schema(std::move(specs));
    std::vector<RegressionTree> trees;
    for (const auto& t : j.at("trees")) {
      std::vector<TreeNode> nodes;
      for (const auto& a : t) {
        TreeNode n;
        n.feature = a.at(0).get<int>();
        n.threshold = a.at(1).get<double>();
        n.left = a.at(2).get<int>();
        n.right = a.at(3).get<int>();
        n.value = a.at(4).get<double>();
        n.grad_sum = a.at(5).get<double>();
        n.hess_sum = a.at(6).get<double>();
        n.gain = a.at(7).get<double>();
        nodes.push_back(n);
      }
      if (nodes.empty()) throw Error("empty tree");
      for (const auto& n : nodes) {
        if (n.is_leaf()) continue;
        const auto size = static_cast<int>(nodes.size());
        if (n.feature >= static_cast<int>(schema.size()) || n.left <= 0 || n.right <= 0 || n.left >= size ||
            n.right >= size) {
          throw Error("malformed tree node");
        }
      }
      trees.emplace_back(std::move(nodes));
    }
    GbdtModel model(std::move(schema), config_from_json(j.at("config")), j.at("base_margin").get<double>(),
                    std::move(trees));
    model.train_logloss = j.at("train_logloss").get<std::vector<double>>();
    model.valid_logloss = j.at("valid_logloss").get<std::vector<double>>();
    model.best_round = j.at("best_round").get<int>();
    if (provenance) *provenance = j.at("provenance").get<std::vector<std::string>>();
    return model;
  } catch (const json::exception& e) {
    throw Error(std::string("corrupt model file: ") + e.what());
  }
}

void save_model(const GbdtModel& model, const std::string& path, const std::vector<std::string>& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << serialize_model(model, provenance);
}

GbdtModel load_model(const std::string& path, std::vector<std::string>* provenance) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return deserialize_model(buf.str(), provenance);
}

ImportanceReport importance_report(const GbdtModel& model) {
  ImportanceReport report;
  const auto counts = model.feature_importance();
  const auto& schema = model.schema();
  for (std::size_t k = 0; k < schema.size(); ++k) {
    report.features.push_back({schema[k].name, schema[k].group, schema[k].subgroup, counts[k]});
  }
  for (const auto& g : schema.groups()) {
    ImportanceRow row{"", g, "", 0};
    std::vector<std::string> subgroups;
    for (const auto& f : report.features) {
      if (f.group != g) continue;
      row.count += f.count;
      if (!f.subgroup.empty() && std::find(subgroups.begin(), subgroups.end(), f.subgroup) == subgroups.end()) {
        subgroups.push_back(f.subgroup);
      }
    }
    report.groups.push_back(row);
    for (const auto& sg : subgroups) {
      ImportanceRow sub{"", g, sg, 0};
      for (const auto& f : report.features) {
        if (f.group == g && f.subgroup == sg) sub.count += f.count;
      }
      report.subgroups.push_back(sub);
    }
  }
  return report;
}

void write_importance(const ImportanceReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "feature\tgroup\tsubgroup\tcount\n";
  for (const auto& g : report.groups) {
    out << "*\t" << g.group << "\t*\t" << g.count << '\n';
    for (const auto& s : report.subgroups) {
      if (s.group == g.group) out << "*\t" << s.group << '\t' << s.subgroup << '\t' << s.count << '\n';
    }
  }
  for (const auto& f : report.features) {
    out << f.feature << '\t' << f.group << '\t' << f.subgroup << '\t' << f.count << '\n';
  }
}

}  // namespace jobrec::gbdt
