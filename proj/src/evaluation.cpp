#include "jobrec/evaluation.hpp"

#include <fstream>
#include <limits>
#include <unordered_set>

#include "jobrec/tsv.hpp"

namespace jobrec {
namespace {

bool in_truth(std::span<const ItemId> truth, ItemId item) {
  return std::binary_search(truth.begin(), truth.end(), item);
}

std::size_t hits_in_prefix(std::span<const ItemId> pred, std::span<const ItemId> truth, std::size_t k) {
  std::size_t hits = 0;
  for (std::size_t j = 0; j < std::min(k, pred.size()); ++j) hits += in_truth(truth, pred[j]) ? 1 : 0;
  return hits;
}

void check_prediction(std::span<const ItemId> pred) {
  if (pred.size() > kPredictionLength) throw Error("prediction holds more than 30 items");
  std::unordered_set<ItemId> seen;
  for (auto i : pred) {
    if (!seen.insert(i).second) throw Error("prediction contains duplicate item " + std::to_string(i));
  }
}

}  // namespace

RecallMode parse_recall_mode(std::string_view text) {
  if (text == "literal") return RecallMode::literal;
  if (text == "corrected") return RecallMode::corrected;
  throw Error("unknown recall mode '" + std::string(text) + "'");
}

std::string_view to_string(RecallMode mode) { return mode == RecallMode::literal ? "literal" : "corrected"; }

double precision_at_k(std::span<const ItemId> pred, std::span<const ItemId> truth, std::size_t k) {
  if (k == 0) throw Error("precision cutoff must be positive");
  return static_cast<double>(hits_in_prefix(pred, truth, k)) / static_cast<double>(k);
}

double recall_term(std::span<const ItemId> pred, std::span<const ItemId> truth, RecallMode mode) {
  const auto hits = static_cast<double>(hits_in_prefix(pred, truth, kPredictionLength));
  const auto size = truth.size();
  const double denom = mode == RecallMode::literal ? static_cast<double>(std::min<std::size_t>(1, size))
                                                   : static_cast<double>(std::max<std::size_t>(1, size));
  if (denom == 0) throw Error("recall of an empty truth set");
  return hits / denom;
}

int user_success(std::span<const ItemId> pred, std::span<const ItemId> truth) {
  return hits_in_prefix(pred, truth, kPredictionLength) > 0 ? 1 : 0;
}

double user_score(std::span<const ItemId> pred, std::span<const ItemId> truth, RecallMode mode) {
  check_prediction(pred);
  if (truth.empty()) return 0.0;
  return 20.0 * (precision_at_k(pred, truth, 2) + precision_at_k(pred, truth, 4) + user_success(pred, truth) +
                 recall_term(pred, truth, mode)) +
         10.0 * (precision_at_k(pred, truth, 6) + precision_at_k(pred, truth, 20));
}

ScoreReport total_score(std::span<const Prediction> predictions, const GroundTruth& truth, RecallMode mode) {
  std::map<UserId, const Prediction*> by_user;
  for (const auto& p : predictions) {
    check_prediction(p.items);
    if (!by_user.emplace(p.user, &p).second) throw Error("duplicate prediction for user " + std::to_string(p.user));
  }
  ScoreReport report;
  for (const auto& [user, items] : truth) {
    UserScore s;
    s.user = user;
    auto it = by_user.find(user);
    const std::span<const ItemId> pred = it == by_user.end() ? std::span<const ItemId>{} : it->second->items;
    s.p2 = precision_at_k(pred, items, 2);
    s.p4 = precision_at_k(pred, items, 4);
    s.p6 = precision_at_k(pred, items, 6);
    s.p20 = precision_at_k(pred, items, 20);
    s.recall = recall_term(pred, items, mode);
    s.success = user_success(pred, items);
    s.score = user_score(pred, items, mode);
    report.total += s.score;
    report.users.push_back(s);
  }
  return report;
}

GroundTruth sample_ground_truth(const GroundTruth& truth, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error("sample fraction must lie in (0, 1]");
  GroundTruth out;
  const auto cutoff = static_cast<double>(std::numeric_limits<std::uint64_t>::max()) * fraction;
  for (const auto& [user, items] : truth) {
    const auto h = mix64(seed ^ mix64(static_cast<std::uint64_t>(user)));
    if (fraction >= 1.0 || static_cast<double>(h) < cutoff) out.emplace(user, items);
  }
  return out;
}

void write_score_report(const ScoreReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << "user_id\tp2\tp4\tp6\tp20\trecall\tsuccess\tuser_score\n";
  for (const auto& s : report.users) {
    out << s.user << '\t' << tsv::format_double(s.p2) << '\t' << tsv::format_double(s.p4) << '\t'
        << tsv::format_double(s.p6) << '\t' << tsv::format_double(s.p20) << '\t' << tsv::format_double(s.recall)
        << '\t' << s.success << '\t' << tsv::format_double(s.score) << '\n';
  }
  out << "total\t\t\t\t\t\t\t" << tsv::format_double(report.total) << '\n';
}

void write_predictions(std::span<const Prediction> predictions, const std::string& path,
                       const std::vector<std::string>& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  for (const auto& line : provenance) out << "# " << line << '\n';
  out << "user_id\titems\n";
  for (const auto& p : predictions) {
    out << p.user << '\t';
    for (std::size_t k = 0; k < p.items.size(); ++k) out << (k ? " " : "") << p.items[k];
    out << '\n';
  }
}

std::vector<Prediction> read_predictions(const std::string& path, std::vector<std::string>* provenance) {
  tsv::Reader r(path);
  constexpr std::array<std::string_view, 2> cols = {"user_id", "items"};
  r.expect_header(cols);
  std::vector<Prediction> out;
  std::vector<std::string_view> f, ids;
  while (r.next(f)) {
    if (f.size() != 2) r.fail("expected 2 columns");
    Prediction p;
    auto u = tsv::parse_number<UserId>(f[0]);
    if (!u) r.fail("bad user id");
    p.user = *u;
    tsv::split(f[1], ' ', ids);
    for (auto s : ids) {
      if (s.empty()) continue;
      auto i = tsv::parse_number<ItemId>(s);
      if (!i) r.fail("bad item id");
      p.items.push_back(*i);
    }
    out.push_back(std::move(p));
  }
  if (provenance) *provenance = r.comments();
  return out;
}

void write_prediction_scores(std::span<const Prediction> predictions, const std::string& path,
                             const std::vector<std::string>& provenance) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  for (const auto& line : provenance) out << "# " << line << '\n';
  out << "user_id\titem_id\tscore\n";
  for (const auto& p : predictions) {
    for (std::size_t k = 0; k < p.items.size(); ++k) {
      out << p.user << '\t' << p.items[k] << '\t' << (k < p.scores.size() ? tsv::format_double(p.scores[k]) : "")
          << '\n';
    }
  }
}

}  // namespace jobrec
