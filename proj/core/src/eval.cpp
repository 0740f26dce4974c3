#include "hatescan/eval.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <ostream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "hatescan/csv.hpp"
#include "hatescan/error.hpp"

namespace hatescan {

using nlohmann::json;

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_order)
    : class_order_(std::move(class_order)),
      counts_(class_order_.size(), std::vector<std::size_t>(class_order_.size(), 0)) {}

std::size_t ConfusionMatrix::total() const {
  std::size_t t = 0;
  for (const auto& row : counts_) t += std::accumulate(row.begin(), row.end(), std::size_t{0});
  return t;
}

ConfusionMatrix confusion_matrix(std::span<const int> y_true, std::span<const int> y_pred,
                                 std::vector<std::string> class_order) {
  if (y_true.size() != y_pred.size()) {
    throw DataError("confusion_matrix: " + std::to_string(y_true.size()) + " true labels vs " +
                    std::to_string(y_pred.size()) + " predictions");
  }
  if (y_true.empty()) throw DataError("confusion_matrix: no items");
  ConfusionMatrix cm(std::move(class_order));
  const auto n = static_cast<int>(cm.num_classes());
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] < 0 || y_true[i] >= n || y_pred[i] < 0 || y_pred[i] >= n) {
      throw DataError("confusion_matrix: label outside class order at item " + std::to_string(i));
    }
    cm.add(static_cast<std::size_t>(y_pred[i]), static_cast<std::size_t>(y_true[i]));
  }
  return cm;
}

ConfusionMatrix binary_confusion(std::size_t tn, std::size_t fp, std::size_t fn, std::size_t tp) {
  ConfusionMatrix cm({"negative", "positive"});
  cm.add(0, 0, tn);
  cm.add(1, 0, fp);
  cm.add(0, 1, fn);
  cm.add(1, 1, tp);
  return cm;
}

double f1_score(double precision, double recall) {
  return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

Metrics metrics_from_cm(const ConfusionMatrix& cm) {
  const std::size_t total = cm.total();
  if (total == 0) throw DataError("metrics: empty confusion matrix");
  const std::size_t k = cm.num_classes();
  Metrics m;
  std::size_t correct = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t predicted = 0, actual = 0;
    for (std::size_t o = 0; o < k; ++o) {
      predicted += cm.at(c, o);
      actual += cm.at(o, c);
    }
    const std::size_t tp = cm.at(c, c);
    correct += tp;
    ClassMetrics cls;
    cls.support = actual;
    cls.zero_division = predicted == 0 || actual == 0;
    cls.precision = predicted == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(predicted);
    cls.recall = actual == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(actual);
    cls.f1 = f1_score(cls.precision, cls.recall);
    m.per_class.push_back(cls);
  }
  m.accuracy = static_cast<double>(correct) / static_cast<double>(total);
  for (const auto& cls : m.per_class) {
    m.macro_f1 += cls.f1 / static_cast<double>(k);
    m.weighted_f1 += cls.f1 * static_cast<double>(cls.support) / static_cast<double>(total);
  }
  return m;
}

double auroc_binary(std::span<const double> scores, std::span<const int> y_true) {
  if (scores.size() != y_true.size()) throw DataError("auroc: scores/labels length mismatch");
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] != 0 && y_true[i] != 1) throw DataError("auroc: labels must be 0 or 1");
    if (std::isnan(scores[i])) throw DataError("auroc: NaN score");
    n_pos += static_cast<std::size_t>(y_true[i]);
  }
  const std::size_t n_neg = y_true.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw DataError("auroc: undefined without both classes present");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum_pos = 0.0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1..j share their midrank.
    const double midrank = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t t = i; t < j; ++t) {
      if (y_true[order[t]] == 1) rank_sum_pos += midrank;
    }
    i = j;
  }
  const double np = static_cast<double>(n_pos);
  const double nn = static_cast<double>(n_neg);
  return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

std::vector<double> auroc_ovr(std::span<const double> scores, std::size_t num_classes,
                              std::span<const int> y_true) {
  if (scores.size() != y_true.size() * num_classes) throw DataError("auroc_ovr: score matrix shape mismatch");
  std::vector<double> out;
  std::vector<double> column(y_true.size());
  std::vector<int> is_class(y_true.size());
  for (std::size_t c = 0; c < num_classes; ++c) {
    bool present = false;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
      column[i] = scores[i * num_classes + c];
      is_class[i] = y_true[i] == static_cast<int>(c) ? 1 : 0;
      present = present || is_class[i];
    }
    if (!present) throw DataError("auroc_ovr: class " + std::to_string(c) + " absent from labels");
    out.push_back(auroc_binary(column, is_class));
  }
  return out;
}

namespace {

std::optional<double> auroc_if_defined(std::span<const double> scores, std::span<const int> binary) {
  const auto pos = std::count(binary.begin(), binary.end(), 1);
  if (pos == 0 || static_cast<std::size_t>(pos) == binary.size()) return std::nullopt;
  return auroc_binary(scores, binary);
}

}  // namespace

EvalReport evaluate_model(const TrainedModel& model, std::span<const Example> items, double threshold) {
  if (items.empty()) throw DataError("evaluate: no items");
  const auto names = class_names(model.task);
  const std::size_t k = names.size();
  std::vector<int> truth, predicted;
  std::vector<std::vector<double>> columns(model.task == Task::Hate ? 1 : k);
  for (const auto& item : items) {
    const auto x = model.featurize(item.doc);
    const auto s = model.scores(x);
    for (std::size_t c = 0; c < columns.size(); ++c) columns[c].push_back(s[c]);
    truth.push_back(item.label);
    predicted.push_back(model.predict_class(x, threshold));
  }
  EvalReport report;
  report.confusion = confusion_matrix(truth, predicted, names);
  report.metrics = metrics_from_cm(report.confusion);
  report.model_converged = model.converged();
  if (model.task == Task::Hate) {
    report.auroc.emplace_back("hate", auroc_if_defined(columns[0], truth));
  } else {
    for (std::size_t c = 0; c < k; ++c) {
      std::vector<int> binary(truth.size());
      for (std::size_t i = 0; i < truth.size(); ++i) binary[i] = truth[i] == static_cast<int>(c) ? 1 : 0;
      report.auroc.emplace_back(names[c], auroc_if_defined(columns[c], binary));
    }
  }
  return report;
}

double accuracy_on(const TrainedModel& model, std::span<const Example> items, double threshold) {
  if (items.empty()) throw DataError("accuracy: no items");
  std::size_t correct = 0;
  for (const auto& item : items) {
    if (model.predict_class(model.featurize(item.doc), threshold) == item.label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(items.size());
}

namespace {

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd out;
  if (values.empty()) return out;
  for (double v : values) out.mean += v;
  out.mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - out.mean) * (v - out.mean);
  out.std = std::sqrt(var / static_cast<double>(values.size()));
  return out;
}

}  // namespace

void aggregate(CvReport& report) {
  std::vector<double> acc, macro, weighted;
  for (const auto& r : report.per_fold) {
    acc.push_back(r.metrics.accuracy);
    macro.push_back(r.metrics.macro_f1);
    weighted.push_back(r.metrics.weighted_f1);
  }
  report.accuracy = mean_std(acc);
  report.macro_f1 = mean_std(macro);
  report.weighted_f1 = mean_std(weighted);
  report.auroc.clear();
  if (report.per_fold.empty()) return;
  for (std::size_t c = 0; c < report.per_fold.front().auroc.size(); ++c) {
    std::vector<double> values;
    for (const auto& r : report.per_fold) {
      if (r.auroc[c].second) values.push_back(*r.auroc[c].second);
    }
    report.auroc.emplace_back(report.per_fold.front().auroc[c].first, mean_std(values));
  }
}

CvReport cross_validate(std::span<const Example> items, const ModelSpec& spec, const FoldPlan& plan) {
  if (plan.ids.size() != items.size()) {
    throw DataError("cross_validate: fold plan covers " + std::to_string(plan.ids.size()) +
                    " ids but the training set has " + std::to_string(items.size()));
  }
  std::unordered_map<std::string, int> fold_of;
  for (std::size_t i = 0; i < plan.ids.size(); ++i) fold_of[plan.ids[i]] = plan.fold_of[i];
  std::vector<int> assignment;
  assignment.reserve(items.size());
  for (const auto& item : items) {
    auto it = fold_of.find(item.id);
    if (it == fold_of.end()) throw DataError("cross_validate: \"" + item.id + "\" missing from fold plan");
    assignment.push_back(it->second);
  }

  struct FoldResult {
    EvalReport report;
    std::vector<std::string> terms;
  };
  auto run_fold = [&](int f) {
    std::vector<Example> train, held_out;
    for (std::size_t i = 0; i < items.size(); ++i) (assignment[i] == f ? held_out : train).push_back(items[i]);
    try {
      const auto model = fit_model(train, spec);
      FoldResult r{evaluate_model(model, held_out), {}};
      r.terms.assign(model.vocabulary().terms().begin(), model.vocabulary().terms().end());
      return r;
    } catch (const Error& e) {
      throw DataError("fold " + std::to_string(f) + ": " + e.what());
    }
  };

  // Folds run concurrently; results are collected in fold order.
  std::vector<std::future<FoldResult>> pending;
  for (int f = 0; f < plan.k; ++f) pending.push_back(std::async(std::launch::async, run_fold, f));
  CvReport report;
  report.plan = plan;
  for (auto& p : pending) {
    auto r = p.get();
    report.per_fold.push_back(std::move(r.report));
    report.fold_vocabularies.push_back(std::move(r.terms));
  }
  aggregate(report);
  return report;
}

json to_json(const ConfusionMatrix& cm) {
  json counts = json::array();
  for (std::size_t p = 0; p < cm.num_classes(); ++p) {
    json row = json::array();
    for (std::size_t t = 0; t < cm.num_classes(); ++t) row.push_back(cm.at(p, t));
    counts.push_back(row);
  }
  return json{{"class_order", cm.class_order()}, {"layout", "predicted x true"}, {"counts", counts}};
}

json to_json(const EvalReport& r) {
  json j;
  j["accuracy"] = r.metrics.accuracy;
  j["macro_f1"] = r.metrics.macro_f1;
  j["weighted_f1"] = r.metrics.weighted_f1;
  for (std::size_t c = 0; c < r.metrics.per_class.size(); ++c) {
    const auto& m = r.metrics.per_class[c];
    j["per_class"][r.confusion.class_order()[c]] = {{"precision", m.precision},
                                                     {"recall", m.recall},
                                                     {"f1", m.f1},
                                                     {"support", m.support},
                                                     {"zero_division", m.zero_division}};
  }
  j["auroc"] = json::object();
  for (const auto& [name, value] : r.auroc) j["auroc"][name] = value ? json(*value) : json(nullptr);
  j["confusion"] = to_json(r.confusion);
  j["training_accuracy"] = r.training_accuracy ? json(*r.training_accuracy) : json(nullptr);
  j["model_converged"] = r.model_converged;
  return j;
}

json to_json(const CvReport& r) {
  auto ms = [](const MeanStd& m) { return json{{"mean", m.mean}, {"std", m.std}}; };
  json folds = json::array();
  for (const auto& f : r.per_fold) folds.push_back(to_json(f));
  json auroc = json::object();
  for (const auto& [name, m] : r.auroc) auroc[name] = ms(m);
  return json{{"k", r.plan.k},
              {"seed", r.plan.seed},
              {"accuracy", ms(r.accuracy)},
              {"macro_f1", ms(r.macro_f1)},
              {"weighted_f1", ms(r.weighted_f1)},
              {"auroc", auroc},
              {"per_fold", folds}};
}

void write_csv_header(std::ostream& out) {
  write_csv_row(out, {"fold", "class", "precision", "recall", "f1", "support", "auroc"});
}

namespace {

std::string num(double v) {
  json j = v;
  return j.dump();
}

}  // namespace

void write_csv_rows(std::ostream& out, const EvalReport& r, const std::string& fold) {
  for (std::size_t c = 0; c < r.metrics.per_class.size(); ++c) {
    const auto& name = r.confusion.class_order()[c];
    std::string auroc;
    for (const auto& [cls, value] : r.auroc) {
      if (cls == name && value) auroc = num(*value);
    }
    const auto& m = r.metrics.per_class[c];
    write_csv_row(out, {fold, name, num(m.precision), num(m.recall), num(m.f1), std::to_string(m.support), auroc});
  }
}

void write_csv(std::ostream& out, const CvReport& r) {
  write_csv_header(out);
  for (std::size_t f = 0; f < r.per_fold.size(); ++f) write_csv_rows(out, r.per_fold[f], std::to_string(f));
}

}  // namespace hatescan
