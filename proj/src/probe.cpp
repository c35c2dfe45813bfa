// Copyright 2026 The aadit Authors
// SPDX-License-Identifier: Apache-2.0

#include "aadit/probe.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <thread>

#include "aadit/binary_io.hpp"

namespace aadit {

namespace {

Matrix concat_columns(const std::vector<Matrix>& parts) {
  Index cols = 0;
  for (const Matrix& m : parts) cols += m.cols();
  Matrix out(parts.empty() ? 0 : parts.front().rows(), cols);
  Index at = 0;
  for (const Matrix& m : parts) {
    out.middleCols(at, m.cols()) = m;
    at += m.cols();
  }
  return out;
}

Labels concat_labels(const std::vector<SequenceSample>& samples, bool domains) {
  Labels out;
  for (const SequenceSample& s : samples) {
    const Labels& src = domains ? s.domains : s.classes;
    out.insert(out.end(), src.begin(), src.end());
  }
  return out;
}

std::vector<Matrix> raw_frames(const std::vector<SequenceSample>& samples) {
  std::vector<Matrix> out;
  out.reserve(samples.size());
  for (const SequenceSample& s : samples) out.push_back(s.frames);
  return out;
}

}  // namespace

void ProbeConfig::validate() const {
  if (epochs < 1) throw ConfigError("probe.epochs must be >= 1");
  if (!(learning_rate > 0)) throw ConfigError("probe.mu must be > 0");
  if (batch_frames < 1) throw ConfigError("probe.batch must be >= 1");
  for (Index w : hidden) {
    if (w < 1) throw ConfigError("probe.hidden widths must be >= 1");
  }
}

void ProbeConfig::write(KeyValueWriter& out) const {
  out.add("probe.hidden", hidden);
  out.add("probe.epochs", epochs);
  out.add("probe.mu", learning_rate);
  out.add("probe.batch", batch_frames);
  out.add("probe.seed", std::to_string(seed));
}

void ProbeConfig::read(const KeyValueReader& in) {
  in.read("probe.hidden", hidden);
  in.read("probe.epochs", epochs);
  in.read("probe.mu", learning_rate);
  in.read("probe.batch", batch_frames);
  in.read("probe.seed", seed);
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(workers);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (std::thread& t : threads) t.join();
  for (const std::exception_ptr& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::vector<Matrix> extract_features(const AdversarialModel& model,
                                     const std::vector<SequenceSample>& samples, int jobs) {
  std::vector<Matrix> out(samples.size());
  parallel_for(samples.size(), jobs,
               [&](std::size_t i) { out[i] = stack_apply(model.feature, samples[i].frames); });
  return out;
}

double train_probe(const Matrix& train_x, const Labels& train_y, const Matrix& test_x,
                   const Labels& test_y, Index num_labels, const ProbeConfig& config) {
  config.validate();
  if (train_x.cols() == 0 || test_x.cols() == 0) throw InputError("probe: empty split");
  if (static_cast<Index>(train_y.size()) != train_x.cols() ||
      static_cast<Index>(test_y.size()) != test_x.cols()) {
    throw InputError("probe: label count does not match feature count");
  }
  if (test_x.rows() != train_x.rows()) throw ConfigError("probe: split feature dims differ");
  if (std::all_of(train_y.begin(), train_y.end(), [&](Label y) { return y == train_y.front(); })) {
    throw InputError("probe: training labels contain a single class; accuracy is undefined");
  }

  const Vector mean = train_x.rowwise().mean();
  Vector scale = ((train_x.colwise() - mean).array().square().rowwise().mean()).sqrt().matrix();
  for (Index r = 0; r < scale.size(); ++r) scale(r) = scale(r) > 1e-12 ? 1.0 / scale(r) : 1.0;
  const auto standardize = [&](const Matrix& x) -> Matrix {
    return ((x.colwise() - mean).array().colwise() * scale.array()).matrix();
  };
  const Matrix train_std = standardize(train_x);

  std::mt19937_64 rng(config.seed);
  std::vector<Index> dims{train_x.rows()};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(num_labels);
  FeedForwardStack probe = FeedForwardStack::glorot("probe", dims, Activation::kIdentity, rng);
  std::vector<ParamBlock*> params;
  probe.collect_params(params);

  std::vector<Index> order(static_cast<std::size_t>(train_x.cols()));
  Matrix batch_x(train_x.rows(), config.batch_frames);
  Labels batch_y;
  for (Index epoch = 0; epoch < config.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), Index{0});
    std::shuffle(order.begin(), order.end(), rng);
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_frames)) {
      const std::size_t end =
          std::min(order.size(), start + static_cast<std::size_t>(config.batch_frames));
      batch_x.resize(train_x.rows(), static_cast<Index>(end - start));
      batch_y.clear();
      for (std::size_t k = start; k < end; ++k) {
        batch_x.col(static_cast<Index>(k - start)) = train_std.col(order[k]);
        batch_y.push_back(train_y[static_cast<std::size_t>(order[k])]);
      }
      ForwardResult fwd = stack_forward(probe, batch_x);
      const XentResult xent = softmax_xent(fwd.output, batch_y);
      stack_backward(probe, fwd.cache, xent.grad_logits);
      sgd_step(params, config.learning_rate);
    }
  }

  const Labels predicted = argmax_columns(stack_apply(probe, standardize(test_x)));
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == test_y[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double domain_probe_accuracy(const AdversarialModel& model, const Dataset& dataset,
                             const ProbeConfig& config, int jobs) {
  const Matrix train_x = concat_columns(extract_features(model, dataset.train, jobs));
  const Matrix test_x = concat_columns(extract_features(model, dataset.test, jobs));
  return train_probe(train_x, concat_labels(dataset.train, true), test_x,
                     concat_labels(dataset.test, true), dataset.config.domains, config);
}

double raw_domain_probe_accuracy(const Dataset& dataset, const ProbeConfig& config) {
  return train_probe(concat_columns(raw_frames(dataset.train)), concat_labels(dataset.train, true),
                     concat_columns(raw_frames(dataset.test)), concat_labels(dataset.test, true),
                     dataset.config.domains, config);
}

double class_accuracy(const AdversarialModel& model, const std::vector<SequenceSample>& samples,
                      int jobs) {
  std::vector<std::size_t> hits(samples.size(), 0);
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    const Matrix logits = stack_apply(model.senone, stack_apply(model.feature, samples[i].frames));
    const Labels predicted = argmax_columns(logits);
    for (std::size_t t = 0; t < predicted.size(); ++t) {
      hits[i] += predicted[t] == samples[i].classes[t];
    }
  });
  std::size_t total_hits = 0;
  std::size_t frames = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    total_hits += hits[i];
    frames += samples[i].classes.size();
  }
  return frames == 0 ? 0.0 : static_cast<double>(total_hits) / static_cast<double>(frames);
}

MetricsRow evaluate(const AdversarialModel& model, const std::vector<SequenceSample>& samples,
                    int jobs) {
  struct Partial {
    double frames = 0, senone = 0, domain = 0, class_hits = 0, domain_hits = 0;
  };
  std::vector<Partial> partials(samples.size());
  parallel_for(samples.size(), jobs, [&](std::size_t i) {
    const SequenceSample& s = samples[i];
    Partial& p = partials[i];
    const auto n = static_cast<double>(s.frames.cols());
    p.frames = n;
    const Matrix features = stack_apply(model.feature, s.frames);
    const Matrix logits = stack_apply(model.senone, features);
    p.senone = n * softmax_xent(logits, s.classes).loss;
    const Labels cls = argmax_columns(logits);
    for (std::size_t t = 0; t < cls.size(); ++t) p.class_hits += cls[t] == s.classes[t];
    if (model.has_domain_branch()) {
      const Index offsets[2] = {0, s.frames.cols()};
      const Matrix dlogits = stack_apply(model.domain, domain_input(model, features, offsets));
      p.domain = n * softmax_xent(dlogits, s.domains).loss;
      const Labels dom = argmax_columns(dlogits);
      for (std::size_t t = 0; t < dom.size(); ++t) p.domain_hits += dom[t] == s.domains[t];
    }
  });
  Partial total;
  for (const Partial& p : partials) {
    total.frames += p.frames;
    total.senone += p.senone;
    total.domain += p.domain;
    total.class_hits += p.class_hits;
    total.domain_hits += p.domain_hits;
  }
  MetricsRow row;
  if (total.frames == 0) return row;
  row.l_senone = total.senone / total.frames;
  row.class_acc = total.class_hits / total.frames;
  if (model.has_domain_branch()) {
    row.l_domain = total.domain / total.frames;
    row.domain_acc = total.domain_hits / total.frames;
  }
  return row;
}

AttentionTrace attention_trace(const AdversarialModel& model, const SequenceSample& sample) {
  if (model.mode != Mode::kAadit) {
    throw ConfigError("attention export needs an aadit model, got " + to_string(model.mode));
  }
  const Matrix features = stack_apply(model.feature, sample.frames);
  return attend(model.attention_config, model.attention, features).trace;
}

std::string format_attention_csv(const AttentionTrace& trace) {
  const AttentionConfig& cfg = trace.config;
  std::string out = "head,frame";
  for (Index rel = -cfg.left; rel <= cfg.right; ++rel) out += "," + std::to_string(rel);
  out += '\n';
  for (std::size_t h = 0; h < trace.probs.size(); ++h) {
    for (Index t = 0; t < trace.frames; ++t) {
      out += std::to_string(h) + "," + std::to_string(t);
      for (Index tau = t - cfg.left; tau <= t + cfg.right; ++tau) {
        out += ',';
        if (tau >= trace.first(t) && tau <= trace.last(t)) {
          out += format_double(trace.probs[h](tau - t + cfg.left, t));
        }
      }
      out += '\n';
    }
  }
  return out;
}

void export_attention(const AttentionTrace& trace, const std::string& path) {
  write_file(path, format_attention_csv(trace));
}

std::vector<double> attention_mass_by_class(const AdversarialModel& model,
                                            const std::vector<SequenceSample>& samples,
                                            Index classes) {
  std::vector<double> mass(static_cast<std::size_t>(classes), 0.0);
  std::vector<double> count(static_cast<std::size_t>(classes), 0.0);
  for (const SequenceSample& s : samples) {
    const AttentionTrace trace = attention_trace(model, s);
    Vector received = Vector::Zero(trace.frames);
    for (const Matrix& probs : trace.probs) {
      for (Index t = 0; t < trace.frames; ++t) {
        for (Index tau = trace.first(t); tau <= trace.last(t); ++tau) {
          received(tau) += probs(tau - t + trace.config.left, t);
        }
      }
    }
    received /= static_cast<double>(trace.probs.size());
    for (Index tau = 0; tau < trace.frames; ++tau) {
      const auto c = static_cast<std::size_t>(s.classes[static_cast<std::size_t>(tau)]);
      mass[c] += received(tau);
      count[c] += 1;
    }
  }
  for (std::size_t c = 0; c < mass.size(); ++c) {
    if (count[c] > 0) mass[c] /= count[c];
  }
  return mass;
}

}  // namespace aadit
