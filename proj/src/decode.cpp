#include "gecgen/decode.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <httplib.h>
#include <json.hpp>

#include "gecgen/common.h"

namespace gecgen {

DecodeResult iterative_decode(const std::string& input, Scorer& scorer,
                              const DecodeConfig& config) {
  std::string cur = input;
  size_t iterations = 0;
  for (size_t it = 1; it <= config.max_iter; ++it) {
    std::vector<Hypothesis> nb;
    try {
      nb = scorer.nbest(cur, config.beam);
    } catch (const std::exception& e) {
      throw ScorerError("scorer failed at iteration " + std::to_string(it) +
                        ": " + e.what());
    }
    iterations = it;

    double c_identity = std::numeric_limits<double>::infinity();
    double c_best = std::numeric_limits<double>::infinity();
    const std::string* best = nullptr;
    for (const auto& h : nb) {
      if (h.text == cur) {
        c_identity = std::min(c_identity, h.cost);
      } else if (h.cost < c_best || !best) {
        c_best = h.cost;
        best = &h.text;
      }
    }
    // Multiplied-out form of (c_best / c_identity < threshold), which keeps
    // the right answer when the identity is missing (infinite cost) or free.
    const bool rewrite = best && c_best < config.threshold * c_identity;
    if (!rewrite) break;  // identity output: fixpoint reached
    cur = *best;
  }
  return {cur, iterations};
}

StepDistribution ensemble_distributions(
    const std::vector<StepDistribution>& dists, EnsembleMode mode) {
  if (dists.empty())
    throw std::invalid_argument("ensemble over zero distributions");
  std::map<std::string, double> tokens;
  for (const auto& d : dists)
    for (const auto& [tok, p] : d.probabilities) tokens[tok] = 0;

  StepDistribution out;
  const double k = static_cast<double>(dists.size());
  if (mode == EnsembleMode::arithmetic) {
    for (auto& [tok, acc] : tokens) {
      double sum = 0;
      for (const auto& d : dists) {
        const auto it = d.probabilities.find(tok);
        if (it != d.probabilities.end()) sum += it->second;
      }
      out.probabilities[tok] = sum / k;
    }
    return out;
  }

  double total = 0;
  for (auto& [tok, acc] : tokens) {
    double log_sum = 0;
    bool zero = false;
    for (const auto& d : dists) {
      const auto it = d.probabilities.find(tok);
      if (it == d.probabilities.end() || it->second <= 0) {
        zero = true;
        break;
      }
      log_sum += std::log(it->second);
    }
    const double p = zero ? 0 : std::exp(log_sum / k);
    out.probabilities[tok] = p;
    total += p;
  }
  if (total > 0)
    for (auto& [tok, p] : out.probabilities) p /= total;
  return out;
}

ModelScorer::ModelScorer(std::shared_ptr<SequenceModel> model,
                         size_t max_tokens)
    : model_(std::move(model)), max_tokens_(max_tokens) {}

std::vector<Hypothesis> ModelScorer::nbest(const std::string& input,
                                           size_t beam) {
  struct Beam {
    std::vector<std::string> tokens;
    double cost = 0;
  };
  std::vector<Beam> active{{}};
  std::vector<Hypothesis> done;

  for (size_t step = 0; step < max_tokens_ && !active.empty(); ++step) {
    std::vector<Beam> next;
    for (const auto& b : active) {
      const StepDistribution dist = model_->next(input, b.tokens);
      for (const auto& [tok, p] : dist.probabilities) {
        if (p <= 0) continue;
        Beam nb = b;
        nb.cost += -std::log(p);
        if (tok == SequenceModel::kEndToken) {
          done.push_back({join_tokens(nb.tokens), nb.cost});
        } else {
          nb.tokens.push_back(tok);
          next.push_back(std::move(nb));
        }
      }
    }
    std::sort(next.begin(), next.end(), [](const Beam& a, const Beam& b) {
      if (a.cost != b.cost) return a.cost < b.cost;
      return a.tokens < b.tokens;
    });
    if (next.size() > beam) next.resize(beam);
    active = std::move(next);
    // Enough finished hypotheses that no active beam can improve on them.
    if (done.size() >= beam) {
      std::sort(done.begin(), done.end(),
                [](const Hypothesis& a, const Hypothesis& b) {
                  if (a.cost != b.cost) return a.cost < b.cost;
                  return a.text < b.text;
                });
      if (active.empty() || done[beam - 1].cost <= active.front().cost) break;
    }
  }
  std::sort(done.begin(), done.end(),
            [](const Hypothesis& a, const Hypothesis& b) {
              if (a.cost != b.cost) return a.cost < b.cost;
              return a.text < b.text;
            });
  if (done.size() > beam) done.resize(beam);
  return done;
}

namespace {

class EnsembleModel : public SequenceModel {
 public:
  EnsembleModel(std::vector<std::shared_ptr<SequenceModel>> members,
                EnsembleMode mode)
      : members_(std::move(members)), mode_(mode) {}

  StepDistribution next(const std::string& input,
                        const std::vector<std::string>& prefix) override {
    std::vector<StepDistribution> dists;
    dists.reserve(members_.size());
    for (const auto& m : members_) dists.push_back(m->next(input, prefix));
    return ensemble_distributions(dists, mode_);
  }

 private:
  std::vector<std::shared_ptr<SequenceModel>> members_;
  EnsembleMode mode_;
};

}  // namespace

std::shared_ptr<Scorer> ensemble_scorer(
    const std::vector<std::shared_ptr<Scorer>>& members, EnsembleMode mode) {
  if (members.empty())
    throw std::invalid_argument("ensemble of zero scorers");
  if (members.size() == 1) return members[0];
  std::vector<std::shared_ptr<SequenceModel>> models;
  models.reserve(members.size());
  for (const auto& m : members) {
    const auto* model = m->step_model();
    if (!model || !*model)
      throw std::invalid_argument(
          "ensemble member does not expose step distributions");
    models.push_back(*model);
  }
  return std::make_shared<ModelScorer>(
      std::make_shared<EnsembleModel>(std::move(models), mode));
}

BigramLm BigramLm::from_corpus(const std::vector<std::string>& lines,
                               double alpha) {
  BigramLm lm;
  lm.alpha_ = alpha;
  for (const auto& line : lines) {
    auto tokens = split_whitespace(line);
    std::string prev = "<s>";
    ++lm.unigrams_["<s>"];
    for (auto& t : tokens) {
      ++lm.unigrams_[t];
      ++lm.bigrams_[{prev, t}];
      prev = t;
    }
    ++lm.unigrams_["</s>"];
    ++lm.bigrams_[{prev, "</s>"}];
  }
  lm.vocab_size_ = lm.unigrams_.size() + 1;  // plus unseen-word class
  return lm;
}

double BigramLm::log_prob(const std::vector<std::string>& tokens) const {
  double total = 0;
  std::string prev = "<s>";
  const auto step = [&](const std::string& next) {
    const auto big = bigrams_.find({prev, next});
    const double joint = big == bigrams_.end() ? 0 : big->second;
    const auto uni = unigrams_.find(prev);
    const double context = uni == unigrams_.end() ? 0 : uni->second;
    total += std::log((joint + alpha_) /
                      (context + alpha_ * static_cast<double>(vocab_size_)));
    prev = next;
  };
  for (const auto& t : tokens) step(t);
  step("</s>");
  return total;
}

ReferenceScorer::ReferenceScorer(
    std::vector<std::pair<std::string, std::string>> rewrites, BigramLm lm,
    double channel_penalty)
    : lm_(std::move(lm)), edit_cost_(-std::log(channel_penalty)) {
  for (auto& [from, to] : rewrites)
    rewrites_.emplace_back(split_whitespace(from), split_whitespace(to));
}

std::vector<Hypothesis> ReferenceScorer::nbest(const std::string& input,
                                               size_t beam) {
  const auto tokens = split_whitespace(input);
  std::vector<std::string> texts{input};  // identity kept verbatim
  for (const auto& [from, to] : rewrites_) {
    if (from.empty() || from.size() > tokens.size()) continue;
    for (size_t i = 0; i + from.size() <= tokens.size(); ++i) {
      if (!std::equal(from.begin(), from.end(), tokens.begin() + i)) continue;
      std::vector<std::string> candidate(tokens.begin(), tokens.begin() + i);
      candidate.insert(candidate.end(), to.begin(), to.end());
      candidate.insert(candidate.end(), tokens.begin() + i + from.size(),
                       tokens.end());
      texts.push_back(join_tokens(candidate));
    }
  }

  const std::string identity = texts[0];
  std::sort(texts.begin() + 1, texts.end());
  texts.erase(std::unique(texts.begin() + 1, texts.end()), texts.end());

  std::vector<Hypothesis> hyps;
  for (const auto& t : texts) {
    if (&t != &texts[0] && t == identity) continue;
    const double edits = t == identity ? 0 : 1;
    hyps.push_back({t, -lm_.log_prob(split_whitespace(t)) + edits * edit_cost_});
  }
  std::sort(hyps.begin(), hyps.end(), [](const Hypothesis& a, const Hypothesis& b) {
    if (a.cost != b.cost) return a.cost < b.cost;
    return a.text < b.text;
  });
  if (hyps.size() > beam) {
    // Keep the identity reachable even when it scores outside the beam.
    const auto id_pos = std::find_if(
        hyps.begin(), hyps.end(),
        [&](const Hypothesis& h) { return h.text == identity; });
    const bool id_in_beam = static_cast<size_t>(id_pos - hyps.begin()) < beam;
    Hypothesis id_hyp = *id_pos;
    hyps.resize(beam);
    if (!id_in_beam) hyps.back() = std::move(id_hyp);
  }
  return hyps;
}

HttpScorer::HttpScorer(const std::string& endpoint) {
  std::string rest = endpoint;
  const std::string scheme = "http://";
  if (rest.rfind(scheme, 0) == 0) rest = rest.substr(scheme.size());
  const size_t slash = rest.find('/');
  path_ = slash == std::string::npos ? "/" : rest.substr(slash);
  std::string hostport = rest.substr(0, slash);
  const size_t colon = hostport.rfind(':');
  if (colon == std::string::npos) {
    host_ = hostport;
    port_ = 80;
  } else {
    host_ = hostport.substr(0, colon);
    port_ = std::atoi(hostport.c_str() + colon + 1);
  }
}

std::vector<Hypothesis> HttpScorer::nbest(const std::string& input,
                                          size_t beam) {
  httplib::Client client(host_, port_);
  nlohmann::json req;
  req["input"] = input;
  req["beam"] = beam;
  const auto res = client.Post(path_, req.dump(), "application/json");
  if (!res || res->status != 200)
    throw ScorerError("scorer endpoint unreachable or returned an error");
  std::vector<Hypothesis> hyps;
  try {
    const auto j = nlohmann::json::parse(res->body);
    for (const auto& h : j.at("nbest")) {
      hyps.push_back({h.at("text").get<std::string>(),
                      h.at("cost").get<double>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ScorerError(std::string("bad scorer response: ") + e.what());
  }
  if (hyps.size() > beam) hyps.resize(beam);
  std::stable_sort(hyps.begin(), hyps.end(),
                   [](const Hypothesis& a, const Hypothesis& b) {
                     return a.cost < b.cost;
                   });
  return hyps;
}

}  // namespace gecgen
