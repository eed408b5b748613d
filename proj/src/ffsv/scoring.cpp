// Copyright 2026 The ffsv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ffsv/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ffsv/common.hpp"

namespace ffsv {

namespace {

std::string_view Trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> SplitFields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t tab = line.find('\t', start);
    out.push_back(Trim(line.substr(start, tab - start)));
    if (tab == std::string_view::npos) break;
    start = tab + 1;
  }
  return out;
}

}  // namespace

std::vector<Trial> ParseTrials(std::string_view text) {
  std::vector<Trial> out;
  std::size_t start = 0;
  std::size_t lineno = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    if (Trim(line).empty()) continue;
    const auto f = SplitFields(line);
    if (f.size() < 2 || f.size() > 3 || f[0].empty() || f[1].empty()) {
      Fail(ErrorKind::kFormat,
           StrFormat("trials line %zu: expected enroll<TAB>test[<TAB>label]", lineno));
    }
    Trial t;
    t.enroll_speaker_id = std::string(f[0]);
    t.test_utterance_id = std::string(f[1]);
    if (f.size() == 3 && !f[2].empty()) {
      if (f[2] == "target") {
        t.label = TrialLabel::kTarget;
      } else if (f[2] == "nontarget") {
        t.label = TrialLabel::kNontarget;
      } else {
        Fail(ErrorKind::kFormat,
             StrFormat("trials line %zu: label must be target or nontarget", lineno));
      }
    }
    out.push_back(std::move(t));
  }
  return out;
}

std::vector<Trial> ReadTrials(const std::filesystem::path& path) {
  return ParseTrials(ReadFileBytes(path));
}

double CosineDissimilarity(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    Fail(ErrorKind::kData,
         StrFormat("dimension mismatch: %zu vs %zu", a.size(), b.size()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) {
    Fail(ErrorKind::kData, "cosine scoring of a zero-norm embedding");
  }
  const double cosine = std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
  return 1.0 - cosine;
}

ScoringOutcome ScoreTrials(const std::vector<Trial>& trials,
                           const std::map<std::string, SpeakerModel>& speakers,
                           const EmbeddingSet& tests, bool strict, int workers) {
  std::vector<std::optional<double>> scores(trials.size());
  std::vector<std::string> problems(trials.size());
  for (std::size_t i = 0; i < trials.size(); ++i) {
    const Trial& t = trials[i];
    std::string problem;
    if (!speakers.contains(t.enroll_speaker_id)) {
      problem = "unknown enrollment speaker '" + t.enroll_speaker_id + "'";
    } else if (!tests.Contains(t.test_utterance_id)) {
      problem = "unknown test utterance '" + t.test_utterance_id + "'";
    }
    if (!problem.empty()) {
      if (strict) Fail(ErrorKind::kData, StrFormat("trial %zu: ", i + 1) + problem);
      problems[i] = StrFormat("skipped trial %zu: ", i + 1) + problem;
    }
  }
  ParallelFor(trials.size(), workers, [&](std::size_t i) {
    if (!problems[i].empty()) return;
    const Trial& t = trials[i];
    scores[i] = CosineDissimilarity(speakers.at(t.enroll_speaker_id).centroid.values,
                                    tests.At(t.test_utterance_id).values);
  });

  ScoringOutcome out;
  out.scores.convention = ScoreConvention::kDissimilarity;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    if (scores[i]) {
      out.scores.entries.push_back({trials[i], *scores[i]});
    } else {
      out.warnings.push_back(std::move(problems[i]));
    }
  }
  return out;
}

LabeledScores SplitByLabel(const ScoreSet& scores) {
  LabeledScores out;
  const double sign =
      scores.convention == ScoreConvention::kDissimilarity ? -1.0 : 1.0;
  for (const auto& e : scores.entries) {
    if (!e.trial.label) {
      Fail(ErrorKind::kData, "trial " + e.trial.enroll_speaker_id + " / " +
                                 e.trial.test_utterance_id + " has no label");
    }
    if (!std::isfinite(e.score)) Fail(ErrorKind::kData, "non-finite score");
    (*e.trial.label == TrialLabel::kTarget ? out.target : out.nontarget)
        .push_back(sign * e.score);
  }
  return out;
}

std::vector<DetPoint> ComputeDetPoints(const LabeledScores& scores) {
  if (scores.target.empty() || scores.nontarget.empty()) {
    Fail(ErrorKind::kData,
         "metrics need at least one target and one nontarget trial");
  }
  std::vector<double> tar = scores.target;
  std::vector<double> non = scores.nontarget;
  std::sort(tar.begin(), tar.end());
  std::sort(non.begin(), non.end());
  std::vector<double> thresholds;
  thresholds.reserve(tar.size() + non.size());
  std::merge(tar.begin(), tar.end(), non.begin(), non.end(),
             std::back_inserter(thresholds));
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  const auto n_tar = static_cast<double>(tar.size());
  const auto n_non = static_cast<double>(non.size());
  std::vector<DetPoint> det;
  det.reserve(thresholds.size() + 1);
  std::size_t below_tar = 0;  // targets with score < threshold
  std::size_t below_non = 0;
  for (double th : thresholds) {
    while (below_tar < tar.size() && tar[below_tar] < th) ++below_tar;
    while (below_non < non.size() && non[below_non] < th) ++below_non;
    det.push_back({th, static_cast<double>(non.size() - below_non) / n_non,
                   static_cast<double>(below_tar) / n_tar});
  }
  det.push_back({std::numeric_limits<double>::infinity(), 0.0, 1.0});
  return det;
}

std::vector<DetPoint> DetPoints(const ScoreSet& scores) {
  return ComputeDetPoints(SplitByLabel(scores));
}

double EqualErrorRate(const std::vector<DetPoint>& det) {
  if (det.empty()) Fail(ErrorKind::kData, "empty DET curve");
  for (std::size_t i = 0; i < det.size(); ++i) {
    const double d = det[i].p_miss - det[i].p_fa;
    if (d == 0.0) return det[i].p_miss;
    if (d > 0.0) {
      if (i == 0) return det[i].p_miss;
      const DetPoint& a = det[i - 1];
      const double da = a.p_miss - a.p_fa;
      const double t = -da / (d - da);
      return a.p_miss + t * (det[i].p_miss - a.p_miss);
    }
  }
  return det.back().p_miss;
}

double ComputeEer(const ScoreSet& scores) { return EqualErrorRate(DetPoints(scores)); }

void ValidateDcfParams(const DcfParams& p) {
  if (!(p.p_target > 0.0 && p.p_target < 1.0)) {
    Fail(ErrorKind::kInvalidArgument, "p_target must be in (0, 1)");
  }
  if (!(p.c_miss > 0.0) || !(p.c_fa > 0.0)) {
    Fail(ErrorKind::kInvalidArgument, "DCF costs must be positive");
  }
}

double NormalizedDcf(double p_miss, double p_fa, const DcfParams& p) {
  const double miss_w = p.c_miss * p.p_target;
  const double fa_w = p.c_fa * (1.0 - p.p_target);
  return (miss_w * p_miss + fa_w * p_fa) / std::min(miss_w, fa_w);
}

double MinDcf(const std::vector<DetPoint>& det, const DcfParams& params) {
  ValidateDcfParams(params);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& pt : det) best = std::min(best, NormalizedDcf(pt.p_miss, pt.p_fa, params));
  return best;
}

double ComputeMinDcf(const ScoreSet& scores, const DcfParams& params) {
  return MinDcf(DetPoints(scores), params);
}

EvalReport Evaluate(const ScoreSet& scores, const DcfParams& params) {
  ValidateDcfParams(params);
  const LabeledScores split = SplitByLabel(scores);
  EvalReport r;
  r.dcf = params;
  r.n_target = split.target.size();
  r.n_nontarget = split.nontarget.size();
  r.det = ComputeDetPoints(split);
  r.eer = EqualErrorRate(r.det);
  r.min_dcf = MinDcf(r.det, params);
  return r;
}

std::string FormatScoresTsv(const ScoreSet& scores) {
  std::string out;
  for (const auto& e : scores.entries) {
    out += e.trial.enroll_speaker_id;
    out += '\t';
    out += e.trial.test_utterance_id;
    out += StrFormat("\t%.9g", e.score);
    if (e.trial.label) {
      out += *e.trial.label == TrialLabel::kTarget ? "\ttarget" : "\tnontarget";
    }
    out += '\n';
  }
  return out;
}

std::string FormatDetTsv(const std::vector<DetPoint>& det) {
  std::string out = "p_fa\tp_miss\n";
  for (const auto& p : det) out += StrFormat("%.9g\t%.9g\n", p.p_fa, p.p_miss);
  return out;
}

std::string FormatReport(const EvalReport& r, const std::vector<std::string>& notes) {
  std::string out;
  out += StrFormat("EER:    %.2f %%\n", 100.0 * r.eer);
  out += StrFormat("minDCF: %.4f (p_target=%g, c_miss=%g, c_fa=%g)\n", r.min_dcf,
                   r.dcf.p_target, r.dcf.c_miss, r.dcf.c_fa);
  out += StrFormat("trials: %zu target, %zu nontarget\n", r.n_target, r.n_nontarget);
  for (const auto& n : notes) out += "note: " + n + "\n";
  out += StrFormat("eer=%.6f\n", r.eer);
  out += StrFormat("min_dcf=%.6f\n", r.min_dcf);
  out += StrFormat("p_target=%g\n", r.dcf.p_target);
  out += StrFormat("c_miss=%g\n", r.dcf.c_miss);
  out += StrFormat("c_fa=%g\n", r.dcf.c_fa);
  out += StrFormat("n_target=%zu\n", r.n_target);
  out += StrFormat("n_nontarget=%zu\n", r.n_nontarget);
  return out;
}

}  // namespace ffsv
