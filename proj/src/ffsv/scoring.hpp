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

#ifndef FFSV_SCORING_HPP_
#define FFSV_SCORING_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ffsv/embeddings.hpp"

namespace ffsv {

enum class TrialLabel { kTarget, kNontarget };

struct Trial {
  std::string enroll_speaker_id;
  std::string test_utterance_id;
  std::optional<TrialLabel> label;
};

// Tab-separated: enroll_speaker_id, test_utterance_id[, target|nontarget].
// Blank lines and '#' comments are skipped.
std::vector<Trial> ParseTrials(std::string_view text);
std::vector<Trial> ReadTrials(const std::filesystem::path& path);

enum class ScoreConvention { kSimilarity, kDissimilarity };

struct ScoredTrial {
  Trial trial;
  double score = 0.0;
};

struct ScoreSet {
  ScoreConvention convention = ScoreConvention::kDissimilarity;
  std::vector<ScoredTrial> entries;
};

// 1 - cos(a, b), in [0, 2].
double CosineDissimilarity(std::span<const float> a, std::span<const float> b);

struct ScoringOutcome {
  ScoreSet scores;
  std::vector<std::string> warnings;  // one per skipped trial
};

// Strict mode throws on the first unresolvable id; lenient mode skips the
// trial and records a warning. Output order follows input order.
ScoringOutcome ScoreTrials(const std::vector<Trial>& trials,
                           const std::map<std::string, SpeakerModel>& speakers,
                           const EmbeddingSet& tests, bool strict = true,
                           int workers = 1);

// Labeled scores in similarity orientation (dissimilarities negated).
struct LabeledScores {
  std::vector<double> target;
  std::vector<double> nontarget;
};

LabeledScores SplitByLabel(const ScoreSet& scores);

struct DetPoint {
  double threshold = 0.0;  // +inf for the reject-all endpoint
  double p_fa = 0.0;
  double p_miss = 0.0;
};

// One point per distinct similarity score (accept iff score >= threshold),
// plus the reject-all point, in increasing threshold order.
std::vector<DetPoint> ComputeDetPoints(const LabeledScores& scores);
std::vector<DetPoint> DetPoints(const ScoreSet& scores);

// Operating point where P_miss = P_fa, interpolating linearly between the
// bracketing DET points when no point lies on the diagonal.
double EqualErrorRate(const std::vector<DetPoint>& det);
double ComputeEer(const ScoreSet& scores);

struct DcfParams {
  double p_target = 0.01;
  double c_miss = 1.0;
  double c_fa = 1.0;
};

void ValidateDcfParams(const DcfParams& params);

// Normalized detection cost at one operating point.
double NormalizedDcf(double p_miss, double p_fa, const DcfParams& params);
double MinDcf(const std::vector<DetPoint>& det, const DcfParams& params);
double ComputeMinDcf(const ScoreSet& scores, const DcfParams& params);

struct EvalReport {
  double eer = 0.0;
  double min_dcf = 0.0;
  DcfParams dcf;
  std::size_t n_target = 0;
  std::size_t n_nontarget = 0;
  std::vector<DetPoint> det;
};

EvalReport Evaluate(const ScoreSet& scores, const DcfParams& params);

std::string FormatScoresTsv(const ScoreSet& scores);
std::string FormatDetTsv(const std::vector<DetPoint>& det);
// Human-readable summary followed by key=value lines.
std::string FormatReport(const EvalReport& report,
                         const std::vector<std::string>& notes = {});

}  // namespace ffsv

#endif  // FFSV_SCORING_HPP_
